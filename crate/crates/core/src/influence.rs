//! Conditional influences `Inf_j(A | η)`: the probability, over a uniform
//! colouring, that flipping cell `j` changes the indicator of `A`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{crossing_event, CrossingQuery, Method};
use crate::error::{Error, Result};
use crate::event::{flip, pivotal_counts, random_words, words_for, ConnectivityEvent, Scratch};
use crate::geom::Tessellation;
use crate::rng::{blocks, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceVector {
    pub values: Vec<f64>,
    pub method: Method,
    /// Colourings behind each entry (`2^n` when exact).
    pub m: u64,
    pub sum_sq: f64,
    /// Pivotal colouring counts; entry `j` is `counts[j] / m`.
    pub counts: Vec<u64>,
}

impl InfluenceVector {
    fn from_counts(counts: Vec<u64>, m: u64, method: Method) -> InfluenceVector {
        let values: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let sum_sq = values.iter().map(|v| v * v).sum();
        InfluenceVector { values, method, m, sum_sq, counts }
    }

    /// `Σ counts_j^2`, i.e. the squared norm scaled by `m^2`; exact for
    /// enumerated vectors.
    pub fn sum_sq_scaled(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Squared l2 norm of an influence vector.
pub fn influence_l2(v: &InfluenceVector) -> f64 {
    match v.method {
        Method::Exact => v.sum_sq_scaled() as f64 / (v.m as f64 * v.m as f64),
        Method::MonteCarlo => v.values.iter().map(|x| x * x).sum(),
    }
}

/// Exact influences of a prepared event (at most 24 cells).
pub fn event_influences_exact(event: &ConnectivityEvent) -> Result<InfluenceVector> {
    let table = event.indicator_table()?;
    let counts = pivotal_counts(&table, event.cell_count());
    Ok(InfluenceVector::from_counts(counts, 1u64 << event.cell_count(), Method::Exact))
}

/// Monte Carlo influences: each sampled colouring is reused for every cell,
/// flipping one bit at a time.
pub fn event_influences_mc(event: &ConnectivityEvent, m: u64, seed: u64) -> Result<InfluenceVector> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let cells = event.cell_count();
    let relevant: Vec<usize> =
        event.relevant_cells().iter().enumerate().filter_map(|(j, &r)| r.then_some(j)).collect();
    let nw = words_for(cells);
    let counts = blocks(m)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, b);
            let mut words = vec![0u64; nw];
            let mut s = Scratch::default();
            let mut counts = vec![0u64; cells];
            for _ in 0..size {
                random_words(&mut rng, cells, &mut words);
                let base = event.occurs(&words, &mut s);
                for &j in &relevant {
                    flip(&mut words, j);
                    if event.occurs(&words, &mut s) != base {
                        counts[j] += 1;
                    }
                    flip(&mut words, j);
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(InfluenceVector::from_counts(counts, m, Method::MonteCarlo))
}

pub fn influences_exact(tess: &Tessellation, query: &CrossingQuery) -> Result<InfluenceVector> {
    event_influences_exact(&crossing_event(tess, query)?)
}

pub fn influences_mc(tess: &Tessellation, query: &CrossingQuery, m: u64, seed: u64) -> Result<InfluenceVector> {
    event_influences_mc(&crossing_event(tess, query)?, m, seed)
}
