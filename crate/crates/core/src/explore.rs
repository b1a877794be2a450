//! Exploration algorithm for the crossing of an inner rectangle, and its
//! revealment.
//!
//! A vertical segment is dropped from a point of the middle third of the
//! inner rectangle's top side to its bottom side. Every cell meeting the
//! segment is queried; then, until nothing changes, every unqueried cell
//! that meets the inner rectangle and neighbours a queried red cell is
//! queried. All red clusters touching the segment are thereby revealed, which
//! determines whether a red left-right crossing exists.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing::{check_inside, crossing_event, Coloring, CrossingQuery};
use crate::error::{Error, Result};
use crate::event::{bit, random_words, words_for, ENUMERATION_LIMIT};
use crate::geom::{polygon_meets_box, segment_meets_box, Bounds, Rect, Tessellation};
use crate::influence::event_influences_exact;
use crate::rng::{blocks, stream};

/// Largest cell count for exact revealment.
pub const REVEALMENT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub segment_x: f64,
    /// Cells in the order they were queried.
    pub queried: Vec<usize>,
    /// Whether a red left-right crossing of the inner rectangle was found.
    pub outcome: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevealMethod {
    ExactFixedSegment,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevealmentReport {
    /// Probability that each cell is queried.
    pub per_cell: Vec<f64>,
    pub delta: f64,
    pub method: RevealMethod,
    pub m: u64,
    /// Query counts; `per_cell[j] = counts[j] / m`.
    pub counts: Vec<u64>,
}

impl RevealmentReport {
    fn from_counts(counts: Vec<u64>, m: u64, method: RevealMethod) -> Self {
        let per_cell: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let delta = per_cell.iter().copied().fold(0.0, f64::max);
        RevealmentReport { per_cell, delta, method, m, counts }
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Where the exploring segment is placed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    /// Uniform over the middle third of the top side.
    Random,
    Fixed(f64),
}

/// Concentric copy of `window` with a quarter of its area.
pub fn default_inner(window: &Rect) -> Rect {
    Rect { area: window.area / 4.0, ..*window }
}

/// Geometry prepared once per (tessellation, inner rectangle).
pub struct Explorer<'a> {
    tess: &'a Tessellation,
    inner: Bounds,
    meets_inner: Vec<bool>,
    left: Vec<bool>,
    right: Vec<bool>,
    restricted: Vec<Vec<u32>>,
}

impl<'a> Explorer<'a> {
    pub fn new(tess: &'a Tessellation, inner: &Rect) -> Result<Explorer<'a>> {
        let b = check_inside(tess, inner)?;
        let tol = tess.tol();
        let n = tess.len();
        let meets_inner: Vec<bool> = (0..n).map(|c| polygon_meets_box(tess.cell(c), &b, tol)).collect();
        let left = (0..n).map(|c| meets_inner[c] && polygon_meets_box(tess.cell(c), &b.left_side(), tol)).collect();
        let right = (0..n).map(|c| meets_inner[c] && polygon_meets_box(tess.cell(c), &b.right_side(), tol)).collect();
        let mut restricted = vec![Vec::new(); n];
        for e in tess.edges() {
            let (u, v) = (e.a as usize, e.b as usize);
            if meets_inner[u] && meets_inner[v] && segment_meets_box(e.p, e.q, &b, tol) {
                restricted[u].push(e.b);
                restricted[v].push(e.a);
            }
        }
        Ok(Explorer { tess, inner: b, meets_inner, left, right, restricted })
    }

    pub fn inner(&self) -> Bounds {
        self.inner
    }

    /// The middle third of the inner rectangle's top side.
    pub fn segment_range(&self) -> (f64, f64) {
        let w = self.inner.width();
        (self.inner.xmin + w / 3.0, self.inner.xmin + 2.0 * w / 3.0)
    }

    pub fn default_segment_x(&self) -> f64 {
        0.5 * (self.inner.xmin + self.inner.xmax)
    }

    /// Cells meeting the closed segment at abscissa `x`, top to bottom.
    pub fn segment_cells(&self, x: f64) -> Vec<usize> {
        let seg = Bounds::new(x, x, self.inner.ymin, self.inner.ymax);
        let tol = self.tess.tol();
        let mut hits: Vec<(f64, usize)> = (0..self.tess.len())
            .filter(|&c| self.meets_inner[c] && polygon_meets_box(self.tess.cell(c), &seg, tol))
            .map(|c| (top_at(self.tess.cell(c), x, tol).min(self.inner.ymax), c))
            .collect();
        hits.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        hits.into_iter().map(|(_, c)| c).collect()
    }

    /// Runs the algorithm with the segment at `x` on a colouring given as
    /// words (bit set = red).
    fn run_words(&self, words: &[u64], x: f64) -> QueryTrace {
        let n = self.tess.len();
        let mut explored = vec![false; n];
        let mut queried = Vec::new();
        let mut queue = VecDeque::new();
        let on_segment = self.segment_cells(x);
        for &c in &on_segment {
            explored[c] = true;
            queried.push(c);
            if bit(words, c) {
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            for d in self.tess.neighbors(c) {
                if !explored[d] && self.meets_inner[d] {
                    explored[d] = true;
                    queried.push(d);
                    if bit(words, d) {
                        queue.push_back(d);
                    }
                }
            }
        }
        // red clusters (connected inside the inner rectangle) through the segment
        let mut seen = vec![false; n];
        let mut outcome = false;
        for &s in &on_segment {
            if outcome || seen[s] || !bit(words, s) {
                continue;
            }
            let (mut l, mut r) = (false, false);
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(c) = stack.pop() {
                l |= self.left[c];
                r |= self.right[c];
                for &d in &self.restricted[c] {
                    let d = d as usize;
                    if !seen[d] && bit(words, d) {
                        debug_assert!(explored[d]);
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            outcome = l && r;
        }
        QueryTrace { segment_x: x, queried, outcome }
    }

    pub fn run(&self, coloring: &Coloring, x: f64) -> Result<QueryTrace> {
        coloring.check(self.tess)?;
        let words = crate::event::bools_to_words(&coloring.bits);
        Ok(self.run_words(&words, x))
    }

    /// Exact per-cell query counts over all `2^n` colourings with the
    /// segment fixed at `x`.
    pub fn query_counts_exact(&self, x: f64) -> Result<Vec<u64>> {
        let n = self.tess.len();
        if n > REVEALMENT_LIMIT {
            return Err(Error::EnumerationLimit { cells: n, limit: REVEALMENT_LIMIT });
        }
        let seg_mask = self.segment_cells(x).iter().fold(0u32, |m, &c| m | 1 << c);
        let inner_mask = (0..n).fold(0u32, |m, c| m | ((self.meets_inner[c] as u32) << c));
        let nbr: Vec<u32> = (0..n).map(|c| self.tess.neighbors(c).fold(0u32, |m, d| m | 1 << d)).collect();
        let total = 1u32 << n;
        let chunk = 1u32 << 12.min(n);
        let chunks: Vec<u32> = (0..total / chunk).collect();
        Ok(chunks
            .into_par_iter()
            .map(|k| {
                let mut counts = vec![0u64; n];
                for red in k * chunk..(k + 1) * chunk {
                    let mut explored = seg_mask;
                    let mut frontier = seg_mask & red;
                    while frontier != 0 {
                        let mut grow = 0u32;
                        let mut f = frontier;
                        while f != 0 {
                            grow |= nbr[f.trailing_zeros() as usize];
                            f &= f - 1;
                        }
                        let fresh = grow & inner_mask & !explored;
                        explored |= fresh;
                        frontier = fresh & red;
                    }
                    let mut e = explored;
                    while e != 0 {
                        counts[e.trailing_zeros() as usize] += 1;
                        e &= e - 1;
                    }
                }
                counts
            })
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            ))
    }
}

/// Highest ordinate of a convex polygon on the vertical line at `x`.
fn top_at(poly: &[crate::geom::Point], x: f64, tol: f64) -> f64 {
    let n = poly.len();
    let mut top = f64::MIN;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.x - x).abs() <= tol {
            top = top.max(a.y);
        }
        if (a.x - x) * (b.x - x) < 0.0 {
            let t = (x - a.x) / (b.x - a.x);
            top = top.max(a.y + t * (b.y - a.y));
        }
    }
    top
}

/// Runs the algorithm with the segment abscissa drawn from `segment_seed`.
pub fn run_exploration(tess: &Tessellation, inner: &Rect, coloring: &Coloring, segment_seed: u64) -> Result<QueryTrace> {
    let ex = Explorer::new(tess, inner)?;
    let (lo, hi) = ex.segment_range();
    let x = lo + stream(segment_seed, 0).random::<f64>() * (hi - lo);
    ex.run(coloring, x)
}

pub fn run_exploration_at(tess: &Tessellation, inner: &Rect, coloring: &Coloring, segment_x: f64) -> Result<QueryTrace> {
    Explorer::new(tess, inner)?.run(coloring, segment_x)
}

/// Exact revealment of the algorithm with the segment fixed at `segment_x`.
pub fn revealment_exact(tess: &Tessellation, inner: &Rect, segment_x: f64) -> Result<RevealmentReport> {
    let ex = Explorer::new(tess, inner)?;
    let counts = ex.query_counts_exact(segment_x)?;
    Ok(RevealmentReport::from_counts(counts, 1u64 << tess.len(), RevealMethod::ExactFixedSegment))
}

/// Query frequencies over `m` independent (segment, colouring) draws.
pub fn revealment_mc(tess: &Tessellation, inner: &Rect, m: u64, seed: u64, segment: Segment) -> Result<RevealmentReport> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let ex = Explorer::new(tess, inner)?;
    let n = tess.len();
    let (lo, hi) = ex.segment_range();
    let nw = words_for(n);
    let counts = blocks(m)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, size)| {
            let mut rng = stream(seed, b);
            let mut words = vec![0u64; nw];
            let mut counts = vec![0u64; n];
            for _ in 0..size {
                let x = match segment {
                    Segment::Random => lo + rng.random::<f64>() * (hi - lo),
                    Segment::Fixed(x) => x,
                };
                random_words(&mut rng, n, &mut words);
                for c in ex.run_words(&words, x).queried {
                    counts[c] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(RevealmentReport::from_counts(counts, m, RevealMethod::MonteCarlo))
}

/// Exact comparison of `Σ Inf_j^2` for the red horizontal crossing of
/// `inner` against the fixed-segment revealment, both scaled by `4^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealmentBound {
    pub sum_sq_scaled: u128,
    pub delta_scaled: u128,
}

impl RevealmentBound {
    pub fn holds(&self) -> bool {
        self.sum_sq_scaled <= self.delta_scaled
    }
}

pub fn revealment_bound_exact(tess: &Tessellation, inner: &Rect, segment_x: f64) -> Result<RevealmentBound> {
    if tess.len() > REVEALMENT_LIMIT.min(ENUMERATION_LIMIT) {
        return Err(Error::EnumerationLimit { cells: tess.len(), limit: REVEALMENT_LIMIT });
    }
    let inf = event_influences_exact(&crossing_event(tess, &CrossingQuery::red_horizontal(*inner))?)?;
    let rev = revealment_exact(tess, inner, segment_x)?;
    Ok(RevealmentBound {
        sum_sq_scaled: inf.sum_sq_scaled(),
        delta_scaled: rev.max_count() as u128 * (1u128 << tess.len()),
    })
}
