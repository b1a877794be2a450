//! Binomial versus Poisson point processes on a half-area sub-rectangle.
//!
//! With `R` of area `n` and `R'` of area `n/2`, the ratio of the laws of the
//! count `|η ∩ R'|` under the two models is
//! `π_m = n! / (n-m)! · e^{n/2} / (2^{n-m} n^m)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{DiscreteCDF, Poisson};

use crate::crossing::{quenched_probability_exact, quenched_probability_mc, Coloring, CrossingQuery};
use crate::error::{Error, Result};
use crate::geom::{build_tessellation, sample_binomial, sample_poisson, Configuration, Rect};
use crate::rng::derive;
use crate::stats::{mean_se, two_proportion_pvalue};

/// `ln π_m` by log-gamma.
pub fn ln_pi_ratio(n: u64, m: u64) -> Result<f64> {
    if m > n {
        return Err(Error::CountOutOfRange { m, n });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(libm::lgamma(nf + 1.0) - libm::lgamma(nf - mf + 1.0) + nf / 2.0
        - (nf - mf) * std::f64::consts::LN_2
        - mf * nf.ln())
}

pub fn pi_ratio(n: u64, m: u64) -> Result<f64> {
    ln_pi_ratio(n, m).map(f64::exp)
}

/// `π_m` from exact integer factors, for `n <= 20`.
pub fn pi_ratio_rational(n: u64, m: u64) -> Option<f64> {
    if n > 20 || m > n || n == 0 {
        return None;
    }
    let falling: u128 = (n - m + 1..=n).map(u128::from).product();
    let den: u128 = (1u128 << (n - m)) * u128::from(n).pow(m as u32);
    Some(falling as f64 / den as f64 * (n as f64 / 2.0).exp())
}

/// `ln π_m` for `m = 0..=n`, built in log space from
/// `π_{m+1} / π_m = 2(n-m)/n` starting at `π_0 = e^{n/2} / 2^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiRatioTable {
    pub n: u64,
    pub ln_values: Vec<f64>,
    pub max: f64,
    pub argmax: u64,
}

impl PiRatioTable {
    pub fn new(n: u64) -> Result<PiRatioTable> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        let nf = n as f64;
        let mut ln_values = Vec::with_capacity(n as usize + 1);
        let mut l = nf / 2.0 - nf * std::f64::consts::LN_2;
        ln_values.push(l);
        for m in 0..n {
            l += (2.0 * (n - m) as f64 / nf).ln();
            ln_values.push(l);
        }
        let (argmax, lmax) = ln_values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (m, &v)| if v > acc.1 { (m, v) } else { acc });
        Ok(PiRatioTable { n, ln_values, max: lmax.exp(), argmax: argmax as u64 })
    }

    pub fn value(&self, m: u64) -> f64 {
        self.ln_values[m as usize].exp()
    }

    /// Largest relative deviation of `π_{m+1}/π_m` from `2(n-m)/n`.
    pub fn recursion_error(&self) -> f64 {
        let nf = self.n as f64;
        (0..self.n)
            .map(|m| {
                let ratio = (self.ln_values[m as usize + 1] - self.ln_values[m as usize]).exp();
                (ratio / (2.0 * (self.n - m) as f64 / nf) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperViolation {
    pub n: u64,
    pub m: u64,
    pub pi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerViolation {
    pub n: u64,
    pub m: u64,
    pub a: f64,
    pub pi: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiBoundsReport {
    pub n_max: u64,
    pub entries: u64,
    pub upper_violations: Vec<UpperViolation>,
    pub lower_violations: Vec<LowerViolation>,
    pub max_recursion_error: f64,
    /// Largest relative gap between the table and the log-gamma evaluation.
    pub max_lgamma_gap: f64,
    pub max_pi: f64,
}

impl PiBoundsReport {
    pub fn ok(&self) -> bool {
        self.upper_violations.is_empty() && self.lower_violations.is_empty()
    }
}

/// Checks `π_m <= 2` for all `1 <= n <= n_max`, `0 <= m <= n`, and
/// `π_m >= e^{-3a^2}/2` whenever `|m - n/2| <= a√n` with `0 < a <= √n/6`.
///
/// The lower bound decreases in `a`, so for each `m` the binding case is the
/// smallest admissible `a = |m - n/2| / √n`; checking there covers every `a`
/// in the range at once.
pub fn check_pi_bounds(n_max: u64) -> Result<PiBoundsReport> {
    if n_max < 2 {
        return Err(Error::Invalid("n_max must be at least 2".into()));
    }
    let per_n: Vec<_> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let t = PiRatioTable::new(n).expect("n >= 1");
            let nf = n as f64;
            let mut up = Vec::new();
            let mut low = Vec::new();
            let mut gap = 0.0f64;
            for m in 0..=n {
                let pi = t.value(m);
                if pi > 2.0 {
                    up.push(UpperViolation { n, m, pi });
                }
                let a = (m as f64 - nf / 2.0).abs() / nf.sqrt();
                if a <= nf.sqrt() / 6.0 {
                    let bound = 0.5 * (-3.0 * a * a).exp();
                    if pi < bound {
                        low.push(LowerViolation { n, m, a, pi, bound });
                    }
                }
                let lg = ln_pi_ratio(n, m).expect("m <= n");
                gap = gap.max((lg - t.ln_values[m as usize]).abs());
            }
            (up, low, t.recursion_error(), gap, t.max)
        })
        .collect();
    let mut report = PiBoundsReport {
        n_max,
        entries: (1..=n_max).map(|n| n + 1).sum(),
        upper_violations: vec![],
        lower_violations: vec![],
        max_recursion_error: 0.0,
        max_lgamma_gap: 0.0,
        max_pi: 0.0,
    };
    for (up, low, rec, gap, mx) in per_n {
        report.upper_violations.extend(up);
        report.lower_violations.extend(low);
        report.max_recursion_error = report.max_recursion_error.max(rec);
        report.max_lgamma_gap = report.max_lgamma_gap.max(gap.exp_m1().abs());
        report.max_pi = report.max_pi.max(mx);
    }
    Ok(report)
}

/// Events measurable with respect to `η ∩ R'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonEvent {
    /// No point falls in `R'`.
    Empty,
    /// Red horizontal crossing of `R'` in the tessellation of `η ∩ R'`.
    Crossing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub event: ComparisonEvent,
    /// Area of `R` and number of binomial points.
    pub n: u64,
    pub rho: f64,
    /// Point-configuration samples per model.
    pub k: u64,
    /// Colourings per configuration (crossing event only).
    pub m: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEstimate {
    pub estimate: f64,
    pub se: f64,
    /// Closed-form value when available.
    pub exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub applicable: bool,
    /// Right-hand side minus left-hand side of the inequality, plus the
    /// allowed three standard errors; negative means violated.
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub spec: ComparisonSpec,
    pub binomial: ModelEstimate,
    pub poisson: ModelEstimate,
    /// `P_R(E) <= 2 P*(E)`.
    pub upper: InequalityCheck,
    /// `P_R(E) >= P*(E)/4 · e^{-3/P*(E)}` when `n >= 36/P*(E)`.
    pub lower: InequalityCheck,
    /// `P*(E) <= max_{n' >= N} P_R(E) + P*(|η ∩ R| < N)` with `N = n/2`,
    /// the max taken over the point counts in `sup_grid`.
    pub poisson_from_binomial: InequalityCheck,
    pub sup_grid: Vec<(u64, f64, f64)>,
    pub poisson_tail: f64,
}

/// Left half of `R(ρ, n)`.
pub fn half_area_subrect(r: &Rect) -> Result<Rect> {
    let b = r.bounds();
    Rect::from_bounds(b.xmin, 0.5 * (b.xmin + b.xmax), b.ymin, b.ymax)
}

fn check_half_area(r: &Rect, sub: &Rect) -> Result<()> {
    if !r.contains_rect(sub, 1e-12 * r.diameter()) || ((sub.area / r.area) - 0.5).abs() > 1e-9 {
        return Err(Error::Invalid("sub-rectangle must lie in R and have half its area".into()));
    }
    Ok(())
}

fn event_value(cfg: &Configuration, sub: &Rect, event: ComparisonEvent, m: u64, seed: u64) -> Result<f64> {
    let restricted = cfg.restricted_to(sub);
    match event {
        ComparisonEvent::Empty => Ok(restricted.is_empty() as u8 as f64),
        ComparisonEvent::Crossing => {
            if restricted.is_empty() {
                return Ok(0.0);
            }
            let t = build_tessellation(&restricted)?;
            let q = CrossingQuery::red_horizontal(*sub);
            let est = if t.len() <= 12 {
                quenched_probability_exact(&t, &q)?
            } else {
                quenched_probability_mc(&t, &q, m, seed)?
            };
            Ok(est.value)
        }
    }
}

fn model_estimate<F>(k: u64, sample: F) -> Result<ModelEstimate>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let vals: Vec<f64> = (0..k).into_par_iter().map(&sample).collect::<Result<_>>()?;
    let s = mean_se(&vals);
    Ok(ModelEstimate { estimate: s.mean, se: s.se, exact: None })
}

/// Estimates `P_R(E)` and `P*(E)` and checks the three comparison
/// inequalities with a three standard error allowance.
pub fn empirical_comparison(spec: &ComparisonSpec, sub: Option<Rect>) -> Result<ComparisonReport> {
    if spec.k < 2 || spec.m == 0 || spec.n < 2 {
        return Err(Error::Invalid("need n >= 2, k >= 2, m >= 1".into()));
    }
    let r = Rect::new(spec.rho, spec.n as f64)?;
    let sub = match sub {
        Some(s) => s,
        None => half_area_subrect(&r)?,
    };
    check_half_area(&r, &sub)?;
    let binom_at = |count: u64, tag: u64| {
        model_estimate(spec.k, |i| {
            let s = derive(derive(spec.seed, tag), i);
            event_value(&sample_binomial(&r, count, s)?, &sub, spec.event, spec.m, derive(s, 7))
        })
    };
    let mut binomial = binom_at(spec.n, 1)?;
    let mut poisson = model_estimate(spec.k, |i| {
        let s = derive(derive(spec.seed, 2), i);
        event_value(&sample_poisson(&r, s)?, &sub, spec.event, spec.m, derive(s, 7))
    })?;
    if spec.event == ComparisonEvent::Empty {
        binomial.exact = Some(0.5f64.powi(spec.n as i32));
        poisson.exact = Some((-(spec.n as f64) / 2.0).exp());
    }
    let (pr, ps) = (binomial.estimate, poisson.estimate);

    let se_upper = (binomial.se.powi(2) + 4.0 * poisson.se.powi(2)).sqrt();
    let slack = 2.0 * ps + 3.0 * se_upper - pr;
    let upper = InequalityCheck { applicable: true, slack, holds: slack >= 0.0 };

    let lower = if ps > 0.0 && spec.n as f64 >= 36.0 / ps {
        let rhs = ps / 4.0 * (-3.0 / ps).exp();
        let slack = pr - rhs + 3.0 * (binomial.se.powi(2) + poisson.se.powi(2) / 16.0).sqrt();
        InequalityCheck { applicable: true, slack, holds: slack >= 0.0 }
    } else {
        InequalityCheck { applicable: false, slack: f64::NAN, holds: true }
    };

    let big_n = spec.n.div_ceil(2).max(1);
    let grid = [big_n, big_n * 3 / 2, 2 * big_n, 3 * big_n];
    let mut sup_grid = Vec::new();
    for (idx, &count) in grid.iter().enumerate() {
        let e = binom_at(count, 10 + idx as u64)?;
        sup_grid.push((count, e.estimate, e.se));
    }
    let poisson_tail = Poisson::new(r.area).map_err(|e| Error::Invalid(e.to_string()))?.cdf(big_n - 1);
    let (sup, sup_se) = sup_grid.iter().fold((0.0f64, 0.0f64), |acc, &(_, e, s)| if e > acc.0 { (e, s) } else { acc });
    let slack = sup + poisson_tail - ps + 3.0 * (sup_se.powi(2) + poisson.se.powi(2)).sqrt();
    let poisson_from_binomial = InequalityCheck { applicable: true, slack, holds: slack >= 0.0 };

    Ok(ComparisonReport {
        spec: spec.clone(),
        binomial,
        poisson,
        upper,
        lower,
        poisson_from_binomial,
        sup_grid,
        poisson_tail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLawReport {
    pub count: u64,
    pub binomial_hits: u64,
    pub binomial_kept: u64,
    pub poisson_hits: u64,
    pub poisson_kept: u64,
    pub p_value: f64,
}

/// Given `|η ∩ R'| = count`, both models put i.i.d. uniform points in `R'`.
/// Draws `k` configurations per model, keeps those with the given count and
/// compares the frequency of a red crossing of `R'` (one colouring each)
/// with a two-proportion test.
pub fn conditional_law_check(n: u64, rho: f64, count: u64, k: u64, seed: u64) -> Result<ConditionalLawReport> {
    let r = Rect::new(rho, n as f64)?;
    let sub = half_area_subrect(&r)?;
    let run = |tag: u64, binomial: bool| -> Result<(u64, u64)> {
        let out: Vec<Option<bool>> = (0..k)
            .into_par_iter()
            .map(|i| {
                let s = derive(derive(seed, tag), i);
                let cfg = if binomial { sample_binomial(&r, n, s)? } else { sample_poisson(&r, s)? };
                let restricted = cfg.restricted_to(&sub);
                if restricted.len() as u64 != count || restricted.is_empty() {
                    return Ok(None);
                }
                let t = build_tessellation(&restricted)?;
                let c = Coloring::random(t.len(), derive(s, 3));
                Ok(Some(crate::crossing::detect_crossing(&t, &c, &CrossingQuery::red_horizontal(sub))?))
            })
            .collect::<Result<_>>()?;
        let kept = out.iter().flatten().count() as u64;
        let hits = out.iter().flatten().filter(|&&h| h).count() as u64;
        Ok((hits, kept))
    };
    let (bh, bk) = run(1, true)?;
    let (ph, pk) = run(2, false)?;
    Ok(ConditionalLawReport {
        count,
        binomial_hits: bh,
        binomial_kept: bk,
        poisson_hits: ph,
        poisson_kept: pk,
        p_value: two_proportion_pvalue(bh, bk.max(1), ph, pk.max(1)),
    })
}
