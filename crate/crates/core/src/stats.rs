//! Small statistics helpers: Wilson intervals, means with standard errors,
//! empirical quantiles.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `m` trials.
pub fn wilson(k: u64, m: u64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let n = m as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn wilson_halfwidth(k: u64, m: u64) -> f64 {
    let (lo, hi) = wilson(k, m);
    0.5 * (hi - lo)
}

/// Mean and deviations from it, computed relative to the first element so
/// that constant samples give exactly zero deviations.
fn centered(xs: &[f64]) -> (f64, Vec<f64>) {
    let x0 = xs.first().copied().unwrap_or(0.0);
    let shift = xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64;
    (x0 + shift, xs.iter().map(|x| x - x0 - shift).collect())
}

/// Sample mean, sample standard deviation and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len() as f64;
    let (mean, dev) = centered(xs);
    let var = if xs.len() > 1 { dev.iter().map(|d| d * d).sum::<f64>() / (n - 1.0) } else { 0.0 };
    MeanSe { mean, sd: var.sqrt(), se: (var / n).sqrt() }
}

/// Unbiased sample variance and a standard error for it, from the fourth
/// central moment: `se^2 ≈ (m4 - s^4) / n`.
pub fn variance_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, 0.0);
    }
    let (_, dev) = centered(xs);
    let var = dev.iter().map(|d| d * d).sum::<f64>() / (n - 1.0);
    let m4 = dev.iter().map(|d| d.powi(4)).sum::<f64>() / n;
    (var, ((m4 - var * var).max(0.0) / n).sqrt())
}

/// Linear-interpolation quantile (type 7) of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * level.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Two-sided p-value of the pooled two-proportion z-test.
pub fn two_proportion_pvalue(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let pooled = (k1 + k2) as f64 / (a + b);
    let se = (pooled * (1.0 - pooled) * (1.0 / a + 1.0 / b)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (k1 as f64 / a - k2 as f64 / b) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z.abs()))
}
