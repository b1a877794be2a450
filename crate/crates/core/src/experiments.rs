//! Desk-scale experiments over random point configurations: concentration of
//! the quenched crossing probability, annealed box crossings, the variance
//! inequalities and the one-arm trend.
//!
//! Every replica draws its points and colourings from streams derived from
//! `(seed, n, replica)`, and results are collected in replica order, so
//! output does not depend on the number of worker threads.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arms::{one_arm_quenched_mc, ArmQuery};
use crate::crossing::{crossing_event, estimate_exact, estimate_mc, CrossingQuery};
use crate::error::{Error, Result};
use crate::event::ConnectivityEvent;
use crate::geom::{build_tessellation, sample_binomial, sample_poisson_padded, Point, Rect, Tessellation};
use crate::influence::event_influences_exact;
use crate::rng::derive;
use crate::stats::{mean_se, median, quantile_sorted, variance_se, wilson, Z95};

/// Largest point count for which `Z` is computed by enumeration.
pub const EXACT_LIMIT: u64 = 20;

/// A sub-rectangle of the window: aspect ratio, fraction of the window area,
/// and center offset as fractions of the window width and height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub rho: f64,
    pub area_frac: f64,
    #[serde(default)]
    pub cx: f64,
    #[serde(default)]
    pub cy: f64,
}

impl BoxSpec {
    pub fn whole(rho: f64) -> BoxSpec {
        BoxSpec { rho, area_frac: 1.0, cx: 0.0, cy: 0.0 }
    }

    pub fn reflected(&self) -> BoxSpec {
        BoxSpec { cy: -self.cy, ..*self }
    }

    pub fn place(&self, window: &Rect) -> Result<Rect> {
        let c = Point::new(
            window.center.x + self.cx * window.width(),
            window.center.y + self.cy * window.height(),
        );
        let r = Rect::centered_at(self.rho, self.area_frac * window.area, c)?;
        if !window.contains_rect(&r, 1e-12 * window.diameter()) {
            let b = r.bounds();
            return Err(Error::OutsideWindow { xmin: b.xmin, xmax: b.xmax, ymin: b.ymin, ymax: b.ymax });
        }
        Ok(r)
    }
}

fn default_rho() -> f64 {
    1.0
}

fn default_quantiles() -> Vec<f64> {
    vec![0.5, 0.9]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub n_grid: Vec<u64>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Point-configuration replicas per grid value.
    pub k: u64,
    /// Colourings per replica when `Z` is estimated.
    pub m: u64,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_quantiles")]
    pub quantiles: Vec<f64>,
    /// Target rectangles for box crossings; the whole window if empty.
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    /// Box crossings of `R_0(rho, n)` in a padded Poisson window instead of
    /// binomial points in `R(rho, n)`.
    #[serde(default)]
    pub half_plane: bool,
    /// Worker threads; the global pool when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(n_grid: Vec<u64>, k: u64, m: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            name: String::new(),
            n_grid,
            rho: 1.0,
            k,
            m,
            t_grid: vec![],
            seed,
            lambdas: vec![],
            quantiles: default_quantiles(),
            boxes: vec![],
            half_plane: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Invalid("k must be at least 2".into()));
        }
        if self.m < 1 {
            return Err(Error::Invalid("m must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("n_grid must be non-empty, positive and strictly increasing".into()));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::BadWindow { rho: self.rho, area: f64::NAN });
        }
        if self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Invalid("quantile levels must lie in [0, 1]".into()));
        }
        if self.t_grid.iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err(Error::Invalid("thresholds must be non-negative".into()));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Invalid("lambdas must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Invalid("threads must be positive".into()));
        }
        Ok(())
    }

    fn window(&self, n: u64) -> Result<Rect> {
        Rect::new(self.rho, n as f64)
    }

    fn replica_seed(&self, n: u64, i: u64) -> u64 {
        derive(derive(self.seed, n), i)
    }
}

/// Runs `f` on a pool with the configured number of threads.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Invalid(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// A rectangular result table with string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Quenched crossing probability of `target`, exact when the tessellation
/// has at most `EXACT_LIMIT` cells.
struct Quenched {
    z: f64,
    exact: bool,
    event: ConnectivityEvent,
}

fn quenched(tess: &Tessellation, target: Rect, m: u64, seed: u64) -> Result<Quenched> {
    let event = crossing_event(tess, &CrossingQuery::red_horizontal(target))?;
    let exact = tess.len() as u64 <= EXACT_LIMIT;
    let est = if exact { estimate_exact(&event)? } else { estimate_mc(&event, m, seed)? };
    Ok(Quenched { z: est.value, exact, event })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub t: f64,
    pub freq: f64,
    pub lo: f64,
    pub hi: f64,
    /// `t` is below twice the colouring noise floor.
    pub below_noise: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: u64,
    pub k: u64,
    pub m: u64,
    pub exact: bool,
    pub target: f64,
    pub mean_z: f64,
    pub se_z: f64,
    /// `(level, quantile of |Z - target|)`.
    pub quantiles: Vec<(f64, f64)>,
    pub tails: Vec<TailFrequency>,
    /// `(λ, E[exp(λ(Z - mean Z))])`.
    pub mgf: Vec<(f64, f64)>,
    /// `sqrt(1/(4m))` for estimated `Z`, zero for exact `Z`.
    pub noise_floor: f64,
    pub z: Vec<f64>,
}

impl DeviationRow {
    /// Pooled mean within four standard errors of the target.
    pub fn mean_consistent(&self) -> bool {
        (self.mean_z - self.target).abs() <= 4.0 * self.se_z
    }
}

/// Deviations of `Z = P(H_R | η)` from 1/2 (or from the pooled mean when the
/// window is not a square), with `R = R(ρ, n)` for each `n` in the grid.
pub fn exp_concentration(cfg: &ExperimentConfig) -> Result<Vec<DeviationRow>> {
    cfg.validate()?;
    with_threads(cfg.threads, || cfg.n_grid.iter().map(|&n| concentration_row(cfg, n)).collect())?
}

fn concentration_row(cfg: &ExperimentConfig, n: u64) -> Result<DeviationRow> {
    let window = cfg.window(n)?;
    let draws: Vec<(f64, bool)> = (0..cfg.k)
        .into_par_iter()
        .map(|i| {
            let s = cfg.replica_seed(n, i);
            let tess = build_tessellation(&sample_binomial(&window, n, s)?)?;
            let q = quenched(&tess, window, cfg.m, derive(s, 1))?;
            Ok((q.z, q.exact))
        })
        .collect::<Result<_>>()?;
    let z: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let exact = draws.iter().all(|d| d.1);
    let s = mean_se(&z);
    let target = if cfg.rho == 1.0 { 0.5 } else { s.mean };
    let mut dev: Vec<f64> = z.iter().map(|v| (v - target).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let noise_floor = if exact { 0.0 } else { (0.25 / cfg.m as f64).sqrt() };
    let tails = cfg
        .t_grid
        .iter()
        .map(|&t| {
            let hits = dev.iter().filter(|&&d| d >= t).count() as u64;
            let (lo, hi) = wilson(hits, cfg.k);
            TailFrequency { t, freq: hits as f64 / cfg.k as f64, lo, hi, below_noise: t < 2.0 * noise_floor }
        })
        .collect();
    let mgf = cfg
        .lambdas
        .iter()
        .map(|&l| (l, z.iter().map(|v| (l * (v - s.mean)).exp()).sum::<f64>() / z.len() as f64))
        .collect();
    Ok(DeviationRow {
        n,
        k: cfg.k,
        m: cfg.m,
        exact,
        target,
        mean_z: s.mean,
        se_z: s.se,
        quantiles: cfg.quantiles.iter().map(|&q| (q, quantile_sorted(&dev, q))).collect(),
        tails,
        mgf,
        noise_floor,
        z,
    })
}

pub fn deviation_table(rows: &[DeviationRow]) -> Table {
    let mut header: Vec<String> = ["n", "k", "m", "exact", "target", "mean_z", "se_z", "noise_floor"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(r) = rows.first() {
        header.extend(r.quantiles.iter().map(|(q, _)| format!("q{q}")));
        for t in &r.tails {
            header.extend([
                format!("tail{}", t.t),
                format!("tail{}_lo", t.t),
                format!("tail{}_hi", t.t),
                format!("tail{}_below_noise", t.t),
            ]);
        }
        header.extend(r.mgf.iter().map(|(l, _)| format!("F{l}")));
    }
    let rows = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.n.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                r.exact.to_string(),
                num(r.target),
                num(r.mean_z),
                num(r.se_z),
                num(r.noise_floor),
            ];
            v.extend(r.quantiles.iter().map(|(_, x)| num(*x)));
            for t in &r.tails {
                v.extend([num(t.freq), num(t.lo), num(t.hi), t.below_noise.to_string()]);
            }
            v.extend(r.mgf.iter().map(|(_, f)| num(*f)));
            v
        })
        .collect();
    Table { header, rows }
}

/// Minimal SVG line plot of each quantile of `|Z - target|` against `log n`.
pub fn deviation_svg(rows: &[DeviationRow]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ymax = rows.iter().flat_map(|r| r.quantiles.iter().map(|q| q.1)).fold(0.0f64, f64::max).max(1e-9);
    let (xmin, xmax) = xs.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| pad + (x - xmin) / span * (w - 2.0 * pad);
    let py = |y: f64| h - pad - y / ymax * (h - 2.0 * pad);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{y}" x2="{x2}" y2="{y}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{y}" stroke="black"/>"#,
        y = h - pad,
        x2 = w - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">log n</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(s, r#"<text x="5" y="{}" font-size="12">{ymax:.4}</text>"#, pad);
    let levels = rows.first().map(|r| r.quantiles.len()).unwrap_or(0);
    for li in 0..levels {
        let c = colors[li % colors.len()];
        let pts: Vec<String> =
            rows.iter().zip(&xs).map(|(r, &x)| format!("{:.2},{:.2}", px(x), py(r.quantiles[li].1))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{c}">q{}</text>"#,
            w - pad - 40.0,
            pad + 15.0 * li as f64,
            rows[0].quantiles[li].0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub n: u64,
    pub rho: f64,
    pub target: BoxSpec,
    pub half_plane: bool,
    pub k: u64,
    pub m: u64,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Total colour draws behind the estimate (`2^cells` per exact replica).
    pub indicator_draws: u64,
}

impl BoxRow {
    pub fn ci_halfwidth(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }

    /// Whether two estimates agree within their combined 95% interval.
    pub fn agrees_with(&self, other: &BoxRow) -> bool {
        (self.estimate - other.estimate).abs() <= Z95 * (self.se.powi(2) + other.se.powi(2)).sqrt()
    }
}

/// Annealed probability of a red horizontal crossing of each configured box.
///
/// In the default mode the points are binomial in `R(ρ, n)` and boxes are
/// placed relative to it. In half-plane mode the target is `R_0(ρ, n)` with
/// Poisson points in a window padded to the right, top and bottom, and each
/// box is placed relative to `R_0(ρ, n)`.
pub fn exp_box_crossing(cfg: &ExperimentConfig) -> Result<Vec<BoxRow>> {
    cfg.validate()?;
    let boxes = if cfg.boxes.is_empty() { vec![BoxSpec::whole(cfg.rho)] } else { cfg.boxes.clone() };
    with_threads(cfg.threads, || {
        let mut rows = Vec::new();
        for &n in &cfg.n_grid {
            for (bi, b) in boxes.iter().enumerate() {
                rows.push(box_row(cfg, n, bi as u64, b)?);
            }
        }
        Ok(rows)
    })?
}

fn box_row(cfg: &ExperimentConfig, n: u64, box_index: u64, spec: &BoxSpec) -> Result<BoxRow> {
    let base = if cfg.half_plane { Rect::anchored_left(cfg.rho, n as f64)? } else { cfg.window(n)? };
    let target = spec.place(&base)?;
    let draws: Vec<(f64, u64)> = (0..cfg.k)
        .into_par_iter()
        .map(|i| {
            // Replicas are shared across boxes, so every box sees the same configurations.
            let s = cfg.replica_seed(n, i);
            let c = if cfg.half_plane { sample_poisson_padded(&base, s)? } else { sample_binomial(&base, n, s)? };
            if c.is_empty() {
                return Ok((0.0, cfg.m));
            }
            let tess = build_tessellation(&c)?;
            let q = quenched(&tess, target, cfg.m, derive(derive(s, 2), box_index))?;
            let draws = if q.exact { 1u64 << q.event.cell_count() } else { cfg.m };
            Ok((q.z, draws))
        })
        .collect::<Result<_>>()?;
    let z: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let s = mean_se(&z);
    Ok(BoxRow {
        n,
        rho: cfg.rho,
        target: *spec,
        half_plane: cfg.half_plane,
        k: cfg.k,
        m: cfg.m,
        estimate: s.mean,
        se: s.se,
        ci_lo: s.mean - Z95 * s.se,
        ci_hi: s.mean + Z95 * s.se,
        indicator_draws: draws.iter().map(|d| d.1).sum(),
    })
}

pub fn box_table(rows: &[BoxRow]) -> Table {
    let header = [
        "n", "rho", "box_rho", "box_area_frac", "box_cx", "box_cy", "half_plane", "k", "m", "estimate", "se",
        "ci_lo", "ci_hi", "indicator_draws",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.rho),
                num(r.target.rho),
                num(r.target.area_frac),
                num(r.target.cx),
                num(r.target.cy),
                r.half_plane.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                num(r.estimate),
                num(r.se),
                num(r.ci_lo),
                num(r.ci_hi),
                r.indicator_draws.to_string(),
            ]
        })
        .collect();
    Table { header, rows }
}

/// Per-replica exact `Z` and influences of the window crossing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactReplica {
    pub z: f64,
    pub influences: Vec<f64>,
}

impl ExactReplica {
    pub fn sum_sq(&self) -> f64 {
        self.influences.iter().map(|v| v * v).sum()
    }
}

fn exact_replicas(cfg: &ExperimentConfig, n: u64) -> Result<Vec<ExactReplica>> {
    if n > EXACT_LIMIT {
        return Err(Error::EnumerationLimit { cells: n as usize, limit: EXACT_LIMIT as usize });
    }
    let window = cfg.window(n)?;
    (0..cfg.k)
        .into_par_iter()
        .map(|i| {
            let tess = build_tessellation(&sample_binomial(&window, n, cfg.replica_seed(n, i))?)?;
            let event = crossing_event(&tess, &CrossingQuery::red_horizontal(window))?;
            let z = estimate_exact(&event)?.value;
            let influences = event_influences_exact(&event)?.values;
            Ok(ExactReplica { z, influences })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinRow {
    pub n: u64,
    pub k: u64,
    pub var_z: f64,
    pub var_se: f64,
    pub mean_sum_sq: f64,
    pub sum_sq_se: f64,
    pub combined_se: f64,
    pub holds: bool,
}

/// `Var(Z)` against `E[Σ Inf_j^2]` with exact per-replica values.
pub fn exp_efron_stein(cfg: &ExperimentConfig) -> Result<Vec<EfronSteinRow>> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        cfg.n_grid
            .iter()
            .map(|&n| {
                let reps = exact_replicas(cfg, n)?;
                let z: Vec<f64> = reps.iter().map(|r| r.z).collect();
                let ss: Vec<f64> = reps.iter().map(ExactReplica::sum_sq).collect();
                let (var_z, var_se) = variance_se(&z);
                let s = mean_se(&ss);
                let combined_se = (var_se.powi(2) + s.se.powi(2)).sqrt();
                Ok(EfronSteinRow {
                    n,
                    k: cfg.k,
                    var_z,
                    var_se,
                    mean_sum_sq: s.mean,
                    sum_sq_se: s.se,
                    combined_se,
                    holds: var_z <= s.mean + 2.0 * combined_se,
                })
            })
            .collect()
    })?
}

pub fn efron_stein_table(rows: &[EfronSteinRow]) -> Table {
    let header = ["n", "k", "var_z", "var_se", "mean_sum_sq", "sum_sq_se", "combined_se", "holds"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                num(r.var_z),
                num(r.var_se),
                num(r.mean_sum_sq),
                num(r.sum_sq_se),
                num(r.combined_se),
                r.holds.to_string(),
            ]
        })
        .collect();
    Table { header, rows }
}

/// Ratios are not reported for `λ` below this value.
pub const RATIO_LAMBDA_MIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpIneqRow {
    pub n: u64,
    pub k: u64,
    pub lambda: f64,
    /// `Var(e^{λZ/2})`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `λ²/4 · E[e^{λZ} Σ_j e^{λ Inf_j} Inf_j²]`.
    pub rhs: f64,
    pub rhs_se: f64,
    pub combined_se: f64,
    /// `lhs / rhs`, absent for small `λ` or zero `rhs`.
    pub ratio: Option<f64>,
    /// `E[e^{λ(Z - E Z)}]`.
    pub mgf: f64,
    pub holds: bool,
}

pub fn exp_ineq_row(n: u64, lambda: f64, reps: &[ExactReplica]) -> ExpIneqRow {
    let x: Vec<f64> = reps.iter().map(|r| (lambda * r.z / 2.0).exp()).collect();
    let y: Vec<f64> = reps
        .iter()
        .map(|r| {
            let s: f64 = r.influences.iter().map(|&v| (lambda * v).exp() * v * v).sum();
            lambda * lambda / 4.0 * (lambda * r.z).exp() * s
        })
        .collect();
    let (lhs, lhs_se) = variance_se(&x);
    let r = mean_se(&y);
    let zbar = reps.iter().map(|r| r.z).sum::<f64>() / reps.len() as f64;
    let mgf = reps.iter().map(|r| (lambda * (r.z - zbar)).exp()).sum::<f64>() / reps.len() as f64;
    let combined_se = (lhs_se.powi(2) + r.se.powi(2)).sqrt();
    ExpIneqRow {
        n,
        k: reps.len() as u64,
        lambda,
        lhs,
        lhs_se,
        rhs: r.mean,
        rhs_se: r.se,
        combined_se,
        ratio: (lambda >= RATIO_LAMBDA_MIN && r.mean > 0.0).then(|| lhs / r.mean),
        mgf,
        holds: lhs <= r.mean + 2.0 * combined_se,
    }
}

/// Both sides of the exponential variance inequality for each `n` and `λ`.
pub fn exp_exp_inequality(cfg: &ExperimentConfig) -> Result<Vec<ExpIneqRow>> {
    cfg.validate()?;
    if cfg.lambdas.is_empty() {
        return Err(Error::Invalid("at least one lambda is required".into()));
    }
    with_threads(cfg.threads, || {
        let mut rows = Vec::new();
        for &n in &cfg.n_grid {
            let reps = exact_replicas(cfg, n)?;
            rows.extend(cfg.lambdas.iter().map(|&l| exp_ineq_row(n, l, &reps)));
        }
        Ok(rows)
    })?
}

pub fn exp_ineq_table(rows: &[ExpIneqRow]) -> Table {
    let header = ["n", "k", "lambda", "lhs", "lhs_se", "rhs", "rhs_se", "combined_se", "ratio", "mgf", "holds"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                num(r.lambda),
                num(r.lhs),
                num(r.lhs_se),
                num(r.rhs),
                num(r.rhs_se),
                num(r.combined_se),
                r.ratio.map(num).unwrap_or_default(),
                num(r.mgf),
                r.holds.to_string(),
            ]
        })
        .collect();
    Table { header, rows }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmTrendRow {
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub median: f64,
    pub mean: f64,
    pub se: f64,
}

/// Quenched one-arm probabilities from the center of the unit square with
/// `n` binomial points and radii `(n^{-1/4}, n^{-1/6})`.
pub fn one_arm_trend(cfg: &ExperimentConfig) -> Result<Vec<ArmTrendRow>> {
    cfg.validate()?;
    let window = Rect::unit_square();
    with_threads(cfg.threads, || {
        cfg.n_grid
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let (a, b) = (nf.powf(-0.25), nf.powf(-1.0 / 6.0));
                let q = ArmQuery::new(window.center, a, b, window)?;
                let vals: Vec<f64> = (0..cfg.k)
                    .into_par_iter()
                    .map(|i| {
                        let s = cfg.replica_seed(n, i);
                        let tess = build_tessellation(&sample_binomial(&window, n, s)?)?;
                        Ok(one_arm_quenched_mc(&tess, &q, cfg.m, derive(s, 3))?.value)
                    })
                    .collect::<Result<_>>()?;
                let s = mean_se(&vals);
                Ok(ArmTrendRow { n, a, b, median: median(&vals), mean: s.mean, se: s.se })
            })
            .collect()
    })?
}

pub fn arm_trend_table(rows: &[ArmTrendRow]) -> Table {
    let header = ["n", "a", "b", "median", "mean", "se"].iter().map(|s| s.to_string()).collect();
    let rows = rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.a), num(r.b), num(r.median), num(r.mean), num(r.se)])
        .collect();
    Table { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_grid: Vec<u64>, k: u64) -> ExperimentConfig {
        ExperimentConfig::new(n_grid, k, 64, 11)
    }

    #[test]
    fn validation() {
        assert!(cfg(vec![4, 4], 10).validate().is_err());
        assert!(cfg(vec![4], 1).validate().is_err());
        assert!(ExperimentConfig::new(vec![4], 10, 0, 1).validate().is_err());
        assert!(cfg(vec![4, 8], 10).validate().is_ok());
    }

    #[test]
    fn single_point_is_exactly_half() {
        let mut c = cfg(vec![1], 20);
        c.t_grid = vec![0.0, 0.1];
        c.lambdas = vec![1.0];
        let rows = exp_concentration(&c).unwrap();
        let r = &rows[0];
        assert!(r.exact && r.z.iter().all(|&z| z == 0.5));
        assert!(r.quantiles.iter().all(|q| q.1 == 0.0));
        assert_eq!(r.tails[0].freq, 1.0);
        assert_eq!(r.tails[1].freq, 0.0);
        assert_eq!(r.se_z, 0.0);
        assert_eq!(r.mgf[0].1, 1.0);
    }

    #[test]
    fn quantiles_monotone_and_flags() {
        let mut c = ExperimentConfig::new(vec![30], 40, 64, 3);
        c.quantiles = vec![0.1, 0.5, 0.9, 1.0];
        c.t_grid = vec![0.05, 0.2];
        let r = &exp_concentration(&c).unwrap()[0];
        assert!(!r.exact);
        assert!((r.noise_floor - 0.0625).abs() < 1e-15);
        assert!(r.quantiles.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(r.tails[0].below_noise && !r.tails[1].below_noise);
        assert!(r.tails.iter().all(|t| (0.0..=1.0).contains(&t.freq) && t.lo <= t.freq && t.freq <= t.hi));
    }

    #[test]
    fn single_point_inequalities() {
        let mut c = cfg(vec![1], 10);
        c.lambdas = vec![0.5, 1e-4];
        let es = &exp_efron_stein(&c).unwrap()[0];
        assert_eq!(es.var_z, 0.0);
        assert_eq!(es.mean_sum_sq, 1.0);
        let rows = exp_exp_inequality(&c).unwrap();
        assert_eq!(rows[0].lhs, 0.0);
        assert!(rows[0].rhs > 0.0 && rows[0].holds);
        assert!(rows[0].ratio.is_some() && rows[1].ratio.is_none());
    }

    #[test]
    fn exact_limit_enforced() {
        assert!(exp_efron_stein(&cfg(vec![21], 2)).is_err());
    }

    #[test]
    fn box_outside_window_rejected() {
        let mut c = cfg(vec![50], 2);
        c.boxes = vec![BoxSpec { rho: 1.0, area_frac: 0.25, cx: 0.4, cy: 0.0 }];
        assert!(matches!(exp_box_crossing(&c), Err(Error::OutsideWindow { .. })));
    }

    #[test]
    fn csv_is_thread_independent() {
        let mut c = ExperimentConfig::new(vec![8, 40], 12, 256, 99);
        c.t_grid = vec![0.1];
        c.lambdas = vec![1.0];
        c.threads = Some(1);
        let a = deviation_table(&exp_concentration(&c).unwrap()).to_csv().unwrap();
        c.threads = Some(3);
        let b = deviation_table(&exp_concentration(&c).unwrap()).to_csv().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("n,k,m,exact,target"));
    }

    #[test]
    fn svg_has_one_line_per_level() {
        let rows = exp_concentration(&ExperimentConfig::new(vec![4, 9], 4, 16, 1)).unwrap();
        assert_eq!(deviation_svg(&rows).matches("<polyline").count(), 2);
    }
}
