use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use vorperc::arms::{
    annulus_crossing_event, blue_circuit_indicator, one_arm_indicator, one_arm_quenched_exact,
    one_arm_quenched_mc, AnnulusQuery, ArmQuery,
};
use vorperc::compare::{
    check_pi_bounds, empirical_comparison, pi_ratio, ComparisonEvent, ComparisonSpec,
};
use vorperc::crossing::{
    detect_crossing, quenched_probability_exact, quenched_probability_mc, Coloring, CrossingQuery,
    Direction,
};
use vorperc::event::Color;
use vorperc::experiments::{
    arm_trend_table, box_table, deviation_svg, deviation_table, efron_stein_table, exp_box_crossing,
    exp_concentration, exp_efron_stein, exp_exp_inequality, exp_ineq_table, one_arm_trend,
    ExperimentConfig, Table,
};
use vorperc::explore::{
    default_inner, revealment_exact, revealment_mc, run_exploration, run_exploration_at, Explorer,
    Segment,
};
use vorperc::geom::{build_tessellation, sample_binomial, sample_poisson, Point, Rect, Tessellation};
use vorperc::influence::{influences_exact, influences_mc};
use vorperc::io::{read_points, write_points};

#[derive(Parser)]
#[command(name = "vorperc", version, about = "Voronoi percolation in rectangles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a point configuration and write it as CSV plus a JSON sidecar.
    Sample {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Number of points (binomial model).
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Window area; defaults to n.
        #[arg(long)]
        area: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide a crossing for one random colouring.
    Cross {
        #[command(flatten)]
        points: PointsArg,
        #[arg(long)]
        color_seed: u64,
        #[command(flatten)]
        target: TargetArg,
    },
    /// Quenched crossing probability of the window (or a target).
    Quench {
        #[command(flatten)]
        points: PointsArg,
        #[command(flatten)]
        target: TargetArg,
        #[command(flatten)]
        est: EstimateArg,
    },
    /// Influences of each cell on a crossing.
    Influence {
        #[command(flatten)]
        points: PointsArg,
        #[command(flatten)]
        target: TargetArg,
        #[command(flatten)]
        est: EstimateArg,
    },
    /// Run the exploration algorithm on one random colouring.
    Explore {
        #[command(flatten)]
        points: PointsArg,
        #[arg(long)]
        color_seed: u64,
        #[arg(long, conflicts_with = "segment_seed")]
        segment_x: Option<f64>,
        #[arg(long)]
        segment_seed: Option<u64>,
    },
    /// Revealment of the exploration algorithm.
    Reveal {
        #[command(flatten)]
        points: PointsArg,
        /// Enumerate all colourings with the segment fixed.
        #[arg(long, requires = "segment_x")]
        exact: bool,
        #[arg(long)]
        segment_x: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One-arm event from a box around `u`.
    Arm {
        #[command(flatten)]
        points: PointsArg,
        #[arg(long, value_parser = parse_point)]
        u: Point,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        est: EstimateArg,
        /// Also evaluate one colouring drawn from this seed.
        #[arg(long)]
        color_seed: Option<u64>,
    },
    /// Blue circuit in the annulus of inner side 7^j around a center.
    Circuit {
        #[command(flatten)]
        points: PointsArg,
        #[arg(long, value_parser = parse_point)]
        center: Point,
        #[arg(long)]
        j: u32,
        #[command(flatten)]
        est: EstimateArg,
        #[arg(long)]
        color_seed: Option<u64>,
    },
    /// Binomial versus Poisson comparisons.
    Compare {
        #[command(subcommand)]
        cmd: CompareCmd,
    },
    /// Run an experiment from a JSON configuration.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Quantile plot (concentration only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CompareCmd {
    /// Ratio of count laws at one `(n, m)`, or all `m` when absent.
    Pi {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Check the upper and lower bounds on the ratio for all n up to `nmax`.
    Bounds {
        #[arg(long)]
        nmax: u64,
    },
    /// Estimate one event under both models and check the comparison inequalities.
    Empirical {
        #[arg(long, value_enum)]
        event: EventArg,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1000)]
        k: u64,
        #[arg(long, default_value_t = 256)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Binomial,
    Poisson,
}

#[derive(Clone, Copy, ValueEnum)]
enum EventArg {
    Empty,
    Crossing,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Concentration,
    Box,
    EfronStein,
    ExpIneq,
    OneArm,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    H,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorArg {
    Red,
    Blue,
}

#[derive(Args)]
struct PointsArg {
    /// Point CSV (`x,y`); the window is read from `<points>.json`.
    #[arg(long)]
    points: PathBuf,
    /// Window as "rho,area,cx,cy", overriding the sidecar.
    #[arg(long, value_parser = parse_rect)]
    window: Option<Rect>,
}

impl PointsArg {
    fn load(&self) -> Result<Tessellation> {
        let c = read_points(&self.points, self.window)
            .with_context(|| format!("reading {}", self.points.display()))?;
        Ok(build_tessellation(&c)?)
    }
}

#[derive(Args)]
struct TargetArg {
    /// Target rectangle "rho,area,cx,cy"; the window when absent.
    #[arg(long, value_parser = parse_rect)]
    target: Option<Rect>,
    #[arg(long, value_enum, default_value = "h")]
    direction: DirArg,
    #[arg(long, value_enum, default_value = "red")]
    color: ColorArg,
}

impl TargetArg {
    fn query(&self, tess: &Tessellation) -> CrossingQuery {
        let dir = match self.direction {
            DirArg::H => Direction::Horizontal,
            DirArg::V => Direction::Vertical,
        };
        let color = match self.color {
            ColorArg::Red => Color::Red,
            ColorArg::Blue => Color::Blue,
        };
        CrossingQuery::new(self.target.unwrap_or(tess.config().window), dir, color)
    }
}

#[derive(Args)]
struct EstimateArg {
    /// Enumerate all colourings.
    #[arg(long, conflicts_with = "colorings")]
    exact: bool,
    #[arg(long, default_value_t = 10_000)]
    colorings: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_floats(s: &str, k: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != k {
        return Err(format!("expected {k} comma-separated numbers"));
    }
    Ok(v)
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v = parse_floats(s, 2)?;
    Ok(Point::new(v[0], v[1]))
}

fn parse_rect(s: &str) -> std::result::Result<Rect, String> {
    let v = parse_floats(s, 4)?;
    Rect::centered_at(v[0], v[1], Point::new(v[2], v[3])).map_err(|e| e.to_string())
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn estimate_json(e: &vorperc::crossing::QuenchedEstimate) -> serde_json::Value {
    json!({ "value": e.value, "method": e.method, "m": e.colorings_used, "ci": e.ci_halfwidth })
}

fn write_table(table: &Table, out: Option<&Path>) -> Result<()> {
    let csv = table.to_csv()?;
    match out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Sample { model, n, rho, area, seed, out } => {
            let c = match model {
                ModelArg::Binomial => {
                    let Some(n) = n else { bail!("--n is required for the binomial model") };
                    sample_binomial(&Rect::new(rho, area.unwrap_or(n as f64))?, n, seed)?
                }
                ModelArg::Poisson => {
                    let Some(a) = area.or(n.map(|n| n as f64)) else { bail!("--area or --n is required") };
                    sample_poisson(&Rect::new(rho, a)?, seed)?
                }
            };
            write_points(&out, &c)?;
            print_json(&json!({ "points": c.len(), "window": c.window, "out": out }))?;
        }
        Cmd::Cross { points, color_seed, target } => {
            let tess = points.load()?;
            let q = target.query(&tess);
            let coloring = Coloring::random(tess.len(), color_seed);
            let occurs = detect_crossing(&tess, &coloring, &q)?;
            let dual = detect_crossing(&tess, &coloring, &q.dual())?;
            print_json(&json!({ "occurs": occurs, "dual_occurs": dual, "cells": tess.len() }))?;
        }
        Cmd::Quench { points, target, est } => {
            let tess = points.load()?;
            let q = target.query(&tess);
            let e = if est.exact {
                quenched_probability_exact(&tess, &q)?
            } else {
                quenched_probability_mc(&tess, &q, est.colorings, est.seed)?
            };
            print_json(&estimate_json(&e))?;
        }
        Cmd::Influence { points, target, est } => {
            let tess = points.load()?;
            let q = target.query(&tess);
            let v = if est.exact { influences_exact(&tess, &q)? } else { influences_mc(&tess, &q, est.colorings, est.seed)? };
            print_json(&json!({ "influences": v.values, "sum_sq": v.sum_sq, "method": v.method, "m": v.m }))?;
        }
        Cmd::Explore { points, color_seed, segment_x, segment_seed } => {
            let tess = points.load()?;
            let inner = default_inner(&tess.config().window);
            let coloring = Coloring::random(tess.len(), color_seed);
            let trace = match segment_x {
                Some(x) => run_exploration_at(&tess, &inner, &coloring, x)?,
                None => run_exploration(&tess, &inner, &coloring, segment_seed.unwrap_or(0))?,
            };
            print_json(&json!({ "inner": inner, "trace": trace }))?;
        }
        Cmd::Reveal { points, exact, segment_x, runs, seed } => {
            let tess = points.load()?;
            let inner = default_inner(&tess.config().window);
            let rep = match (exact, segment_x) {
                (true, Some(x)) => revealment_exact(&tess, &inner, x)?,
                (false, Some(x)) => revealment_mc(&tess, &inner, runs, seed, Segment::Fixed(x))?,
                (false, None) => revealment_mc(&tess, &inner, runs, seed, Segment::Random)?,
                (true, None) => bail!("--exact needs --segment-x"),
            };
            let (lo, hi) = Explorer::new(&tess, &inner)?.segment_range();
            print_json(&json!({ "segment_range": [lo, hi], "report": rep }))?;
        }
        Cmd::Arm { points, u, a, b, est, color_seed } => {
            let tess = points.load()?;
            let q = ArmQuery::new(u, a, b, tess.config().window)?;
            let e = if est.exact { one_arm_quenched_exact(&tess, &q)? } else { one_arm_quenched_mc(&tess, &q, est.colorings, est.seed)? };
            let ind = color_seed
                .map(|s| one_arm_indicator(&tess, &Coloring::random(tess.len(), s), &q))
                .transpose()?;
            print_json(&json!({ "estimate": estimate_json(&e), "indicator": ind }))?;
        }
        Cmd::Circuit { points, center, j, est, color_seed } => {
            let tess = points.load()?;
            let q = AnnulusQuery::at_scale(center, j)?;
            let ev = annulus_crossing_event(&tess, &q)?;
            let crossing = if est.exact {
                vorperc::crossing::estimate_exact(&ev)?
            } else {
                vorperc::crossing::estimate_mc(&ev, est.colorings, est.seed)?
            };
            let ind = color_seed
                .map(|s| blue_circuit_indicator(&tess, &Coloring::random(tess.len(), s), &q))
                .transpose()?;
            print_json(&json!({
                "inner_side": q.inner_side,
                "outer_side": q.outer_side(),
                "circuit_probability": 1.0 - crossing.value,
                "red_crossing": estimate_json(&crossing),
                "indicator": ind,
            }))?;
        }
        Cmd::Compare { cmd } => run_compare(cmd)?,
        Cmd::Experiment { kind, config, out, svg } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)?;
            let (table, summary) = match kind {
                ExperimentKind::Concentration => {
                    let rows = exp_concentration(&cfg)?;
                    if let Some(p) = &svg {
                        fs::write(p, deviation_svg(&rows))?;
                    }
                    let summary: Vec<_> = rows
                        .iter()
                        .map(|r| json!({ "n": r.n, "mean_z": r.mean_z, "se_z": r.se_z, "mean_consistent": r.mean_consistent() }))
                        .collect();
                    (deviation_table(&rows), json!(summary))
                }
                ExperimentKind::Box => {
                    let rows = exp_box_crossing(&cfg)?;
                    (box_table(&rows), serde_json::to_value(&rows)?)
                }
                ExperimentKind::EfronStein => {
                    let rows = exp_efron_stein(&cfg)?;
                    (efron_stein_table(&rows), serde_json::to_value(&rows)?)
                }
                ExperimentKind::ExpIneq => {
                    let rows = exp_exp_inequality(&cfg)?;
                    (exp_ineq_table(&rows), serde_json::to_value(&rows)?)
                }
                ExperimentKind::OneArm => {
                    let rows = one_arm_trend(&cfg)?;
                    (arm_trend_table(&rows), serde_json::to_value(&rows)?)
                }
            };
            write_table(&table, out.as_deref())?;
            if out.is_some() {
                print_json(&json!({ "name": cfg.name, "rows": summary }))?;
            }
        }
    }
    Ok(())
}

fn run_compare(cmd: CompareCmd) -> Result<()> {
    match cmd {
        CompareCmd::Pi { n, m } => {
            let ms: Vec<u64> = match m {
                Some(m) => vec![m],
                None => (0..=n).collect(),
            };
            let mut rows = Vec::new();
            for m in ms {
                let pi = pi_ratio(n, m)?;
                rows.push(vec![n.to_string(), m.to_string(), format!("{pi}"), (pi <= 2.0).to_string()]);
            }
            let header = ["n", "m", "pi", "bound_ok"].iter().map(|s| s.to_string()).collect();
            write_table(&Table { header, rows }, None)?;
        }
        CompareCmd::Bounds { nmax } => {
            let r = check_pi_bounds(nmax)?;
            let mut rows: Vec<Vec<String>> = r
                .upper_violations
                .iter()
                .map(|v| vec![v.n.to_string(), v.m.to_string(), format!("{}", v.pi), "false".into()])
                .collect();
            rows.extend(
                r.lower_violations
                    .iter()
                    .map(|v| vec![v.n.to_string(), v.m.to_string(), format!("{}", v.pi), "false".into()]),
            );
            let header = ["n", "m", "pi", "bound_ok"].iter().map(|s| s.to_string()).collect();
            write_table(&Table { header, rows }, None)?;
            eprintln!(
                "{}",
                serde_json::to_string(&json!({
                    "n_max": r.n_max,
                    "entries": r.entries,
                    "ok": r.ok(),
                    "max_pi": r.max_pi,
                    "max_recursion_error": r.max_recursion_error,
                    "max_lgamma_gap": r.max_lgamma_gap,
                }))?
            );
        }
        CompareCmd::Empirical { event, n, rho, k, m, seed } => {
            let event = match event {
                EventArg::Empty => ComparisonEvent::Empty,
                EventArg::Crossing => ComparisonEvent::Crossing,
            };
            let rep = empirical_comparison(&ComparisonSpec { event, n, rho, k, m, seed }, None)?;
            print_json(&serde_json::to_value(&rep)?)?;
        }
    }
    Ok(())
}
