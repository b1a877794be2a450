//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rayon::prelude::*;
use vorperc::compare::check_pi_bounds;
use vorperc::crossing::{check_duality, quenched_probability_exact, quenched_probability_mc, Coloring, CrossingQuery};
use vorperc::experiments::{
    deviation_table, exp_box_crossing, exp_concentration, exp_efron_stein, exp_exp_inequality, one_arm_trend,
    BoxSpec, ExperimentConfig,
};
use vorperc::explore::{default_inner, revealment_bound_exact, Explorer};
use vorperc::geom::{build_tessellation, sample_binomial, Rect, Tessellation};
use vorperc::influence::{influences_exact, influences_mc};
use vorperc::rng::derive;

const SEED: u64 = 0x5eed_2024;

fn tess(n: u64, rho: f64, seed: u64) -> Tessellation {
    build_tessellation(&sample_binomial(&Rect::new(rho, n as f64).unwrap(), n, seed).unwrap()).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn duality() -> Outcome {
    let holds = (0..10_000u64)
        .into_par_iter()
        .filter(|&i| {
            let s = derive(SEED ^ 1, i);
            let t = tess(1 + s % 300, 1.0, s);
            check_duality(&t, &Coloring::random(t.len(), derive(s, 1)), &t.config().window).unwrap()
        })
        .count();
    Outcome { pass: holds == 10_000, detail: format!("{holds}/10000 instances satisfy red LR xor blue TB") }
}

fn within(est: f64, exact: f64, m: u64, k: f64) -> bool {
    let sd = (exact * (1.0 - exact) / m as f64).sqrt();
    (est - exact).abs() <= k * sd
}

/// Returns (criterion 2 outcome, total instances, ΣInf² <= 1 violations).
fn exact_oracle() -> (Outcome, u64, u64) {
    let m = 100_000;
    let res: Vec<(bool, usize, usize, bool)> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let s = derive(SEED ^ 2, i);
            let t = tess(4 + i % 13, [1.0, 0.5, 2.0][i as usize % 3], s);
            let q = CrossingQuery::red_horizontal(t.config().window);
            let e = quenched_probability_exact(&t, &q).unwrap().value;
            let mc = quenched_probability_mc(&t, &q, m, derive(s, 1)).unwrap().value;
            let ie = influences_exact(&t, &q).unwrap();
            let im = influences_mc(&t, &q, m, derive(s, 2)).unwrap();
            let ok = ie.values.iter().zip(&im.values).filter(|(e, x)| within(**x, **e, m, 4.0)).count();
            let bounded = ie.sum_sq_scaled() <= 1u128 << (2 * t.len());
            (within(mc, e, m, 4.0), ok, ie.len(), bounded)
        })
        .collect();
    let good = res.iter().filter(|r| r.0).count();
    let ok: usize = res.iter().map(|r| r.1).sum();
    let total: usize = res.iter().map(|r| r.2).sum();
    let viol = res.iter().filter(|r| !r.3).count() as u64;
    let frac = ok as f64 / total as f64;
    (
        Outcome {
            pass: good >= 48 && frac >= 0.95,
            detail: format!("{good}/50 quenched estimates within 4 sd; {ok}/{total} influence entries ({:.2}%)", 100.0 * frac),
        },
        50,
        viol,
    )
}

fn schramm_steif() -> (Outcome, u64, u64) {
    let res: Vec<(bool, bool)> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let s = derive(SEED ^ 3, i);
            let t = tess(2 + i % 13, [1.0, 0.7, 1.5][i as usize % 3], s);
            let inner = default_inner(&t.config().window);
            let x = Explorer::new(&t, &inner).unwrap().default_segment_x();
            let b = revealment_bound_exact(&t, &inner, x).unwrap();
            (b.holds(), b.sum_sq_scaled <= 1u128 << (2 * t.len()))
        })
        .collect();
    let viol = res.iter().filter(|r| !r.0).count();
    let bound_viol = res.iter().filter(|r| !r.1).count() as u64;
    (
        Outcome { pass: viol == 0, detail: format!("{viol} violations of sum Inf^2 <= delta over 200 instances (exact, scaled by 4^n)") },
        200,
        bound_viol,
    )
}

fn pi_bounds() -> Outcome {
    let start = Instant::now();
    let r = check_pi_bounds(2000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: r.ok() && r.max_recursion_error <= 1e-12 && secs <= 10.0,
        detail: format!(
            "{} upper and {} lower violations over {} entries; recursion error {:.2e}; max pi {:.6}; {:.2} s",
            r.upper_violations.len(),
            r.lower_violations.len(),
            r.entries,
            r.max_recursion_error,
            r.max_pi,
            secs
        ),
    }
}

fn symmetry() -> Outcome {
    let mut c = ExperimentConfig::new(vec![1000], 64, 1024, SEED ^ 6);
    c.boxes = vec![BoxSpec::whole(1.0)];
    let r = &exp_box_crossing(&c).unwrap()[0];
    Outcome {
        pass: r.indicator_draws >= 1 << 16 && (r.estimate - 0.5).abs() <= 0.02,
        detail: format!("estimate {:.4} (se {:.4}) from {} draws", r.estimate, r.se, r.indicator_draws),
    }
}

fn box_crossing() -> Outcome {
    let mut c = ExperimentConfig::new(vec![2000], 400, 256, SEED ^ 7);
    c.rho = 3.0;
    c.boxes = vec![BoxSpec { rho: 3.0, area_frac: 0.25, cx: 0.0, cy: 0.0 }];
    let r = &exp_box_crossing(&c).unwrap()[0];
    Outcome {
        pass: r.estimate > 0.05 && r.estimate < 0.95 && r.ci_halfwidth() <= 0.02,
        detail: format!("estimate {:.4}, CI half-width {:.4}", r.estimate, r.ci_halfwidth()),
    }
}

fn concentration() -> Outcome {
    let mut c = ExperimentConfig::new(vec![64, 256, 1024, 4096], 100, 1024, SEED ^ 8);
    c.quantiles = vec![0.9];
    let rows = exp_concentration(&c).unwrap();
    let q: Vec<f64> = rows.iter().map(|r| r.quantiles[0].1).collect();
    let pass = q.windows(2).all(|w| w[1] < w[0]);
    Outcome { pass, detail: format!("q90 of |Z - 1/2| over n = 64, 256, 1024, 4096: {}", fmt_list(&q)) }
}

fn efron_stein() -> Outcome {
    let r = &exp_efron_stein(&ExperimentConfig::new(vec![12], 500, 1, SEED ^ 9)).unwrap()[0];
    Outcome {
        pass: r.holds,
        detail: format!("Var(Z) {:.5} vs E[sum Inf^2] {:.5} (+2 se {:.5})", r.var_z, r.mean_sum_sq, 2.0 * r.combined_se),
    }
}

fn exp_inequality() -> Outcome {
    let mut c = ExperimentConfig::new(vec![12], 500, 1, SEED ^ 10);
    c.lambdas = vec![0.5, 1.0, 2.0];
    let rows = exp_exp_inequality(&c).unwrap();
    let detail = rows
        .iter()
        .map(|r| format!("lambda {}: {:.3e} <= {:.3e} + {:.1e}", r.lambda, r.lhs, r.rhs, 2.0 * r.combined_se))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass: rows.iter().all(|r| r.holds), detail }
}

fn one_arm() -> Outcome {
    // The arm probabilities sit within 1e-3 of one on this grid, so each
    // replica needs enough colourings to resolve the deficit.
    let rows = one_arm_trend(&ExperimentConfig::new(vec![256, 1024, 4096, 16384], 40, 1 << 16, SEED ^ 11)).unwrap();
    let med: Vec<f64> = rows.iter().map(|r| r.median).collect();
    let deficit: Vec<String> = med.iter().map(|m| format!("{:.2e}", 1.0 - m)).collect();
    Outcome {
        pass: med.windows(2).all(|w| w[1] < w[0]),
        detail: format!("1 - median one-arm estimate over n = 256, 1024, 4096, 16384: {}", deficit.join(", ")),
    }
}

fn determinism() -> Outcome {
    let run = |threads| {
        let mut c = ExperimentConfig::new(vec![16, 200, 800], 40, 512, SEED ^ 12);
        c.t_grid = vec![0.05, 0.1];
        c.lambdas = vec![1.0];
        c.threads = Some(threads);
        deviation_table(&exp_concentration(&c).unwrap()).to_csv().unwrap()
    };
    let base = run(1);
    let same = [2usize, 4, 7].iter().all(|&t| run(t) == base);
    Outcome { pass: same, detail: format!("concentration CSV ({} bytes) with 1, 2, 4 and 7 workers", base.len()) }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failures += 1;
        }
        println!("[{status}] {id:>2} {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    };
    let mut bound_checked = 0;
    let mut bound_viol = 0;
    report(1, "duality", &mut duality);
    report(2, "exact oracle agreement", &mut || {
        let (o, k, v) = exact_oracle();
        bound_checked += k;
        bound_viol += v;
        o
    });
    report(3, "influence-revealment bound", &mut || {
        let (o, k, v) = schramm_steif();
        bound_checked += k;
        bound_viol += v;
        o
    });
    report(4, "sum of squared influences at most 1", &mut || Outcome {
        pass: bound_viol == 0,
        detail: format!("{bound_viol} violations over {bound_checked} exact instances"),
    });
    report(5, "count-law ratio bounds", &mut pi_bounds);
    report(6, "square crossing symmetry", &mut symmetry);
    report(7, "box crossing", &mut box_crossing);
    report(8, "concentration trend", &mut concentration);
    report(9, "variance bound", &mut efron_stein);
    report(10, "exponential variance inequality", &mut exp_inequality);
    report(11, "one-arm decay trend", &mut one_arm);
    report(12, "determinism across workers", &mut determinism);
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
