use vorperc::crossing::quenched_probability_mc;
use vorperc::crossing::CrossingQuery;
use vorperc::experiments::{
    box_table, deviation_table, efron_stein_table, exp_box_crossing, exp_concentration, exp_efron_stein,
    exp_exp_inequality, exp_ineq_table, one_arm_trend, arm_trend_table, with_threads, BoxSpec, ExperimentConfig,
};
use vorperc::geom::{build_tessellation, sample_binomial, Rect};
use vorperc::influence::influences_mc;

fn all_tables(threads: usize) -> Vec<String> {
    let mut c = ExperimentConfig::new(vec![5, 30, 90], 16, 300, 2024);
    c.t_grid = vec![0.05, 0.2];
    c.lambdas = vec![0.5, 2.0];
    c.threads = Some(threads);
    let mut out = vec![deviation_table(&exp_concentration(&c).unwrap()).to_csv().unwrap()];
    c.boxes = vec![BoxSpec::whole(1.0), BoxSpec { rho: 2.0, area_frac: 0.25, cx: 0.1, cy: 0.2 }];
    out.push(box_table(&exp_box_crossing(&c).unwrap()).to_csv().unwrap());
    c.half_plane = true;
    c.rho = 1.5;
    c.boxes = vec![];
    out.push(box_table(&exp_box_crossing(&c).unwrap()).to_csv().unwrap());
    let mut e = ExperimentConfig::new(vec![4, 9], 12, 1, 5);
    e.lambdas = vec![1.0];
    e.threads = Some(threads);
    out.push(efron_stein_table(&exp_efron_stein(&e).unwrap()).to_csv().unwrap());
    out.push(exp_ineq_table(&exp_exp_inequality(&e).unwrap()).to_csv().unwrap());
    let mut a = ExperimentConfig::new(vec![64, 256], 6, 200, 8);
    a.threads = Some(threads);
    out.push(arm_trend_table(&one_arm_trend(&a).unwrap()).to_csv().unwrap());
    out
}

#[test]
fn experiment_csv_is_identical_across_worker_counts() {
    let one = all_tables(1);
    for t in [2, 5] {
        assert_eq!(one, all_tables(t));
    }
}

#[test]
fn estimators_are_identical_across_worker_counts() {
    let t = build_tessellation(&sample_binomial(&Rect::new(1.0, 300.0).unwrap(), 300, 4).unwrap()).unwrap();
    let q = CrossingQuery::red_horizontal(t.config().window);
    let run = |threads| {
        with_threads(Some(threads), || {
            (quenched_probability_mc(&t, &q, 5000, 9).unwrap(), influences_mc(&t, &q, 700, 9).unwrap())
        })
        .unwrap()
    };
    let base = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(base, run(threads));
    }
}
