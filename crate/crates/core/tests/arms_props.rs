use proptest::prelude::*;
use std::collections::VecDeque;
use vorperc::arms::{annulus_crossing_event, blue_circuit_indicator, linf_ball, one_arm_event, one_arm_indicator, AnnulusQuery, ArmQuery};
use vorperc::crossing::Coloring;
use vorperc::geom::{build_tessellation, polygon_meets_box, sample_binomial, segment_meets_box, Configuration, Point, Rect, Tessellation};

fn tess(n: u64, seed: u64) -> Tessellation {
    build_tessellation(&sample_binomial(&Rect::unit_square(), n, seed).unwrap()).unwrap()
}

/// Breadth-first search over red cells of `B(u,b) ∩ ambient`.
fn naive_arm(t: &Tessellation, c: &Coloring, q: &ArmQuery) -> bool {
    let tol = t.tol();
    let region = match linf_ball(q.center, q.b).intersect(&q.ambient.bounds()) {
        Some(r) => r,
        None => return false,
    };
    let src = match linf_ball(q.center, q.a).intersect(&q.ambient.bounds()) {
        Some(r) => r,
        None => return false,
    };
    let outer = linf_ball(q.center, q.b);
    let sinks: Vec<_> = outer.sides().iter().filter_map(|s| s.intersect(&q.ambient.bounds())).collect();
    let member = |i: usize| c.is_red(i) && polygon_meets_box(t.cell(i), &region, tol);
    let mut seen = vec![false; t.len()];
    let mut queue: VecDeque<usize> = (0..t.len()).filter(|&i| member(i) && polygon_meets_box(t.cell(i), &src, tol)).collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        if sinks.iter().any(|s| polygon_meets_box(t.cell(i), s, tol)) {
            return true;
        }
        for e in t.edges().iter().filter(|e| e.a as usize == i || e.b as usize == i) {
            let j = if e.a as usize == i { e.b as usize } else { e.a as usize };
            if !seen[j] && member(j) && segment_meets_box(e.p, e.q, &region, tol) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

#[test]
fn arm_matches_naive_search() {
    for seed in 0..200u64 {
        let t = tess(12 + seed % 30, seed);
        let c = Coloring::random(t.len(), seed);
        let u = Point::new(((seed % 7) as f64 - 3.0) / 7.0, ((seed % 5) as f64 - 2.0) / 5.0);
        let q = ArmQuery::new(u, 0.05 + 0.02 * (seed % 4) as f64, 0.3, Rect::unit_square()).unwrap();
        assert_eq!(one_arm_indicator(&t, &c, &q).unwrap(), naive_arm(&t, &c, &q), "seed {seed}");
    }
}

#[test]
fn annulus_crossing_equals_matching_arm() {
    for seed in 0..300u64 {
        let n = 20 + seed % 200;
        let w = Rect::new(1.0, n as f64).unwrap();
        let t = build_tessellation(&sample_binomial(&w, n, seed).unwrap()).unwrap();
        let c = Coloring::random(t.len(), seed);
        let b = w.bounds();
        // Centers in the bulk, on a side and at a corner.
        let center = match seed % 3 {
            0 => Point::new(0.0, 0.0),
            1 => Point::new(b.xmin, 0.0),
            _ => Point::new(b.xmax, b.ymax),
        };
        let q = AnnulusQuery::new(center, 0.15 * w.width() * (1 + seed % 3) as f64).unwrap();
        let arm = q.as_arm(w).unwrap();
        let crossing = annulus_crossing_event(&t, &q).unwrap().occurs_bools(&c.bits).unwrap();
        assert_eq!(crossing, one_arm_indicator(&t, &c, &arm).unwrap(), "seed {seed}");
        assert_eq!(blue_circuit_indicator(&t, &c, &q).unwrap(), !crossing);
    }
}

#[test]
fn uniform_colourings() {
    let t = tess(100, 3);
    let q = AnnulusQuery::new(Point::new(0.0, 0.0), 0.2).unwrap();
    assert!(blue_circuit_indicator(&t, &Coloring::uniform(t.len(), false), &q).unwrap());
    assert!(!blue_circuit_indicator(&t, &Coloring::uniform(t.len(), true), &q).unwrap());
    let arm = ArmQuery::new(Point::new(0.0, 0.0), 0.1, 0.4, Rect::unit_square()).unwrap();
    assert!(!one_arm_indicator(&t, &Coloring::uniform(t.len(), false), &arm).unwrap());
    assert!(one_arm_indicator(&t, &Coloring::uniform(t.len(), true), &arm).unwrap());
}

#[test]
fn corner_side_and_center_arms() {
    let s = Rect::unit_square();
    for seed in 0..50u64 {
        let t = tess(200, seed);
        let c = Coloring::random(t.len(), seed);
        for u in [Point::new(-0.5, -0.5), Point::new(0.5, 0.0), Point::new(0.0, 0.0)] {
            let q = ArmQuery::new(u, 0.05, 0.25, s).unwrap();
            assert_eq!(one_arm_indicator(&t, &c, &q).unwrap(), naive_arm(&t, &c, &q));
            // At a corner only a quarter of the ball is available, so fewer cells take part.
            let relevant = one_arm_event(&t, &q).unwrap().relevant_cells().iter().filter(|&&r| r).count();
            assert!(relevant > 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn longer_arm_implies_shorter(seed in 0u64..50_000, a in 0.02f64..0.1, b in 0.12f64..0.3, extra in 0.0f64..0.2) {
        let t = tess(150, seed);
        let c = Coloring::random(t.len(), seed);
        let u = Point::new(0.1, -0.05);
        let short = ArmQuery::new(u, a, b, Rect::unit_square()).unwrap();
        let long = ArmQuery::new(u, a, b + extra, Rect::unit_square()).unwrap();
        prop_assert!(!one_arm_indicator(&t, &c, &long).unwrap() || one_arm_indicator(&t, &c, &short).unwrap());
    }

    #[test]
    fn shifting_everything_preserves_arms(seed in 0u64..50_000, dx in -20.0f64..20.0, dy in -20.0f64..20.0) {
        let cfg = sample_binomial(&Rect::new(1.0, 100.0).unwrap(), 100, seed).unwrap();
        let moved = Configuration::from_points(
            cfg.points.iter().map(|p| p.translate(dx, dy)).collect(),
            cfg.window.translated(dx, dy),
        ).unwrap();
        let (t, tm) = (build_tessellation(&cfg).unwrap(), build_tessellation(&moved).unwrap());
        let c = Coloring::random(t.len(), seed);
        let u = Point::new(1.0, -0.5);
        let q = ArmQuery::new(u, 1.0, 3.5, cfg.window).unwrap();
        let qm = ArmQuery::new(u.translate(dx, dy), 1.0, 3.5, moved.window).unwrap();
        prop_assert_eq!(one_arm_indicator(&t, &c, &q).unwrap(), one_arm_indicator(&tm, &c, &qm).unwrap());
    }
}
