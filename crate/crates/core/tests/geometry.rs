use proptest::prelude::*;
use vorperc::geom::{build_tessellation, polygon_area, sample_binomial, sample_poisson, Configuration, Point, Rect};
use vorperc::rng::stream;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cells_tile_the_window(seed in 0u64..100_000, n in 1u64..400, rho in 0.2f64..5.0) {
        let w = Rect::new(rho, n as f64).unwrap();
        let t = build_tessellation(&sample_binomial(&w, n, seed).unwrap()).unwrap();
        let total: f64 = (0..t.len()).map(|i| polygon_area(t.cell(i))).sum();
        prop_assert!((total - w.area).abs() <= 1e-9 * w.area);
        for i in 0..t.len() {
            for j in t.neighbors(i) {
                prop_assert!(t.are_adjacent(j, i));
            }
        }
    }

    #[test]
    fn probes_land_in_the_nearest_nucleus_cell(seed in 0u64..100_000, n in 2u64..200) {
        let w = Rect::new(1.0, n as f64).unwrap();
        let t = build_tessellation(&sample_binomial(&w, n, seed).unwrap()).unwrap();
        let b = w.bounds();
        let mut rng = stream(seed, 77);
        for _ in 0..50 {
            let p = Point::new(rng.random_range(b.xmin..b.xmax), rng.random_range(b.ymin..b.ymax));
            let d: Vec<f64> = t.nuclei().iter().map(|u| u.dist(p)).collect();
            let best = d.iter().copied().fold(f64::MAX, f64::min);
            let cell = t.locate(p).unwrap();
            prop_assert!(d[cell] <= best + 1e-9, "probe in cell {} at distance {} > {}", cell, d[cell], best);
        }
    }

    #[test]
    fn delaunay_circles_are_empty(seed in 0u64..100_000, n in 3u64..150) {
        let w = Rect::new(1.0, n as f64).unwrap();
        let t = build_tessellation(&sample_binomial(&w, n, seed).unwrap()).unwrap();
        prop_assert!(t.circumcircle_violations().is_empty());
    }

    #[test]
    fn translation_preserves_adjacency(seed in 0u64..100_000, n in 2u64..100, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let c = sample_binomial(&Rect::new(1.0, n as f64).unwrap(), n, seed).unwrap();
        let moved = Configuration::from_points(
            c.points.iter().map(|p| p.translate(dx, dy)).collect(),
            c.window.translated(dx, dy),
        ).unwrap();
        let (a, b) = (build_tessellation(&c).unwrap(), build_tessellation(&moved).unwrap());
        for i in 0..a.len() {
            prop_assert_eq!(a.neighbors(i).collect::<Vec<_>>(), b.neighbors(i).collect::<Vec<_>>());
            prop_assert!((polygon_area(a.cell(i)) - polygon_area(b.cell(i))).abs() < 1e-8);
        }
    }
}

#[test]
fn quarter_rotation_preserves_cells() {
    for seed in 0..30 {
        let c = sample_binomial(&Rect::new(2.5, 90.0).unwrap(), 90, seed).unwrap();
        let r = Configuration::from_points(c.points.iter().map(|p| p.rotate_quarter()).collect(), c.window.rotate_quarter()).unwrap();
        let (a, b) = (build_tessellation(&c).unwrap(), build_tessellation(&r).unwrap());
        for i in 0..a.len() {
            assert_eq!(a.neighbors(i).collect::<Vec<_>>(), b.neighbors(i).collect::<Vec<_>>());
            let sa = a.side_touch(i);
            let sb = b.side_touch(i);
            // (x, y) -> (-y, x): bottom -> right, right -> top, top -> left, left -> bottom.
            assert_eq!((sa.bottom, sa.right, sa.top, sa.left), (sb.right, sb.top, sb.left, sb.bottom));
        }
    }
}

#[test]
fn poisson_counts_have_matching_mean_and_variance() {
    let w = Rect::new(1.0, 50.0).unwrap();
    let counts: Vec<f64> = (0..4000).map(|s| sample_poisson(&w, s).unwrap().len() as f64).collect();
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (k - 1.0);
    assert!((mean - 50.0).abs() < 4.0 * (50.0f64 / k).sqrt(), "mean {mean}");
    // Var of the sample variance for Poisson(λ) is about (λ + 2λ²)/k.
    assert!((var - 50.0).abs() < 4.0 * ((50.0 + 2.0 * 2500.0) / k).sqrt(), "var {var}");
}

#[test]
fn poisson_count_distribution_matches_cdf() {
    use statrs::distribution::{DiscreteCDF, Poisson};
    let w = Rect::new(1.0, 6.0).unwrap();
    let k = 20_000u64;
    let counts: Vec<u64> = (0..k).map(|s| sample_poisson(&w, s).unwrap().len() as u64).collect();
    let d = Poisson::new(6.0).unwrap();
    for x in [2u64, 4, 6, 8, 10] {
        let emp = counts.iter().filter(|&&c| c <= x).count() as f64 / k as f64;
        let p = d.cdf(x);
        assert!((emp - p).abs() < 4.0 * (p * (1.0 - p) / k as f64).sqrt(), "x={x}: {emp} vs {p}");
    }
}

#[test]
fn binomial_points_are_uniform_over_quarters() {
    let w = Rect::new(1.0, 4000.0).unwrap();
    let c = sample_binomial(&w, 4000, 5).unwrap();
    let q = c.points.iter().filter(|p| p.x < 0.0 && p.y < 0.0).count() as f64;
    assert!((q - 1000.0).abs() < 4.0 * (4000.0f64 * 0.25 * 0.75).sqrt());
}
