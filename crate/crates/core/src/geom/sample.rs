use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Point, Rect};
use crate::error::{Error, Result};
use crate::rng::{derive, stream, StreamRng};

const DUPLICATE_TAG: u64 = 0xd0b1e;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Exactly `n` independent uniform points.
    Binomial { n: u64 },
    /// Unit-rate Poisson process restricted to the window.
    Poisson,
    /// Points supplied by the caller.
    Fixed,
}

/// A finite point set together with the window it lives in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<Point>,
    pub window: Rect,
    pub model: Model,
    pub seed: u64,
}

impl Configuration {
    /// Wraps caller-supplied points. Points must lie in the closed window and
    /// be pairwise distinct.
    pub fn from_points(points: Vec<Point>, window: Rect) -> Result<Configuration> {
        check_window(&window)?;
        let b = window.bounds();
        let tol = 1e-12 * window.diameter();
        for (index, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) || !b.contains(*p, tol) {
                return Err(Error::PointOutsideWindow { index, x: p.x, y: p.y });
            }
        }
        if let Some((first, second)) = first_duplicate(&points) {
            return Err(Error::DuplicatePoint { first, second });
        }
        Ok(Configuration { points, window, model: Model::Fixed, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points falling in the closed rectangle `sub`, with `sub` as window.
    pub fn restricted_to(&self, sub: &Rect) -> Configuration {
        let b = sub.bounds();
        let points = self.points.iter().copied().filter(|p| b.contains(*p, 0.0)).collect();
        Configuration { points, window: *sub, model: Model::Fixed, seed: self.seed }
    }

    pub fn count_in(&self, sub: &Rect) -> usize {
        let b = sub.bounds();
        self.points.iter().filter(|p| b.contains(**p, 0.0)).count()
    }
}

fn check_window(window: &Rect) -> Result<()> {
    Rect::centered_at(window.rho, window.area, window.center).map(|_| ())
}

fn uniform_point(rng: &mut StreamRng, window: &Rect) -> Point {
    let b = window.bounds();
    let x = b.xmin + rng.random::<f64>() * b.width();
    let y = b.ymin + rng.random::<f64>() * b.height();
    Point::new(x.min(b.xmax), y.min(b.ymax))
}

/// Index pair of the first exact duplicate, if any.
fn first_duplicate(points: &[Point]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i].x.total_cmp(&points[j].x).then(points[i].y.total_cmp(&points[j].y)).then(i.cmp(&j))
    });
    order.windows(2).find_map(|w| {
        let (i, j) = (w[0], w[1]);
        (points[i] == points[j]).then_some((i.min(j), i.max(j)))
    })
}

fn uniform_points(window: &Rect, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = stream(seed, 0);
    let mut points: Vec<Point> = (0..count).map(|_| uniform_point(&mut rng, window)).collect();
    // Coincident points have probability zero; redraw the later one from a
    // sub-seed so the result stays a function of the seed alone.
    let mut attempt = 0u64;
    while let Some((_, second)) = first_duplicate(&points) {
        let mut sub = stream(derive(seed, DUPLICATE_TAG), (second as u64) << 20 | attempt);
        points[second] = uniform_point(&mut sub, window);
        attempt += 1;
    }
    points
}

/// `n` independent uniform points in `window`.
pub fn sample_binomial(window: &Rect, n: u64, seed: u64) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::NoPoints);
    }
    check_window(window)?;
    let points = uniform_points(window, n as usize, seed);
    Ok(Configuration { points, window: *window, model: Model::Binomial { n }, seed })
}

/// Unit-rate Poisson process restricted to `window`.
pub fn sample_poisson(window: &Rect, seed: u64) -> Result<Configuration> {
    check_window(window)?;
    let poisson = Poisson::new(window.area).map_err(|e| Error::Invalid(e.to_string()))?;
    let count = poisson.sample(&mut stream(derive(seed, 1), 0)) as usize;
    let points = uniform_points(window, count, seed);
    Ok(Configuration { points, window: *window, model: Model::Poisson, seed })
}

/// Poisson sample used to emulate a half-plane tessellation around a target
/// rectangle whose left side lies on the boundary: the window extends the
/// target by `4 * area^(1/4)` to the right, top and bottom.
pub fn sample_poisson_padded(target: &Rect, seed: u64) -> Result<Configuration> {
    check_window(target)?;
    let pad = 4.0 * target.area.powf(0.25);
    let b = target.bounds();
    let window = Rect::from_bounds(b.xmin, b.xmax + pad, b.ymin - pad, b.ymax + pad)?;
    sample_poisson(&window, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_single_point_is_reproducible() {
        let s = Rect::unit_square();
        let a = sample_binomial(&s, 1, 7).unwrap();
        let b = sample_binomial(&s, 1, 7).unwrap();
        assert_eq!(a.points.len(), 1);
        assert_eq!(a.points[0].x.to_bits(), b.points[0].x.to_bits());
        assert_eq!(a.points[0].y.to_bits(), b.points[0].y.to_bits());
        assert!(s.bounds().contains(a.points[0], 0.0));
    }

    #[test]
    fn binomial_contained_in_r3() {
        let r = Rect::new(3.0, 1.0).unwrap();
        let c = sample_binomial(&r, 300, 1).unwrap();
        assert_eq!(c.len(), 300);
        let (hx, hy) = (3f64.sqrt() / 2.0, 1.0 / (2.0 * 3f64.sqrt()));
        assert!(c.points.iter().all(|p| p.x.abs() <= hx && p.y.abs() <= hy));
    }

    #[test]
    fn binomial_rejects_zero_and_bad_window() {
        assert!(matches!(sample_binomial(&Rect::unit_square(), 0, 1), Err(Error::NoPoints)));
        let bad = Rect { rho: 1.0, area: f64::NAN, center: Point::new(0.0, 0.0) };
        assert!(sample_binomial(&bad, 3, 1).is_err());
    }

    #[test]
    fn poisson_rejects_zero_area() {
        let bad = Rect { rho: 1.0, area: 0.0, center: Point::new(0.0, 0.0) };
        assert!(sample_poisson(&bad, 1).is_err());
    }

    #[test]
    fn quadrant_counts_within_binomial_tail() {
        // each quadrant count ~ Binomial(n, 1/4): sd = sqrt(n * 3/16)
        let n = 10_000u64;
        let sd = (n as f64 * 3.0 / 16.0).sqrt();
        for seed in 0..5 {
            let c = sample_binomial(&Rect::unit_square(), n, seed).unwrap();
            let mut q = [0usize; 4];
            for p in &c.points {
                q[(p.x >= 0.0) as usize * 2 + (p.y >= 0.0) as usize] += 1;
            }
            for k in q {
                assert!((k as f64 - n as f64 / 4.0).abs() <= 4.0 * sd, "{q:?}");
            }
        }
    }

    #[test]
    fn duplicates_rejected_for_user_points() {
        let pts = vec![Point::new(0.1, 0.1), Point::new(0.2, 0.2), Point::new(0.1, 0.1)];
        assert!(matches!(
            Configuration::from_points(pts, Rect::unit_square()),
            Err(Error::DuplicatePoint { first: 0, second: 2 })
        ));
        let outside = vec![Point::new(0.6, 0.0)];
        assert!(Configuration::from_points(outside, Rect::unit_square()).is_err());
    }

    #[test]
    fn padded_window_is_flush_left() {
        let t = Rect::anchored_left(1.5, 64.0).unwrap();
        let c = sample_poisson_padded(&t, 3).unwrap();
        let (w, tb) = (c.window.bounds(), t.bounds());
        assert!((w.xmin - tb.xmin).abs() < 1e-12);
        assert!((w.xmax - tb.xmax - 4.0 * 64f64.powf(0.25)).abs() < 1e-9);
    }
}
