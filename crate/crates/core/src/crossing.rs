//! Colourings, crossing events and quenched crossing probabilities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{random_words, words_for, ConnectivityEvent, Dyadic, EventBuilder, Scratch};
use crate::geom::{polygon_meets_box, segment_meets_box, Bounds, Rect, Tessellation};
use crate::stats::wilson_halfwidth;

pub use crate::event::Color;

/// One colour per cell, `true` = red.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub bits: Vec<bool>,
    pub seed: Option<u64>,
}

impl Coloring {
    pub fn from_bits(bits: Vec<bool>) -> Coloring {
        Coloring { bits, seed: None }
    }

    pub fn uniform(cells: usize, red: bool) -> Coloring {
        Coloring::from_bits(vec![red; cells])
    }

    /// Fair independent colours drawn from `seed`.
    pub fn random(cells: usize, seed: u64) -> Coloring {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words = vec![0u64; words_for(cells)];
        random_words(&mut rng, cells, &mut words);
        let bits = (0..cells).map(|i| crate::event::bit(&words, i)).collect();
        Coloring { bits, seed: Some(seed) }
    }

    /// Colouring of the low `cells` bits of `mask`.
    pub fn from_mask(cells: usize, mask: u64) -> Coloring {
        Coloring::from_bits((0..cells).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_red(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// The colouring with bit `j` replaced by its complement.
    pub fn flipped(&self, j: usize) -> Coloring {
        let mut c = self.clone();
        c.bits[j] = !c.bits[j];
        c
    }

    pub fn inverted(&self) -> Coloring {
        Coloring { bits: self.bits.iter().map(|b| !b).collect(), seed: self.seed }
    }

    pub(crate) fn check(&self, tess: &Tessellation) -> Result<()> {
        if self.bits.len() != tess.len() {
            return Err(Error::ColoringLength { expected: tess.len(), got: self.bits.len() });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Left side to right side.
    Horizontal,
    /// Top side to bottom side.
    Vertical,
}

/// A crossing of `target` (which must lie in the tessellation window) by
/// cells of `color`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingQuery {
    pub target: Rect,
    pub direction: Direction,
    pub color: Color,
}

impl CrossingQuery {
    pub fn new(target: Rect, direction: Direction, color: Color) -> CrossingQuery {
        CrossingQuery { target, direction, color }
    }

    pub fn red_horizontal(target: Rect) -> CrossingQuery {
        CrossingQuery::new(target, Direction::Horizontal, Color::Red)
    }

    /// The dual query: other colour, other direction.
    pub fn dual(&self) -> CrossingQuery {
        let color = match self.color {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        };
        let direction = match self.direction {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        };
        CrossingQuery { target: self.target, direction, color }
    }
}

pub(crate) fn check_inside(tess: &Tessellation, target: &Rect) -> Result<Bounds> {
    let b = target.bounds();
    if !tess.window().contains_box(&b, tess.tol()) {
        return Err(Error::OutsideWindow { xmin: b.xmin, xmax: b.xmax, ymin: b.ymin, ymax: b.ymax });
    }
    Ok(b)
}

/// Cell-level connectivity restricted to the closed box `region`: member
/// cells meet `region`, two members are linked when their shared edge meets
/// `region`. Sources and sinks are members meeting `from` / `to`.
pub fn region_event(
    tess: &Tessellation,
    region: &Bounds,
    from: &[Bounds],
    to: &[Bounds],
    color: Color,
) -> ConnectivityEvent {
    let tol = tess.tol();
    let mut b = EventBuilder::per_cell(tess.len(), color);
    let mut member = vec![false; tess.len()];
    for (c, m) in member.iter_mut().enumerate() {
        let poly = tess.cell(c);
        if polygon_meets_box(poly, region, tol) {
            *m = true;
            if from.iter().any(|f| polygon_meets_box(poly, f, tol)) {
                b.set_source(c);
            }
            if to.iter().any(|t| polygon_meets_box(poly, t, tol)) {
                b.set_sink(c);
            }
        }
    }
    for e in tess.edges() {
        let (u, v) = (e.a as usize, e.b as usize);
        if member[u] && member[v] && segment_meets_box(e.p, e.q, region, tol) {
            b.add_edge(u, v);
        }
    }
    b.build()
}

/// Prepares the crossing event of `query` on `tess`.
pub fn crossing_event(tess: &Tessellation, query: &CrossingQuery) -> Result<ConnectivityEvent> {
    let t = check_inside(tess, &query.target)?;
    let (from, to) = match query.direction {
        Direction::Horizontal => (t.left_side(), t.right_side()),
        Direction::Vertical => (t.top_side(), t.bottom_side()),
    };
    Ok(region_event(tess, &t, &[from], &[to], query.color))
}

/// Whether `coloring` contains the crossing described by `query`.
pub fn detect_crossing(tess: &Tessellation, coloring: &Coloring, query: &CrossingQuery) -> Result<bool> {
    coloring.check(tess)?;
    crossing_event(tess, query)?.occurs_bools(&coloring.bits)
}

/// Exactly one of {red horizontal crossing, blue vertical crossing} of
/// `target` occurs; returns their exclusive or.
pub fn check_duality(tess: &Tessellation, coloring: &Coloring, target: &Rect) -> Result<bool> {
    let red = detect_crossing(tess, coloring, &CrossingQuery::red_horizontal(*target))?;
    let blue = detect_crossing(tess, coloring, &CrossingQuery::new(*target, Direction::Vertical, Color::Blue))?;
    Ok(red ^ blue)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// Conditional probability of an event given the tessellation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchedEstimate {
    pub value: f64,
    pub method: Method,
    pub colorings_used: u64,
    /// Half-width of the Wilson 95% interval; zero for exact values.
    pub ci_halfwidth: f64,
    /// Present for exact values.
    pub exact: Option<Dyadic>,
}

impl QuenchedEstimate {
    /// Standard error `sqrt(p(1-p)/m)` evaluated at `p`.
    pub fn binomial_sd_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.colorings_used as f64).sqrt()
    }
}

pub fn estimate_exact(event: &ConnectivityEvent) -> Result<QuenchedEstimate> {
    let d = event.probability_exact()?;
    Ok(QuenchedEstimate {
        value: d.value(),
        method: Method::Exact,
        colorings_used: 1 << d.log2_den,
        ci_halfwidth: 0.0,
        exact: Some(d),
    })
}

pub fn estimate_mc(event: &ConnectivityEvent, m: u64, seed: u64) -> Result<QuenchedEstimate> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let hits = event.count_mc(m, seed);
    Ok(QuenchedEstimate {
        value: hits as f64 / m as f64,
        method: Method::MonteCarlo,
        colorings_used: m,
        ci_halfwidth: wilson_halfwidth(hits, m),
        exact: None,
    })
}

/// `P(query | η)` by enumerating all colourings (at most 24 cells).
pub fn quenched_probability_exact(tess: &Tessellation, query: &CrossingQuery) -> Result<QuenchedEstimate> {
    estimate_exact(&crossing_event(tess, query)?)
}

/// `P(query | η)` from `m` sampled colourings.
pub fn quenched_probability_mc(tess: &Tessellation, query: &CrossingQuery, m: u64, seed: u64) -> Result<QuenchedEstimate> {
    estimate_mc(&crossing_event(tess, query)?, m, seed)
}

/// Evaluates a prepared event on a [`Coloring`].
pub fn event_occurs(event: &ConnectivityEvent, coloring: &Coloring) -> Result<bool> {
    event.occurs_bools(&coloring.bits)
}

/// Reusable evaluation of one prepared event over many colourings.
pub struct CrossingDetector<'a> {
    event: &'a ConnectivityEvent,
    scratch: Scratch,
}

impl<'a> CrossingDetector<'a> {
    pub fn new(event: &'a ConnectivityEvent) -> Self {
        CrossingDetector { event, scratch: Scratch::default() }
    }

    pub fn occurs(&mut self, words: &[u64]) -> bool {
        self.event.occurs(words, &mut self.scratch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{build_tessellation, Configuration, Point};

    fn tess(points: &[(f64, f64)]) -> Tessellation {
        let pts = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
        build_tessellation(&Configuration::from_points(pts, Rect::unit_square()).unwrap()).unwrap()
    }

    fn s() -> Rect {
        Rect::unit_square()
    }

    #[test]
    fn vertical_split() {
        let t = tess(&[(-0.25, 0.0), (0.25, 0.0)]);
        let q = CrossingQuery::red_horizontal(s());
        assert!(detect_crossing(&t, &Coloring::from_bits(vec![true, true]), &q).unwrap());
        assert!(!detect_crossing(&t, &Coloring::from_bits(vec![true, false]), &q).unwrap());
        let e = quenched_probability_exact(&t, &q).unwrap();
        assert_eq!(e.exact, Some(Dyadic { count: 1, log2_den: 2 }));
        assert_eq!(e.value, 0.25);
    }

    #[test]
    fn horizontal_split() {
        let t = tess(&[(0.0, 0.25), (0.0, -0.25)]);
        let q = CrossingQuery::red_horizontal(s());
        assert!(detect_crossing(&t, &Coloring::from_bits(vec![true, false]), &q).unwrap());
        assert_eq!(quenched_probability_exact(&t, &q).unwrap().value, 0.75);
    }

    #[test]
    fn single_cell_half() {
        let t = tess(&[(0.3, 0.1)]);
        let q = CrossingQuery::red_horizontal(s());
        assert_eq!(quenched_probability_exact(&t, &q).unwrap().value, 0.5);
        let mc = quenched_probability_mc(&t, &q, 10_000, 9).unwrap();
        assert!((mc.value - 0.5).abs() <= mc.ci_halfwidth);
    }

    #[test]
    fn duality_on_two_cells() {
        let t = tess(&[(-0.25, 0.0), (0.25, 0.0)]);
        for mask in 0..4 {
            assert!(check_duality(&t, &Coloring::from_mask(2, mask), &s()).unwrap());
        }
    }

    #[test]
    fn errors() {
        let t = tess(&[(-0.25, 0.0), (0.25, 0.0)]);
        let q = CrossingQuery::red_horizontal(s());
        assert!(matches!(
            detect_crossing(&t, &Coloring::from_bits(vec![true]), &q),
            Err(Error::ColoringLength { expected: 2, got: 1 })
        ));
        let big = CrossingQuery::red_horizontal(Rect::new(1.0, 2.0).unwrap());
        assert!(matches!(detect_crossing(&t, &Coloring::uniform(2, true), &big), Err(Error::OutsideWindow { .. })));
        assert!(matches!(quenched_probability_mc(&t, &q, 0, 1), Err(Error::NoSamples)));
    }

    #[test]
    fn sub_target_ignores_far_cells() {
        // three vertical strips; a target inside the middle strip only needs it
        let t = tess(&[(-0.35, 0.0), (0.0, 0.0), (0.35, 0.0)]);
        let inner = Rect::from_bounds(-0.1, 0.1, -0.2, 0.2).unwrap();
        let q = CrossingQuery::red_horizontal(inner);
        assert!(detect_crossing(&t, &Coloring::from_bits(vec![false, true, false]), &q).unwrap());
        assert_eq!(quenched_probability_exact(&t, &q).unwrap().value, 0.5);
    }
}
