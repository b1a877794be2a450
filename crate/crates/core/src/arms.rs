//! One-arm events `V_u(a, b)` and annulus circuit events.
//!
//! `V_u(a, b)`: a red path inside the ambient rectangle from the l∞ ball
//! `B(u, a)` to the complement of `B(u, b)`. The annulus event at scale `s`
//! asks for a red path across the square annulus with inner side `s` and
//! outer side `3s`; its complement is a blue circuit around `u`.

use serde::{Deserialize, Serialize};

use crate::crossing::{estimate_exact, estimate_mc, region_event, Coloring, QuenchedEstimate};
use crate::error::{Error, Result};
use crate::event::{Color, ConnectivityEvent, EventBuilder};
use crate::geom::{polygon_meets_box, segment_meets_box, Bounds, Point, Rect, Tessellation};

/// Closed l∞ ball `u + [-d, d]^2`.
pub fn linf_ball(u: Point, d: f64) -> Bounds {
    Bounds::new(u.x - d, u.x + d, u.y - d, u.y + d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmQuery {
    pub center: Point,
    /// Inner l∞ radius.
    pub a: f64,
    /// Outer l∞ radius.
    pub b: f64,
    /// Paths are confined to this rectangle.
    pub ambient: Rect,
}

impl ArmQuery {
    pub fn new(center: Point, a: f64, b: f64, ambient: Rect) -> Result<ArmQuery> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
            return Err(Error::BadRadii { a, b });
        }
        Ok(ArmQuery { center, a, b, ambient })
    }
}

/// Prepares `V_u(a, b)` on `tess`.
pub fn one_arm_event(tess: &Tessellation, q: &ArmQuery) -> Result<ConnectivityEvent> {
    let q = ArmQuery::new(q.center, q.a, q.b, q.ambient)?;
    let amb = q.ambient.bounds().intersect(&tess.window()).ok_or_else(|| {
        Error::Invalid("ambient rectangle does not meet the window".into())
    })?;
    let start = linf_ball(q.center, q.a)
        .intersect(&amb)
        .ok_or_else(|| Error::Invalid("inner ball does not meet the ambient rectangle".into()))?;
    let outer = linf_ball(q.center, q.b);
    let region = outer.intersect(&amb).expect("outer ball contains the inner ball");
    let exits: Vec<Bounds> = outer.sides().iter().filter_map(|s| s.intersect(&amb)).collect();
    Ok(region_event(tess, &region, &[start], &exits, Color::Red))
}

pub fn one_arm_indicator(tess: &Tessellation, coloring: &Coloring, q: &ArmQuery) -> Result<bool> {
    coloring.check(tess)?;
    one_arm_event(tess, q)?.occurs_bools(&coloring.bits)
}

pub fn one_arm_quenched_mc(tess: &Tessellation, q: &ArmQuery, m: u64, seed: u64) -> Result<QuenchedEstimate> {
    estimate_mc(&one_arm_event(tess, q)?, m, seed)
}

pub fn one_arm_quenched_exact(tess: &Tessellation, q: &ArmQuery) -> Result<QuenchedEstimate> {
    estimate_exact(&one_arm_event(tess, q)?)
}

/// Square annulus around `center` with inner side `inner_side` and outer side
/// three times that.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusQuery {
    pub center: Point,
    pub inner_side: f64,
}

impl AnnulusQuery {
    pub fn new(center: Point, inner_side: f64) -> Result<AnnulusQuery> {
        if !(inner_side.is_finite() && inner_side > 0.0) {
            return Err(Error::Invalid(format!("annulus inner side must be positive, got {inner_side}")));
        }
        Ok(AnnulusQuery { center, inner_side })
    }

    /// The annulus `A_j`: inner side `7^j`, outer side `3 * 7^j`.
    pub fn at_scale(center: Point, j: u32) -> Result<AnnulusQuery> {
        AnnulusQuery::new(center, 7f64.powi(j as i32))
    }

    pub fn outer_side(&self) -> f64 {
        3.0 * self.inner_side
    }

    /// The matching one-arm query `V_u(s/2, 3s/2)`.
    pub fn as_arm(&self, ambient: Rect) -> Result<ArmQuery> {
        ArmQuery::new(self.center, 0.5 * self.inner_side, 0.5 * self.outer_side(), ambient)
    }

    /// The four closed strips covering the annulus: top, bottom, left, right.
    fn strips(&self) -> [Bounds; 4] {
        let (u, a, b) = (self.center, 0.5 * self.inner_side, 0.5 * self.outer_side());
        [
            Bounds::new(u.x - b, u.x + b, u.y + a, u.y + b),
            Bounds::new(u.x - b, u.x + b, u.y - b, u.y - a),
            Bounds::new(u.x - b, u.x - a, u.y - b, u.y + b),
            Bounds::new(u.x + a, u.x + b, u.y - b, u.y + b),
        ]
    }
}

/// Red crossing of the annulus (inner boundary to outer boundary) inside
/// `annulus ∩ window`. Nodes are (cell, strip) pairs, so that each node is
/// a convex piece and connectivity inside it is exact.
pub fn annulus_crossing_event(tess: &Tessellation, q: &AnnulusQuery) -> Result<ConnectivityEvent> {
    let q = AnnulusQuery::new(q.center, q.inner_side)?;
    let w = tess.window();
    let pieces: Vec<Bounds> = q.strips().iter().filter_map(|s| s.intersect(&w)).collect();
    if pieces.is_empty() {
        return Err(Error::Invalid("annulus does not meet the window".into()));
    }
    let tol = tess.tol();
    let inner_sides = linf_ball(q.center, 0.5 * q.inner_side).sides();
    let outer_sides = linf_ball(q.center, 0.5 * q.outer_side()).sides();
    let touches = |poly: &[Point], piece: &Bounds, sides: &[Bounds; 4]| {
        sides.iter().filter_map(|s| s.intersect(piece)).any(|s| polygon_meets_box(poly, &s, tol))
    };
    let mut b = EventBuilder::new(tess.len(), Color::Red);
    let mut node_of = vec![[usize::MAX; 4]; tess.len()];
    for (c, slots) in node_of.iter_mut().enumerate() {
        let poly = tess.cell(c);
        let mut here = Vec::new();
        for (k, piece) in pieces.iter().enumerate() {
            if polygon_meets_box(poly, piece, tol) {
                let node = b.add_node(c, touches(poly, piece, &inner_sides), touches(poly, piece, &outer_sides));
                slots[k] = node;
                here.push(k);
            }
        }
        for (x, &k) in here.iter().enumerate() {
            for &l in &here[x + 1..] {
                if let Some(overlap) = pieces[k].intersect(&pieces[l]) {
                    if polygon_meets_box(poly, &overlap, tol) {
                        b.add_edge(slots[k], slots[l]);
                    }
                }
            }
        }
    }
    for e in tess.edges() {
        let (u, v) = (e.a as usize, e.b as usize);
        for (k, piece) in pieces.iter().enumerate() {
            let (nu, nv) = (node_of[u][k], node_of[v][k]);
            if nu != usize::MAX && nv != usize::MAX && segment_meets_box(e.p, e.q, piece, tol) {
                b.add_edge(nu, nv);
            }
        }
    }
    Ok(b.build())
}

/// True iff no red path crosses the annulus, i.e. a blue circuit surrounds
/// the center inside `annulus ∩ window`.
pub fn blue_circuit_indicator(tess: &Tessellation, coloring: &Coloring, q: &AnnulusQuery) -> Result<bool> {
    coloring.check(tess)?;
    Ok(!annulus_crossing_event(tess, q)?.occurs_bools(&coloring.bits)?)
}
