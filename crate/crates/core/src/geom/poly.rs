use serde::{Deserialize, Serialize};

use super::{Bounds, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// What generated a polygon edge: the bisector with another nucleus or a
/// side of the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    Nucleus(u32),
    Side(Side),
}

/// Clips the convex polygon `verts` (counterclockwise, edge `i` running from
/// `verts[i]` to `verts[i + 1]` and labelled `labels[i]`) to the half-plane
/// `(x - origin) . normal <= eps`. The new edge along the clip line gets
/// `label`. Edges shorter than `merge` are dropped. Returns `false` and leaves
/// the outputs untouched when nothing is cut.
#[allow(clippy::too_many_arguments)]
pub fn clip_halfplane(
    verts: &[Point],
    labels: &[EdgeLabel],
    origin: Point,
    normal: Point,
    label: EdgeLabel,
    eps: f64,
    merge: f64,
    out_verts: &mut Vec<Point>,
    out_labels: &mut Vec<EdgeLabel>,
) -> bool {
    let dist = |p: &Point| (p.x - origin.x) * normal.x + (p.y - origin.y) * normal.y;
    if verts.iter().all(|p| dist(p) <= eps) {
        return false;
    }
    out_verts.clear();
    out_labels.clear();
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let (da, db) = (dist(&a), dist(&b));
        let a_in = da <= eps;
        let b_in = db <= eps;
        let cut = |da: f64, db: f64| {
            let t = (da / (da - db)).clamp(0.0, 1.0);
            Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        };
        match (a_in, b_in) {
            (true, true) => {
                out_verts.push(a);
                out_labels.push(labels[i]);
            }
            (true, false) => {
                out_verts.push(a);
                out_labels.push(labels[i]);
                out_verts.push(cut(da, db));
                out_labels.push(label);
            }
            (false, true) => {
                out_verts.push(cut(da, db));
                out_labels.push(labels[i]);
            }
            (false, false) => {}
        }
    }
    drop_short_edges(out_verts, out_labels, merge);
    true
}

fn drop_short_edges(verts: &mut Vec<Point>, labels: &mut Vec<EdgeLabel>, merge: f64) {
    let mut i = 0;
    while verts.len() > 1 && i < verts.len() {
        let j = (i + 1) % verts.len();
        if verts[i].dist(verts[j]) <= merge {
            verts.remove(i);
            labels.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Signed area; positive for counterclockwise orientation.
pub fn polygon_area(verts: &[Point]) -> f64 {
    let n = verts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        s += a.x * b.y - a.y * b.x;
    }
    0.5 * s
}

/// Closed containment in a counterclockwise convex polygon, up to `tol`.
pub fn polygon_contains(verts: &[Point], p: Point, tol: f64) -> bool {
    let n = verts.len();
    (0..n).all(|i| {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let len = a.dist(b);
        if len == 0.0 {
            return true;
        }
        ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len >= -tol
    })
}

/// Whether a counterclockwise convex polygon meets a closed (possibly
/// degenerate) box, up to `tol`. Separating-axis test.
pub fn polygon_meets_box(verts: &[Point], b: &Bounds, tol: f64) -> bool {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in verts {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    if xmin > b.xmax + tol || xmax < b.xmin - tol || ymin > b.ymax + tol || ymax < b.ymin - tol {
        return false;
    }
    let corners = [
        Point::new(b.xmin, b.ymin),
        Point::new(b.xmax, b.ymin),
        Point::new(b.xmax, b.ymax),
        Point::new(b.xmin, b.ymax),
    ];
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let c = verts[(i + 1) % n];
        let (dx, dy) = (c.x - a.x, c.y - a.y);
        let len = dx.hypot(dy);
        if len == 0.0 {
            continue;
        }
        // outward normal of a counterclockwise edge
        let (nx, ny) = (dy / len, -dx / len);
        if corners.iter().all(|q| (q.x - a.x) * nx + (q.y - a.y) * ny > tol) {
            return false;
        }
    }
    true
}

/// Whether the closed segment `pq` meets the closed box `b` expanded by `tol`.
pub fn segment_meets_box(p: Point, q: Point, b: &Bounds, tol: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = Point::new(q.x - p.x, q.y - p.y);
    let checks = [
        (-d.x, p.x - (b.xmin - tol)),
        (d.x, (b.xmax + tol) - p.x),
        (-d.y, p.y - (b.ymin - tol)),
        (d.y, (b.ymax + tol) - p.y),
    ];
    for (pk, qk) in checks {
        if pk == 0.0 {
            if qk < 0.0 {
                return false;
            }
        } else {
            let r = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}
