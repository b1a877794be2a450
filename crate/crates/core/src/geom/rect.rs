use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Axis-parallel rectangle given by aspect ratio (width / height), area and
/// center. `Rect::new(rho, n)` is the centered rectangle of aspect ratio
/// `rho` and area `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub rho: f64,
    pub area: f64,
    #[serde(default = "origin")]
    pub center: Point,
}

fn origin() -> Point {
    Point::new(0.0, 0.0)
}

impl Rect {
    pub fn new(rho: f64, area: f64) -> Result<Rect> {
        Rect::centered_at(rho, area, origin())
    }

    pub fn centered_at(rho: f64, area: f64, center: Point) -> Result<Rect> {
        let ok = rho.is_finite()
            && area.is_finite()
            && rho > 0.0
            && area > 0.0
            && center.x.is_finite()
            && center.y.is_finite()
            && (rho * area).sqrt() > 0.0
            && (area / rho).sqrt() > 0.0;
        if !ok {
            return Err(Error::BadWindow { rho, area });
        }
        Ok(Rect { rho, area, center })
    }

    /// The unit square `[-1/2, 1/2]^2`.
    pub fn unit_square() -> Rect {
        Rect { rho: 1.0, area: 1.0, center: origin() }
    }

    /// Rectangle of aspect `rho` and area `area` whose left side lies on the
    /// vertical axis.
    pub fn anchored_left(rho: f64, area: f64) -> Result<Rect> {
        let r = Rect::new(rho, area)?;
        Ok(Rect { center: Point::new(r.width() / 2.0, 0.0), ..r })
    }

    pub fn from_bounds(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Rect> {
        let w = xmax - xmin;
        let h = ymax - ymin;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return Err(Error::BadWindow { rho: w / h, area: w * h });
        }
        Rect::centered_at(w / h, w * h, Point::new(0.5 * (xmin + xmax), 0.5 * (ymin + ymax)))
    }

    pub fn width(&self) -> f64 {
        (self.rho * self.area).sqrt()
    }

    pub fn height(&self) -> f64 {
        (self.area / self.rho).sqrt()
    }

    pub fn bounds(&self) -> Bounds {
        let hw = 0.5 * self.width();
        let hh = 0.5 * self.height();
        Bounds {
            xmin: self.center.x - hw,
            xmax: self.center.x + hw,
            ymin: self.center.y - hh,
            ymax: self.center.y + hh,
        }
    }

    /// Length of the diagonal; the length scale used for tolerances.
    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Same aspect ratio and center, area scaled by `factor`.
    pub fn scaled_area(&self, factor: f64) -> Result<Rect> {
        Rect::centered_at(self.rho, self.area * factor, self.center)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect { center: self.center.translate(dx, dy), ..*self }
    }

    /// Reflection in the horizontal axis.
    pub fn reflect_horizontal_axis(&self) -> Rect {
        Rect { center: Point::new(self.center.x, -self.center.y), ..*self }
    }

    /// Image under a counterclockwise quarter turn about the origin.
    pub fn rotate_quarter(&self) -> Rect {
        Rect { rho: 1.0 / self.rho, area: self.area, center: self.center.rotate_quarter() }
    }

    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        self.bounds().contains_box(&other.bounds(), tol)
    }
}

/// Closed axis-aligned box `[xmin, xmax] x [ymin, ymax]`; may be degenerate
/// (a segment or a point).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Bounds {
        Bounds { xmin, xmax, ymin, ymax }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.xmin - tol && p.x <= self.xmax + tol && p.y >= self.ymin - tol && p.y <= self.ymax + tol
    }

    pub fn contains_box(&self, other: &Bounds, tol: f64) -> bool {
        other.xmin >= self.xmin - tol
            && other.xmax <= self.xmax + tol
            && other.ymin >= self.ymin - tol
            && other.ymax <= self.ymax + tol
    }

    /// Intersection, or `None` when the boxes are disjoint. Touching boxes
    /// intersect in a degenerate box.
    pub fn intersect(&self, other: &Bounds) -> Option<Bounds> {
        let b = Bounds {
            xmin: self.xmin.max(other.xmin),
            xmax: self.xmax.min(other.xmax),
            ymin: self.ymin.max(other.ymin),
            ymax: self.ymax.min(other.ymax),
        };
        (b.xmin <= b.xmax && b.ymin <= b.ymax).then_some(b)
    }

    pub fn left_side(&self) -> Bounds {
        Bounds { xmax: self.xmin, ..*self }
    }

    pub fn right_side(&self) -> Bounds {
        Bounds { xmin: self.xmax, ..*self }
    }

    pub fn top_side(&self) -> Bounds {
        Bounds { ymin: self.ymax, ..*self }
    }

    pub fn bottom_side(&self) -> Bounds {
        Bounds { ymax: self.ymin, ..*self }
    }

    /// The four sides in the order left, right, top, bottom.
    pub fn sides(&self) -> [Bounds; 4] {
        [self.left_side(), self.right_side(), self.top_side(), self.bottom_side()]
    }
}
