//! Point configurations and their Voronoi tessellations clipped to a window.

mod poly;
mod rect;
mod sample;
mod tess;

pub use poly::{
    clip_halfplane, polygon_area, polygon_contains, polygon_meets_box, segment_meets_box,
    EdgeLabel, Side,
};
pub use rect::{Bounds, Rect};
pub use sample::{sample_binomial, sample_poisson, sample_poisson_padded, Configuration, Model};
pub use tess::{build_tessellation, cell_radius_stats, SharedEdge, SideTouch, Tessellation};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Chebyshev (l-infinity) distance.
    pub fn dist_inf(self, other: Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn translate(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    /// Counterclockwise rotation by a quarter turn about the origin.
    pub fn rotate_quarter(self) -> Point {
        Point::new(-self.y, self.x)
    }
}
