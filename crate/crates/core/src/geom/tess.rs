use rayon::prelude::*;
use serde::Serialize;

use super::poly::{clip_halfplane, polygon_area, polygon_contains, EdgeLabel, Side};
use super::{Bounds, Configuration, Point};
use crate::error::{Error, Result};

/// Which closed sides of the window a cell meets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SideTouch {
    pub left: bool,
    pub right: bool,
    pub top: bool,
    pub bottom: bool,
}

/// A Voronoi edge of positive length inside the window, shared by cells
/// `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharedEdge {
    pub a: u32,
    pub b: u32,
    pub p: Point,
    pub q: Point,
}

impl SharedEdge {
    pub fn length(&self) -> f64 {
        self.p.dist(self.q)
    }
}

/// Voronoi tessellation of a configuration, clipped to its window.
/// Immutable once built.
#[derive(Clone, Debug)]
pub struct Tessellation {
    config: Configuration,
    cells: Vec<Vec<Point>>,
    labels: Vec<Vec<EdgeLabel>>,
    edges: Vec<SharedEdge>,
    adjacency: Vec<Vec<(u32, u32)>>,
    side_touch: Vec<SideTouch>,
    radius: Vec<f64>,
    tol: f64,
}

/// Uniform bucket grid over the window for neighbour search.
struct Grid {
    xmin: f64,
    ymin: f64,
    h: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn new(points: &[Point], b: &Bounds) -> Grid {
        let n = points.len().max(1);
        let h = (b.width() * b.height() / n as f64).sqrt();
        let nx = ((b.width() / h).ceil() as usize).clamp(1, 4 * n);
        let ny = ((b.height() / h).ceil() as usize).clamp(1, 4 * n);
        let h = (b.width() / nx as f64).max(b.height() / ny as f64);
        let mut grid = Grid { xmin: b.xmin, ymin: b.ymin, h, nx, ny, start: vec![], items: vec![] };
        let mut counts = vec![0u32; nx * ny + 1];
        let keys: Vec<usize> = points.iter().map(|p| grid.key(*p)).collect();
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for k in 0..nx * ny {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (i, &k) in keys.iter().enumerate() {
            items[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        grid.start = counts;
        grid.items = items;
        grid
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.xmin) / self.h).floor().max(0.0) as usize;
        let cy = ((p.y - self.ymin) / self.h).floor().max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    fn key(&self, p: Point) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.nx + cx
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let k = cy * self.nx + cx;
        &self.items[self.start[k] as usize..self.start[k + 1] as usize]
    }
}

fn window_polygon(b: &Bounds) -> (Vec<Point>, Vec<EdgeLabel>) {
    (
        vec![
            Point::new(b.xmin, b.ymin),
            Point::new(b.xmax, b.ymin),
            Point::new(b.xmax, b.ymax),
            Point::new(b.xmin, b.ymax),
        ],
        vec![
            EdgeLabel::Side(Side::Bottom),
            EdgeLabel::Side(Side::Right),
            EdgeLabel::Side(Side::Top),
            EdgeLabel::Side(Side::Left),
        ],
    )
}

/// Builds `V(u) ∩ window` by clipping the window with bisectors of
/// neighbours found in growing rings of grid buckets. A ring search stops
/// once every unvisited point is farther than twice the current cell radius.
fn build_cell(i: usize, points: &[Point], grid: &Grid, b: &Bounds, tol: f64) -> (Vec<Point>, Vec<EdgeLabel>) {
    let p = points[i];
    let (mut verts, mut labels) = window_polygon(b);
    let (mut tv, mut tl) = (Vec::with_capacity(12), Vec::with_capacity(12));
    let (hx, hy) = grid.coords(p);
    let (hx, hy) = (hx as isize, hy as isize);
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut k: isize = 0;
    loop {
        let x0 = hx - k;
        let x1 = hx + k;
        let y0 = hy - k;
        let y1 = hy + k;
        for cy in y0.max(0)..=y1.min(ny - 1) {
            let on_row_edge = cy == y0 || cy == y1;
            let mut cx = x0.max(0);
            while cx <= x1.min(nx - 1) {
                if on_row_edge || cx == x0 || cx == x1 {
                    for &j in grid.bucket(cx as usize, cy as usize) {
                        let j = j as usize;
                        if j == i {
                            continue;
                        }
                        let q = points[j];
                        let (dx, dy) = (q.x - p.x, q.y - p.y);
                        let len = dx.hypot(dy);
                        let mid = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
                        let normal = Point::new(dx / len, dy / len);
                        if clip_halfplane(
                            &verts,
                            &labels,
                            mid,
                            normal,
                            EdgeLabel::Nucleus(j as u32),
                            tol,
                            tol,
                            &mut tv,
                            &mut tl,
                        ) {
                            std::mem::swap(&mut verts, &mut tv);
                            std::mem::swap(&mut labels, &mut tl);
                        }
                    }
                    cx += 1;
                } else {
                    cx = x1;
                }
            }
        }
        let covered_all = x0 <= 0 && y0 <= 0 && x1 >= nx - 1 && y1 >= ny - 1;
        if covered_all {
            break;
        }
        let guard = |lo: isize, hi: isize, n: isize, origin: f64, coord: f64| -> f64 {
            let low = if lo <= 0 { f64::INFINITY } else { coord - (origin + lo as f64 * grid.h) };
            let high = if hi >= n - 1 { f64::INFINITY } else { origin + (hi + 1) as f64 * grid.h - coord };
            low.min(high)
        };
        let g = guard(x0, x1, nx, grid.xmin, p.x).min(guard(y0, y1, ny, grid.ymin, p.y));
        let r = verts.iter().map(|v| v.dist(p)).fold(0.0, f64::max);
        if 2.0 * r + 4.0 * tol < g {
            break;
        }
        k += 1;
    }
    (verts, labels)
}

/// Builds the clipped Voronoi tessellation of `config`.
pub fn build_tessellation(config: &Configuration) -> Result<Tessellation> {
    if config.points.is_empty() {
        return Err(Error::NoPoints);
    }
    // revalidate: containment and distinctness
    let checked = Configuration::from_points(config.points.clone(), config.window)?;
    drop(checked);
    let b = config.window.bounds();
    let tol = 1e-12 * config.window.diameter();
    let points = &config.points;
    let grid = Grid::new(points, &b);
    let built: Vec<(Vec<Point>, Vec<EdgeLabel>)> =
        (0..points.len()).into_par_iter().map(|i| build_cell(i, points, &grid, &b, tol)).collect();
    let (cells, labels): (Vec<_>, Vec<_>) = built.into_iter().unzip();

    let mut raw: Vec<(u32, u32, Point, Point, f64)> = Vec::new();
    for (i, (verts, labs)) in cells.iter().zip(&labels).enumerate() {
        let n = verts.len();
        for k in 0..n {
            if let EdgeLabel::Nucleus(j) = labs[k] {
                let (p, q) = (verts[k], verts[(k + 1) % n]);
                let (a, bb) = if (i as u32) < j { (i as u32, j) } else { (j, i as u32) };
                raw.push((a, bb, p, q, p.dist(q)));
            }
        }
    }
    raw.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)).then(y.4.total_cmp(&x.4)));
    raw.dedup_by(|later, first| later.0 == first.0 && later.1 == first.1);
    let edges: Vec<SharedEdge> =
        raw.into_iter().filter(|e| e.4 > tol).map(|(a, b, p, q, _)| SharedEdge { a, b, p, q }).collect();
    let mut adjacency = vec![Vec::new(); points.len()];
    for (k, e) in edges.iter().enumerate() {
        adjacency[e.a as usize].push((e.b, k as u32));
        adjacency[e.b as usize].push((e.a, k as u32));
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let side_touch = cells
        .iter()
        .map(|verts| SideTouch {
            left: verts.iter().any(|v| v.x <= b.xmin + tol),
            right: verts.iter().any(|v| v.x >= b.xmax - tol),
            top: verts.iter().any(|v| v.y >= b.ymax - tol),
            bottom: verts.iter().any(|v| v.y <= b.ymin + tol),
        })
        .collect();
    let radius = cells
        .iter()
        .zip(points)
        .map(|(verts, p)| verts.iter().map(|v| v.dist(*p)).fold(0.0, f64::max))
        .collect();

    let tess = Tessellation { config: config.clone(), cells, labels, edges, adjacency, side_touch, radius, tol };
    tess.validate()?;
    Ok(tess)
}

/// Largest cell radius and the per-cell radii. The radius of a cell is the
/// largest distance from its nucleus to a vertex of the clipped cell.
pub fn cell_radius_stats(tess: &Tessellation) -> (f64, Vec<f64>) {
    let radii = tess.radius.clone();
    (radii.iter().copied().fold(0.0, f64::max), radii)
}

impl Tessellation {
    fn validate(&self) -> Result<()> {
        let total: f64 = self.cells.iter().map(|c| polygon_area(c)).sum();
        let area = self.config.window.area;
        if ((total - area) / area).abs() > 1e-9 {
            return Err(Error::Degenerate(format!("cell areas sum to {total}, window area is {area}")));
        }
        for (i, (c, p)) in self.cells.iter().zip(&self.config.points).enumerate() {
            if c.len() < 3 || !polygon_contains(c, *p, 1e3 * self.tol) {
                return Err(Error::Degenerate(format!("nucleus {i} is not inside its cell")));
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn nuclei(&self) -> &[Point] {
        &self.config.points
    }

    pub fn window(&self) -> Bounds {
        self.config.window.bounds()
    }

    /// Absolute geometric tolerance (relative `1e-12` of the window diameter).
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Counterclockwise vertices of cell `i`.
    pub fn cell(&self, i: usize) -> &[Point] {
        &self.cells[i]
    }

    pub fn cell_area(&self, i: usize) -> f64 {
        polygon_area(&self.cells[i])
    }

    pub fn edges(&self) -> &[SharedEdge] {
        &self.edges
    }

    /// `(neighbour, edge index)` pairs of cell `i`, sorted by neighbour.
    pub fn adjacent(&self, i: usize) -> &[(u32, u32)] {
        &self.adjacency[i]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().map(|&(j, _)| j as usize)
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search_by_key(&(j as u32), |&(k, _)| k).is_ok()
    }

    pub fn side_touch(&self, i: usize) -> SideTouch {
        self.side_touch[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radius[i]
    }

    /// Index of a cell containing `p` (closed cells, so ties go to the
    /// lowest index).
    pub fn locate(&self, p: Point) -> Option<usize> {
        (0..self.len()).find(|&i| polygon_contains(&self.cells[i], p, self.tol))
    }

    /// Delaunay triangles dual to the Voronoi vertices inside the window:
    /// triples of nuclei whose cells meet at a common polygon vertex.
    pub fn delaunay_triangles(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for (i, labs) in self.labels.iter().enumerate() {
            let n = labs.len();
            for k in 0..n {
                if let (EdgeLabel::Nucleus(a), EdgeLabel::Nucleus(b)) = (labs[(k + n - 1) % n], labs[k]) {
                    let mut t = [i as u32, a, b];
                    t.sort_unstable();
                    if t[0] != t[1] && t[1] != t[2] {
                        out.push(t);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Triangles from [`Self::delaunay_triangles`] whose circumdisk contains
    /// another nucleus (relative slack `1e-9`). Empty for a valid diagram.
    pub fn circumcircle_violations(&self) -> Vec<([u32; 3], usize)> {
        let pts = &self.config.points;
        let mut bad = Vec::new();
        for t in self.delaunay_triangles() {
            let [a, b, c] = t.map(|k| pts[k as usize]);
            let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
            if d.abs() < f64::MIN_POSITIVE {
                continue;
            }
            let (a2, b2, c2) = (a.x * a.x + a.y * a.y, b.x * b.x + b.y * b.y, c.x * c.x + c.y * c.y);
            let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
            let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
            let centre = Point::new(ux, uy);
            let r = centre.dist(a);
            for (k, p) in pts.iter().enumerate() {
                if t.contains(&(k as u32)) {
                    continue;
                }
                if centre.dist(*p) < r * (1.0 - 1e-9) {
                    bad.push((t, k));
                }
            }
        }
        bad
    }
}
