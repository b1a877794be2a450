//! Connectivity events over a two-colouring of cells.
//!
//! Crossing, one-arm and annulus events all reduce to: is there a path of
//! nodes of one colour from a source node to a sink node? A node is a cell,
//! or (for non-convex regions) a convex piece of a cell. Preparing the graph
//! once per geometry lets every colouring be decided by a plain flood fill,
//! or by a bitmask flood fill when there are at most 64 cells.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{blocks, stream};

/// Largest cell count accepted by exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

/// Exact probability `count / 2^log2_den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dyadic {
    pub count: u64,
    pub log2_den: u32,
}

impl Dyadic {
    pub fn value(&self) -> f64 {
        self.count as f64 / (self.log2_den as f64).exp2()
    }
}

/// Colouring stored as little-endian 64-bit words, bit set = red.
pub fn words_for(cells: usize) -> usize {
    cells.div_ceil(64).max(1)
}

pub fn random_words(rng: &mut impl RngCore, cells: usize, out: &mut [u64]) {
    for w in out.iter_mut() {
        *w = rng.next_u64();
    }
    let rem = cells % 64;
    if rem != 0 {
        let last = out.len() - 1;
        out[last] &= (1u64 << rem) - 1;
    }
}

#[inline]
pub fn bit(words: &[u64], i: usize) -> bool {
    words[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
pub fn flip(words: &mut [u64], i: usize) {
    words[i >> 6] ^= 1 << (i & 63);
}

pub fn bools_to_words(bits: &[bool]) -> Vec<u64> {
    let mut w = vec![0u64; words_for(bits.len())];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            w[i >> 6] |= 1 << (i & 63);
        }
    }
    w
}

#[derive(Clone, Debug)]
struct Masks {
    source: u64,
    sink: u64,
    nbr: Vec<u64>,
}

/// Prepared connectivity event.
#[derive(Clone, Debug)]
pub struct ConnectivityEvent {
    color: Color,
    cells: usize,
    node_cell: Vec<u32>,
    source: Vec<bool>,
    sink: Vec<bool>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    masks: Option<Masks>,
}

/// Incremental construction of a [`ConnectivityEvent`].
pub struct EventBuilder {
    color: Color,
    cells: usize,
    node_cell: Vec<u32>,
    source: Vec<bool>,
    sink: Vec<bool>,
    edges: Vec<(u32, u32)>,
}

impl EventBuilder {
    pub fn new(cells: usize, color: Color) -> Self {
        EventBuilder { color, cells, node_cell: vec![], source: vec![], sink: vec![], edges: vec![] }
    }

    /// One node per cell, node `i` standing for cell `i`.
    pub fn per_cell(cells: usize, color: Color) -> Self {
        let mut b = EventBuilder::new(cells, color);
        for c in 0..cells {
            b.add_node(c, false, false);
        }
        b
    }

    pub fn add_node(&mut self, cell: usize, source: bool, sink: bool) -> usize {
        self.node_cell.push(cell as u32);
        self.source.push(source);
        self.sink.push(sink);
        self.node_cell.len() - 1
    }

    pub fn set_source(&mut self, node: usize) {
        self.source[node] = true;
    }

    pub fn set_sink(&mut self, node: usize) {
        self.sink[node] = true;
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.edges.push((u as u32, v as u32));
            self.edges.push((v as u32, u as u32));
        }
    }

    pub fn build(mut self) -> ConnectivityEvent {
        let nodes = self.node_cell.len();
        self.edges.sort_unstable();
        self.edges.dedup();
        let mut adj_start = vec![0u32; nodes + 1];
        for &(u, _) in &self.edges {
            adj_start[u as usize + 1] += 1;
        }
        for k in 0..nodes {
            adj_start[k + 1] += adj_start[k];
        }
        let adj = self.edges.iter().map(|&(_, v)| v).collect();
        let identity = nodes == self.cells && self.node_cell.iter().enumerate().all(|(i, &c)| c as usize == i);
        let mut ev = ConnectivityEvent {
            color: self.color,
            cells: self.cells,
            node_cell: self.node_cell,
            source: self.source,
            sink: self.sink,
            adj_start,
            adj,
            masks: None,
        };
        if identity && self.cells <= 64 {
            let pack = |flags: &[bool]| flags.iter().enumerate().fold(0u64, |m, (i, &f)| m | ((f as u64) << i));
            let nbr = (0..nodes).map(|u| ev.neighbours(u).fold(0u64, |m, v| m | 1 << v)).collect();
            ev.masks = Some(Masks { source: pack(&ev.source), sink: pack(&ev.sink), nbr });
        }
        ev
    }
}

/// Reusable flood-fill buffers.
#[derive(Default)]
pub struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl ConnectivityEvent {
    pub fn color(&self) -> Color {
        self.color
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn node_count(&self) -> usize {
        self.node_cell.len()
    }

    pub fn node_cell(&self, node: usize) -> usize {
        self.node_cell[node] as usize
    }

    pub fn is_source(&self, node: usize) -> bool {
        self.source[node]
    }

    pub fn is_sink(&self, node: usize) -> bool {
        self.sink[node]
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[self.adj_start[node] as usize..self.adj_start[node + 1] as usize].iter().map(|&v| v as usize)
    }

    pub fn has_sources(&self) -> bool {
        self.source.iter().any(|&s| s)
    }

    /// Cells whose colour can matter: those of nodes that are sources, sinks
    /// or have an edge. Every other cell has influence exactly zero.
    pub fn relevant_cells(&self) -> Vec<bool> {
        let mut rel = vec![false; self.cells];
        for u in 0..self.node_count() {
            if self.source[u] || self.sink[u] || self.adj_start[u] != self.adj_start[u + 1] {
                rel[self.node_cell[u] as usize] = true;
            }
        }
        rel
    }

    #[inline]
    fn active(&self, words: &[u64], node: usize) -> bool {
        bit(words, self.node_cell[node] as usize) == (self.color == Color::Red)
    }

    /// Decides the event for a colouring given as words (bit set = red).
    pub fn occurs(&self, words: &[u64], scratch: &mut Scratch) -> bool {
        if let Some(m) = &self.masks {
            return self.occurs_mask(m, words[0]);
        }
        self.occurs_bfs(words, scratch)
    }

    fn occurs_mask(&self, m: &Masks, red: u64) -> bool {
        let full = if self.cells == 64 { u64::MAX } else { (1u64 << self.cells) - 1 };
        let active = match self.color {
            Color::Red => red,
            Color::Blue => !red & full,
        };
        let mut reach = m.source & active;
        let mut frontier = reach;
        while frontier != 0 {
            if reach & m.sink != 0 {
                return true;
            }
            let mut grow = 0u64;
            let mut f = frontier;
            while f != 0 {
                let c = f.trailing_zeros() as usize;
                grow |= m.nbr[c];
                f &= f - 1;
            }
            frontier = grow & active & !reach;
            reach |= frontier;
        }
        reach & m.sink != 0
    }

    fn occurs_bfs(&self, words: &[u64], s: &mut Scratch) -> bool {
        let nodes = self.node_count();
        if s.stamp.len() < nodes {
            s.stamp = vec![0; nodes];
            s.epoch = 0;
        }
        s.epoch = s.epoch.wrapping_add(1);
        if s.epoch == 0 {
            s.stamp.iter_mut().for_each(|x| *x = 0);
            s.epoch = 1;
        }
        s.stack.clear();
        for u in 0..nodes {
            if self.source[u] && self.active(words, u) {
                if self.sink[u] {
                    return true;
                }
                s.stamp[u] = s.epoch;
                s.stack.push(u as u32);
            }
        }
        while let Some(u) = s.stack.pop() {
            for v in self.neighbours(u as usize) {
                if s.stamp[v] != s.epoch && self.active(words, v) {
                    if self.sink[v] {
                        return true;
                    }
                    s.stamp[v] = s.epoch;
                    s.stack.push(v as u32);
                }
            }
        }
        false
    }

    /// Decides the event for a colouring given as one bool per cell.
    pub fn occurs_bools(&self, bits: &[bool]) -> Result<bool> {
        if bits.len() != self.cells {
            return Err(Error::ColoringLength { expected: self.cells, got: bits.len() });
        }
        Ok(self.occurs(&bools_to_words(bits), &mut Scratch::default()))
    }

    fn check_enumerable(&self, limit: usize) -> Result<()> {
        if self.cells > limit {
            return Err(Error::EnumerationLimit { cells: self.cells, limit });
        }
        Ok(())
    }

    /// Indicator of the event for all `2^cells` colourings, packed 64 per
    /// word; colouring `w` has cell `i` red iff bit `i` of `w` is set.
    pub fn indicator_table(&self) -> Result<Vec<u64>> {
        self.check_enumerable(ENUMERATION_LIMIT)?;
        let total = 1u64 << self.cells;
        let words = total.div_ceil(64) as usize;
        Ok((0..words)
            .into_par_iter()
            .map_init(Scratch::default, |s, w| {
                let base = (w as u64) << 6;
                let mut out = 0u64;
                for k in 0..64u64.min(total - base) {
                    if self.occurs(&[base + k], s) {
                        out |= 1 << k;
                    }
                }
                out
            })
            .collect())
    }

    /// Exact probability of the event under a uniform colouring.
    pub fn probability_exact(&self) -> Result<Dyadic> {
        let table = self.indicator_table()?;
        let count = table.iter().map(|w| w.count_ones() as u64).sum();
        Ok(Dyadic { count, log2_den: self.cells as u32 })
    }

    /// Number of the `m` sampled colourings (streams keyed by `seed`) on which
    /// the event occurs.
    pub fn count_mc(&self, m: u64, seed: u64) -> u64 {
        let nw = words_for(self.cells);
        blocks(m)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(b, size)| {
                let mut rng = stream(seed, b);
                let mut words = vec![0u64; nw];
                let mut s = Scratch::default();
                let mut hits = 0u64;
                for _ in 0..size {
                    random_words(&mut rng, self.cells, &mut words);
                    hits += self.occurs(&words, &mut s) as u64;
                }
                hits
            })
            .sum()
    }
}

/// Pivotal counts `a_j = #{ω : 1(ω) != 1(σ_j ω)}` from an indicator table.
pub fn pivotal_counts(table: &[u64], cells: usize) -> Vec<u64> {
    let valid = if cells >= 6 { u64::MAX } else { (1u64 << (1u64 << cells)) - 1 };
    (0..cells)
        .map(|j| {
            let half: u64 = if j >= 6 {
                let stride = 1usize << (j - 6);
                (0..table.len())
                    .filter(|w| w & stride == 0)
                    .map(|w| (table[w] ^ table[w | stride]).count_ones() as u64)
                    .sum()
            } else {
                let shift = 1u32 << j;
                let mut low = 0u64;
                for i in 0..64 {
                    if (i >> j) & 1 == 0 {
                        low |= 1 << i;
                    }
                }
                let mask = low & valid;
                table.iter().map(|&x| ((x ^ (x >> shift)) & mask).count_ones() as u64).sum()
            };
            2 * half
        })
        .collect()
}
