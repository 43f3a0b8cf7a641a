//! Slab point location over a planar subdivision given by its
//! non-vertical edges, each labelled with the faces above and below it.

use std::cmp::Ordering;

use robust::{orient2d, Coord};

pub const OUTSIDE: u32 = u32::MAX;

/// A non-vertical edge: the part of the line through `a` and `b`
/// (`a.x < b.x`) between `xl` and `xr` (either may be infinite).
#[derive(Debug, Clone, Copy)]
pub struct LEdge {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub xl: f64,
    pub xr: f64,
    pub above: u32,
    pub below: u32,
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

impl LEdge {
    pub fn segment(p: [f64; 2], q: [f64; 2], above: u32, below: u32) -> Option<LEdge> {
        let (p, q) = if p[0] <= q[0] { (p, q) } else { (q, p) };
        if p[0] == q[0] {
            return None;
        }
        Some(LEdge { a: p, b: q, xl: p[0], xr: q[0], above, below })
    }

    /// Ray from `p` in direction `d`, or the full line when `full`.
    pub fn ray(p: [f64; 2], d: [f64; 2], full: bool, above: u32, below: u32) -> Option<LEdge> {
        let q = [p[0] + d[0], p[1] + d[1]];
        if q[0] == p[0] {
            return None;
        }
        let (xl, xr) = if full {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if q[0] > p[0] {
            (p[0], f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, p[0])
        };
        let (a, b) = if p[0] < q[0] { (p, q) } else { (q, p) };
        Some(LEdge { a, b, xl, xr, above, below })
    }

    /// Positive when `c` is above the edge's line, zero on it. Exact.
    #[inline]
    pub fn side(&self, c: [f64; 2]) -> f64 {
        orient2d(coord(self.a), coord(self.b), coord(c))
    }
}

/// Vertical order of two edges that share an x-range and do not cross in
/// it, decided exactly from points lying on one edge inside that range.
fn edge_order(e: &LEdge, f: &LEdge) -> Ordering {
    let lo = e.xl.max(f.xl);
    let hi = e.xr.min(f.xr);
    let inside = |c: &[f64; 2]| c[0] >= lo && c[0] <= hi;
    for c in [e.a, e.b].iter().filter(|c| inside(c)) {
        let s = f.side(*c);
        if s != 0.0 {
            return if s > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
    }
    for c in [f.a, f.b].iter().filter(|c| inside(c)) {
        let s = e.side(*c);
        if s != 0.0 {
            return if s > 0.0 { Ordering::Less } else { Ordering::Greater };
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone)]
pub struct SlabLocator {
    xs: Vec<f64>,
    start: Vec<u32>,
    order: Vec<u32>,
    bottom: Vec<u32>,
    edges: Vec<LEdge>,
}

impl SlabLocator {
    /// `empty_face(x, y)` labels slabs that no edge crosses.
    pub fn new(edges: Vec<LEdge>, mut empty_face: impl FnMut(f64, f64) -> u32) -> Self {
        let mut xs: Vec<f64> = edges.iter().flat_map(|e| [e.xl, e.xr]).filter(|x| x.is_finite()).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let slabs = xs.len() + 1;
        let span = |e: &LEdge| -> (usize, usize) {
            let lo = if e.xl.is_finite() { xs.partition_point(|&v| v < e.xl) + 1 } else { 0 };
            let hi = if e.xr.is_finite() { xs.partition_point(|&v| v < e.xr) } else { xs.len() };
            (lo, hi)
        };
        let mut count = vec![0u32; slabs + 1];
        for e in &edges {
            let (lo, hi) = span(e);
            if lo <= hi {
                for s in lo..=hi {
                    count[s + 1] += 1;
                }
            }
        }
        for s in 0..slabs {
            count[s + 1] += count[s];
        }
        let start = count.clone();
        let mut fill = count;
        let mut order = vec![0u32; start[slabs] as usize];
        for (i, e) in edges.iter().enumerate() {
            let (lo, hi) = span(e);
            if lo > hi {
                continue;
            }
            for s in lo..=hi {
                order[fill[s] as usize] = i as u32;
                fill[s] += 1;
            }
        }
        let rep = |s: usize| -> f64 {
            match (s, xs.len()) {
                (_, 0) => 0.0,
                (0, _) => xs[0] - 1.0,
                (s, l) if s == l => xs[l - 1] + 1.0,
                (s, _) => 0.5 * (xs[s - 1] + xs[s]),
            }
        };
        let mut bottom = vec![OUTSIDE; slabs];
        for s in 0..slabs {
            let slice = &mut order[start[s] as usize..start[s + 1] as usize];
            slice.sort_by(|&a, &b| edge_order(&edges[a as usize], &edges[b as usize]));
            bottom[s] = match slice.first() {
                Some(&e) => edges[e as usize].below,
                None => empty_face(rep(s), 0.0),
            };
        }
        SlabLocator { xs, start, order, bottom, edges }
    }

    /// Face containing `(x, y)`; `steps` accumulates binary-search probes.
    /// Points on an edge resolve to the face above it.
    pub fn locate(&self, x: f64, y: f64, steps: &mut u64) -> u32 {
        let s = self.xs.partition_point(|&v| v <= x);
        let slice = &self.order[self.start[s] as usize..self.start[s + 1] as usize];
        let below = slice.partition_point(|&e| self.edges[e as usize].side([x, y]) >= 0.0);
        *steps += 2 + log2_ceil(self.xs.len() + 1) + log2_ceil(slice.len() + 1);
        if below == 0 {
            self.bottom[s]
        } else {
            self.edges[slice[below - 1] as usize].above
        }
    }

    pub fn slab_count(&self) -> usize {
        self.xs.len() + 1
    }

    pub fn stored_crossings(&self) -> usize {
        self.order.len()
    }

    /// Locator for a triangulation whose triangles are counter-clockwise
    /// index triples into `verts`. Faces are triangle indices.
    pub fn from_triangles(verts: &[[f64; 2]], tris: &[[u32; 3]]) -> Self {
        let mut map: std::collections::HashMap<(u32, u32), (u32, u32)> = std::collections::HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for e in 0..3 {
                let (p, q) = (tri[e], tri[(e + 1) % 3]);
                let (xp, xq) = (verts[p as usize][0], verts[q as usize][0]);
                if xp == xq {
                    continue;
                }
                let key = (p.min(q), p.max(q));
                let slot = map.entry(key).or_insert((OUTSIDE, OUTSIDE));
                if xp < xq {
                    slot.0 = t as u32;
                } else {
                    slot.1 = t as u32;
                }
            }
        }
        let mut keys: Vec<_> = map.into_iter().collect();
        keys.sort_unstable_by_key(|k| k.0);
        let edges = keys
            .into_iter()
            .filter_map(|((p, q), (above, below))| LEdge::segment(verts[p as usize], verts[q as usize], above, below))
            .collect();
        SlabLocator::new(edges, |_, _| OUTSIDE)
    }
}

pub fn log2_ceil(n: usize) -> u64 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as u64
}
