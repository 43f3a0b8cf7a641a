//! Incremental 3D convex hull of a point set joined with one symbolic point
//! at vertical infinity. The extra point makes every input with
//! non-collinear xy-projections full-dimensional, and it separates the lower
//! (or upper) hull from the rest.

use robust::{orient2d, orient3d, Coord, Coord3D};

use crate::rng::SeededRng;

pub const INF: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Hull {
    /// Outward-oriented faces: counter-clockwise seen from outside.
    pub faces: Vec<[u32; 3]>,
    /// `nbrs[f][e]` is the face across edge `(faces[f][e], faces[f][e + 1])`.
    pub nbrs: Vec<[u32; 3]>,
    /// `+1` when the point at infinity is straight up, `-1` when down.
    pub dir: i8,
}

struct Builder<'a> {
    pts: &'a [[f64; 3]],
    dir: i8,
    faces: Vec<[u32; 3]>,
    nbrs: Vec<[u32; 3]>,
    alive: Vec<bool>,
    face_conf: Vec<Vec<u32>>,
    point_conf: Vec<Vec<u32>>,
}

#[inline]
fn c2(p: [f64; 3]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
fn c3(p: [f64; 3]) -> Coord3D<f64> {
    Coord3D { x: p[0], y: p[1], z: p[2] }
}

#[inline]
fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of the orientation of `xy`-projected triangle `a, b, c`.
pub fn orient_xy(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> i8 {
    sign(orient2d(c2(a), c2(b), c2(c)))
}

impl<'a> Builder<'a> {
    /// Sign of `((b - a) × (c - a)) · (d - a)` with at most one argument at
    /// infinity.
    fn orient(&self, v: [u32; 4]) -> i8 {
        let mut v = v;
        if let Some(k) = v.iter().position(|&x| x == INF) {
            let mut s = self.dir;
            if k != 3 {
                v.swap(k, 3);
                s = -s;
            }
            let p = |i: usize| self.pts[v[i] as usize];
            return s * orient_xy(p(0), p(1), p(2));
        }
        let p = |i: usize| c3(self.pts[v[i] as usize]);
        -sign(orient3d(p(0), p(1), p(2), p(3)))
    }

    fn visible(&self, f: usize, q: u32) -> bool {
        let [a, b, c] = self.faces[f];
        self.orient([a, b, c, q]) > 0
    }

    fn push_face(&mut self, v: [u32; 3]) -> usize {
        self.faces.push(v);
        self.nbrs.push([INF; 3]);
        self.alive.push(true);
        self.face_conf.push(Vec::new());
        self.faces.len() - 1
    }
}

/// Hull of `pts` plus the vertical point at infinity (`up` selects its
/// direction). Returns `None` when all xy-projections are collinear.
pub fn hull_with_infinity(pts: &[[f64; 3]], up: bool, seed: u64) -> Option<Hull> {
    let n = pts.len();
    let a = 0usize;
    let b = (1..n).find(|&i| pts[i][0] != pts[a][0] || pts[i][1] != pts[a][1])?;
    let c = (1..n).find(|&i| orient_xy(pts[a], pts[b], pts[i]) != 0)?;
    let dir = if up { 1 } else { -1 };
    let mut h = Builder {
        pts,
        dir,
        faces: Vec::new(),
        nbrs: Vec::new(),
        alive: Vec::new(),
        face_conf: Vec::new(),
        point_conf: vec![Vec::new(); n],
    };
    let simplex = [a as u32, b as u32, c as u32, INF];
    for skip in 0..4 {
        let mut f: Vec<u32> = (0..4).filter(|&i| i != skip).map(|i| simplex[i]).collect();
        if h.orient([f[0], f[1], f[2], simplex[skip]]) > 0 {
            f.swap(1, 2);
        }
        h.push_face([f[0], f[1], f[2]]);
    }
    link_all(&mut h);

    let mut order: Vec<u32> = (0..n as u32).filter(|&i| ![a, b, c].contains(&(i as usize))).collect();
    let mut rng = SeededRng::new(seed);
    for i in (1..order.len()).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    for &q in &order {
        for f in 0..4 {
            if h.visible(f, q) {
                h.face_conf[f].push(q);
                h.point_conf[q as usize].push(f as u32);
            }
        }
    }

    let mut vis_mark = vec![u32::MAX; 4];
    let mut stamp = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut horizon: Vec<(u32, u32, usize, usize)> = Vec::new();
    let mut start_at = std::collections::HashMap::new();
    let mut end_at = std::collections::HashMap::new();
    for (step, &p) in order.iter().enumerate() {
        let step = step as u32;
        let visible: Vec<usize> = h.point_conf[p as usize]
            .iter()
            .map(|&f| f as usize)
            .filter(|&f| h.alive[f])
            .collect();
        done[p as usize] = true;
        if visible.is_empty() {
            continue;
        }
        vis_mark.resize(h.faces.len(), u32::MAX);
        for &f in &visible {
            vis_mark[f] = step;
        }
        horizon.clear();
        for &f in &visible {
            for e in 0..3 {
                let g = h.nbrs[f][e] as usize;
                if vis_mark[g] != step {
                    horizon.push((h.faces[f][e], h.faces[f][(e + 1) % 3], f, g));
                }
            }
        }
        start_at.clear();
        end_at.clear();
        let first_new = h.faces.len();
        for &(u, v, f, g) in &horizon {
            let nf = h.push_face([u, v, p]);
            h.nbrs[nf][0] = g as u32;
            let slot = h.nbrs[g].iter().position(|&x| x as usize == f).unwrap();
            h.nbrs[g][slot] = nf as u32;
            start_at.insert(u, nf);
            end_at.insert(v, nf);
        }
        for (i, &(u, v, f, g)) in horizon.iter().enumerate() {
            let nf = first_new + i;
            h.nbrs[nf][1] = start_at[&v] as u32;
            h.nbrs[nf][2] = end_at[&u] as u32;
            let mut conf = Vec::new();
            for src in [f, g] {
                for &q in &h.face_conf[src] {
                    if done[q as usize] || stamp[q as usize] == nf as u32 {
                        continue;
                    }
                    stamp[q as usize] = nf as u32;
                    if h.orient([u, v, p, q]) > 0 {
                        conf.push(q);
                    }
                }
            }
            for &q in &conf {
                h.point_conf[q as usize].push(nf as u32);
            }
            h.face_conf[nf] = conf;
        }
        for &f in &visible {
            h.alive[f] = false;
            h.face_conf[f] = Vec::new();
        }
    }

    let mut remap = vec![u32::MAX; h.faces.len()];
    let mut faces = Vec::new();
    for f in 0..h.faces.len() {
        if h.alive[f] {
            remap[f] = faces.len() as u32;
            faces.push(h.faces[f]);
        }
    }
    let nbrs = (0..h.faces.len())
        .filter(|&f| h.alive[f])
        .map(|f| h.nbrs[f].map(|g| remap[g as usize]))
        .collect();
    Some(Hull { faces, nbrs, dir })
}

fn link_all(h: &mut Builder<'_>) {
    for f in 0..h.faces.len() {
        for e in 0..3 {
            let (u, v) = (h.faces[f][e], h.faces[f][(e + 1) % 3]);
            for g in 0..h.faces.len() {
                if g == f {
                    continue;
                }
                for e2 in 0..3 {
                    if h.faces[g][e2] == v && h.faces[g][(e2 + 1) % 3] == u {
                        h.nbrs[f][e] = g as u32;
                    }
                }
            }
        }
    }
}

impl Hull {
    pub fn is_finite_face(&self, f: usize) -> bool {
        !self.faces[f].contains(&INF)
    }

    /// Sign of the face's projected orientation; `-1` for lower faces and
    /// `+1` for upper faces, `0` for vertical ones.
    pub fn face_xy_sign(&self, f: usize, pts: &[[f64; 3]]) -> i8 {
        let [a, b, c] = self.faces[f];
        orient_xy(pts[a as usize], pts[b as usize], pts[c as usize])
    }
}
