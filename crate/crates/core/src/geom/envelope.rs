use super::hull::{hull_with_infinity, INF};
use super::locate::{LEdge, SlabLocator};
use super::Plane;
use crate::error::{Error, Result};

/// How a query point is matched to its envelope facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocateMode {
    #[default]
    Slab,
    /// Scan every facet plane; same answers, linear time.
    Linear,
}

#[derive(Debug, Clone)]
enum Shape {
    Single(u32),
    /// Collinear dual projections: facets are parallel strips ordered by
    /// `e · (x, y)`.
    Strips { e: [f64; 2], breaks: Vec<f64>, ids: Vec<u32> },
    Cells(SlabLocator),
}

/// Lower envelope of a set of planes with planar point location.
#[derive(Debug, Clone)]
pub struct EnvelopeIndex {
    planes: Vec<Plane>,
    facets: Vec<u32>,
    shape: Shape,
    mode: LocateMode,
}

impl EnvelopeIndex {
    pub fn new(planes: &[Plane]) -> Result<Self> {
        Self::with_mode(planes, LocateMode::Slab)
    }

    pub fn with_mode(planes: &[Plane], mode: LocateMode) -> Result<Self> {
        if planes.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut order: Vec<u32> = (0..planes.len() as u32).collect();
        let key = |i: u32| {
            let p = planes[i as usize];
            (p.a, p.b, p.c)
        };
        order.sort_by(|&i, &j| {
            let (x, y) = (key(i), key(j));
            x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)).then(i.cmp(&j))
        });
        order.dedup_by(|j, i| key(*i) == key(*j));
        let pts: Vec<[f64; 3]> = order.iter().map(|&i| {
            let p = planes[i as usize];
            [p.a, p.b, p.c]
        }).collect();

        let shape = match hull_with_infinity(&pts, true, 0x5eed) {
            None => strips(&pts, &order),
            Some(hull) => {
                let lower: Vec<bool> = (0..hull.faces.len())
                    .map(|f| hull.is_finite_face(f) && hull.face_xy_sign(f, &pts) < 0)
                    .collect();
                let vert: Vec<[f64; 2]> = (0..hull.faces.len())
                    .map(|f| if lower[f] { envelope_vertex(&pts, hull.faces[f]) } else { [0.0; 2] })
                    .collect();
                let mut edges = Vec::new();
                for f in 0..hull.faces.len() {
                    if !lower[f] {
                        continue;
                    }
                    let face = hull.faces[f];
                    for e in 0..3 {
                        let g = hull.nbrs[f][e] as usize;
                        if lower[g] && g < f {
                            continue;
                        }
                        let (u, v, w) = (face[e] as usize, face[(e + 1) % 3] as usize, face[(e + 2) % 3] as usize);
                        let (pu, pv, pw) = (pts[u], pts[v], pts[w]);
                        let (da, db) = (pu[0] - pv[0], pu[1] - pv[1]);
                        let (above, below) = if db > 0.0 { (order[v], order[u]) } else { (order[u], order[v]) };
                        let edge = if lower[g] {
                            LEdge::segment(vert[f], vert[g], above, below)
                        } else {
                            let mut d = [-db, da];
                            if (pw[0] - pu[0]) * d[0] + (pw[1] - pu[1]) * d[1] < 0.0 {
                                d = [db, -da];
                            }
                            LEdge::ray(vert[f], d, false, above, below)
                        };
                        edges.extend(edge);
                    }
                }
                let brute = |x: f64, y: f64| -> u32 {
                    let mut best = 0;
                    for (i, p) in pts.iter().enumerate() {
                        if p[0] * x + p[1] * y + p[2] < pts[best][0] * x + pts[best][1] * y + pts[best][2] {
                            best = i;
                        }
                    }
                    order[best]
                };
                Shape::Cells(SlabLocator::new(edges, brute))
            }
        };
        let facets = match &shape {
            Shape::Single(i) => vec![*i],
            Shape::Strips { ids, .. } => ids.clone(),
            Shape::Cells(_) => {
                let hull = hull_with_infinity(&pts, true, 0x5eed).unwrap();
                let mut ids: Vec<u32> = hull
                    .faces
                    .iter()
                    .enumerate()
                    .filter(|&(f, _)| hull.is_finite_face(f) && hull.face_xy_sign(f, &pts) < 0)
                    .flat_map(|(_, face)| face.iter().filter(|&&v| v != INF).map(|&v| order[v as usize]))
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            }
        };
        Ok(EnvelopeIndex { planes: planes.to_vec(), facets, shape, mode })
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    /// Ids of planes that appear on the envelope.
    pub fn facets(&self) -> &[u32] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Id of a plane attaining the minimum at `(x, y)`.
    pub fn locate(&self, x: f64, y: f64, steps: &mut u64) -> u32 {
        if self.mode == LocateMode::Linear {
            *steps += self.facets.len() as u64;
            let mut best = self.facets[0];
            for &i in &self.facets[1..] {
                if self.planes[i as usize].at(x, y) < self.planes[best as usize].at(x, y) {
                    best = i;
                }
            }
            return best;
        }
        match &self.shape {
            Shape::Single(i) => {
                *steps += 1;
                *i
            }
            Shape::Strips { e, breaks, ids } => {
                *steps += 1 + super::locate::log2_ceil(breaks.len() + 1);
                let lam = e[0] * x + e[1] * y;
                ids[breaks.partition_point(|&b| b <= lam)]
            }
            Shape::Cells(loc) => loc.locate(x, y, steps),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let mut s = 0;
        self.planes[self.locate(x, y, &mut s) as usize].at(x, y)
    }

    /// Some plane passes strictly below `q`.
    pub fn envelope_below(&self, q: [f64; 3]) -> bool {
        self.value(q[0], q[1]) < q[2]
    }

    /// Some plane passes through or below `q`.
    pub fn envelope_at_or_below(&self, q: [f64; 3], steps: &mut u64) -> bool {
        let i = self.locate(q[0], q[1], steps);
        self.planes[i as usize].at(q[0], q[1]) <= q[2]
    }
}

fn envelope_vertex(pts: &[[f64; 3]], face: [u32; 3]) -> [f64; 2] {
    let [i, j, k] = face.map(|v| pts[v as usize]);
    let u = [j[0] - i[0], j[1] - i[1], j[2] - i[2]];
    let v = [k[0] - i[0], k[1] - i[1], k[2] - i[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    [n[0] / n[2], n[1] / n[2]]
}

fn strips(pts: &[[f64; 3]], ids: &[u32]) -> Shape {
    let o = pts[0];
    let Some(far) = pts.iter().find(|p| p[0] != o[0] || p[1] != o[1]) else {
        let best = (0..pts.len()).min_by(|&a, &b| pts[a][2].total_cmp(&pts[b][2]).then(ids[a].cmp(&ids[b]))).unwrap();
        return Shape::Single(ids[best]);
    };
    let e = [far[0] - o[0], far[1] - o[1]];
    let ee = e[0] * e[0] + e[1] * e[1];
    // Each plane restricted to the family is the line c + t·λ with λ = e·(x, y).
    let mut lines: Vec<(f64, f64, u32)> = pts
        .iter()
        .zip(ids)
        .map(|(p, &id)| (((p[0] - o[0]) * e[0] + (p[1] - o[1]) * e[1]) / ee, p[2], id))
        .collect();
    lines.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)));
    lines.dedup_by(|next, kept| next.0 == kept.0);
    let cross = |p: (f64, f64, u32), q: (f64, f64, u32)| (q.1 - p.1) / (p.0 - q.0);
    let mut hull: Vec<(f64, f64, u32)> = Vec::new();
    for l in lines {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], l) <= cross(hull[hull.len() - 2], hull[hull.len() - 1]) {
            hull.pop();
        }
        hull.push(l);
    }
    let breaks = hull.windows(2).map(|w| cross(w[0], w[1])).collect();
    Shape::Strips { e, breaks, ids: hull.iter().map(|l| l.2).collect() }
}
