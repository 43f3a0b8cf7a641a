//! Hierarchy of approximate k-levels with per-triangle conflict lists.
//!
//! Level `k` is the upper concave hull, over a box in the dual plane, of the
//! t-level of a random sample that keeps each plane with probability
//! `min(1, sample_mean / k)`. Every level also includes the vertices of the
//! level below, so a point under level `i` is under every higher level.

pub mod tlevel;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::hull::hull_with_infinity;
use crate::geom::locate::{log2_ceil, SlabLocator, OUTSIDE};
use crate::geom::Plane;
use crate::rng::{RandomSource, SeededRng};

pub use tlevel::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShallowConfig {
    pub k_min: usize,
    pub c_size: f64,
    pub c_conf: f64,
    pub c_q: f64,
    pub max_retries: usize,
    /// Expected level of the sample surface in sample units. Retries after
    /// a size violation lower it, retries after a conflict violation raise it,
    /// with the step shrinking on every reversal.
    pub sample_mean: f64,
    /// Target sample level as a fraction of `sample_mean`.
    pub level_ratio: f64,
    /// Half-width of the dual box; derived from the planes when `None`.
    pub box_half_width: Option<f64>,
    /// Ratio between consecutive level parameters.
    pub level_growth: f64,
    pub seed: u64,
}

impl Default for ShallowConfig {
    fn default() -> Self {
        ShallowConfig {
            k_min: 32,
            c_size: 8.0,
            c_conf: 8.0,
            c_q: 32.0,
            max_retries: 16,
            sample_mean: 4.0,
            level_ratio: 1.0,
            box_half_width: None,
            level_growth: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Triangle {
    pub verts: [u32; 3],
    pub conflicts: Vec<u32>,
}

#[derive(Debug, Clone)]
struct Surface {
    vertices: Vec<[f64; 3]>,
    locator: SlabLocator,
}

impl Surface {
    /// Lower and upper bounds on the height of triangle `t` above the xy
    /// position of `q`, which must lie in its projection. Barycentric
    /// weights come from floating-point orientations; their rounding error
    /// widens the bounds, and slivers fall back to the vertex range.
    fn height_bounds(&self, t: &Triangle, q: [f64; 3]) -> (f64, f64) {
        let v = t.verts.map(|i| self.vertices[i as usize]);
        let zmin = v.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        let zmax = v.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        let mut o = [0.0; 3];
        let mut err = 0.0;
        for i in 0..3 {
            let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            let l = (b[0] - a[0]) * (q[1] - a[1]);
            let r = (b[1] - a[1]) * (q[0] - a[0]);
            o[i] = (l - r).max(0.0);
            err += 8.0 * f64::EPSILON * (l.abs() + r.abs() + (b[0] - a[0]).abs() * (b[1] - a[1]).abs());
        }
        let sum = o[0] + o[1] + o[2];
        if !(sum > 0.0) {
            return (zmin, zmax);
        }
        let z = (o[0] * v[0][2] + o[1] * v[1][2] + o[2] * v[2][2]) / sum;
        let e = 2.0 * (err / sum) * (zmax - zmin) + 4.0 * f64::EPSILON * zmax.abs().max(zmin.abs());
        ((z - e).max(zmin), (z + e).min(zmax))
    }
}

/// One approximate level. A level without a surface is universal: a single
/// triangle covering everything with every plane in conflict.
#[derive(Debug, Clone)]
pub struct ApproxLevel {
    pub k: usize,
    pub attempts: usize,
    triangles: Vec<Triangle>,
    surface: Option<Surface>,
}

fn slack(z: f64) -> f64 {
    1e-9 * (1.0 + z.abs())
}

/// Planes passing at or below `v` (with a small slack upward).
pub fn vertex_conflicts(planes: &[Plane], v: [f64; 3]) -> Vec<u32> {
    let lim = v[2] + slack(v[2]);
    (0..planes.len() as u32).filter(|&j| planes[j as usize].at(v[0], v[1]) <= lim).collect()
}

/// Planes passing at or below `q`.
pub fn query_conflicts(planes: &[Plane], q: [f64; 3]) -> Vec<u32> {
    (0..planes.len() as u32).filter(|&j| planes[j as usize].at(q[0], q[1]) <= q[2]).collect()
}

impl ApproxLevel {
    pub fn universal(n: usize) -> Self {
        let tri = Triangle { verts: [0; 3], conflicts: (0..n as u32).collect() };
        ApproxLevel { k: n, attempts: 1, triangles: vec![tri], surface: None }
    }

    pub fn is_universal(&self) -> bool {
        self.surface.is_none()
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        self.surface.as_ref().map(|s| s.vertices.as_slice()).unwrap_or(&[])
    }

    pub fn max_conflict(&self) -> usize {
        self.triangles.iter().map(|t| t.conflicts.len()).max().unwrap_or(0)
    }

    pub fn total_conflicts(&self) -> usize {
        self.triangles.iter().map(|t| t.conflicts.len()).sum()
    }

    /// Triangle lying on or above `q`, if any.
    pub fn covering(&self, q: [f64; 3], steps: &mut u64) -> Option<usize> {
        let Some(s) = &self.surface else {
            *steps += 1;
            return Some(0);
        };
        let t = s.locator.locate(q[0], q[1], steps);
        if t == OUTSIDE {
            return None;
        }
        let (lo, _) = s.height_bounds(&self.triangles[t as usize], q);
        (q[2] <= lo - slack(lo)).then_some(t as usize)
    }

    /// The surface passes on or above `v` (within rounding slack).
    pub fn on_or_above(&self, v: [f64; 3]) -> bool {
        let Some(s) = &self.surface else { return true };
        let t = s.locator.locate(v[0], v[1], &mut 0);
        if t == OUTSIDE {
            return false;
        }
        let (_, hi) = s.height_bounds(&self.triangles[t as usize], v);
        v[2] <= hi + slack(hi)
    }

    /// Builds level `k` of `planes` over `bx`; `seed_points` are added to the
    /// hull's point set (used to nest levels).
    pub fn build(
        planes: &[Plane],
        k: usize,
        bx: Rect,
        cfg: &ShallowConfig,
        seed_points: &[[f64; 3]],
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let n = planes.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if k == 0 || 2 * k > n.max(2) {
            return Err(Error::BadParameter(format!("level {k} out of range for {n} planes")));
        }
        let max_tris = cfg.c_size * n as f64 / k as f64;
        let max_conf = cfg.c_conf * k as f64;
        let mut mean = cfg.sample_mean;
        // Step on `mean`, shrunk whenever the direction reverses.
        let mut step: f64 = 1.25;
        let mut last_dir = 0i8;
        for attempt in 1..=cfg.max_retries {
            let p = (mean / k as f64).min(1.0);
            let target = (cfg.level_ratio * p * k as f64).round().max(0.0) as usize;
            let sample: Vec<Plane> = if p >= 1.0 {
                planes.to_vec()
            } else {
                planes.iter().copied().filter(|_| rng.draw_unit() < p).collect()
            };
            if sample.is_empty() {
                continue;
            }
            let t = target.min(sample.len() - 1);
            let pts = tlevel::level_points(&sample, t, bx);
            let Some(level) = nested_surface(planes, pts, seed_points, k, attempt) else {
                continue;
            };
            let too_big = level.triangles.len() as f64 > max_tris;
            let too_deep = level.max_conflict() as f64 > max_conf;
            let dir = match (too_big, too_deep) {
                (false, false) => return Ok(level),
                (true, false) => -1,
                (false, true) => 1,
                (true, true) => continue,
            };
            if last_dir != 0 && dir != last_dir {
                step = step.sqrt();
            }
            last_dir = dir;
            mean = if dir > 0 { mean * step } else { mean / step };
        }
        Err(Error::ConstructionFailed(cfg.max_retries))
    }

    pub fn dump(&self) -> LevelDump {
        let verts = self.vertices();
        LevelDump {
            k: self.k,
            universal: self.is_universal(),
            attempts: self.attempts,
            triangle_count: self.triangles.len(),
            max_conflict: self.max_conflict(),
            total_conflicts: self.total_conflicts(),
            triangles: self
                .triangles
                .iter()
                .map(|t| TriangleDump {
                    vertices: if verts.is_empty() { vec![] } else { t.verts.iter().map(|&v| verts[v as usize]).collect() },
                    conflict_size: t.conflicts.len(),
                })
                .collect(),
        }
    }
}

/// Surface over `pts` raised, where needed, to pass on or above every point
/// of `floor`.
fn nested_surface(planes: &[Plane], mut pts: Vec<[f64; 3]>, floor: &[[f64; 3]], k: usize, attempts: usize) -> Option<ApproxLevel> {
    let first = surface_from_points(planes, &pts, k, attempts)?;
    let poking: Vec<[f64; 3]> = floor.iter().copied().filter(|&v| !first.on_or_above(v)).collect();
    if poking.is_empty() {
        return Some(first);
    }
    pts.extend(poking);
    surface_from_points(planes, &pts, k, attempts)
}

fn surface_from_points(planes: &[Plane], pts: &[[f64; 3]], k: usize, attempts: usize) -> Option<ApproxLevel> {
    let hull = hull_with_infinity(pts, false, 0xc0ffee)?;
    let mut remap = vec![u32::MAX; pts.len()];
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    for f in 0..hull.faces.len() {
        if !hull.is_finite_face(f) || hull.face_xy_sign(f, pts) <= 0 {
            continue;
        }
        let mut v = [0u32; 3];
        for (slot, &i) in v.iter_mut().zip(&hull.faces[f]) {
            if remap[i as usize] == u32::MAX {
                remap[i as usize] = vertices.len() as u32;
                vertices.push(pts[i as usize]);
            }
            *slot = remap[i as usize];
        }
        tris.push(v);
    }
    let vconf: Vec<Vec<u32>> = vertices.iter().map(|&v| vertex_conflicts(planes, v)).collect();
    let triangles: Vec<Triangle> = tris
        .into_iter()
        .map(|v| {
            let mut conflicts: Vec<u32> = v.iter().flat_map(|&i| vconf[i as usize].iter().copied()).collect();
            conflicts.sort_unstable();
            conflicts.dedup();
            Triangle { verts: v, conflicts }
        })
        .collect();
    let xy: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
    let idx: Vec<[u32; 3]> = triangles.iter().map(|t| t.verts).collect();
    let locator = SlabLocator::from_triangles(&xy, &idx);
    Some(ApproxLevel { k, attempts, triangles, surface: Some(Surface { vertices, locator }) })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleDump {
    pub vertices: Vec<[f64; 3]>,
    pub conflict_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDump {
    pub k: usize,
    pub universal: bool,
    pub attempts: usize,
    pub triangle_count: usize,
    pub max_conflict: usize,
    pub total_conflicts: usize,
    pub triangles: Vec<TriangleDump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelHit {
    pub level: usize,
    pub triangle: usize,
    pub steps: u64,
}

/// Levels `k = k_min, 2·k_min, …` up to `n / 2`, or one universal level when
/// there are fewer than `2·k_min` planes.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    planes: Vec<Plane>,
    levels: Vec<ApproxLevel>,
    bx: Rect,
    cfg: ShallowConfig,
}

/// Half-width of the default dual box: twice the diameter of the primal
/// points behind the planes, and at least two so that every query view
/// (slopes within `[-1, 1]`) falls inside.
pub fn default_half_width(planes: &[Plane]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in planes {
        for (d, v) in [p.a, p.b, p.c].into_iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let diam = (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt();
    (2.0 * diam).max(2.0)
}

impl Hierarchy {
    pub fn build(planes: &[Plane], cfg: &ShallowConfig) -> Result<Self> {
        let n = planes.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let w = cfg.box_half_width.unwrap_or_else(|| default_half_width(planes));
        let bx = [-w, w, -w, w];
        let mut rng = SeededRng::new(cfg.seed);
        let mut levels: Vec<ApproxLevel> = Vec::new();
        if n < 2 * cfg.k_min {
            levels.push(ApproxLevel::universal(n));
        } else {
            let mut k = cfg.k_min;
            while 2 * k <= n {
                let seed_points: Vec<[f64; 3]> = levels.last().map(|l| l.vertices().to_vec()).unwrap_or_default();
                levels.push(ApproxLevel::build(planes, k, bx, cfg, &seed_points, &mut rng)?);
                k = ((k as f64 * cfg.level_growth).ceil() as usize).max(k + 1);
            }
        }
        Ok(Hierarchy { planes: planes.to_vec(), levels, bx, cfg: *cfg })
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn levels(&self) -> &[ApproxLevel] {
        &self.levels
    }

    pub fn config(&self) -> &ShallowConfig {
        &self.cfg
    }

    pub fn dual_box(&self) -> Rect {
        self.bx
    }

    pub fn conflicts(&self, hit: &LevelHit) -> &[u32] {
        &self.levels[hit.level].triangles[hit.triangle].conflicts
    }

    pub fn total_conflicts(&self) -> usize {
        self.levels.iter().map(ApproxLevel::total_conflicts).sum()
    }

    /// Lowest level with a triangle on or above `q`, by binary search.
    pub fn query_level(&self, q: [f64; 3]) -> Result<LevelHit> {
        let mut steps = 0;
        match self.locate_level(q, &mut steps) {
            Some((level, triangle)) => Ok(LevelHit { level, triangle, steps }),
            None => Err(Error::LevelOverflow),
        }
    }

    /// As `query_level`, adding the search cost to `steps` either way.
    pub fn locate_level(&self, q: [f64; 3], steps: &mut u64) -> Option<(usize, usize)> {
        let levels = self.levels.len();
        let (mut lo, mut hi) = (0, levels);
        let mut found = None;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.levels[mid].covering(q, steps) {
                Some(t) => {
                    found = Some((mid, t));
                    hi = mid;
                }
                None => lo = mid + 1,
            }
        }
        *steps += log2_ceil(levels + 1);
        found
    }
}
