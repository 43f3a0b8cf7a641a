//! Random datasets and queries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::HalfspaceQuery;
use crate::rng::SeededRng;
use crate::types::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointDist {
    UnitCube,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDist {
    /// Uniform on `[1, umax]`.
    Uniform,
    /// `umax^u` with `u` uniform on `[0, 1]`.
    LogUniform,
    /// Half the points weigh 1, the other half `umax`.
    TwoScale,
}

pub fn random_point(rng: &mut SeededRng, dist: PointDist) -> [f64; 3] {
    match dist {
        PointDist::UnitCube => [rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0)],
        PointDist::Sphere => loop {
            let v = [rng.gen_range(-1.0, 1.0), rng.gen_range(-1.0, 1.0), rng.gen_range(-1.0, 1.0)];
            let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r > 1e-3 && r <= 1.0 {
                break v.map(|c| c / r);
            }
        },
    }
}

pub fn random_weight(rng: &mut SeededRng, dist: WeightDist, umax: f64) -> f64 {
    let w = match dist {
        WeightDist::Uniform => rng.gen_range(1.0, umax),
        WeightDist::LogUniform => umax.powf(rng.gen_range(0.0, 1.0)),
        WeightDist::TwoScale => {
            if rng.below(2) == 0 {
                1.0
            } else {
                umax
            }
        }
    };
    w.clamp(1.0, umax)
}

pub fn gen_dataset(n: usize, points: PointDist, weights: WeightDist, umax: f64, seed: u64) -> Result<Dataset> {
    if !(umax >= 1.0 && umax.is_finite()) {
        return Err(Error::BadParameter(format!("umax {umax} must be a finite number at least 1")));
    }
    let mut rng = SeededRng::new(seed);
    let pos: Vec<[f64; 3]> = (0..n).map(|_| random_point(&mut rng, points)).collect();
    let w: Vec<f64> = (0..n).map(|_| random_weight(&mut rng, weights, umax)).collect();
    Dataset::from_positions(&pos, &w)
}

/// Random unit normal whose z component is at least `min_z` in magnitude.
fn random_normal(rng: &mut SeededRng, min_z: f64) -> [f64; 3] {
    loop {
        let v = random_point(rng, PointDist::Sphere);
        if v[2].abs() >= min_z {
            return v;
        }
    }
}

/// Halfspace bounded by a random plane through a random point of the unit
/// cube.
pub fn random_halfspace(rng: &mut SeededRng) -> HalfspaceQuery {
    let n = random_normal(rng, 0.05);
    let p = random_point(rng, PointDist::UnitCube);
    let d = n[0] * p[0] + n[1] * p[1] + n[2] * p[2];
    HalfspaceQuery::from_normal(n, d).expect("normal has a z component")
}

/// A random halfspace holding exactly `m` points of `data`. Draws a random
/// direction, places the boundary between the `m`-th and `m+1`-th points
/// along it, and retries until a direct count confirms `m`.
pub fn k_range_halfspace(data: &Dataset, m: usize, rng: &mut SeededRng) -> Result<HalfspaceQuery> {
    let n = data.len();
    if m > n {
        return Err(Error::BadParameter(format!("range size {m} exceeds {n} points")));
    }
    for _ in 0..1000 {
        let nv = random_normal(rng, 0.05);
        let mut proj: Vec<f64> = data.points().iter().map(|p| nv[0] * p.pos[0] + nv[1] * p.pos[1] + nv[2] * p.pos[2]).collect();
        proj.sort_by(f64::total_cmp);
        let d = match m {
            0 => proj[0] - 1.0,
            m if m == n => proj[n - 1] + 1.0,
            m => {
                if proj[m] - proj[m - 1] < 1e-9 {
                    continue;
                }
                0.5 * (proj[m - 1] + proj[m])
            }
        };
        let h = HalfspaceQuery::from_normal(nv, d)?;
        if data.points().iter().filter(|p| h.contains(p.pos)).count() == m {
            return Ok(h);
        }
    }
    Err(Error::ConstructionFailed(1000))
}
