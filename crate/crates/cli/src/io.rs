//! CSV formats for points and queries.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wirs::geom::{HalfspaceQuery, Orientation, Plane};
use wirs::Dataset;

/// Seventeen significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Deserialize)]
struct PointRow {
    id: usize,
    x: f64,
    y: f64,
    z: f64,
    w: f64,
}

pub fn write_points(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    out.write_record(["id", "x", "y", "z", "w"])?;
    for (i, p) in data.points().iter().enumerate() {
        out.write_record([i.to_string(), fmt_f64(p.pos[0]), fmt_f64(p.pos[1]), fmt_f64(p.pos[2]), fmt_f64(p.weight)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_points(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut pos = Vec::new();
    let mut w = Vec::new();
    for (row, rec) in rdr.deserialize::<PointRow>().enumerate() {
        let rec = rec.with_context(|| format!("{} row {}", path.display(), row + 1))?;
        if rec.id != row {
            bail!("{}: row {} has id {}, ids must count up from 0", path.display(), row + 1, rec.id);
        }
        pos.push([rec.x, rec.y, rec.z]);
        w.push(rec.w);
    }
    Ok(Dataset::from_positions(&pos, &w)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orient {
    Below,
    Above,
}

#[derive(Debug, Deserialize)]
struct QueryRow {
    qid: u64,
    a: f64,
    b: f64,
    c: f64,
    #[allow(dead_code)]
    d: f64,
    orient: Orient,
}

/// A query with its id: `z <= a·x + b·y + c` (below) or `z >= …` (above).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub qid: u64,
    pub h: HalfspaceQuery,
}

pub fn write_queries(path: &Path, queries: &[Query]) -> Result<()> {
    let mut out = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(out, "qid,a,b,c,d,orient")?;
    for q in queries {
        let Plane { a, b, c } = q.h.plane;
        let orient = match q.h.orientation {
            Orientation::Below => "below",
            Orientation::Above => "above",
        };
        writeln!(out, "{},{},{},{},{},{orient}", q.qid, fmt_f64(a), fmt_f64(b), fmt_f64(c), fmt_f64(0.0))?;
    }
    Ok(())
}

pub fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out: Vec<Query> = Vec::new();
    for (row, rec) in rdr.deserialize::<QueryRow>().enumerate() {
        let rec = rec.with_context(|| format!("{} row {}", path.display(), row + 1))?;
        if ![rec.a, rec.b, rec.c].iter().all(|v| v.is_finite()) {
            bail!("{}: query {} has a non-finite coefficient", path.display(), rec.qid);
        }
        let h = match rec.orient {
            Orient::Below => HalfspaceQuery::below(rec.a, rec.b, rec.c),
            Orient::Above => HalfspaceQuery::above(rec.a, rec.b, rec.c),
        };
        out.push(Query { qid: rec.qid, h });
    }
    out.sort_by_key(|q| q.qid);
    if out.windows(2).any(|w| w[0].qid == w[1].qid) {
        bail!("{}: duplicate query ids", path.display());
    }
    Ok(out)
}
