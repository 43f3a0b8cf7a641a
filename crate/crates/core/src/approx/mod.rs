//! Approximate weighted sampling from 3D halfspaces with a deterministic
//! operation bound.
//!
//! Each triangle of each class hierarchy carries a kd partition of its
//! conflict list. A query takes one representative from every cell that is
//! not outside the range, splits them into an inside pool and a straddling
//! pool, and answers each draw with at most one straddling attempt before
//! falling back to the inside pool.

pub mod partition;

use serde::Serialize;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::geom::locate::log2_ceil;
use crate::geom::{GroupMaxIndex, HalfspaceQuery, Plane, View};
use crate::ops::OpCounter;
use crate::rng::RandomSource;
use crate::shallow::{Hierarchy, ShallowConfig};
use crate::types::Dataset;
use crate::weight_partition::WeightClassPartition;

pub use partition::{Cell, CellKind, KdPartition};

/// Constant in the per-call operation bound
/// `C·(log2(n/γ)·(log2 n + 1/ε³) + k)`.
pub const OP_CONSTANT: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxConfig {
    pub eps: f64,
    pub gamma: f64,
    /// Partition parameter is `ceil(c_r / ε³)` unless `r` is set.
    pub c_r: f64,
    pub r: Option<usize>,
    /// Lists up to `max(singleton_limit, r)` points are split into single
    /// points unless `r` is set.
    pub singleton_limit: usize,
    #[serde(skip)]
    pub shallow: ShallowConfig,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        let shallow = ShallowConfig::default();
        let singleton_limit = (shallow.c_conf * shallow.k_min as f64) as usize;
        ApproxConfig { eps: 0.25, gamma: 0.025, c_r: 8.0, r: None, singleton_limit, shallow }
    }
}

impl ApproxConfig {
    pub fn new(eps: f64, gamma: f64) -> Self {
        ApproxConfig { eps, gamma, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < self.eps && self.eps < 1.0) {
            return Err(Error::BadParameter(format!("need 0 < gamma < eps < 1, got eps {} gamma {}", self.eps, self.gamma)));
        }
        if !(self.c_r > 0.0) || self.r == Some(0) {
            return Err(Error::BadParameter("partition parameter must be positive".into()));
        }
        Ok(())
    }

    pub fn partition_r(&self) -> usize {
        self.r.unwrap_or_else(|| (self.c_r / self.eps.powi(3)).ceil() as usize)
    }

    /// Kd partition of `ids`: singletons for short lists, else cells of up
    /// to `2·ceil(N/r)` points.
    pub fn partition(&self, pos: &[[f64; 3]], weights: &[f64], ids: &[usize]) -> Result<KdPartition> {
        let r = self.partition_r();
        if self.r.is_none() && ids.len() <= self.singleton_limit.max(r) {
            KdPartition::with_cap(pos, weights, ids, 1)
        } else {
            KdPartition::build(pos, weights, ids, r)
        }
    }

    /// Classes whose heaviest weight is below `1/cutoff_ratio` of the first
    /// class's lightest weight are dropped.
    pub fn cutoff_ratio(&self, n: usize) -> f64 {
        (n as f64 / self.gamma.min(self.eps / 3.0)).max(2.0)
    }
}

/// `log2(n/γ)·(log2 n + 1/ε³) + k`.
pub fn op_bound_shape(n: usize, eps: f64, gamma: f64, k: usize) -> f64 {
    let n = n as f64;
    (n / gamma).log2() * (n.log2() + eps.powi(-3)) + k as f64
}

#[derive(Debug, Clone)]
struct ViewParts {
    hierarchy: Hierarchy,
    parts: Vec<Vec<KdPartition>>,
}

#[derive(Debug, Clone)]
struct ClassParts {
    views: Vec<ViewParts>,
    whole: KdPartition,
}

#[derive(Debug, Clone)]
pub struct ApproxSampler {
    data: Dataset,
    cfg: ApproxConfig,
    classes: WeightClassPartition,
    groups: GroupMaxIndex,
    index: Vec<ClassParts>,
}

/// One non-outside cell of a query's candidate structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutCell {
    pub class: usize,
    pub kind: CellKind,
    /// `(id, weight)` of every member.
    pub members: Vec<(usize, f64)>,
}

/// Everything that determines the selection distribution of one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateLayout {
    pub first_class: usize,
    pub cutoff: usize,
    pub cells: Vec<LayoutCell>,
}

#[derive(Debug, Clone, Copy)]
struct Rep {
    point: usize,
    part: u32,
    cell: u32,
}

/// How a draw was answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Inside,
    Straddling,
    /// A straddling attempt missed and the inside pool answered.
    Redirected,
    /// Inside pool empty: answered by straddling retries or a scan.
    Fallback,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ApproxStats {
    pub inside: u64,
    pub straddling: u64,
    pub redirected: u64,
    pub fallback: u64,
}

/// Representatives and pools for one query.
#[derive(Debug)]
pub struct CandidateSet<'a> {
    h: HalfspaceQuery,
    parts: Vec<&'a KdPartition>,
    reps: Vec<Rep>,
    inside: Vec<u32>,
    straddling: Vec<u32>,
    inside_alias: Option<AliasTable>,
    straddling_alias: Option<AliasTable>,
    w_in: f64,
    w_str: f64,
    scan: Option<(Vec<usize>, AliasTable)>,
    retries_left: usize,
    data: &'a Dataset,
    pub stats: ApproxStats,
}

impl ApproxSampler {
    pub fn build(data: &Dataset, cfg: ApproxConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = data.weights();
        let pos: Vec<[f64; 3]> = data.points().iter().map(|p| p.pos).collect();
        let classes = WeightClassPartition::half_classes(&weights)?;
        let groups = GroupMaxIndex::new(&pos, classes.classes())?;
        let mut index = Vec::with_capacity(classes.len());
        for (ci, ids) in classes.classes().iter().enumerate() {
            let mut shallow = cfg.shallow;
            shallow.seed = cfg.shallow.seed ^ (ci as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mut views = Vec::with_capacity(View::ALL.len());
            for v in View::ALL {
                let planes: Vec<Plane> = ids.iter().map(|&i| v.dual_plane(pos[i])).collect();
                let hierarchy = Hierarchy::build(&planes, &shallow)?;
                let mut parts = Vec::with_capacity(hierarchy.levels().len());
                for level in hierarchy.levels() {
                    let mut row = Vec::with_capacity(level.triangles().len());
                    for t in level.triangles() {
                        let members: Vec<usize> = t.conflicts.iter().map(|&j| ids[j as usize]).collect();
                        row.push(cfg.partition(&pos, &weights, &members)?);
                    }
                    parts.push(row);
                }
                views.push(ViewParts { hierarchy, parts });
            }
            let whole = cfg.partition(&pos, &weights, ids)?;
            index.push(ClassParts { views, whole });
        }
        Ok(ApproxSampler { data: data.clone(), cfg, classes, groups, index })
    }

    pub fn config(&self) -> &ApproxConfig {
        &self.cfg
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn classes(&self) -> &WeightClassPartition {
        &self.classes
    }

    /// `C·(log2(n/γ)·(log2 n + 1/ε³) + k)` with the pinned constant.
    pub fn op_bound(&self, k: usize) -> f64 {
        OP_CONSTANT * op_bound_shape(self.data.len(), self.cfg.eps, self.cfg.gamma, k)
    }

    /// Class partitions serving `h`, with the first class and the cutoff.
    fn parts_for(&self, h: &HalfspaceQuery, ops: &mut OpCounter) -> Result<(Vec<(usize, &KdPartition)>, usize, usize)> {
        let hit = match self.groups.first_nonempty_group(h) {
            Ok(hit) => hit,
            Err(Error::NotFound) => return Err(Error::EmptyRange),
            Err(e) => return Err(e),
        };
        ops.envelope_calls += hit.envelope_calls;
        ops.locate_steps += hit.steps;
        let first = hit.group;
        let cutoff = self.classes.cutoff_index(first, self.cfg.cutoff_ratio(self.data.len()));
        ops.comparisons += log2_ceil(self.classes.len() + 1);
        let (view, q) = h.view();
        let mut parts = Vec::with_capacity(cutoff - first);
        for ci in first..cutoff {
            let fr = &self.index[ci].views[view.index()];
            match fr.hierarchy.locate_level(q, &mut ops.locate_steps) {
                Some((level, tri)) => parts.push((ci, &fr.parts[level][tri])),
                None => parts.push((ci, &self.index[ci].whole)),
            }
        }
        Ok((parts, first, cutoff))
    }

    /// The non-outside cells a query would draw representatives from.
    pub fn candidate_layout(&self, h: &HalfspaceQuery) -> Result<CandidateLayout> {
        let (parts, first_class, cutoff) = self.parts_for(h, &mut OpCounter::default())?;
        let mut cells = Vec::new();
        for (class, p) in parts {
            for j in 0..p.len() {
                let kind = p.classify(j, h);
                if kind != CellKind::Outside {
                    let members = p.members(j).map(|i| (i, self.data.weight(i))).collect();
                    cells.push(LayoutCell { class, kind, members });
                }
            }
        }
        Ok(CandidateLayout { first_class, cutoff, cells })
    }

    /// Classifies cells and draws one representative per non-outside cell.
    pub fn generate_candidates<R: RandomSource + ?Sized>(
        &self,
        h: &HalfspaceQuery,
        rng: &mut R,
        ops: &mut OpCounter,
    ) -> Result<CandidateSet<'_>> {
        let (parts, _, _) = self.parts_for(h, ops)?;
        let mut set = CandidateSet {
            h: *h,
            parts: Vec::with_capacity(parts.len()),
            reps: Vec::new(),
            inside: Vec::new(),
            straddling: Vec::new(),
            inside_alias: None,
            straddling_alias: None,
            w_in: 0.0,
            w_str: 0.0,
            scan: None,
            retries_left: 0,
            data: &self.data,
            stats: ApproxStats::default(),
        };
        let mut w_in = Vec::new();
        let mut w_str = Vec::new();
        for (pi, (_, p)) in parts.into_iter().enumerate() {
            set.parts.push(p);
            for (j, cell) in p.cells().iter().enumerate() {
                ops.comparisons += 8;
                let kind = p.classify(j, h);
                if kind == CellKind::Outside {
                    continue;
                }
                ops.alias_draws += 1;
                let rep = Rep { point: p.draw(j, rng), part: pi as u32, cell: j as u32 };
                let idx = set.reps.len() as u32;
                set.reps.push(rep);
                if kind == CellKind::Inside {
                    set.inside.push(idx);
                    w_in.push(cell.weight);
                } else {
                    set.straddling.push(idx);
                    w_str.push(cell.weight);
                }
            }
        }
        ops.comparisons += set.reps.len() as u64;
        if !w_in.is_empty() {
            let a = AliasTable::new(&w_in)?;
            set.w_in = a.total();
            set.inside_alias = Some(a);
        }
        if !w_str.is_empty() {
            let a = AliasTable::new(&w_str)?;
            set.w_str = a.total();
            set.straddling_alias = Some(a);
        }
        if set.reps.is_empty() {
            return Err(Error::EmptyRange);
        }
        set.retries_left = set.straddling.len();
        Ok(set)
    }

    pub fn sample_k<R: RandomSource + ?Sized>(&self, h: &HalfspaceQuery, k: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.sample_k_counted(h, k, rng, &mut OpCounter::default()).map(|(ids, _)| ids)
    }

    /// As `sample_k`, also accumulating operation counts and returning
    /// per-pick statistics.
    pub fn sample_k_counted<R: RandomSource + ?Sized>(
        &self,
        h: &HalfspaceQuery,
        k: usize,
        rng: &mut R,
        ops: &mut OpCounter,
    ) -> Result<(Vec<usize>, ApproxStats)> {
        let mut set = self.generate_candidates(h, rng, ops)?;
        let out = (0..k).map(|_| set.select_one(rng, ops).0).collect();
        Ok((out, set.stats))
    }
}

impl CandidateSet<'_> {
    pub fn inside_weight(&self) -> f64 {
        self.w_in
    }

    pub fn straddling_weight(&self) -> f64 {
        self.w_str
    }

    pub fn inside_len(&self) -> usize {
        self.inside.len()
    }

    pub fn straddling_len(&self) -> usize {
        self.straddling.len()
    }

    /// Takes the point of rep `idx` and redraws the rep from its cell.
    fn take<R: RandomSource + ?Sized>(&mut self, idx: u32, rng: &mut R, ops: &mut OpCounter) -> usize {
        let rep = &mut self.reps[idx as usize];
        let out = rep.point;
        rep.point = self.parts[rep.part as usize].draw(rep.cell as usize, rng);
        ops.alias_draws += 1;
        out
    }

    fn draw_inside<R: RandomSource + ?Sized>(&mut self, rng: &mut R, ops: &mut OpCounter) -> usize {
        let a = self.inside_alias.as_ref().expect("inside pool is nonempty");
        let idx = self.inside[a.sample(rng)];
        ops.alias_draws += 1;
        self.take(idx, rng, ops)
    }

    /// One straddling attempt: the rep's point if it lies in the range.
    fn try_straddling<R: RandomSource + ?Sized>(&mut self, rng: &mut R, ops: &mut OpCounter) -> Option<usize> {
        let a = self.straddling_alias.as_ref().expect("straddling pool is nonempty");
        let idx = self.straddling[a.sample(rng)];
        ops.alias_draws += 1;
        ops.comparisons += 1;
        let p = self.take(idx, rng, ops);
        self.h.contains(self.data.pos(p)).then_some(p)
    }

    /// One draw: a coin picks the pool with probability proportional to
    /// its weight, and a missed straddling attempt goes to the inside pool.
    pub fn select_one<R: RandomSource + ?Sized>(&mut self, rng: &mut R, ops: &mut OpCounter) -> (usize, Pick) {
        if self.inside.is_empty() {
            self.stats.fallback += 1;
            return (self.fallback(rng, ops), Pick::Fallback);
        }
        ops.comparisons += 1;
        let go_inside = self.straddling.is_empty() || rng.draw_unit() * (self.w_in + self.w_str) < self.w_in;
        if go_inside {
            self.stats.inside += 1;
            return (self.draw_inside(rng, ops), Pick::Inside);
        }
        if let Some(p) = self.try_straddling(rng, ops) {
            self.stats.straddling += 1;
            return (p, Pick::Straddling);
        }
        self.stats.redirected += 1;
        (self.draw_inside(rng, ops), Pick::Redirected)
    }

    /// Straddling attempts, at most the pool size per query in total, then
    /// exact draws from the straddling members inside the range.
    fn fallback<R: RandomSource + ?Sized>(&mut self, rng: &mut R, ops: &mut OpCounter) -> usize {
        while self.retries_left > 0 {
            self.retries_left -= 1;
            if let Some(p) = self.try_straddling(rng, ops) {
                return p;
            }
        }
        if self.scan.is_none() {
            let mut ids = Vec::new();
            for &idx in &self.straddling {
                let rep = self.reps[idx as usize];
                let part = self.parts[rep.part as usize];
                for i in part.members(rep.cell as usize) {
                    ops.comparisons += 1;
                    if self.h.contains(self.data.pos(i)) {
                        ids.push(i);
                    }
                }
            }
            let w: Vec<f64> = ids.iter().map(|&i| self.data.weight(i)).collect();
            let alias = AliasTable::new(&w).expect("the first class meets the range");
            self.scan = Some((ids, alias));
        }
        let (ids, alias) = self.scan.as_ref().unwrap();
        ops.alias_draws += 1;
        ids[alias.sample(rng)]
    }
}

#[cfg(test)]
mod tests;
