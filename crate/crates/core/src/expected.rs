//! Exact weighted sampling from 3D halfspaces by rejection over conflict
//! lists.
//!
//! Points are split into factor-2 weight classes. A query finds the first
//! class meeting the halfspace, keeps the classes down to the cutoff where
//! weights fall below `1/n²` of that class's minimum, and looks up one
//! conflict list per kept class. Everything past the cutoff is one lumped
//! entry of the top-level alias table; drawing it is rare and costs a scan.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use serde::Serialize;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::geom::{GroupMaxIndex, HalfspaceQuery, Plane, View};
use crate::rng::RandomSource;
use crate::shallow::{Hierarchy, ShallowConfig};
use crate::types::Dataset;
use crate::weight_partition::WeightClassPartition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub shallow: ShallowConfig,
    /// Conflict lists no longer than this are filtered against the query
    /// exactly instead of being sampled with rejection.
    pub scan_limit: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        let shallow = ShallowConfig::default();
        SamplerConfig { shallow, scan_limit: (shallow.c_conf * shallow.k_min as f64) as usize }
    }
}

/// Counters accumulated over all `sample` calls since the last reset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub queries: u64,
    pub samples: u64,
    /// Draws from the top-level table, accepted or not.
    pub rounds: u64,
    pub case1_hits: u64,
    /// Classes whose query point lay above every level, so the whole class
    /// stood in for a conflict list.
    pub fallback_scans: u64,
}

impl QueryStats {
    pub fn rounds_per_sample(&self) -> f64 {
        self.rounds as f64 / self.samples.max(1) as f64
    }

    pub fn case1_rate(&self) -> f64 {
        self.case1_hits as f64 / self.rounds.max(1) as f64
    }

    pub fn merge(&mut self, o: &QueryStats) {
        self.queries += o.queries;
        self.samples += o.samples;
        self.rounds += o.rounds;
        self.case1_hits += o.case1_hits;
        self.fallback_scans += o.fallback_scans;
    }
}

#[derive(Debug, Default)]
struct Counters([AtomicU64; 5]);

impl Counters {
    fn add(&self, s: &QueryStats) {
        let vals = [s.queries, s.samples, s.rounds, s.case1_hits, s.fallback_scans];
        for (c, v) in self.0.iter().zip(vals) {
            c.fetch_add(v, Ordering::Relaxed);
        }
    }

    fn get(&self) -> QueryStats {
        let v = self.0.each_ref().map(|c| c.load(Ordering::Relaxed));
        QueryStats { queries: v[0], samples: v[1], rounds: v[2], case1_hits: v[3], fallback_scans: v[4] }
    }

    fn reset(&self) {
        for c in &self.0 {
            c.store(0, Ordering::Relaxed);
        }
    }
}

#[derive(Debug, Clone)]
struct ViewIndex {
    hierarchy: Hierarchy,
    /// Alias table per triangle, by level.
    aliases: Vec<Vec<AliasTable>>,
}

#[derive(Debug, Clone)]
struct ClassIndex {
    /// Global ids by local index.
    ids: Vec<usize>,
    views: Vec<ViewIndex>,
    whole: AliasTable,
}

#[derive(Debug)]
pub struct ExpectedSampler {
    data: Dataset,
    classes: WeightClassPartition,
    groups: GroupMaxIndex,
    index: Vec<ClassIndex>,
    cfg: SamplerConfig,
    counters: Counters,
}

#[derive(Debug)]
enum Source {
    /// Conflict list of one triangle; draws need a containment check.
    Triangle { class: usize, view: usize, level: usize, tri: usize },
    /// The whole class; draws need a containment check.
    Whole { class: usize },
    /// Points already known to lie in the query.
    Exact { ids: Vec<usize>, alias: AliasTable },
    /// Every class from the cutoff on.
    Tail,
}

/// Per-query state: the top-level table and its sources.
#[derive(Debug)]
pub struct QueryPlan<'a> {
    sampler: &'a ExpectedSampler,
    h: HalfspaceQuery,
    sources: Vec<Source>,
    masses: Vec<f64>,
    top: AliasTable,
    first_class: usize,
    cutoff: usize,
    tail: OnceLock<(Vec<usize>, AliasTable)>,
    stats: QueryStats,
}

impl ExpectedSampler {
    pub fn build(data: &Dataset) -> Result<Self> {
        Self::with_config(data, SamplerConfig::default())
    }

    pub fn with_config(data: &Dataset, cfg: SamplerConfig) -> Result<Self> {
        let weights = data.weights();
        let classes = WeightClassPartition::half_classes(&weights)?;
        let pos: Vec<[f64; 3]> = data.points().iter().map(|p| p.pos).collect();
        let groups = GroupMaxIndex::new(&pos, classes.classes())?;
        let mut index = Vec::with_capacity(classes.len());
        for (ci, ids) in classes.classes().iter().enumerate() {
            let w: Vec<f64> = ids.iter().map(|&i| weights[i]).collect();
            let mut shallow = cfg.shallow;
            shallow.seed = cfg.shallow.seed ^ (ci as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let views = View::ALL.map(|v| {
                let planes: Vec<Plane> = ids.iter().map(|&i| v.dual_plane(pos[i])).collect();
                Hierarchy::build(&planes, &shallow).map(|hierarchy| {
                    let aliases = hierarchy
                        .levels()
                        .iter()
                        .map(|l| {
                            l.triangles()
                                .iter()
                                .map(|t| {
                                    let tw: Vec<f64> = t.conflicts.iter().map(|&j| w[j as usize]).collect();
                                    AliasTable::new(&tw).expect("conflict lists are nonempty")
                                })
                                .collect()
                        })
                        .collect();
                    ViewIndex { hierarchy, aliases }
                })
            });
            let views = views.into_iter().collect::<Result<Vec<_>>>()?;
            index.push(ClassIndex { ids: ids.clone(), views, whole: AliasTable::new(&w)? });
        }
        Ok(ExpectedSampler { data: data.clone(), classes, groups, index, cfg, counters: Counters::default() })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn classes(&self) -> &WeightClassPartition {
        &self.classes
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// Weight-ratio threshold that ends the explicitly handled classes.
    pub fn cutoff_ratio(&self) -> f64 {
        let n = self.data.len() as f64;
        (n * n).max(2.0)
    }

    /// Alias entries plus conflict entries over every class and view.
    pub fn space(&self) -> usize {
        let mut total = 0;
        for c in &self.index {
            total += c.whole.len();
            for f in &c.views {
                total += f.hierarchy.total_conflicts();
                total += f.aliases.iter().flatten().map(AliasTable::len).sum::<usize>();
            }
        }
        total
    }

    /// For every class, view, level and triangle: the alias total and the
    /// conflict-list weight sum recomputed from the dataset.
    pub fn triangle_totals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in &self.index {
            for f in &c.views {
                for (level, tables) in f.hierarchy.levels().iter().zip(&f.aliases) {
                    for (t, a) in level.triangles().iter().zip(tables) {
                        let sum: f64 = t.conflicts.iter().map(|&j| self.data.weight(c.ids[j as usize])).sum();
                        out.push((a.total(), sum));
                    }
                }
            }
        }
        out
    }

    pub fn query_stats(&self) -> QueryStats {
        self.counters.get()
    }

    pub fn reset_stats(&self) {
        self.counters.reset();
    }

    /// Range lookup and top-level table for `h`.
    pub fn plan(&self, h: &HalfspaceQuery) -> Result<QueryPlan<'_>> {
        let first = match self.groups.first_nonempty_group(h) {
            Ok(hit) => hit.group,
            Err(Error::NotFound) => return Err(Error::EmptyRange),
            Err(e) => return Err(e),
        };
        let cutoff = self.classes.cutoff_index(first, self.cutoff_ratio());
        let (view, q) = h.view();
        let vi = view.index();
        let mut stats = QueryStats { queries: 1, ..Default::default() };
        let mut sources = Vec::new();
        let mut masses = Vec::new();
        for ci in first..cutoff {
            let class = &self.index[ci];
            let fr = &class.views[vi];
            match fr.hierarchy.query_level(q) {
                Ok(hit) => {
                    let conflicts = fr.hierarchy.conflicts(&hit);
                    if cfg!(debug_assertions) {
                        for (j, &id) in class.ids.iter().enumerate() {
                            if h.contains(self.data.pos(id)) {
                                debug_assert!(
                                    conflicts.binary_search(&(j as u32)).is_ok(),
                                    "class {ci} {hit:?} q {q:?} misses {id}"
                                );
                            }
                        }
                    }
                    if conflicts.len() <= self.cfg.scan_limit {
                        let ids: Vec<usize> = conflicts
                            .iter()
                            .map(|&j| class.ids[j as usize])
                            .filter(|&id| h.contains(self.data.pos(id)))
                            .collect();
                        if ids.is_empty() {
                            continue;
                        }
                        let w: Vec<f64> = ids.iter().map(|&id| self.data.weight(id)).collect();
                        let alias = AliasTable::new(&w)?;
                        masses.push(alias.total());
                        sources.push(Source::Exact { ids, alias });
                    } else {
                        masses.push(fr.aliases[hit.level][hit.triangle].total());
                        sources.push(Source::Triangle { class: ci, view: vi, level: hit.level, tri: hit.triangle });
                    }
                }
                Err(Error::LevelOverflow) => {
                    stats.fallback_scans += 1;
                    masses.push(class.whole.total());
                    sources.push(Source::Whole { class: ci });
                }
                Err(e) => return Err(e),
            }
        }
        if cutoff < self.classes.len() {
            masses.push(self.classes.suffix_total(cutoff));
            sources.push(Source::Tail);
        }
        let top = AliasTable::new(&masses)?;
        Ok(QueryPlan { sampler: self, h: *h, sources, masses, top, first_class: first, cutoff, tail: OnceLock::new(), stats })
    }

    /// `k` independent draws, each point of `h` with probability `w / w(h)`.
    pub fn sample<R: RandomSource + ?Sized>(&self, h: &HalfspaceQuery, k: usize, rng: &mut R) -> Result<Vec<usize>> {
        let mut plan = self.plan(h)?;
        let out = (0..k).map(|_| plan.draw(rng)).collect();
        plan.finish();
        Ok(out)
    }
}

impl QueryPlan<'_> {
    pub fn first_class(&self) -> usize {
        self.first_class
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Masses of the top-level entries, the tail last when present.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn stats(&self) -> &QueryStats {
        &self.stats
    }

    pub fn draw<R: RandomSource + ?Sized>(&mut self, rng: &mut R) -> usize {
        let s = self.sampler;
        self.stats.samples += 1;
        loop {
            self.stats.rounds += 1;
            let id = match &self.sources[self.top.sample(rng)] {
                Source::Exact { ids, alias } => return ids[alias.sample(rng)],
                Source::Triangle { class, view, level, tri } => {
                    let c = &s.index[*class];
                    let f = &c.views[*view];
                    let t = &f.hierarchy.levels()[*level].triangles()[*tri];
                    c.ids[t.conflicts[f.aliases[*level][*tri].sample(rng)] as usize]
                }
                Source::Whole { class } => {
                    let c = &s.index[*class];
                    c.ids[c.whole.sample(rng)]
                }
                Source::Tail => {
                    self.stats.case1_hits += 1;
                    let (ids, alias) = self.tail.get_or_init(|| {
                        let ids: Vec<usize> = s.classes.classes()[self.cutoff..].iter().flatten().copied().collect();
                        let w: Vec<f64> = ids.iter().map(|&i| s.data.weight(i)).collect();
                        let alias = AliasTable::new(&w).expect("tail is nonempty");
                        (ids, alias)
                    });
                    ids[alias.sample(rng)]
                }
            };
            if self.h.contains(s.data.pos(id)) {
                return id;
            }
        }
    }

    /// Adds this query's counters to the sampler's totals.
    pub fn finish(self) {
        self.sampler.counters.add(&self.stats);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_distribution;
    use crate::rng::SeededRng;
    use crate::stats::{chi_squared_gof, within_binomial_band};

    fn random_data(n: usize, spread: f64, seed: u64) -> Dataset {
        let mut rng = SeededRng::new(seed);
        let pos: Vec<[f64; 3]> =
            (0..n).map(|_| [rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0)]).collect();
        let w: Vec<f64> = (0..n).map(|_| spread.powf(rng.gen_range(0.0, 1.0))).collect();
        Dataset::from_positions(&pos, &w).unwrap()
    }

    #[test]
    fn single_point_always() {
        let d = Dataset::from_positions(&[[0.0, 0.0, 0.0], [1.0, 1.0, 5.0]], &[1.0, 2.0]).unwrap();
        let s = ExpectedSampler::build(&d).unwrap();
        let mut rng = SeededRng::new(1);
        let got = s.sample(&HalfspaceQuery::below(0.0, 0.0, 1.0), 100, &mut rng).unwrap();
        assert!(got.iter().all(|&i| i == 0));
    }

    #[test]
    fn empty_range() {
        let d = random_data(50, 10.0, 2);
        let s = ExpectedSampler::build(&d).unwrap();
        let mut rng = SeededRng::new(2);
        assert_eq!(s.sample(&HalfspaceQuery::below(0.0, 0.0, -1.0), 3, &mut rng).unwrap_err(), Error::EmptyRange);
    }

    #[test]
    fn one_to_three() {
        let d = Dataset::from_positions(&[[0.0, 0.0, 0.0], [0.5, 0.5, 0.1], [0.0, 0.0, 9.0]], &[1.0, 3.0, 2.0]).unwrap();
        let s = ExpectedSampler::build(&d).unwrap();
        let mut rng = SeededRng::new(3);
        let n = 100_000;
        let got = s.sample(&HalfspaceQuery::below(0.0, 0.0, 1.0), n, &mut rng).unwrap();
        let zeros = got.iter().filter(|&&i| i == 0).count() as u64;
        assert!(got.iter().all(|&i| i < 2));
        assert!(within_binomial_band(zeros, n as u64, 0.25, 4.0), "{zeros}");
    }

    #[test]
    fn fresh_stats_are_zero() {
        let s = ExpectedSampler::build(&random_data(10, 2.0, 4)).unwrap();
        assert_eq!(s.query_stats(), QueryStats::default());
    }

    #[test]
    fn triangle_totals_match() {
        let s = ExpectedSampler::build(&random_data(3000, 1e6, 5)).unwrap();
        for (a, b) in s.triangle_totals() {
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn mass_accounting() {
        let d = random_data(2000, 1e9, 6);
        let s = ExpectedSampler::build(&d).unwrap();
        let mut rng = SeededRng::new(6);
        for _ in 0..50 {
            let h = HalfspaceQuery::below(rng.gen_range(-1.0, 1.0), rng.gen_range(-1.0, 1.0), rng.gen_range(0.0, 1.0));
            let Ok(plan) = s.plan(&h) else { continue };
            let expect: f64 = plan.masses().iter().sum();
            assert!((plan.top.total() - expect).abs() <= 1e-12 * expect);
            if plan.cutoff() < s.classes().len() {
                let tail: f64 = s.classes().classes()[plan.cutoff()..].iter().flatten().map(|&i| d.weight(i)).sum();
                let got = *plan.masses().last().unwrap();
                assert!((got - tail).abs() <= 1e-12 * tail);
            }
        }
    }

    #[test]
    fn matches_exact_distribution() {
        let d = random_data(3000, 1e6, 7);
        let s = ExpectedSampler::build(&d).unwrap();
        let mut rng = SeededRng::new(7);
        let mut tested = 0;
        while tested < 5 {
            let h = HalfspaceQuery::above(rng.gen_range(-1.0, 1.0), rng.gen_range(-1.0, 1.0), rng.gen_range(0.0, 1.0));
            let Ok((ids, probs)) = exact_distribution(&d, &h) else { continue };
            if !(2..=300).contains(&ids.len()) {
                continue;
            }
            tested += 1;
            let draws = s.sample(&h, 100_000, &mut rng).unwrap();
            let mut counts = vec![0u64; ids.len()];
            for x in draws {
                counts[ids.binary_search(&x).expect("draw lies in range")] += 1;
            }
            let r = chi_squared_gof(&counts, &probs).unwrap();
            assert!(r.p_value > 1e-4, "{r:?}");
        }
        let st = s.query_stats();
        assert_eq!(st.queries, 5);
        assert_eq!(st.samples, 500_000);
    }
}
