//! Ground truth by direct evaluation, plus an exact sampler that only needs
//! range sums.

use crate::error::{Error, Result};
use crate::geom::HalfspaceQuery;
use crate::rng::RandomSource;
use crate::types::Dataset;

pub mod enumerate;

pub use enumerate::{enumerate_selection_probs, SelectionProbs};

/// Points of `data` in `h`, in id order, with their weights and sum.
pub fn brute_force_range(data: &Dataset, h: &HalfspaceQuery) -> (Vec<usize>, Vec<f64>, f64) {
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut total = 0.0;
    for p in data.points() {
        if h.contains(p.pos) {
            ids.push(p.id);
            weights.push(p.weight);
            total += p.weight;
        }
    }
    (ids, weights, total)
}

/// Ids in `h` and their probabilities `w / w(h)`.
pub fn exact_distribution(data: &Dataset, h: &HalfspaceQuery) -> Result<(Vec<usize>, Vec<f64>)> {
    let (ids, weights, total) = brute_force_range(data, h);
    if ids.is_empty() {
        return Err(Error::EmptyRange);
    }
    Ok((ids, weights.iter().map(|w| w / total).collect()))
}

/// Heaviest point in `h` by linear scan, ties to the smaller id.
pub fn brute_force_max(data: &Dataset, h: &HalfspaceQuery) -> Option<usize> {
    let mut best: Option<usize> = None;
    for p in data.points() {
        if h.contains(p.pos) && best.is_none_or(|b| p.weight > data.weight(b)) {
            best = Some(p.id);
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct SumNode {
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
}

/// Balanced binary partition of the ids. Range sums at each node are taken
/// by scanning the node's points.
#[derive(Debug, Clone)]
pub struct RangeSumTree {
    data: Dataset,
    nodes: Vec<SumNode>,
}

impl RangeSumTree {
    pub fn new(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut nodes = Vec::with_capacity(2 * data.len());
        split(&mut nodes, 0, data.len());
        Ok(RangeSumTree { data: data.clone(), nodes })
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[SumNode], u: usize) -> usize {
            match nodes[u].children {
                Some((l, r)) => 1 + go(nodes, l).max(go(nodes, r)),
                None => 0,
            }
        }
        go(&self.nodes, 0)
    }

    fn range_sum(&self, u: usize, h: &HalfspaceQuery) -> f64 {
        let SumNode { lo, hi, .. } = self.nodes[u];
        self.data.points()[lo..hi].iter().filter(|p| h.contains(p.pos)).map(|p| p.weight).sum()
    }
}

fn split(nodes: &mut Vec<SumNode>, lo: usize, hi: usize) -> usize {
    let id = nodes.len();
    nodes.push(SumNode { lo, hi, children: None });
    if hi - lo >= 2 {
        let mid = lo + (hi - lo).div_ceil(2);
        let l = split(nodes, lo, mid);
        let r = split(nodes, mid, hi);
        nodes[id].children = Some((l, r));
    }
    id
}

/// `k` independent draws from `h` by recursive descent: at each node go left
/// with probability `w(left ∩ h) / w(node ∩ h)`. Sums are cached per call.
pub fn range_sum_sampler<R: RandomSource + ?Sized>(
    tree: &RangeSumTree,
    h: &HalfspaceQuery,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut sums = vec![f64::NAN; tree.nodes.len()];
    let mut sum = |u: usize| {
        if sums[u].is_nan() {
            sums[u] = tree.range_sum(u, h);
        }
        sums[u]
    };
    if sum(0) == 0.0 {
        return Err(Error::EmptyRange);
    }
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut u = 0;
        while let Some((l, r)) = tree.nodes[u].children {
            let wl = sum(l);
            let wr = sum(r);
            u = if rng.draw_unit() * (wl + wr) < wl { l } else { r };
        }
        out.push(tree.nodes[u].lo);
    }
    Ok(out)
}

/// Copy of `data` with weight `n^(c·rank)` for the point of rank `rank`
/// (ascending weight, ties ranking the smaller id higher), centered so the
/// extremes stay representable.
pub fn rank_reweight(data: &Dataset, c: f64) -> Result<Dataset> {
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data.weight(a).total_cmp(&data.weight(b)).then(b.cmp(&a)));
    let step = c * (n.max(2) as f64).ln();
    let center = (n as f64 - 1.0) / 2.0;
    if step * center > 700.0 {
        return Err(Error::TooLarge(n as u128));
    }
    let mut w = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        w[i] = ((rank as f64 - center) * step).exp();
    }
    let pos: Vec<[f64; 3]> = data.points().iter().map(|p| p.pos).collect();
    Dataset::from_positions(&pos, &w)
}

/// One exact draw from `h` on rank-reweighted data, which is the heaviest
/// point of `h` with probability at least `1 - 1/n`.
pub fn range_max_via_sampling<R: RandomSource + ?Sized>(
    reweighted: &crate::expected::ExpectedSampler,
    h: &HalfspaceQuery,
    rng: &mut R,
) -> Result<usize> {
    Ok(reweighted.sample(h, 1, rng)?[0])
}
