use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Complete binary tree over a weight array, padded to a power of two with
/// zero-weight phantom leaves. Nodes are heap-indexed from 1; every node
/// holding a real leaf has an alias table over its real leaves.
#[derive(Debug, Clone)]
pub struct CanonicalTree {
    n: usize,
    size: usize,
    total: Vec<f64>,
    alias: Vec<Option<AliasTable>>,
}

impl CanonicalTree {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveWeight(i));
        }
        let n = weights.len();
        let size = n.next_power_of_two();
        let mut total = vec![0.0; 2 * size];
        total[size..size + n].copy_from_slice(weights);
        for u in (1..size).rev() {
            total[u] = total[2 * u] + total[2 * u + 1];
        }
        let mut alias = vec![None; 2 * size];
        for (u, slot) in alias.iter_mut().enumerate().skip(1) {
            let (lo, hi) = leaf_range(u, size);
            if lo < n {
                *slot = Some(AliasTable::new(&weights[lo..hi.min(n)])?);
            }
        }
        Ok(CanonicalTree { n, size, total, alias })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn root(&self) -> usize {
        1
    }

    pub fn node_total(&self, u: usize) -> f64 {
        self.total[u]
    }

    /// Half-open leaf range of a node, clipped to the real leaves.
    pub fn node_range(&self, u: usize) -> (usize, usize) {
        let (lo, hi) = leaf_range(u, self.size);
        (lo.min(self.n), hi.min(self.n))
    }

    pub fn node_count(&self) -> usize {
        2 * self.size - 1
    }

    pub fn alias_entries(&self) -> usize {
        self.alias.iter().flatten().map(AliasTable::len).sum()
    }

    /// Disjoint canonical nodes covering the closed interval `[a, b]`.
    pub fn decompose(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if a > b || b >= self.n {
            return Err(Error::BadInterval(a, b, self.n));
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut lo = a + self.size;
        let mut hi = b + self.size + 1;
        while lo < hi {
            if lo & 1 == 1 {
                left.push(lo);
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                right.push(hi);
            }
            lo >>= 1;
            hi >>= 1;
        }
        left.extend(right.into_iter().rev());
        Ok(left)
    }

    /// One alias draw from the leaves under `u`.
    pub fn subtree_sample<R: RandomSource + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        let table = self.alias[u].as_ref().expect("node has no real leaves");
        leaf_range(u, self.size).0 + table.sample(rng)
    }

    pub fn sample_interval<R: RandomSource + ?Sized>(
        &self,
        a: usize,
        b: usize,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let q = self.interval_query(a, b)?;
        Ok((0..k).map(|_| q.sample(self, rng)).collect())
    }

    /// Setup for repeated draws from `[a, b]`.
    pub fn interval_query(&self, a: usize, b: usize) -> Result<IntervalQuery> {
        let nodes = self.decompose(a, b)?;
        let totals: Vec<f64> = nodes.iter().map(|&u| self.total[u]).collect();
        let top = AliasTable::new(&totals)?;
        Ok(IntervalQuery { nodes, top })
    }
}

#[derive(Debug, Clone)]
pub struct IntervalQuery {
    nodes: Vec<usize>,
    top: AliasTable,
}

impl IntervalQuery {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Four unit draws: two for the node, two inside it.
    pub fn sample<R: RandomSource + ?Sized>(&self, tree: &CanonicalTree, rng: &mut R) -> usize {
        let u = self.nodes[self.top.sample(rng)];
        tree.subtree_sample(u, rng)
    }
}

fn leaf_range(u: usize, size: usize) -> (usize, usize) {
    let depth = usize::BITS - 1 - u.leading_zeros();
    let span = size >> depth;
    let lo = (u - (1 << depth)) * span;
    (lo, lo + span)
}
