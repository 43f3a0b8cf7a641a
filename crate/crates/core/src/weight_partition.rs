use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioKind {
    HalfClasses,
    CoarseGroups(f64),
}

/// Weight-ordered classes of point ids with bounded intra-class ratio.
#[derive(Debug, Clone)]
pub struct WeightClassPartition {
    classes: Vec<Vec<usize>>,
    class_total: Vec<f64>,
    suffix_total: Vec<f64>,
    max_w: Vec<f64>,
    min_w: Vec<f64>,
    class_of: Vec<usize>,
    ratio_kind: RatioKind,
}

fn sorted_order(weights: &[f64]) -> Result<Vec<usize>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::NonPositiveWeight(i));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    Ok(order)
}

impl WeightClassPartition {
    /// Greedy factor-2 classes: each class takes every remaining weight
    /// that is at least half the largest remaining one.
    pub fn half_classes(weights: &[f64]) -> Result<Self> {
        let order = sorted_order(weights)?;
        let mut classes = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let cut = weights[order[i]] / 2.0;
            let mut j = i;
            while j < order.len() && weights[order[j]] >= cut {
                j += 1;
            }
            classes.push(order[i..j].to_vec());
            i = j;
        }
        Ok(Self::assemble(classes, weights, RatioKind::HalfClasses))
    }

    /// Greedy groups with intra-group ratio at most `ratio`. Ties never
    /// straddle a group boundary.
    pub fn coarse_groups(weights: &[f64], ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::BadParameter(format!("ratio {ratio} must exceed 1")));
        }
        let order = sorted_order(weights)?;
        let mut classes = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let top = weights[order[i]];
            let mut j = i;
            while j < order.len() && top / weights[order[j]] <= ratio {
                j += 1;
            }
            classes.push(order[i..j].to_vec());
            i = j;
        }
        Ok(Self::assemble(classes, weights, RatioKind::CoarseGroups(ratio)))
    }

    fn assemble(classes: Vec<Vec<usize>>, weights: &[f64], ratio_kind: RatioKind) -> Self {
        let t = classes.len();
        let mut class_total = Vec::with_capacity(t);
        let mut max_w = Vec::with_capacity(t);
        let mut min_w = Vec::with_capacity(t);
        let mut class_of = vec![0; weights.len()];
        for (c, ids) in classes.iter().enumerate() {
            let mut s = 0.0;
            for &id in ids {
                s += weights[id];
                class_of[id] = c;
            }
            class_total.push(s);
            max_w.push(weights[ids[0]]);
            min_w.push(weights[*ids.last().unwrap()]);
        }
        let mut suffix_total = vec![0.0; t + 1];
        for c in (0..t).rev() {
            suffix_total[c] = suffix_total[c + 1] + class_total[c];
        }
        WeightClassPartition { classes, class_total, suffix_total, max_w, min_w, class_of, ratio_kind }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &[usize] {
        &self.classes[i]
    }

    pub fn class_total(&self, i: usize) -> f64 {
        self.class_total[i]
    }

    /// Total weight of classes `i..`; `i == len()` gives zero.
    pub fn suffix_total(&self, i: usize) -> f64 {
        self.suffix_total[i]
    }

    pub fn max_weight(&self, i: usize) -> f64 {
        self.max_w[i]
    }

    pub fn min_weight(&self, i: usize) -> f64 {
        self.min_w[i]
    }

    pub fn class_of(&self, id: usize) -> usize {
        self.class_of[id]
    }

    pub fn ratio_kind(&self) -> RatioKind {
        self.ratio_kind
    }

    /// Smallest `i' >= i` whose largest weight is below `min_weight(i) / t`,
    /// or the class count when there is none.
    pub fn cutoff_index(&self, i: usize, t: f64) -> usize {
        let bound = self.min_w[i] / t;
        let rest = &self.max_w[i..];
        i + rest.partition_point(|&m| m >= bound)
    }
}
