use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Walker's alias table: O(n) build, two unit draws per sample.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
    total: f64,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight(i));
            }
            total += w;
        }
        let n = weights.len();
        let scale = n as f64 / total;
        let mut prob: Vec<f64> = weights.iter().map(|&w| w * scale).collect();
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l as u32;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers differ from 1 only by rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias, total })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn alias(&self) -> &[u32] {
        &self.alias
    }

    /// Consumes exactly two unit draws.
    #[inline]
    pub fn sample<R: RandomSource + ?Sized>(&self, rng: &mut R) -> usize {
        sample_parts(&self.prob, &self.alias, rng)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<u32>, f64) {
        (self.prob, self.alias, self.total)
    }

    /// Exact draw probabilities implied by the table.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.prob.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] += self.prob[i];
            out[self.alias[i] as usize] += 1.0 - self.prob[i];
        }
        for p in &mut out {
            *p /= n as f64;
        }
        out
    }
}

/// Draw from a table stored as slices, as returned by `into_parts`.
#[inline]
pub fn sample_parts<R: RandomSource + ?Sized>(prob: &[f64], alias: &[u32], rng: &mut R) -> usize {
    let n = prob.len();
    let cell = ((rng.draw_unit() * n as f64) as usize).min(n - 1);
    if rng.draw_unit() < prob[cell] {
        cell
    } else {
        alias[cell] as usize
    }
}
