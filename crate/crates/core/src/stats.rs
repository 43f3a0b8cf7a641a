use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Expected count below which bins are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub tv_distance: f64,
    pub n_draws: u64,
}

/// Pearson chi-squared test of `counts` against `expected_probs`.
///
/// Bins whose expected count is under [`MIN_EXPECTED`] are pooled into one
/// bin; if that pool is still too small it is merged with the smallest
/// remaining bin.
pub fn chi_squared_gof(counts: &[u64], expected_probs: &[f64]) -> Result<GofReport> {
    if counts.len() != expected_probs.len() {
        return Err(Error::BadInput("counts and probabilities differ in length".into()));
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::BadInput("no draws".into()));
    }
    let nf = n as f64;
    let tv_distance = tv_distance_counts(counts, expected_probs);

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(expected_probs) {
        let e = p * nf;
        if e < MIN_EXPECTED {
            pool.0 += c as f64;
            pool.1 += e;
        } else {
            bins.push((c as f64, e));
        }
    }
    if pool.1 > 0.0 || pool.0 > 0.0 {
        if pool.1 >= MIN_EXPECTED || bins.is_empty() {
            bins.push(pool);
        } else {
            let j = (0..bins.len())
                .min_by(|&a, &b| bins[a].1.total_cmp(&bins[b].1))
                .unwrap();
            bins[j].0 += pool.0;
            bins[j].1 += pool.1;
        }
    }
    if bins.len() < 2 {
        return Err(Error::DegenerateBins);
    }
    let mut statistic = 0.0;
    for &(o, e) in &bins {
        if e > 0.0 {
            statistic += (o - e) * (o - e) / e;
        } else if o > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = bins.len() - 1;
    Ok(GofReport { statistic, dof, p_value: chi_squared_sf(statistic, dof), tv_distance, n_draws: n })
}

/// Upper tail of the chi-squared distribution.
pub fn chi_squared_sf(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    if !statistic.is_finite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn tv_distance_counts(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    tv_distance(&emp, probs)
}

/// Two-sided exact binomial p-value: twice the smaller tail, capped at 1.
pub fn binomial_two_sided_p(count: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if count == n { 1.0 } else { 0.0 };
    }
    let b = Binomial::new(p, n).expect("p lies in (0, 1)");
    let lower = b.cdf(count);
    let upper = if count == 0 { 1.0 } else { b.sf(count - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GofMethod {
    ChiSquared,
    /// Every outcome but the most likely one is too rare for a bin, so the
    /// most likely outcome's count gets an exact binomial test.
    DominantBinomial,
}

/// p-value of `counts` against `probs`, by chi-squared when pooling leaves at
/// least two bins and by the exact binomial test otherwise.
pub fn gof_p_value(counts: &[u64], probs: &[f64]) -> Result<(f64, GofMethod)> {
    match chi_squared_gof(counts, probs) {
        Ok(r) => Ok((r.p_value, GofMethod::ChiSquared)),
        Err(Error::DegenerateBins) => {
            let j = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).expect("bins are nonempty");
            let n: u64 = counts.iter().sum();
            Ok((binomial_two_sided_p(counts[j], n, probs[j]), GofMethod::DominantBinomial))
        }
        Err(e) => Err(e),
    }
}

/// Half-width of a `sigmas`-sigma band for a binomial frequency.
pub fn binomial_band(p: f64, n: u64, sigmas: f64) -> f64 {
    sigmas * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn within_binomial_band(count: u64, n: u64, p: f64, sigmas: f64) -> bool {
    let freq = count as f64 / n as f64;
    (freq - p).abs() <= binomial_band(p, n, sigmas) + 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn exponent_fit(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(Error::BadInput("need at least three pairs".into()));
    }
    if pairs.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::BadInput("pairs must be positive and finite".into()));
    }
    let pts: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::BadInput("x values are all equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ExponentFit { slope, intercept, residual: (rss / m).sqrt() })
}
