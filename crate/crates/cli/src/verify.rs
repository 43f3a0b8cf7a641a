use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use wirs::approx::{ApproxConfig, ApproxSampler, OP_CONSTANT};
use wirs::oracle::{brute_force_range, enumerate_selection_probs, exact_distribution, range_sum_sampler, RangeSumTree};
use wirs::ops::OpCounter;
use wirs::stats::{binomial_band, gof_p_value, tv_distance_counts, GofMethod};
use wirs::{Dataset, Error, ExpectedSampler, SeededRng};

use crate::io::{read_points, read_queries};
use crate::report::{write_json, Report};
use crate::{pool, VerifyApproxArgs, VerifyExactArgs};

/// A sampler passes a query when its p-value exceeds this.
pub const P_MIN: f64 = 1e-4;
/// Share of tested queries each exact sampler must pass.
pub const PASS_RATE: f64 = 0.96;
/// Width of the empirical band slack, in binomial standard deviations.
pub const BAND_SIGMAS: f64 = 4.0;
/// Points at least this share of `w(h)` get the empirical band check; the
/// `γ/n` threshold is checked exactly by enumeration.
pub const EMPIRICAL_MIN_REL: f64 = 0.05;
/// Relative slack on exact probability comparisons.
pub const PROB_TOL: f64 = 1e-12;
/// Largest enumeration attempted for a query.
pub const MAX_OUTCOMES: u128 = 1_000_000;

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

#[derive(Debug, Serialize)]
struct ExactParams {
    points: String,
    queries: String,
    draws: usize,
    seed: u64,
    p_min: f64,
    pass_rate: f64,
}

#[derive(Debug, Serialize)]
struct Gof {
    p_value: f64,
    method: Option<GofMethod>,
    tv_distance: f64,
    /// Draws that fell outside the range.
    strays: u64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct ExactQuery {
    qid: u64,
    range_size: usize,
    expected: Option<Gof>,
    range_sum: Option<Gof>,
    skipped: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExactSummary {
    queries: usize,
    tested: usize,
    expected_passed: usize,
    range_sum_passed: usize,
}

fn gof(draws: &[usize], ids: &[usize], probs: &[f64]) -> Result<Gof> {
    let mut counts = vec![0u64; ids.len()];
    let mut strays = 0;
    for x in draws {
        match ids.binary_search(x) {
            Ok(j) => counts[j] += 1,
            Err(_) => strays += 1,
        }
    }
    if strays > 0 {
        return Ok(Gof { p_value: 0.0, method: None, tv_distance: 1.0, strays, pass: false });
    }
    let (p_value, method) = gof_p_value(&counts, probs)?;
    Ok(Gof { p_value, method: Some(method), tv_distance: tv_distance_counts(&counts, probs), strays, pass: p_value > P_MIN })
}

fn exact_query(
    d: &Dataset,
    s: &ExpectedSampler,
    tree: &RangeSumTree,
    qid: u64,
    h: &wirs::geom::HalfspaceQuery,
    draws: usize,
    seed: u64,
) -> Result<ExactQuery> {
    let (ids, probs) = match exact_distribution(d, h) {
        Ok(v) => v,
        Err(Error::EmptyRange) => {
            return Ok(ExactQuery { qid, range_size: 0, expected: None, range_sum: None, skipped: Some("empty range".into()) });
        }
        Err(e) => return Err(e.into()),
    };
    let mut rng = SeededRng::new(seed ^ qid);
    let a = s.sample(h, draws, &mut rng)?;
    let b = range_sum_sampler(tree, h, draws, &mut rng)?;
    Ok(ExactQuery {
        qid,
        range_size: ids.len(),
        expected: Some(gof(&a, &ids, &probs)?),
        range_sum: Some(gof(&b, &ids, &probs)?),
        skipped: None,
    })
}

pub fn exact(a: &VerifyExactArgs) -> Result<bool> {
    let d = read_points(&a.points)?;
    let queries = read_queries(&a.queries)?;
    let s = ExpectedSampler::build(&d)?;
    let tree = RangeSumTree::new(&d)?;
    let rows: Vec<ExactQuery> = pool()?.install(|| {
        queries
            .par_iter()
            .map(|q| exact_query(&d, &s, &tree, q.qid, &q.h, a.draws, a.seed))
            .collect::<Result<_>>()
    })?;
    let tested = rows.iter().filter(|r| r.skipped.is_none()).count();
    let passed = |f: fn(&ExactQuery) -> &Option<Gof>| rows.iter().filter(|r| f(r).as_ref().is_some_and(|g| g.pass)).count();
    let summary = ExactSummary {
        queries: rows.len(),
        tested,
        expected_passed: passed(|r| &r.expected),
        range_sum_passed: passed(|r| &r.range_sum),
    };
    let need = (PASS_RATE * tested as f64).ceil() as usize;
    let pass = summary.expected_passed >= need && summary.range_sum_passed >= need;
    println!(
        "verify-exact: {} tested, expected sampler {}/{}, range-sum sampler {}/{}: {}",
        tested,
        summary.expected_passed,
        tested,
        summary.range_sum_passed,
        tested,
        if pass { "PASS" } else { "FAIL" }
    );
    let params = ExactParams {
        points: path_str(&a.points),
        queries: path_str(&a.queries),
        draws: a.draws,
        seed: a.seed,
        p_min: P_MIN,
        pass_rate: PASS_RATE,
    };
    write_json(&a.report, &Report { schema_version: crate::report::SCHEMA_VERSION, command: "verify-exact", params, queries: rows, summary, pass })?;
    Ok(pass)
}

#[derive(Debug, Serialize)]
struct ApproxParams {
    points: String,
    queries: String,
    eps: f64,
    gamma: f64,
    draws: usize,
    seed: u64,
    op_constant: f64,
    band_sigmas: f64,
    empirical_min_rel: f64,
    config: ApproxConfig,
}

#[derive(Debug, Serialize)]
struct EnumCheck {
    outcomes: u128,
    heavy_points: usize,
    worst_deviation: f64,
    in_band: bool,
}

#[derive(Debug, Serialize)]
struct ApproxQuery {
    qid: u64,
    range_size: usize,
    ops: u64,
    op_bound: f64,
    ignored_mass: f64,
    banded_points: usize,
    band_violations: usize,
    /// Largest `|freq / (w/w(h)) - 1|` over banded points.
    worst_deviation: f64,
    enumeration: Option<EnumCheck>,
    pass: bool,
    skipped: Option<String>,
}

#[derive(Debug, Serialize)]
struct ApproxSummary {
    queries: usize,
    tested: usize,
    passed: usize,
    op_violations: usize,
    ignored_violations: usize,
    band_violations: usize,
    enumerated: usize,
    enumeration_failures: usize,
    max_op_ratio: f64,
}

fn approx_query(
    d: &Dataset,
    s: &ApproxSampler,
    qid: u64,
    h: &wirs::geom::HalfspaceQuery,
    draws: usize,
    seed: u64,
) -> Result<ApproxQuery> {
    let cfg = *s.config();
    let (ids, w, total) = brute_force_range(d, h);
    let mut row = ApproxQuery {
        qid,
        range_size: ids.len(),
        ops: 0,
        op_bound: s.op_bound(draws),
        ignored_mass: 0.0,
        banded_points: 0,
        band_violations: 0,
        worst_deviation: 0.0,
        enumeration: None,
        pass: false,
        skipped: None,
    };
    if ids.is_empty() {
        row.skipped = Some("empty range".into());
        return Ok(row);
    }
    let n = d.len() as f64;
    let layout = s.candidate_layout(h)?;
    row.ignored_mass = ids
        .iter()
        .zip(&w)
        .filter(|(&i, _)| s.classes().class_of(i) >= layout.cutoff)
        .map(|(_, wi)| wi / total)
        .sum();

    let mut rng = SeededRng::new(seed ^ qid);
    let mut ops = OpCounter::default();
    let (got, _) = s.sample_k_counted(h, draws, &mut rng, &mut ops)?;
    row.ops = ops.total();
    let mut counts = vec![0u64; ids.len()];
    for x in &got {
        match ids.binary_search(x) {
            Ok(j) => counts[j] += 1,
            Err(_) => row.band_violations += 1,
        }
    }
    for (j, &wi) in w.iter().enumerate() {
        let rel = wi / total;
        let freq = counts[j] as f64 / draws as f64;
        if rel < EMPIRICAL_MIN_REL {
            continue;
        }
        let slack = binomial_band(rel, draws as u64, BAND_SIGMAS);
        row.banded_points += 1;
        row.worst_deviation = row.worst_deviation.max((freq / rel - 1.0).abs());
        if freq > (1.0 + cfg.eps) * rel + slack || freq < (1.0 - cfg.eps) * rel - slack {
            row.band_violations += 1;
        }
    }

    match enumerate_selection_probs(d, &layout, h, MAX_OUTCOMES) {
        Ok(p) => {
            let mut check = EnumCheck { outcomes: p.outcomes, heavy_points: 0, worst_deviation: 0.0, in_band: true };
            for (&i, &wi) in ids.iter().zip(&w) {
                let rel = wi / total;
                let rho = p.one_shot.get(&i).copied().unwrap_or(0.0);
                if rel >= cfg.gamma / n {
                    check.heavy_points += 1;
                    let dev = (rho / rel - 1.0).abs();
                    check.worst_deviation = check.worst_deviation.max(dev);
                    check.in_band &= dev <= cfg.eps + PROB_TOL;
                } else {
                    check.in_band &= rho <= (1.0 + cfg.eps) * rel * (1.0 + PROB_TOL);
                }
            }
            row.enumeration = Some(check);
        }
        Err(Error::TooLarge(_) | Error::BadInput(_)) => {}
        Err(e) => return Err(e.into()),
    }

    row.pass = (row.ops as f64) <= row.op_bound
        && row.ignored_mass <= cfg.gamma
        && row.band_violations == 0
        && row.enumeration.as_ref().is_none_or(|e| e.in_band);
    Ok(row)
}

pub fn approx(a: &VerifyApproxArgs) -> Result<bool> {
    let d = read_points(&a.points)?;
    let queries = read_queries(&a.queries)?;
    let cfg = a.config.approx(a.eps, a.gamma);
    let s = ApproxSampler::build(&d, cfg)?;
    let rows: Vec<ApproxQuery> = pool()?.install(|| {
        queries.par_iter().map(|q| approx_query(&d, &s, q.qid, &q.h, a.draws, a.seed)).collect::<Result<_>>()
    })?;
    let tested: Vec<&ApproxQuery> = rows.iter().filter(|r| r.skipped.is_none()).collect();
    let summary = ApproxSummary {
        queries: rows.len(),
        tested: tested.len(),
        passed: tested.iter().filter(|r| r.pass).count(),
        op_violations: tested.iter().filter(|r| r.ops as f64 > r.op_bound).count(),
        ignored_violations: tested.iter().filter(|r| r.ignored_mass > a.gamma).count(),
        band_violations: tested.iter().map(|r| r.band_violations).sum(),
        enumerated: tested.iter().filter(|r| r.enumeration.is_some()).count(),
        enumeration_failures: tested.iter().filter(|r| r.enumeration.as_ref().is_some_and(|e| !e.in_band)).count(),
        max_op_ratio: tested.iter().map(|r| r.ops as f64 / r.op_bound).fold(0.0, f64::max),
    };
    let pass = summary.passed == summary.tested;
    println!(
        "verify-approx: {}/{} queries pass, {} op-bound violations, {} band violations, {} of {} enumerations out of band: {}",
        summary.passed,
        summary.tested,
        summary.op_violations,
        summary.band_violations,
        summary.enumeration_failures,
        summary.enumerated,
        if pass { "PASS" } else { "FAIL" }
    );
    let params = ApproxParams {
        points: path_str(&a.points),
        queries: path_str(&a.queries),
        eps: a.eps,
        gamma: a.gamma,
        draws: a.draws,
        seed: a.seed,
        op_constant: OP_CONSTANT,
        band_sigmas: BAND_SIGMAS,
        empirical_min_rel: EMPIRICAL_MIN_REL,
        config: cfg,
    };
    write_json(&a.report, &Report { schema_version: crate::report::SCHEMA_VERSION, command: "verify-approx", params, queries: rows, summary, pass })?;
    Ok(pass)
}
