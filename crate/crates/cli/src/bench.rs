use std::time::Instant;

use anyhow::Result;
use serde::Serialize;
use wirs::approx::{ApproxConfig, ApproxSampler};
use wirs::ops::OpCounter;
use wirs::{Error, ExpectedSampler, QueryStats, SeededRng};

use crate::io::{read_points, read_queries};
use crate::report::{percentile, write_json, SCHEMA_VERSION};
use crate::BenchArgs;

/// Largest acceptable mean number of rejection rounds per sample.
pub const MAX_MEAN_ROUNDS: f64 = 3.0;

const COLUMNS: [&str; 8] =
    ["qid", "range_size", "expected_ns", "expected_rounds", "expected_case1", "approx_ns", "approx_ops", "approx_op_bound"];

#[derive(Debug, Serialize)]
struct Row {
    qid: u64,
    range_size: usize,
    expected_ns: u128,
    expected_rounds: u64,
    expected_case1: u64,
    approx_ns: u128,
    approx_ops: u64,
    approx_op_bound: f64,
}

#[derive(Debug, Serialize)]
struct Times {
    p50_ns: f64,
    p90_ns: f64,
    p99_ns: f64,
    max_ns: f64,
}

impl Times {
    fn of(mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        Times { p50_ns: percentile(&v, 0.5), p90_ns: percentile(&v, 0.9), p99_ns: percentile(&v, 0.99), max_ns: percentile(&v, 1.0) }
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    schema_version: u32,
    command: &'static str,
    n: usize,
    queries: usize,
    nonempty: usize,
    k: usize,
    eps: f64,
    gamma: f64,
    config: ApproxConfig,
    expected_build_ms: f64,
    expected_space: usize,
    approx_build_ms: f64,
    expected: Times,
    approx: Times,
    mean_rounds_per_sample: f64,
    case1_hits: u64,
    max_approx_ops: u64,
    max_op_ratio: f64,
    mean_rounds_ok: bool,
    op_bound_ok: bool,
    pass: bool,
}

pub fn run(a: &BenchArgs) -> Result<bool> {
    let d = read_points(&a.points)?;
    let queries = read_queries(&a.queries)?;
    let t = Instant::now();
    let es = ExpectedSampler::build(&d)?;
    let expected_build_ms = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let ap = ApproxSampler::build(&d, a.config.approx(a.eps, a.gamma))?;
    let approx_build_ms = t.elapsed().as_secs_f64() * 1e3;

    // Sequential so that timings do not compete for cores.
    let mut rows = Vec::with_capacity(queries.len());
    let mut total = QueryStats::default();
    for q in &queries {
        let range_size = d.points().iter().filter(|p| q.h.contains(p.pos)).count();
        if range_size == 0 {
            continue;
        }
        let mut rng = SeededRng::new(a.seed ^ q.qid);
        let t = Instant::now();
        let mut plan = es.plan(&q.h)?;
        for _ in 0..a.k {
            std::hint::black_box(plan.draw(&mut rng));
        }
        let stats = *plan.stats();
        plan.finish();
        let expected_ns = t.elapsed().as_nanos();
        total.merge(&stats);

        let mut ops = OpCounter::default();
        let t = Instant::now();
        match ap.sample_k_counted(&q.h, a.k, &mut rng, &mut ops) {
            Ok(v) => {
                std::hint::black_box(v);
            }
            Err(Error::EmptyRange) => {}
            Err(e) => return Err(e.into()),
        }
        let approx_ns = t.elapsed().as_nanos();
        rows.push(Row {
            qid: q.qid,
            range_size,
            expected_ns,
            expected_rounds: stats.rounds,
            expected_case1: stats.case1_hits,
            approx_ns,
            approx_ops: ops.total(),
            approx_op_bound: ap.op_bound(a.k),
        });
    }

    // Header written by hand so that an empty run still has one.
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&a.report)?;
    w.write_record(COLUMNS)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let mean_rounds = total.rounds_per_sample();
    let max_op_ratio = rows.iter().map(|r| r.approx_ops as f64 / r.approx_op_bound).fold(0.0, f64::max);
    let mean_rounds_ok = rows.is_empty() || mean_rounds <= MAX_MEAN_ROUNDS;
    let op_bound_ok = max_op_ratio <= 1.0;
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        command: "bench",
        n: d.len(),
        queries: queries.len(),
        nonempty: rows.len(),
        k: a.k,
        eps: a.eps,
        gamma: a.gamma,
        config: *ap.config(),
        expected_build_ms,
        expected_space: es.space(),
        approx_build_ms,
        expected: Times::of(rows.iter().map(|r| r.expected_ns as f64).collect()),
        approx: Times::of(rows.iter().map(|r| r.approx_ns as f64).collect()),
        mean_rounds_per_sample: mean_rounds,
        case1_hits: total.case1_hits,
        max_approx_ops: rows.iter().map(|r| r.approx_ops).max().unwrap_or(0),
        max_op_ratio,
        mean_rounds_ok,
        op_bound_ok,
        pass: mean_rounds_ok && op_bound_ok,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(p) = &a.summary {
        write_json(p, &summary)?;
    }
    Ok(summary.pass)
}
