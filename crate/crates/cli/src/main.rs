use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use wirs::approx::ApproxConfig;
use wirs::shallow::ShallowConfig;
use wirs::workload::{PointDist, WeightDist};

mod bench;
mod gen;
mod io;
mod report;
mod verify;

/// Weighted independent range sampling over 3D halfspaces.
#[derive(Debug, Parser)]
#[command(name = "wirs", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Writes a random weighted point set as CSV.
    GenData(GenDataArgs),
    /// Writes random halfspace queries as CSV.
    GenQueries(GenQueriesArgs),
    /// Checks both exact samplers against the brute-force distribution.
    VerifyExact(VerifyExactArgs),
    /// Checks the approximate sampler's bands, ignored mass and op counts.
    VerifyApprox(VerifyApproxArgs),
    /// Times both samplers per query.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    UnitCube,
    Sphere,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Uniform,
    LogUniform,
    TwoScale,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "unit-cube")]
    dist: DistArg,
    #[arg(long, value_enum, default_value = "log-uniform")]
    weights: WeightArg,
    /// Largest weight; the smallest is 1.
    #[arg(long, default_value_t = 1e6)]
    umax: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    RandomHalfspace,
    KRange,
}

#[derive(Debug, Args)]
struct GenQueriesArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value = "random-halfspace")]
    mode: ModeArg,
    /// Points per range in k-range mode.
    #[arg(long)]
    m: Option<usize>,
    /// Point set that k-range queries are fitted to.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyExactArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 200_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyApproxArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.025)]
    gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    config: TuneArgs,
}

/// Approximate sampler tuning.
#[derive(Debug, Args)]
struct TuneArgs {
    /// Partition parameter is `ceil(c_r / eps^3)`.
    #[arg(long = "c-r", default_value_t = ApproxConfig::default().c_r)]
    c_r: f64,
    /// Smallest shallow-cutting level.
    #[arg(long, default_value_t = ShallowConfig::default().k_min)]
    k_min: usize,
}

impl TuneArgs {
    fn approx(&self, eps: f64, gamma: f64) -> ApproxConfig {
        let mut c = ApproxConfig::new(eps, gamma);
        c.c_r = self.c_r;
        c.shallow.k_min = self.k_min;
        c.singleton_limit = (c.shallow.c_conf * self.k_min as f64) as usize;
        c
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Draws per query.
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.025)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-query CSV.
    #[arg(long)]
    report: PathBuf,
    /// Summary JSON; printed to stdout either way.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    config: TuneArgs,
}

impl From<DistArg> for PointDist {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::UnitCube => PointDist::UnitCube,
            DistArg::Sphere => PointDist::Sphere,
        }
    }
}

impl From<WeightArg> for WeightDist {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Uniform => WeightDist::Uniform,
            WeightArg::LogUniform => WeightDist::LogUniform,
            WeightArg::TwoScale => WeightDist::TwoScale,
        }
    }
}

/// Thread pool capped by `WIRS_THREADS` when set.
fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("WIRS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    Ok(b.build()?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::GenData(a) => gen::data(&a).map(|_| true),
        Cmd::GenQueries(a) => gen::queries(&a).map(|_| true),
        Cmd::VerifyExact(a) => verify::exact(&a),
        Cmd::VerifyApprox(a) => verify::approx(&a),
        Cmd::Bench(a) => bench::run(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
