use anyhow::{bail, Context, Result};
use wirs::workload::{gen_dataset, k_range_halfspace, random_halfspace};
use wirs::SeededRng;

use crate::io::{read_points, write_points, write_queries, Query};
use crate::{GenDataArgs, GenQueriesArgs, ModeArg};

pub fn data(a: &GenDataArgs) -> Result<()> {
    let d = gen_dataset(a.n, a.dist.into(), a.weights.into(), a.umax, a.seed)?;
    write_points(&a.out, &d)
}

pub fn queries(a: &GenQueriesArgs) -> Result<()> {
    let mut rng = SeededRng::new(a.seed);
    let mut out = Vec::with_capacity(a.count);
    match a.mode {
        ModeArg::RandomHalfspace => {
            for qid in 0..a.count as u64 {
                out.push(Query { qid, h: random_halfspace(&mut rng) });
            }
        }
        ModeArg::KRange => {
            let Some(m) = a.m else { bail!("k-range mode needs --m") };
            let Some(path) = &a.points else { bail!("k-range mode needs --points") };
            let d = read_points(path)?;
            for qid in 0..a.count as u64 {
                let h = k_range_halfspace(&d, m, &mut rng).with_context(|| format!("query {qid}"))?;
                out.push(Query { qid, h });
            }
        }
    }
    write_queries(&a.out, &out)
}
