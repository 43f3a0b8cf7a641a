use std::collections::BTreeMap;

use serde::Serialize;

use crate::approx::{CandidateLayout, CellKind};
use crate::error::{Error, Result};
use crate::geom::HalfspaceQuery;
use crate::types::Dataset;

/// Exact selection probabilities for one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionProbs {
    /// Under the one-shot scheme.
    pub one_shot: BTreeMap<usize, f64>,
    /// Under rejection with fresh representatives each round.
    pub rejection: BTreeMap<usize, f64>,
    /// Cell kind of every candidate point.
    pub kind: BTreeMap<usize, CellKind>,
    pub outcomes: u128,
}

/// Sums over every joint choice of representatives (weighted by its
/// probability) and both coin branches.
pub fn enumerate_selection_probs(
    data: &Dataset,
    layout: &CandidateLayout,
    h: &HalfspaceQuery,
    max_outcomes: u128,
) -> Result<SelectionProbs> {
    let cells = &layout.cells;
    let mut outcomes: u128 = 2;
    for c in cells {
        outcomes = outcomes.saturating_mul(c.members.len() as u128);
    }
    if outcomes > max_outcomes {
        return Err(Error::TooLarge(outcomes));
    }
    let weight: Vec<f64> = cells.iter().map(|c| c.members.iter().map(|m| m.1).sum()).collect();
    let inside: Vec<usize> = (0..cells.len()).filter(|&j| cells[j].kind == CellKind::Inside).collect();
    let strad: Vec<usize> = (0..cells.len()).filter(|&j| cells[j].kind == CellKind::Straddling).collect();
    if inside.is_empty() {
        return Err(Error::BadInput("layout has no inside cell".into()));
    }
    let w_in: f64 = inside.iter().map(|&j| weight[j]).sum();
    let w_str: f64 = strad.iter().map(|&j| weight[j]).sum();
    let pi_in = w_in / (w_in + w_str);
    let member_in: Vec<Vec<bool>> =
        cells.iter().map(|c| c.members.iter().map(|&(i, _)| h.contains(data.pos(i))).collect()).collect();

    let mut one_shot = BTreeMap::new();
    let mut round = BTreeMap::new();
    let mut kind = BTreeMap::new();
    for c in cells {
        for &(i, _) in &c.members {
            one_shot.insert(i, 0.0);
            round.insert(i, 0.0);
            kind.insert(i, c.kind);
        }
    }
    let mut pick = vec![0usize; cells.len()];
    loop {
        let mut p_assign = 1.0;
        for (j, c) in cells.iter().enumerate() {
            p_assign *= c.members[pick[j]].1 / weight[j];
        }
        let rep = |j: usize| cells[j].members[pick[j]].0;
        for &j in &inside {
            let p = p_assign * pi_in * weight[j] / w_in;
            *one_shot.get_mut(&rep(j)).unwrap() += p;
            *round.get_mut(&rep(j)).unwrap() += p;
        }
        for &j in &strad {
            let p = p_assign * (1.0 - pi_in) * weight[j] / w_str;
            if member_in[j][pick[j]] {
                *one_shot.get_mut(&rep(j)).unwrap() += p;
                *round.get_mut(&rep(j)).unwrap() += p;
            } else {
                for &d in &inside {
                    *one_shot.get_mut(&rep(d)).unwrap() += p * weight[d] / w_in;
                }
            }
        }
        let mut j = 0;
        while j < cells.len() {
            pick[j] += 1;
            if pick[j] < cells[j].members.len() {
                break;
            }
            pick[j] = 0;
            j += 1;
        }
        if j == cells.len() {
            break;
        }
    }
    let accept: f64 = round.values().sum();
    let rejection = round.into_iter().map(|(i, p)| (i, p / accept)).collect();
    Ok(SelectionProbs { one_shot, rejection, kind, outcomes })
}
