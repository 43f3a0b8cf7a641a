use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub id: usize,
    pub pos: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<WeightedPoint>,
    total_weight: f64,
}

impl Dataset {
    /// Builds a dataset, assigning ids `0..n` in input order.
    pub fn from_positions(pos: &[[f64; 3]], weights: &[f64]) -> Result<Self> {
        if pos.len() != weights.len() {
            return Err(Error::BadInput("positions and weights differ in length".into()));
        }
        let points = pos
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(id, (&pos, &weight))| WeightedPoint { id, pos, weight })
            .collect();
        Self::new(points)
    }

    /// Ids must be dense in `[0, n)` and match the position in the list.
    pub fn new(points: Vec<WeightedPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut total_weight = 0.0;
        for (i, p) in points.iter().enumerate() {
            if p.id != i {
                return Err(Error::BadInput(format!("point at position {i} has id {}", p.id)));
            }
            if !(p.weight > 0.0 && p.weight.is_finite()) {
                return Err(Error::NonPositiveWeight(i));
            }
            if p.pos.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadInput(format!("point {i} has a non-finite coordinate")));
            }
            total_weight += p.weight;
        }
        Ok(Dataset { points, total_weight })
    }

    pub fn points(&self) -> &[WeightedPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weight(&self, id: usize) -> f64 {
        self.points[id].weight
    }

    pub fn pos(&self, id: usize) -> [f64; 3] {
        self.points[id].pos
    }

    pub fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.weight).collect()
    }

    /// Ratio of the largest to the smallest weight.
    pub fn weight_spread(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.weight), hi.max(p.weight)));
        hi / lo
    }
}
