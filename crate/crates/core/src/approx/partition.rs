use serde::Serialize;

use crate::alias::{sample_parts, AliasTable};
use crate::error::{Error, Result};
use crate::geom::HalfspaceQuery;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Inside,
    Straddling,
    Outside,
}

#[derive(Debug, Clone, Copy)]
pub struct Cell {
    start: u32,
    end: u32,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub weight: f64,
}

impl Cell {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn corners(&self) -> [[f64; 3]; 8] {
        std::array::from_fn(|m| {
            [0, 1, 2].map(|d| if m >> d & 1 == 0 { self.lo[d] } else { self.hi[d] })
        })
    }
}

/// Kd median partition of a point set into cells of `ceil(N/r)` to
/// `2·ceil(N/r)` points, each with its bounding box, weight and alias table.
#[derive(Debug, Clone)]
pub struct KdPartition {
    ids: Vec<u32>,
    prob: Vec<f64>,
    alias: Vec<u32>,
    cells: Vec<Cell>,
}

impl KdPartition {
    /// `ids` index into `pos` and `weights`.
    pub fn build(pos: &[[f64; 3]], weights: &[f64], ids: &[usize], r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::BadParameter("r must be positive".into()));
        }
        Self::with_cap(pos, weights, ids, 2 * ids.len().div_ceil(r))
    }

    /// Median splits until every cell holds at most `cap` points.
    pub fn with_cap(pos: &[[f64; 3]], weights: &[f64], ids: &[usize], cap: usize) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        if cap == 0 {
            return Err(Error::BadParameter("cell cap must be positive".into()));
        }
        let mut order: Vec<u32> = ids.iter().map(|&i| i as u32).collect();
        let mut ranges = Vec::new();
        split(pos, &mut order, 0, 0, cap, &mut ranges);
        let mut prob = Vec::with_capacity(order.len());
        let mut alias = Vec::with_capacity(order.len());
        let mut cells = Vec::with_capacity(ranges.len());
        for (s, e) in ranges {
            let members = &order[s..e];
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for &i in members {
                for d in 0..3 {
                    lo[d] = lo[d].min(pos[i as usize][d]);
                    hi[d] = hi[d].max(pos[i as usize][d]);
                }
            }
            let w: Vec<f64> = members.iter().map(|&i| weights[i as usize]).collect();
            let (p, a, weight) = AliasTable::new(&w)?.into_parts();
            prob.extend(p);
            alias.extend(a);
            cells.push(Cell { start: s as u32, end: e as u32, lo, hi, weight });
        }
        Ok(KdPartition { ids: order, prob, alias, cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.ids.len()
    }

    pub fn members(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let c = &self.cells[cell];
        self.ids[c.start as usize..c.end as usize].iter().map(|&i| i as usize)
    }

    /// Draws a member of `cell` with probability proportional to weight.
    pub fn draw<R: RandomSource + ?Sized>(&self, cell: usize, rng: &mut R) -> usize {
        let c = &self.cells[cell];
        let (s, e) = (c.start as usize, c.end as usize);
        self.ids[s + sample_parts(&self.prob[s..e], &self.alias[s..e], rng)] as usize
    }

    /// Classification by the eight box corners.
    pub fn classify(&self, cell: usize, h: &HalfspaceQuery) -> CellKind {
        let inside = self.cells[cell].corners().iter().filter(|&&c| h.contains(c)).count();
        match inside {
            8 => CellKind::Inside,
            0 => CellKind::Outside,
            _ => CellKind::Straddling,
        }
    }

    /// Entries held: ids plus alias slots.
    pub fn space(&self) -> usize {
        2 * self.ids.len()
    }
}

fn split(pos: &[[f64; 3]], order: &mut [u32], offset: usize, axis: usize, cap: usize, out: &mut Vec<(usize, usize)>) {
    let m = order.len();
    if m <= cap {
        out.push((offset, offset + m));
        return;
    }
    let mid = m / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        pos[a as usize][axis].total_cmp(&pos[b as usize][axis]).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    split(pos, left, offset, (axis + 1) % 3, cap, out);
    split(pos, right, offset + mid, (axis + 1) % 3, cap, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn cube_corners() -> Vec<[f64; 3]> {
        (0..8).map(|m| [0, 1, 2].map(|d| (m >> d & 1) as f64)).collect()
    }

    #[test]
    fn corners_r8_gives_pairs() {
        let pos = cube_corners();
        let p = KdPartition::build(&pos, &[1.0; 8], &(0..8).collect::<Vec<_>>(), 8).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.cells().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn cap_one_gives_singletons() {
        let pos = cube_corners();
        let w = vec![1.0; 8];
        let ids: Vec<usize> = (0..8).collect();
        let p = KdPartition::with_cap(&pos, &w, &ids, 1).unwrap();
        assert_eq!(p.len(), 8);
        assert!(p.cells().iter().all(|c| c.len() == 1));
    }

    #[test]
    fn r1_is_one_cell() {
        let pos = cube_corners();
        let p = KdPartition::build(&pos, &[1.0; 8], &(0..8).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.cells()[0].weight, 8.0);
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(KdPartition::build(&[], &[], &[], 4).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn sizes_and_cover() {
        let mut rng = SeededRng::new(1);
        let n = 1000;
        let pos: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0)]).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0, 2.0)).collect();
        let ids: Vec<usize> = (0..n).filter(|i| i % 3 != 0).collect();
        for r in [1, 7, 64, 500, 2000] {
            let p = KdPartition::build(&pos, &w, &ids, r).unwrap();
            let c = ids.len().div_ceil(r);
            let mut seen: Vec<usize> = (0..p.len()).flat_map(|j| p.members(j).collect::<Vec<_>>()).collect();
            seen.sort_unstable();
            assert_eq!(seen, ids);
            for (j, cell) in p.cells().iter().enumerate() {
                assert!(cell.len() <= 2 * c);
                assert!(cell.len() >= c.min(ids.len()) || p.len() == 1);
                let wsum: f64 = p.members(j).map(|i| w[i]).sum();
                assert!((wsum - cell.weight).abs() <= 1e-12 * wsum);
                for i in p.members(j) {
                    assert!((0..3).all(|d| cell.lo[d] <= pos[i][d] && pos[i][d] <= cell.hi[d]));
                }
            }
        }
    }

    #[test]
    fn classification_consistent_with_members() {
        let mut rng = SeededRng::new(2);
        let n = 500;
        let pos: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0), rng.gen_range(0.0, 1.0)]).collect();
        let ids: Vec<usize> = (0..n).collect();
        let p = KdPartition::build(&pos, &vec![1.0; n], &ids, 64).unwrap();
        for _ in 0..50 {
            let h = HalfspaceQuery::below(rng.gen_range(-1.0, 1.0), rng.gen_range(-1.0, 1.0), rng.gen_range(0.0, 1.0));
            for j in 0..p.len() {
                let inside = p.members(j).filter(|&i| h.contains(pos[i])).count();
                match p.classify(j, &h) {
                    CellKind::Inside => assert_eq!(inside, p.cells()[j].len()),
                    CellKind::Outside => assert_eq!(inside, 0),
                    CellKind::Straddling => {}
                }
            }
        }
    }

    #[test]
    fn draws_follow_weights() {
        let pos = cube_corners();
        let w = [1.0, 3.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let p = KdPartition::build(&pos, &w, &(0..8).collect::<Vec<_>>(), 4).unwrap();
        let j = (0..p.len()).find(|&j| p.members(j).any(|i| i == 1)).unwrap();
        let mut rng = SeededRng::new(3);
        let draws = 40_000;
        let ones = (0..draws).filter(|_| p.draw(j, &mut rng) == 1).count() as u64;
        let share = 3.0 / p.cells()[j].weight;
        assert!(crate::stats::within_binomial_band(ones, draws, share, 4.0));
    }
}
