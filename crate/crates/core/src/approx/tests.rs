use super::*;
use crate::oracle::{brute_force_range, enumerate_selection_probs, exact_distribution};
use crate::rng::SeededRng;
use crate::stats::{chi_squared_gof, within_binomial_band};
use crate::workload::{gen_dataset, random_halfspace, PointDist, WeightDist};

#[test]
fn rejects_bad_parameters() {
    let d = gen_dataset(10, PointDist::UnitCube, WeightDist::Uniform, 2.0, 1).unwrap();
    for (eps, gamma) in [(0.5, 0.5), (0.1, 0.2), (1.0, 0.1), (0.5, 0.0)] {
        assert!(matches!(ApproxSampler::build(&d, ApproxConfig::new(eps, gamma)), Err(Error::BadParameter(_))));
    }
    assert_eq!(ApproxConfig::new(0.5, 0.05).partition_r(), 64);
    assert_eq!(ApproxConfig::new(0.25, 0.025).partition_r(), 512);
}

#[test]
fn empty_range() {
    let d = gen_dataset(200, PointDist::UnitCube, WeightDist::Uniform, 2.0, 2).unwrap();
    let s = ApproxSampler::build(&d, ApproxConfig::new(0.5, 0.05)).unwrap();
    let mut rng = SeededRng::new(2);
    assert_eq!(s.sample_k(&HalfspaceQuery::below(0.0, 0.0, -1.0), 5, &mut rng).unwrap_err(), Error::EmptyRange);
}

#[test]
fn all_inside_is_exact() {
    let d = gen_dataset(300, PointDist::UnitCube, WeightDist::Uniform, 1.9, 3).unwrap();
    let s = ApproxSampler::build(&d, ApproxConfig::new(0.5, 0.05)).unwrap();
    let h = HalfspaceQuery::below(0.0, 0.0, 5.0);
    let mut rng = SeededRng::new(3);
    let set = s.generate_candidates(&h, &mut rng, &mut OpCounter::default()).unwrap();
    assert_eq!(set.straddling_len(), 0);
    let (ids, probs) = exact_distribution(&d, &h).unwrap();
    let mut counts = vec![0u64; ids.len()];
    for x in s.sample_k(&h, 100_000, &mut rng).unwrap() {
        counts[x] += 1;
    }
    assert!(chi_squared_gof(&counts, &probs).unwrap().p_value > 1e-3);
}

#[test]
fn single_inside_rep_always_returned() {
    let d = Dataset::from_positions(&[[0.0, 0.0, 0.0], [0.0, 0.0, 10.0]], &[1.0, 1.0]).unwrap();
    let s = ApproxSampler::build(&d, ApproxConfig::new(0.5, 0.05)).unwrap();
    let mut rng = SeededRng::new(4);
    let got = s.sample_k(&HalfspaceQuery::below(0.0, 0.0, 1.0), 50, &mut rng).unwrap();
    assert!(got.iter().all(|&i| i == 0));
}

/// Tiny instance whose layout has both inside and straddling cells.
fn tiny_with_straddling(seed: u64) -> (Dataset, ApproxSampler, HalfspaceQuery) {
    let mut rng = SeededRng::new(seed);
    loop {
        let n = 6 + rng.below(7);
        let d = gen_dataset(n, PointDist::UnitCube, WeightDist::TwoScale, 3.0, rng.next_u64()).unwrap();
        let cfg = ApproxConfig { r: Some(n.div_ceil(2)), ..ApproxConfig::new(0.5, 0.05) };
        let s = ApproxSampler::build(&d, cfg).unwrap();
        for _ in 0..20 {
            let h = random_halfspace(&mut rng);
            let Ok(layout) = s.candidate_layout(&h) else { continue };
            let kinds: Vec<CellKind> = layout.cells.iter().map(|c| c.kind).collect();
            if kinds.contains(&CellKind::Inside) && kinds.contains(&CellKind::Straddling) {
                return (d, s, h);
            }
        }
    }
}

#[test]
fn draws_match_enumeration() {
    for seed in 0..4 {
        let (d, s, h) = tiny_with_straddling(seed);
        let layout = s.candidate_layout(&h).unwrap();
        let probs = enumerate_selection_probs(&d, &layout, &h, 1_000_000).unwrap();
        let (ids, p): (Vec<usize>, Vec<f64>) = probs.one_shot.iter().filter(|(_, &p)| p > 0.0).map(|(&i, &p)| (i, p)).unzip();
        let mut rng = SeededRng::new(100 + seed);
        let mut counts = vec![0u64; ids.len()];
        for x in s.sample_k(&h, 200_000, &mut rng).unwrap() {
            counts[ids.binary_search(&x).expect("draw has positive probability")] += 1;
        }
        let r = chi_squared_gof(&counts, &p).unwrap();
        assert!(r.p_value > 1e-4, "seed {seed}: {r:?}");
    }
}

#[test]
fn layout_covers_range() {
    let d = gen_dataset(3000, PointDist::UnitCube, WeightDist::LogUniform, 1e6, 5).unwrap();
    let s = ApproxSampler::build(&d, ApproxConfig::new(0.5, 0.05)).unwrap();
    let mut rng = SeededRng::new(5);
    for _ in 0..30 {
        let h = random_halfspace(&mut rng);
        let Ok(layout) = s.candidate_layout(&h) else { continue };
        let (ids, _, total) = brute_force_range(&d, &h);
        let mut covered: Vec<usize> = layout.cells.iter().flat_map(|c| c.members.iter().map(|m| m.0)).collect();
        covered.sort_unstable();
        let mut ignored = 0.0;
        for i in ids {
            if s.classes().class_of(i) < layout.cutoff {
                assert!(covered.binary_search(&i).is_ok());
            } else {
                assert!(d.weight(i) / total < s.config().gamma / d.len() as f64);
                ignored += d.weight(i);
            }
        }
        assert!(ignored <= s.config().gamma * total);
    }
}

#[test]
fn op_count_within_bound() {
    let d = gen_dataset(2048, PointDist::UnitCube, WeightDist::LogUniform, 1e9, 6).unwrap();
    let s = ApproxSampler::build(&d, ApproxConfig::new(0.5, 0.05)).unwrap();
    let mut rng = SeededRng::new(6);
    for _ in 0..50 {
        let h = random_halfspace(&mut rng);
        let mut ops = OpCounter::default();
        if s.sample_k_counted(&h, 100, &mut rng, &mut ops).is_ok() {
            assert!((ops.total() as f64) <= s.op_bound(100), "{ops:?}");
        }
    }
}

#[test]
fn heavy_points_in_band() {
    let d = gen_dataset(2000, PointDist::UnitCube, WeightDist::LogUniform, 1e4, 7).unwrap();
    let eps = 0.25;
    let s = ApproxSampler::build(&d, ApproxConfig::new(eps, 0.01)).unwrap();
    let mut rng = SeededRng::new(7);
    let draws = 50_000;
    let mut tested = 0;
    while tested < 10 {
        let h = random_halfspace(&mut rng);
        let Ok((ids, probs)) = exact_distribution(&d, &h) else { continue };
        tested += 1;
        let mut counts = vec![0u64; ids.len()];
        for x in s.sample_k(&h, draws as usize, &mut rng).unwrap() {
            counts[ids.binary_search(&x).unwrap()] += 1;
        }
        for (c, &p) in counts.iter().zip(&probs) {
            if p >= 0.05 {
                let lo = within_binomial_band(*c, draws, p * (1.0 - eps), 4.0) || (*c as f64) >= draws as f64 * p * (1.0 - eps);
                let hi = within_binomial_band(*c, draws, p * (1.0 + eps), 4.0) || (*c as f64) <= draws as f64 * p * (1.0 + eps);
                assert!(lo && hi, "count {c} for p {p}");
            }
        }
    }
}
