mod common;

use std::collections::{BTreeSet, HashMap};

use census_lab::config::Caps;
use census_lab::graph::{sample_graphs, GraphSampler};
use census_lab::mc::Streams;
use census_lab::walk::{a3_exact, mstar_distribution};
use common::q;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn chi_square_uniform(k: usize, l: u64, samples: u64, seed: u64) -> (usize, f64) {
    let sampler = GraphSampler::new(k, l, &Caps::default()).unwrap();
    let graphs = sample_graphs(&sampler, samples, Streams::new(seed, 1)).unwrap();
    let support = common::connected_graphs(k, k - 1 + l as usize);
    let mut tally: HashMap<BTreeSet<(usize, usize)>, u64> =
        support.iter().map(|g| (g.clone(), 0)).collect();
    for g in graphs {
        *tally.get_mut(&g.edges).expect("sampled graph outside the census") += 1;
    }
    let observed: Vec<u64> = tally.values().copied().collect();
    (
        observed.len(),
        common::chi_square_p_value(&observed, samples as f64 / observed.len() as f64),
    )
}

#[test]
fn trees_on_four_vertices_are_uniform() {
    let (cells, p) = chi_square_uniform(4, 0, 100_000, 17);
    assert_eq!(cells, 16);
    assert!(p > 0.001, "p-value {p}");
}

#[test]
fn unicyclic_on_four_vertices_are_uniform() {
    let (cells, p) = chi_square_uniform(4, 1, 30_000, 18);
    assert_eq!(cells, 15);
    assert!(p > 0.001, "p-value {p}");
}

#[test]
fn uniform_at_an_arbitrary_tilt() {
    let sampler = GraphSampler::with_tilt(5, 2, 0.3, &Caps::default()).unwrap();
    let graphs = sample_graphs(&sampler, 40_000, Streams::new(19, 2)).unwrap();
    let support = common::connected_graphs(5, 6);
    let mut tally: HashMap<BTreeSet<(usize, usize)>, u64> =
        support.iter().map(|g| (g.clone(), 0)).collect();
    for g in graphs {
        *tally.get_mut(&g.edges).unwrap() += 1;
    }
    let observed: Vec<u64> = tally.values().copied().collect();
    let p = common::chi_square_p_value(&observed, 40_000.0 / observed.len() as f64);
    assert!(p > 0.001, "p-value {p}");
}

#[test]
fn acceptance_rate_matches_identity_factors() {
    let caps = Caps::default();
    for &(k, l, p) in &[(4usize, 1u64, "1/2"), (6, 2, "1/3"), (8, 3, "1/4"), (10, 4, "1/5")] {
        let pr = q(p);
        let dist = mstar_distribution(k as u64, &pr, &caps).unwrap();
        let target = (&dist.prob_tree * a3_exact(&dist, l)).to_f64().unwrap();
        let sampler = GraphSampler::with_tilt(k, l, pr.to_f64().unwrap(), &caps).unwrap();
        let mut rng = Streams::new(23, 1).rng(0);
        let accepted = 20_000u64;
        let trials: u64 = (0..accepted).map(|_| sampler.sample(&mut rng).unwrap().trials).sum();
        let rate = accepted as f64 / trials as f64;
        // trials per acceptance are geometric
        let stderr = target * ((1.0 - target) / accepted as f64).sqrt();
        assert!((rate - target).abs() <= 4.0 * stderr, "k={k}: {rate} vs {target}");
    }
}

#[test]
fn same_seed_same_graphs() {
    let sampler = GraphSampler::new(9, 4, &Caps::default()).unwrap();
    let a = sample_graphs(&sampler, 50, Streams::new(5, 3)).unwrap();
    let b = sample_graphs(&sampler, 50, Streams::new(5, 3)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_connected_with_requested_size(k in 2usize..16, frac in 0.0f64..1.0, seed: u64) {
        let top = census_lab::max_complexity(k as u64);
        let l = ((top as f64) * frac).round() as u64;
        let sampler = GraphSampler::new(k, l, &Caps::default()).unwrap();
        let mut rng = Streams::new(seed, 1).rng(0);
        let draw = sampler.sample(&mut rng).unwrap();
        prop_assert!(draw.graph.is_connected());
        prop_assert_eq!(draw.graph.edges.len(), k - 1 + l as usize);
        prop_assert!(draw.graph.edges.iter().all(|&(u, v)| u < v && v < k));
        prop_assert_eq!(draw.eligible_pairs as i64, draw.m_stat);
    }
}
