mod common;

use census_lab::config::Caps;
use census_lab::mc::{
    estimate_a3, estimate_esc_left, estimate_esc_right, estimate_prob_tree, sample_mstar_clt,
    sample_placement, PoissonSteps, Streams, TruncatedGeometric,
};
use census_lab::tilt;
use census_lab::walk::{mstar_distribution, prob_tree_float, survival_probability};
use census_lab::asymptotics::a3_local_limit;
use common::q;
use num_traits::ToPrimitive;

const TREE_3: f64 = 32.0 / 49.0;

#[test]
fn first_ball_pmf_cells() {
    let (k, n) = (10usize, 1_000_000u64);
    let g = TruncatedGeometric::new(k, 0.3).unwrap();
    let mut rng = Streams::new(11, 1).rng(0);
    let mut cells = vec![0u64; k + 1];
    for _ in 0..n {
        cells[g.sample(&mut rng)] += 1;
    }
    let p = q("3/10");
    for (i, &c) in cells.iter().enumerate().skip(1) {
        let exact = tilt::truncated_geometric_pmf(k as u64, &p, i as u64).unwrap().to_f64().unwrap();
        let stderr = (exact * (1.0 - exact) / n as f64).sqrt();
        let freq = c as f64 / n as f64;
        assert!((freq - exact).abs() <= 4.0 * stderr, "bin {i}: {freq} vs {exact}");
    }
}

#[test]
fn placements_reproducible_and_degenerate_tilt() {
    let a = sample_placement(30, 0.2, &mut Streams::new(5, 1).rng(0)).unwrap();
    let b = sample_placement(30, 0.2, &mut Streams::new(5, 1).rng(0)).unwrap();
    assert_eq!(a, b);
    let mut rng = Streams::new(5, 1).rng(0);
    let all_first = (0..1000)
        .map(|_| sample_placement(12, 1.0 - 1e-12, &mut rng).unwrap())
        .all(|p| p.bins.iter().all(|&t| t == 1));
    assert!(all_first);
}

#[test]
fn tree_probability_small_and_dp() {
    let e = estimate_prob_tree(3, 0.5, 1_000_000, Streams::new(1, 1)).unwrap();
    assert!(e.z_score(TREE_3).abs() <= 4.0, "{e:?}");
    let target = prob_tree_float(200, 0.01).unwrap();
    let e = estimate_prob_tree(200, 0.01, 100_000, Streams::new(2, 1)).unwrap();
    assert!(e.z_score(target).abs() <= 4.0, "{e:?} vs {target}");
}

#[test]
fn tree_probability_near_criticality() {
    // eps = pk/2 = 0.05
    let e = estimate_prob_tree(1000, 1e-4, 1_000_000, Streams::new(3, 1)).unwrap();
    let ratio = e.mean / (2.0 * 0.05f64.powi(2));
    assert!((0.8..=1.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn calibration_over_seeds() {
    let inside = (0..100u64)
        .filter(|&seed| {
            let e = estimate_prob_tree(3, 0.5, 10_000, Streams::new(seed, 1)).unwrap();
            e.z_score(TREE_3).abs() <= 2.0
        })
        .count();
    assert!(inside >= 90, "{inside} of 100");
}

#[test]
fn worker_count_keeps_targets() {
    for workers in [1usize, 2, 4, 7] {
        let s = Streams::new(99, workers);
        let a = estimate_prob_tree(3, 0.5, 200_000, s).unwrap();
        let b = estimate_prob_tree(3, 0.5, 200_000, s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.workers, workers);
        assert!(a.z_score(TREE_3).abs() <= 4.0, "workers={workers}: {a:?}");
    }
}

#[test]
fn poisson_moments() {
    let mut rng = Streams::new(8, 1).rng(0);
    for lambda in [0.5, 1.0, 5.0] {
        let s = PoissonSteps::new(lambda).unwrap();
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean / lambda - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var / lambda - 1.0).abs() < 0.01, "var {var}");
    }
}

#[test]
fn escape_estimates() {
    let target = survival_probability(1.05).unwrap();
    let e = estimate_esc_left(1.05, 4000, 100_000, Streams::new(21, 1)).unwrap();
    assert!(e.z_score(target).abs() <= 4.0, "{e:?} vs {target}");
    assert!((e.mean / 0.1 - 1.0).abs() <= 0.1);
    let e = estimate_esc_right(0.8, 2000, 100_000, Streams::new(22, 1)).unwrap();
    assert!(e.z_score(0.2).abs() <= 4.0, "{e:?}");
    let e = estimate_esc_left(0.9, 10_000, 20_000, Streams::new(23, 1)).unwrap();
    assert!(e.mean < 1e-3);
}

#[test]
fn clt_small_k_matches_exact_law() {
    let dist = mstar_distribution(3, &q("1/2"), &Caps::default()).unwrap();
    let grid = [-1.5, -0.5, 0.0, 0.5, 1.5, 5.0];
    let r = sample_mstar_clt(3, 0.5, 200_000, &grid, Streams::new(31, 1)).unwrap();
    for (u, emp) in r.u_grid.iter().zip(&r.empirical) {
        let exact = dist.cdf(r.mu + u * r.sigma).to_f64().unwrap();
        let stderr = (exact * (1.0 - exact) / r.accepted as f64).sqrt();
        assert!((emp - exact).abs() <= 4.0 * stderr, "u={u}: {emp} vs {exact}");
    }
    assert!(*r.empirical.last().unwrap() >= 0.999);
    assert!(r.empirical.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn clt_improves_with_k() {
    let grid = [-1.0, 0.0, 1.0];
    let small = sample_mstar_clt(200, 0.01, 100_000, &grid, Streams::new(41, 1)).unwrap();
    let large = sample_mstar_clt(2000, 0.001, 100_000, &grid, Streams::new(41, 1)).unwrap();
    assert!(large.max_abs_dev <= small.max_abs_dev, "{} vs {}", large.max_abs_dev, small.max_abs_dev);
    let tail = sample_mstar_clt(200, 0.01, 10_000, &[5.0], Streams::new(42, 1)).unwrap();
    assert!(tail.empirical[0] >= 0.999);
}

#[test]
fn a3_small_exact_values() {
    let e = estimate_a3(3, 0.5, 0, 1_000_000, Streams::new(51, 1)).unwrap();
    assert!(e.z_score(0.75).abs() <= 4.0, "{e:?}");
    let e = estimate_a3(3, 0.5, 1, 1_000_000, Streams::new(52, 1)).unwrap();
    assert!(e.z_score(0.25).abs() <= 4.0, "{e:?}");
}

#[test]
fn a3_local_limit_at_linear_scale() {
    let (k, l) = (2000usize, 2000u64);
    let p = tilt::solve_tilt(k as u64, l).unwrap();
    let e = estimate_a3(k, p, l, 1_000_000, Streams::new(61, 1)).unwrap();
    let ratio = e.mean / a3_local_limit(k as u64, p);
    assert!((0.85..=1.15).contains(&ratio), "ratio {ratio}");
}

#[test]
fn pilot_rejects_tiny_acceptance() {
    let err = sample_mstar_clt(5000, 1e-6, 10, &[0.0], Streams::new(1, 1)).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}
