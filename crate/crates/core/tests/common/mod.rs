#![allow(dead_code)]

use std::collections::BTreeSet;

use census_lab::BigRational;

pub fn q(s: &str) -> BigRational {
    census_lab::parse_rational(s).unwrap()
}

pub fn tilts() -> Vec<BigRational> {
    ["1/4", "1/2", "3/4"].iter().map(|s| q(s)).collect()
}

/// All vertex pairs of `K_n` in a fixed order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

fn connected(n: usize, pairs: &[(usize, usize)], mask: u32) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parts = n;
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if mask >> i & 1 == 1 {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                parts -= 1;
            }
        }
    }
    parts == 1
}

/// Connected labeled graphs on `n` vertices tallied by edge count, by
/// testing every subset of the `C(n,2)` pairs.
pub fn brute_force_connected_by_edges(n: usize) -> Vec<u64> {
    let pairs = all_pairs(n);
    let mut counts = vec![0u64; pairs.len() + 1];
    for mask in 0u32..(1 << pairs.len()) {
        if connected(n, &pairs, mask) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

/// Every connected labeled graph on `n` vertices with `m` edges.
pub fn connected_graphs(n: usize, m: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let pairs = all_pairs(n);
    (0u32..(1 << pairs.len()))
        .filter(|mask| mask.count_ones() as usize == m && connected(n, &pairs, *mask))
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect()
        })
        .collect()
}

/// Upper-tail probability of a chi-square statistic.
pub fn chi_square_p_value(observed: &[u64], expected_each: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let stat: f64 = observed
        .iter()
        .map(|&o| (o as f64 - expected_each).powi(2) / expected_each)
        .sum();
    let df = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}
