//! Exact evaluation of the tilted balls-into-bins process.
//!
//! `k - 1` balls fall independently into `k` bins. The queue walk is
//! `Y_0 = 1`, `Y_i = Y_{i-1} + Z_i - 1`, and TREE is the event that `Y_t > 0`
//! for `1 <= t <= k - 1`. Conditioned on TREE, `M = C(k,2) - sum T_j` together
//! with `Pr[TREE]` gives the factors of the exact identity
//!
//! ```text
//! A1 * A2 * A3 = C(k,l) p^(k+l-1) (1-p)^(C(k,2) - (k+l-1))
//! ```
//!
//! Under a rational tilt `a/b` the weight of a placement depends only on
//! `sum T_j`, so the conditioned law of `M` factors into a `p`-free count of
//! TREE placements by excess times a closed-form weight.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::census::{binomial, max_complexity, pairs, CountTable};
use crate::config::{check, Caps};
use crate::error::{Error, Result};
use crate::tilt::{check_rational_tilt, TiltWeights};

/// Ball locations `T_j` (1-based bins) and the derived bin counts `Z_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub k: usize,
    pub bins: Vec<usize>,
    pub counts: Vec<usize>,
}

impl Placement {
    pub fn from_bins(k: usize, bins: Vec<usize>) -> Result<Self> {
        if k < 1 || bins.len() != k - 1 {
            return Err(Error::Precondition(format!(
                "need {} balls for k = {k}, got {}",
                k.saturating_sub(1),
                bins.len()
            )));
        }
        let mut counts = vec![0; k];
        for &t in &bins {
            if t < 1 || t > k {
                return Err(Error::Precondition(format!("bin {t} outside [1, {k}]")));
            }
            counts[t - 1] += 1;
        }
        Ok(Placement { k, bins, counts })
    }

    /// `C(k,2) - sum_j T_j`
    pub fn m_stat(&self) -> i64 {
        pairs(self.k as u64) as i64 - self.bins.iter().map(|&t| t as i64).sum::<i64>()
    }

    pub fn walk(&self) -> WalkTrace {
        walk_from_counts(&self.counts).expect("placement counts always sum to k - 1")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkTrace {
    /// `Y_0..=Y_k`
    pub y: Vec<i64>,
    pub tree: bool,
    pub m_stat: i64,
}

pub fn walk_from_counts(counts: &[usize]) -> Result<WalkTrace> {
    let k = counts.len();
    let balls: usize = counts.iter().sum();
    if k == 0 || balls != k - 1 {
        return Err(Error::Precondition(format!(
            "bin counts sum to {balls}, expected {}",
            k.saturating_sub(1)
        )));
    }
    let mut y = Vec::with_capacity(k + 1);
    y.push(1i64);
    for &z in counts {
        let prev = *y.last().unwrap();
        y.push(prev + z as i64 - 1);
    }
    debug_assert_eq!(y[k], 0);
    let tree = y[1..k].iter().all(|&v| v > 0);
    let by_walk: i64 = y[1..k].iter().map(|&v| v - 1).sum();
    let by_bins = pairs(k as u64) as i64
        - counts
            .iter()
            .enumerate()
            .map(|(i, &z)| (i as i64 + 1) * z as i64)
            .sum::<i64>();
    assert_eq!(by_walk, by_bins, "queue excess must equal C(k,2) - sum T");
    Ok(WalkTrace {
        y,
        tree,
        m_stat: by_walk,
    })
}

/// Exact `Pr[TREE]`.
///
/// Bins are filled left to right; `f[s]` carries the weighted number of ordered
/// ball assignments with `s` balls so far that kept the walk positive. The
/// weight `a (b-a)^(t-1) b^(k-t)` of a ball in bin `t` is paid one stage at a
/// time: after stage `u` every placed ball picks up `b` and every unplaced
/// ball `b - a`. A stage is then a binomial transform of `f`, done by
/// repeated neighbour sums.
pub fn prob_tree_exact(k: u64, p: &BigRational, caps: &Caps) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    check("exact TREE k", k, caps.exact_tree_k)?;
    let w = TiltWeights::new(k, p)?;
    let balls = (k - 1) as usize;
    let (a, b) = (p.numer(), p.denom());
    let rest_pow = powers_of(&(b - a), balls);
    let b_pow = powers_of(b, balls);
    let mut f = vec![BigInt::zero(); balls + 1];
    f[0] = BigInt::one();
    let mut work = vec![BigInt::zero(); balls + 1];
    for t in 1..=balls {
        // g[n] = sum_s binom(n, s) f[s]
        work.clone_from(&f);
        let mut g = Vec::with_capacity(balls + 1);
        g.push(work[0].clone());
        for n in 1..=balls {
            for s in 0..=balls - n {
                let (lo, hi) = work.split_at_mut(s + 1);
                lo[s] += &hi[0];
            }
            g.push(work[0].clone());
        }
        for (s, (fs, gs)) in f.iter_mut().zip(g).enumerate() {
            *fs = if s < t {
                BigInt::zero()
            } else {
                gs * &rest_pow[balls - s] * &b_pow[s]
            };
        }
    }
    // TREE forces s_{k-1} = k - 1, so bin k is empty
    let num = &f[balls] * a.pow(balls as u32);
    Ok(reduce_over_power(num, &w.total, balls))
}

/// `num / base^e` in lowest terms without a gcd against the full power.
fn reduce_over_power(mut num: BigInt, base: &BigInt, e: usize) -> BigRational {
    let mut den = BigInt::one();
    for _ in 0..e {
        let mut d = base.clone();
        loop {
            let g = num.gcd(&d);
            if g.is_one() {
                break;
            }
            num /= &g;
            d /= &g;
        }
        den *= d;
    }
    BigRational::new_raw(num, den)
}

fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

fn powers_of(x: &BigInt, n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(BigInt::one());
    for i in 1..=n {
        let next = &out[i - 1] * x;
        out.push(next);
    }
    out
}

/// `Pr[TREE]` in floating point by the sequential binomial chain: bin `t`
/// receives `Bin(remaining, pi_t)` balls with `pi_t = p / (1 - (1-p)^(k-t+1))`.
pub fn prob_tree_float(k: u64, p: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("tilt p = {p} is outside (0, 1]")));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let balls = (k - 1) as usize;
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=balls).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_q = (-p).ln_1p();
    let mut f = vec![0.0f64; balls + 1];
    f[0] = 1.0;
    for t in 1..=balls {
        let pi = p / -(((k as usize - t + 1) as f64) * ln_q).exp_m1();
        let (ln_pi, ln_rest) = (pi.ln(), (-pi).ln_1p());
        let mut next = vec![0.0f64; balls + 1];
        for (s, &fs) in f.iter().enumerate() {
            if fs < 1e-300 {
                continue;
            }
            let r = balls - s;
            let mean = r as f64 * pi;
            let spread = 14.0 * (mean * (1.0 - pi)).sqrt() + 14.0;
            let z_lo = (t.saturating_sub(s)).max((mean - spread).floor().max(0.0) as usize);
            let z_hi = r.min((mean + spread).ceil() as usize);
            for z in z_lo..=z_hi {
                let ln_pmf = ln_fact[r] - ln_fact[z] - ln_fact[r - z]
                    + z as f64 * ln_pi
                    + (r - z) as f64 * ln_rest;
                next[s + z] += fs * ln_pmf.exp();
            }
        }
        f = next;
    }
    Ok(f[balls])
}

/// Number of ordered TREE placements of `k - 1` balls, indexed by the excess
/// `m = sum_{i<k} (Y_i - 1)`. Independent of the tilt.
#[derive(Debug, Clone)]
pub struct TreeExcessCounts {
    pub k: u64,
    /// `counts[m]` for `m` in `0..=C(k-1, 2)`
    pub counts: Vec<BigInt>,
}

impl TreeExcessCounts {
    pub fn compute(k: u64, caps: &Caps) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain("k must be at least 2".into()));
        }
        check("exact joint k", k, caps.exact_joint_k)?;
        let balls = (k - 1) as usize;
        let max_excess = pairs(k - 1) as usize;
        let choose = pascal(balls);
        // g[s][acc]: s balls in bins 1..t, acc = sum_{i<=t} (s_i - i)
        let mut g = vec![vec![BigInt::zero(); max_excess + 1]; balls + 1];
        g[0][0] = BigInt::one();
        for t in 1..=balls {
            let mut next = vec![vec![BigInt::zero(); max_excess + 1]; balls + 1];
            for (s, row) in g.iter().enumerate() {
                for (acc, c) in row.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for s2 in s.max(t)..=balls {
                        let z = s2 - s;
                        next[s2][acc + s2 - t] += c * &choose[s2][z];
                    }
                }
            }
            g = next;
        }
        Ok(TreeExcessCounts {
            k,
            counts: g.swap_remove(balls),
        })
    }

    /// Exact conditioned law of `M*` at tilt `p`.
    pub fn distribution(&self, p: &BigRational) -> Result<MStarDistribution> {
        check_rational_tilt(p)?;
        let k = self.k;
        let a = p.numer();
        let b = p.denom();
        let rest = b - a;
        let total = b.pow(k as u32) - rest.pow(k as u32);
        let a_part = a.pow((k - 1) as u32);
        // weight(m) = a^(k-1) (b-a)^(S-(k-1)) b^(k(k-1)-S), S = C(k,2) - m
        let weighted: Vec<BigInt> = self
            .counts
            .iter()
            .enumerate()
            .map(|(m, n)| {
                if n.is_zero() {
                    return BigInt::zero();
                }
                let s = pairs(k) - m as u64;
                n * &a_part * rest.pow((s - (k - 1)) as u32) * b.pow((k * (k - 1) - s) as u32)
            })
            .collect();
        let tree_weight: BigInt = weighted.iter().sum();
        if tree_weight.is_zero() {
            return Err(Error::Domain("TREE has probability zero".into()));
        }
        let prob_tree = BigRational::new(tree_weight.clone(), total.pow((k - 1) as u32));
        let mass = weighted
            .into_iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(m, w)| (m as u64, BigRational::new(w, tree_weight.clone())))
            .collect();
        Ok(MStarDistribution {
            k,
            p: p.clone(),
            prob_tree,
            mass,
        })
    }
}

/// Exact law of `M` conditioned on TREE.
#[derive(Debug, Clone, PartialEq)]
pub struct MStarDistribution {
    pub k: u64,
    pub p: BigRational,
    pub prob_tree: BigRational,
    /// Nonzero masses only.
    pub mass: BTreeMap<u64, BigRational>,
}

impl MStarDistribution {
    pub fn total_mass(&self) -> BigRational {
        self.mass.values().sum()
    }

    /// `Pr[M* <= x]`
    pub fn cdf(&self, x: f64) -> BigRational {
        self.mass
            .iter()
            .take_while(|(&m, _)| (m as f64) <= x)
            .map(|(_, v)| v.clone())
            .sum()
    }
}

pub fn mstar_distribution(k: u64, p: &BigRational, caps: &Caps) -> Result<MStarDistribution> {
    TreeExcessCounts::compute(k, caps)?.distribution(p)
}

/// `A1 = (1 - (1-p)^k)^(k-1)`
pub fn a1(k: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_tilt(p)?;
    let (a, b) = (p.numer(), p.denom());
    let num = b.pow(k as u32) - (b - a).pow(k as u32);
    let den = b.pow(k as u32);
    Ok(BigRational::new(
        num.pow((k - 1) as u32),
        den.pow((k - 1) as u32),
    ))
}

/// `A3 = Pr[Bin(M*, p) = l]`
pub fn a3_exact(dist: &MStarDistribution, l: u64) -> BigRational {
    let p = &dist.p;
    let q = BigRational::one() - p;
    let p_l = pow_rational(p, l);
    dist.mass
        .range(l..)
        .map(|(&m, mass)| {
            mass * BigRational::from_integer(binomial(m, l)) * &p_l * pow_rational(&q, m - l)
        })
        .sum()
}

fn pow_rational(x: &BigRational, e: u64) -> BigRational {
    BigRational::new_raw(x.numer().pow(e as u32), x.denom().pow(e as u32))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub k: u64,
    pub l: u64,
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub a1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub a2: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub a3: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
    pub equal: bool,
}

pub(crate) fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Checks the identity for one `(k, l, p)` with precomputed pieces.
pub fn verify_identity_with(
    table: &CountTable,
    dist: &MStarDistribution,
    l: u64,
) -> Result<IdentityReport> {
    let k = dist.k;
    if l > max_complexity(k) {
        return Err(Error::Domain(format!(
            "l = {l} exceeds max complexity {} for k = {k}",
            max_complexity(k)
        )));
    }
    let p = &dist.p;
    let a1 = a1(k, p)?;
    let a2 = dist.prob_tree.clone();
    let a3 = a3_exact(dist, l);
    let lhs = &a1 * &a2 * &a3;
    let edges = k + l - 1;
    let count = table.count_connected(k, l as i64)?;
    let rhs = BigRational::from_integer(count)
        * pow_rational(p, edges)
        * pow_rational(&(BigRational::one() - p), pairs(k) - edges);
    Ok(IdentityReport {
        k,
        l,
        p: p.clone(),
        equal: lhs == rhs,
        a1,
        a2,
        a3,
        lhs,
        rhs,
    })
}

pub fn verify_identity(k: u64, l: u64, p: &BigRational, caps: &Caps) -> Result<IdentityReport> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    caps.check_census(k, pairs(k))?;
    let table = CountTable::build(k as usize, pairs(k) as usize);
    let dist = mstar_distribution(k, p, caps)?;
    verify_identity_with(&table, &dist, l)
}

/// Every `(k, l, p)` with `2 <= k <= k_max`, `0 <= l <= max_complexity(k)`.
pub fn identity_sweep(k_max: u64, tilts: &[BigRational], caps: &Caps) -> Result<Vec<IdentityReport>> {
    caps.check_census(k_max, pairs(k_max))?;
    check("exact joint k", k_max, caps.exact_joint_k)?;
    for p in tilts {
        check_rational_tilt(p)?;
    }
    let table = CountTable::build(k_max as usize, pairs(k_max) as usize);
    let mut out = Vec::new();
    for k in 2..=k_max {
        let counts = TreeExcessCounts::compute(k, caps)?;
        for p in tilts {
            let dist = counts.distribution(p)?;
            for l in 0..=max_complexity(k) {
                out.push(verify_identity_with(&table, &dist, l)?);
            }
        }
    }
    Ok(out)
}

/// Enumerates all `k^(k-1)` ball assignments with their product weights.
pub fn brute_force_joint(
    k: u64,
    p: &BigRational,
    caps: &Caps,
) -> Result<(BigRational, MStarDistribution)> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    check("brute force k", k, caps.brute_force_k)?;
    let w = TiltWeights::new(k, p)?;
    let ku = k as usize;
    let mut bins = vec![1usize; ku - 1];
    let mut by_m: BTreeMap<u64, BigInt> = BTreeMap::new();
    let mut tree_weight = BigInt::zero();
    loop {
        let placement = Placement::from_bins(ku, bins.clone())?;
        let trace = placement.walk();
        if trace.tree {
            let weight: BigInt = bins.iter().map(|&t| &w.weight[t]).product();
            tree_weight += &weight;
            *by_m.entry(trace.m_stat as u64).or_default() += weight;
        }
        // odometer over [1, k]^(k-1)
        let mut pos = 0;
        loop {
            if pos == bins.len() {
                let prob_tree =
                    BigRational::new(tree_weight.clone(), w.total.pow((k - 1) as u32));
                let mass = by_m
                    .into_iter()
                    .map(|(m, v)| (m, BigRational::new(v, tree_weight.clone())))
                    .collect();
                let dist = MStarDistribution {
                    k,
                    p: p.clone(),
                    prob_tree: prob_tree.clone(),
                    mass,
                };
                return Ok((prob_tree, dist));
            }
            if bins[pos] < ku {
                bins[pos] += 1;
                break;
            }
            bins[pos] = 1;
            pos += 1;
        }
    }
}

/// Survival probability of a Galton-Watson process with `Po(lambda)`
/// offspring: the root in `(0, 1)` of `e^(-lambda y) = 1 - y`, or 0 when
/// `lambda <= 1`.
pub fn survival_probability(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if lambda <= 1.0 {
        return Ok(0.0);
    }
    let g = |y: f64| -(-lambda * y).exp_m1() - y;
    let (mut lo, mut hi) = (1e-15f64, 1.0 - 1e-15);
    if g(lo) <= 0.0 {
        // root below 1e-15
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    if g(y).abs() <= 1e-12 {
        Ok(y)
    } else {
        Err(Error::Convergence(format!(
            "survival probability for lambda = {lambda}: residual {:.3e}",
            g(y)
        )))
    }
}

/// Escape probability of the right walk with `Po(1 - eps)` steps, which is
/// exactly `eps`.
pub fn esc_right_probability(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(eps)
}
