//! The tilted truncated-geometric ball distribution and its moments.
//!
//! Ball `j` lands in bin `i` with probability `p (1-p)^(i-1) / (1 - (1-p)^k)`.
//! `M = C(k,2) - sum_j T_j` is the statistic whose conditioned law drives the
//! counting identity; its mean fixes the tilt through `p * mu(p) = l`.
//!
//! Exact versions take a [`BigRational`] tilt. The `f64` versions avoid the
//! closed forms, which cancel catastrophically when `pk` is small, and sum
//! positive terms instead.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::census::{max_complexity, pairs};
use crate::error::{Error, Result};

/// Integer bin weights for a rational tilt `p = a/b`.
///
/// `weight[i] = a (b-a)^(i-1) b^(k-i)` for `i = 1..=k`, so that
/// `pmf(i) = weight[i] / total` with `total = b^k - (b-a)^k`.
#[derive(Debug, Clone)]
pub(crate) struct TiltWeights {
    /// Index 0 is unused.
    pub weight: Vec<BigInt>,
    pub total: BigInt,
}

impl TiltWeights {
    pub fn new(k: u64, p: &BigRational) -> Result<Self> {
        check_rational_tilt(p)?;
        let a = p.numer().clone();
        let b = p.denom().clone();
        let rest = &b - &a;
        let k = k as usize;
        let mut weight = vec![BigInt::zero(); k + 1];
        // a * (b-a)^(i-1) * b^(k-i), built from both ends
        let mut rest_pow = vec![BigInt::one(); k];
        let mut b_pow = vec![BigInt::one(); k];
        for i in 1..k {
            rest_pow[i] = &rest_pow[i - 1] * &rest;
            b_pow[i] = &b_pow[i - 1] * &b;
        }
        for i in 1..=k {
            weight[i] = &a * &rest_pow[i - 1] * &b_pow[k - i];
        }
        let total = weight.iter().sum();
        Ok(TiltWeights { weight, total })
    }
}

pub(crate) fn check_rational_tilt(p: &BigRational) -> Result<()> {
    if !p.is_positive() || *p > BigRational::one() {
        return Err(Error::Domain(format!("tilt p = {p} is outside (0, 1]")));
    }
    Ok(())
}

fn check_float_tilt(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("tilt p = {p} is outside (0, 1]")));
    }
    Ok(())
}

fn ratio(n: BigInt, d: BigInt) -> BigRational {
    BigRational::new(n, d)
}

/// `Pr[T = i]` for the truncated geometric on `1..=k`.
pub fn truncated_geometric_pmf(k: u64, p: &BigRational, i: u64) -> Result<BigRational> {
    if i < 1 || i > k {
        return Err(Error::Domain(format!("bin {i} outside [1, {k}]")));
    }
    let w = TiltWeights::new(k, p)?;
    Ok(ratio(w.weight[i as usize].clone(), w.total))
}

/// Exact `E[T_1]` and `E[T_1^2]` by direct summation.
fn exact_t_moments(k: u64, p: &BigRational) -> Result<(BigRational, BigRational)> {
    let w = TiltWeights::new(k, p)?;
    let mut first = BigInt::zero();
    let mut second = BigInt::zero();
    for (i, wi) in w.weight.iter().enumerate().skip(1) {
        let i = BigInt::from(i);
        first += &i * wi;
        second += &i * &i * wi;
    }
    Ok((ratio(first, w.total.clone()), ratio(second, w.total)))
}

fn pow_ratio(x: &BigRational, e: u64) -> BigRational {
    BigRational::new_raw(x.numer().pow(e as u32), x.denom().pow(e as u32))
}

/// Exact mean of `M` from the closed form for `E[T_1]`:
/// `mu = C(k,2) - (k-1) E[T_1]`,
/// `E[T_1] = [1 - (k+1) p q^k - q^(k+1)] / [p (1 - q^k)]` with `q = 1 - p`.
pub fn mean_m_exact(k: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_tilt(p)?;
    let one = BigRational::one();
    let q = &one - p;
    let qk = pow_ratio(&q, k);
    let kr = BigRational::from_integer(BigInt::from(k));
    let num = &one - (&kr + &one) * p * &qk - &qk * &q;
    let den = p * (&one - &qk);
    let et = num / den;
    Ok(BigRational::from_integer(BigInt::from(pairs(k))) - (&kr - &one) * et)
}

/// Exact mean of `M` by summing `i * pmf(i)`.
pub fn mean_m_by_summation(k: u64, p: &BigRational) -> Result<BigRational> {
    let (et, _) = exact_t_moments(k, p)?;
    Ok(BigRational::from_integer(BigInt::from(pairs(k))) - BigRational::from_integer(BigInt::from(k - 1)) * et)
}

/// `mu = C(k,2) - (k-1)/p + k(k-1) q^k / (1 - q^k)`, the rearranged form used
/// when `pk` is large.
pub fn mean_m_rearranged(k: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_tilt(p)?;
    let one = BigRational::one();
    let qk = pow_ratio(&(&one - p), k);
    let k1 = BigRational::from_integer(BigInt::from(k - 1));
    let kk1 = BigRational::from_integer(BigInt::from(k * (k - 1)));
    Ok(BigRational::from_integer(BigInt::from(pairs(k))) - &k1 / p + kk1 * &qk / (&one - &qk))
}

/// The rearranged form with the opposite sign on the last term, kept so the
/// tests can show it disagrees with enumeration.
pub fn mean_m_rearranged_minus(k: u64, p: &BigRational) -> Result<BigRational> {
    check_rational_tilt(p)?;
    let one = BigRational::one();
    let qk = pow_ratio(&(&one - p), k);
    let k1 = BigRational::from_integer(BigInt::from(k - 1));
    let kk1 = BigRational::from_integer(BigInt::from(k * (k - 1)));
    Ok(BigRational::from_integer(BigInt::from(pairs(k))) - &k1 / p - kk1 * &qk / (&one - &qk))
}

/// Exact variance of `M`, `(k-1) Var(T_1)`.
pub fn var_m_exact(k: u64, p: &BigRational) -> Result<BigRational> {
    let (first, second) = exact_t_moments(k, p)?;
    let var_t = second - &first * &first;
    Ok(BigRational::from_integer(BigInt::from(k - 1)) * var_t)
}

/// Offset `(k+1)/2 - E[T_1]`, summed from symmetric pairs of bins so every
/// term is nonnegative.
fn centre_offset(k: u64, p: f64) -> f64 {
    let ln_q = (-p).ln_1p();
    let norm = -(k as f64 * ln_q).exp_m1();
    let mid = (k as f64 + 1.0) / 2.0;
    let mut acc = 0.0;
    for i in 1..=k / 2 {
        let lead = p * ((i - 1) as f64 * ln_q).exp();
        if lead == 0.0 {
            break;
        }
        let gap = -(((k + 1 - 2 * i) as f64) * ln_q).exp_m1();
        acc += (mid - i as f64) * lead * gap;
    }
    acc / norm
}

/// `E[T_1]` in floating point.
pub fn mean_t(k: u64, p: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    (k as f64 + 1.0) / 2.0 - centre_offset(k, p)
}

/// Mean of `M` in floating point.
pub fn mean_m(k: u64, p: f64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if p >= 1.0 {
        return (pairs(k) - (k - 1)) as f64;
    }
    (k - 1) as f64 * (centre_offset(k, p) - 0.5)
}

/// Variance of `M` in floating point, summed around the mean.
pub fn var_m(k: u64, p: f64) -> f64 {
    if k < 2 || p >= 1.0 {
        return 0.0;
    }
    let ln_q = (-p).ln_1p();
    let norm = -(k as f64 * ln_q).exp_m1();
    let et = mean_t(k, p);
    let mut acc = 0.0;
    for i in 1..=k {
        let w = p * ((i - 1) as f64 * ln_q).exp();
        if w == 0.0 {
            break;
        }
        let d = i as f64 - et;
        acc += d * d * w;
    }
    (k - 1) as f64 * acc / norm
}

/// Expected number of balls in the leftmost bin.
pub fn lambda_left(k: u64, p: f64) -> f64 {
    let norm = -(k as f64 * (-p).ln_1p()).exp_m1();
    (k - 1) as f64 * p / norm
}

/// Expected number of balls in the rightmost bin.
pub fn lambda_right(k: u64, p: f64) -> f64 {
    if p >= 1.0 {
        return 0.0;
    }
    let ln_q = (-p).ln_1p();
    let norm = -(k as f64 * ln_q).exp_m1();
    (k - 1) as f64 * p * ((k - 1) as f64 * ln_q).exp() / norm
}

/// Finds `p` in `(0, 1]` with `p * mu(p) = l`. Bisection runs until the
/// bracket collapses; the result is rejected if its residual exceeds `1e-12 * l`.
pub fn solve_tilt(k: u64, l: u64) -> Result<f64> {
    solve_tilt_with(k, l as f64, 1e-12 * l as f64)
}

/// Bisection for `p * mu(p) = target`. `p * mu(p)` is negative while
/// `mu < 0` and strictly increasing once `mu > 0`, so any positive target
/// has a single root.
pub fn solve_tilt_with(k: u64, target: f64, tol_abs: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    if !(target > 0.0) {
        return Err(Error::Domain(format!("target {target} must be positive")));
    }
    let top = max_complexity(k) as f64;
    if target > top {
        return Err(Error::NoSolution(format!(
            "l = {target} exceeds max complexity {top} for k = {k}"
        )));
    }
    if target == top {
        return Ok(1.0);
    }
    let residual = |p: f64| p * mean_m(k, p) - target;
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = 1.0f64;
    let mut best = (f64::INFINITY, hi);
    for _ in 0..4000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        if r == 0.0 {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= tol_abs {
        Ok(best.1)
    } else {
        Err(Error::Convergence(format!(
            "tilt for k = {k}, l = {target}: best residual {:.3e} > {tol_abs:.3e}",
            best.0
        )))
    }
}

/// Scaled limit of `p * mu / k` at `p = c/k`.
pub fn f1(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("f1 needs c > 0, got {c}")));
    }
    if c < 1e-2 {
        let c2 = c * c;
        return Ok(c2 / 12.0 - c2 * c2 / 720.0 + c2 * c2 * c2 / 30240.0);
    }
    // c[1/2 - (1-(c+1)e^-c) / (c(1-e^-c))] = c/2 - 1 + c/(e^c - 1)
    Ok(c / 2.0 - 1.0 + c / c.exp_m1())
}

/// Scaled limit of `sigma^2 / k^3` at `p = c/k`: the variance of the
/// exponential with rate `c` truncated to `[0, 1]`.
pub fn f2(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("f2 needs c > 0, got {c}")));
    }
    Ok(if c < 0.1 {
        let c2 = c * c;
        1.0 / 12.0 - c2 / 240.0 + c2 * c2 / 6048.0 - c2 * c2 * c2 / 172_800.0
    } else if c < 1.0 {
        let s = (c / 2.0).sinh();
        1.0 / (c * c) - 1.0 / (4.0 * s * s)
    } else {
        f2_kappa_form(c)
    })
}

/// `kappa [e^-c (-1/c - 2/c^2 - 2/c^3) + 2/c^3] - (kappa [e^-c (-1/c - 1/c^2) + 1/c^2])^2`
/// with `kappa = c / (1 - e^-c)`. Loses precision for small `c`.
pub fn f2_kappa_form(c: f64) -> f64 {
    let e = (-c).exp();
    let kappa = c / -(-c).exp_m1();
    let (c1, c2, c3) = (1.0 / c, 1.0 / (c * c), 1.0 / (c * c * c));
    let second = kappa * (e * (-c1 - 2.0 * c2 - 2.0 * c3) + 2.0 * c3);
    let first = kappa * (e * (-c1 - c2) + c2);
    second - first * first
}

/// Positive root `c` of `e^-c = (2(beta+1) - c) / (2(beta+1) + c)`.
pub fn solve_c(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let s2 = 2.0 * (beta + 1.0);
    let h = |c: f64| (-c).exp() - (s2 - c) / (s2 + c);
    let (mut lo, mut hi) = (0.0f64, s2);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let res = h(c).abs();
    if res <= 1e-12 && c > 0.0 {
        Ok(c)
    } else {
        Err(Error::Convergence(format!(
            "c for beta = {beta}: residual {res:.3e}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `l = 0`; Cayley's formula applies exactly.
    Tree,
    Small,
    Large,
    VeryLarge,
    OutOfRange,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Tree => "tree",
            Regime::Small => "small",
            Regime::Large => "large",
            Regime::VeryLarge => "very_large",
            Regime::OutOfRange => "out_of_range",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeTag {
    pub regime: Regime,
    /// `c` solving the large-regime equation for `beta = l/k`; `None` otherwise.
    pub c: Option<f64>,
}

/// Finite-size cut points between the asymptotic classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// `l <= k^small_exponent` is small.
    pub small_exponent: f64,
    /// `l >= k^large_exponent` is very large.
    pub large_exponent: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            small_exponent: 0.9,
            large_exponent: 1.1,
        }
    }
}

pub fn classify_regime(k: u64, l: u64) -> Result<RegimeTag> {
    classify_regime_with(k, l, RegimeThresholds::default())
}

pub fn classify_regime_with(k: u64, l: u64, th: RegimeThresholds) -> Result<RegimeTag> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    let kf = k as f64;
    let lf = l as f64;
    let tag = |regime| RegimeTag { regime, c: None };
    Ok(if l == 0 {
        tag(Regime::Tree)
    } else if lf > kf * kf.ln() {
        tag(Regime::OutOfRange)
    } else if lf <= kf.powf(th.small_exponent) {
        tag(Regime::Small)
    } else if lf < kf.powf(th.large_exponent) {
        RegimeTag {
            regime: Regime::Large,
            c: Some(solve_c(lf / kf)?),
        }
    } else {
        tag(Regime::VeryLarge)
    })
}

/// `(k, p)` with the derived quantities that describe the tilted model.
#[derive(Debug, Clone, Serialize)]
pub struct TiltedModel {
    pub k: u64,
    pub p: f64,
    pub lambda: f64,
    pub lambda_r: f64,
    /// `pk / 2`
    pub epsilon: f64,
    /// `pk`
    pub c: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub regime: Regime,
}

impl TiltedModel {
    pub fn new(k: u64, p: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain("k must be at least 2".into()));
        }
        check_float_tilt(p)?;
        let mu = mean_m(k, p);
        let l = (p * mu).round().max(0.0) as u64;
        let regime = classify_regime(k, l)?.regime;
        Ok(TiltedModel {
            k,
            p,
            lambda: lambda_left(k, p),
            lambda_r: lambda_right(k, p),
            epsilon: p * k as f64 / 2.0,
            c: p * k as f64,
            mu,
            sigma2: var_m(k, p),
            regime,
        })
    }

    /// Model at the tilt solving `p * mu(p) = l`.
    pub fn at_complexity(k: u64, l: u64) -> Result<Self> {
        Self::new(k, solve_tilt(k, l)?)
    }
}

pub(crate) fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pmf_values() {
        assert_eq!(truncated_geometric_pmf(3, &q(1, 2), 1).unwrap(), q(4, 7));
        assert_eq!(truncated_geometric_pmf(9, &q(1, 1), 1).unwrap(), q(1, 1));
        assert_eq!(truncated_geometric_pmf(9, &q(1, 1), 2).unwrap(), q(0, 1));
        let total: BigRational = (1..=3)
            .map(|i| truncated_geometric_pmf(3, &q(1, 2), i).unwrap())
            .sum();
        assert_eq!(total, q(1, 1));
    }

    #[test]
    fn pmf_domain_errors() {
        assert!(truncated_geometric_pmf(3, &q(1, 2), 0).is_err());
        assert!(truncated_geometric_pmf(3, &q(1, 2), 4).is_err());
        assert!(truncated_geometric_pmf(3, &q(0, 1), 1).is_err());
        assert!(truncated_geometric_pmf(3, &q(3, 2), 1).is_err());
    }

    #[test]
    fn mean_of_m_small_case() {
        // enumeration of the 9 placements of 2 balls in 3 bins gives -1/7
        assert_eq!(mean_m_exact(3, &q(1, 2)).unwrap(), q(-1, 7));
        assert_eq!(mean_m_by_summation(3, &q(1, 2)).unwrap(), q(-1, 7));
        assert_eq!(mean_m_rearranged(3, &q(1, 2)).unwrap(), q(-1, 7));
        assert_ne!(mean_m_rearranged_minus(3, &q(1, 2)).unwrap(), q(-1, 7));
        for k in 2..12u64 {
            let expect = q((pairs(k) - (k - 1)) as i64, 1);
            assert_eq!(mean_m_exact(k, &q(1, 1)).unwrap(), expect);
        }
    }

    #[test]
    fn variance_small_case() {
        // Var(T_1) = E[T^2] - (11/7)^2 with E[T^2] = (4 + 4*2 + 9*1)/7 = 21/7
        let var_t = q(3, 1) - q(121, 49);
        assert_eq!(var_m_exact(3, &q(1, 2)).unwrap(), q(2, 1) * var_t);
        assert_eq!(var_m_exact(7, &q(1, 1)).unwrap(), q(0, 1));
    }

    #[test]
    fn float_moments_match_exact() {
        for &(k, n, d) in &[(3u64, 1i64, 2i64), (10, 1, 7), (40, 3, 100), (200, 1, 400), (57, 9, 10)] {
            let p = q(n, d);
            let pf = n as f64 / d as f64;
            let mu = rational_to_f64(&mean_m_exact(k, &p).unwrap());
            let s2 = rational_to_f64(&var_m_exact(k, &p).unwrap());
            assert!((mean_m(k, pf) - mu).abs() <= 1e-9 * mu.abs().max(1.0), "k={k}");
            assert!((var_m(k, pf) - s2).abs() <= 1e-9 * s2.max(1.0), "k={k}");
        }
    }

    #[test]
    fn variance_scaling_limit() {
        let v = var_m(100, 0.01);
        let ratio = v / (1e6 * f2(1.0).unwrap());
        assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn tilt_endpoints() {
        assert_eq!(solve_tilt(3, 1).unwrap(), 1.0);
        for k in [2u64, 5, 17] {
            let top = max_complexity(k);
            if top > 0 {
                assert_eq!(solve_tilt(k, top).unwrap(), 1.0);
            }
        }
        assert!(matches!(solve_tilt(4, 4), Err(Error::NoSolution(_))));
    }

    #[test]
    fn tilt_residual() {
        let p = solve_tilt(1000, 10).unwrap();
        assert!((p * mean_m(1000, p) - 10.0).abs() <= 1e-11);
    }

    #[test]
    fn f1_f2_limits() {
        let c = 1e-3;
        assert!((f1(c).unwrap() / (c * c / 12.0) - 1.0).abs() < 1e-3);
        assert!((f2(50.0).unwrap() * 2500.0 - 1.0).abs() < 0.05);
        assert!((f1(50.0).unwrap() / 25.0 - 1.0).abs() < 0.05);
        assert!(f1(0.0).is_err());
        assert!(f2(-1.0).is_err());
    }

    #[test]
    fn f2_branches_agree() {
        for c in [0.1f64, 0.5, 0.99, 1.0, 1.5] {
            let s = (c / 2.0).sinh();
            let stable = 1.0 / (c * c) - 1.0 / (4.0 * s * s);
            assert!((stable - f2_kappa_form(c)).abs() < 1e-10, "c = {c}");
        }
        let c = 0.0999f64;
        let s = (c / 2.0).sinh();
        let stable = 1.0 / (c * c) - 1.0 / (4.0 * s * s);
        assert!((f2(c).unwrap() - stable).abs() < 1e-11);
    }

    #[test]
    fn solve_c_cases() {
        let c = solve_c(1.0).unwrap();
        assert!((c - 3.83).abs() < 0.01, "c = {c}");
        for beta in [0.5, 1.0, 2.0] {
            let c = solve_c(beta).unwrap();
            assert!((f1(c).unwrap() - beta).abs() < 1e-9);
        }
        let c = solve_c(1e-4).unwrap();
        assert!((c / (12e-4f64).sqrt() - 1.0).abs() < 0.02);
        assert!(solve_c(0.0).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(1_000_000, 100).unwrap().regime, Regime::Small);
        let tag = classify_regime(1000, 1000).unwrap();
        assert_eq!(tag.regime, Regime::Large);
        assert_eq!(tag.c, Some(solve_c(1.0).unwrap()));
        assert_eq!(classify_regime(1000, 5000).unwrap().regime, Regime::VeryLarge);
        assert_eq!(classify_regime(1000, 7000).unwrap().regime, Regime::OutOfRange);
        assert_eq!(classify_regime(10, 0).unwrap().regime, Regime::Tree);
    }

    #[test]
    fn lambdas_ordered() {
        for &(k, p) in &[(10u64, 0.1), (1000, 0.002), (50, 0.9)] {
            let (l, r) = (lambda_left(k, p), lambda_right(k, p));
            assert!(l >= r && r > 0.0);
        }
    }
}
