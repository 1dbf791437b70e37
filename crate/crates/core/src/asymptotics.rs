//! Log-space asymptotic formulas for `C(k, l)` in the three regimes, and
//! tables comparing them with exact counts.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::census::{binomial, max_complexity, pairs, CountTable};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::tilt::{self, classify_regime, f2, solve_c, Regime, RegimeTag};

/// Natural log of a positive big integer.
pub fn ln_big(x: &BigInt) -> f64 {
    if !x.is_positive() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `sigma_Y = sqrt(p mu + p^2 sigma^2)`, clamped at zero where `p mu < 0`.
pub fn sigma_y(k: u64, p: f64) -> f64 {
    let mu = tilt::mean_m(k, p);
    let s2 = tilt::var_m(k, p);
    (p * mu + p * p * s2).max(0.0).sqrt()
}

/// Local-limit value `(2 pi)^(-1/2) / sigma_Y` of `Pr[Bin(M*, p) = l]`.
pub fn a3_local_limit(k: u64, p: f64) -> f64 {
    1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma_y(k, p))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticEstimate {
    pub k: u64,
    pub l: u64,
    pub regime: Regime,
    pub c: Option<f64>,
    /// Natural log of the estimated count.
    pub log_value: f64,
    /// Named log-factors summing to `log_value`.
    pub components: Vec<(String, f64)>,
    pub warning: Option<String>,
}

impl AsymptoticEstimate {
    fn from_parts(k: u64, l: u64, regime: Regime, c: Option<f64>, parts: Vec<(&str, f64)>) -> Self {
        let components: Vec<(String, f64)> =
            parts.into_iter().map(|(n, v)| (n.to_string(), v)).collect();
        AsymptoticEstimate {
            k,
            l,
            regime,
            c,
            log_value: components.iter().map(|(_, v)| v).sum(),
            components,
            warning: None,
        }
    }

    pub fn component_sum(&self) -> f64 {
        self.components.iter().map(|(_, v)| v).sum()
    }
}

fn cayley(k: u64) -> AsymptoticEstimate {
    let kf = k as f64;
    AsymptoticEstimate::from_parts(k, 0, Regime::Tree, None, vec![("cayley", (kf - 2.0) * kf.ln())])
}

fn check_k(k: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    Ok(())
}

/// `C ~ k^(k-2) k^(3l/2) (e / 12l)^(l/2) 3 pi^(-1/2) l^(1/2)`, valid for
/// `l = o(sqrt k)`; flagged when `l > k^0.45`.
pub fn log_asymptotic_small(k: u64, l: u64) -> Result<AsymptoticEstimate> {
    check_k(k)?;
    if l == 0 {
        return Ok(cayley(k));
    }
    let (kf, lf) = (k as f64, l as f64);
    let mut est = AsymptoticEstimate::from_parts(
        k,
        l,
        Regime::Small,
        None,
        vec![
            ("k^(k-2)", (kf - 2.0) * kf.ln()),
            ("k^(3l/2)", 1.5 * lf * kf.ln()),
            ("(e/12l)^(l/2)", 0.5 * lf * (1.0 - (12.0 * lf).ln())),
            ("3/sqrt(pi)", 3f64.ln() - 0.5 * std::f64::consts::PI.ln()),
            ("sqrt(l)", 0.5 * lf.ln()),
        ],
    );
    if lf > kf.powf(0.45) {
        est.warning = Some(format!("l = {l} > k^0.45; small-regime formula is outside its range"));
    }
    Ok(est)
}

/// The two evaluations of the linear-regime formula.
#[derive(Debug, Clone, Serialize)]
pub struct LargeRegimeEstimate {
    /// `A B^k k^((1+beta)k) k^(-3/2)` with the closed-form constants.
    pub closed_form: AsymptoticEstimate,
    /// `A1 A2 A3 p^-(k+l-1) (1-p)^-(C(k,2)-k-l+1)` at `p = c/k`; authoritative.
    pub reassembled: AsymptoticEstimate,
}

pub fn log_asymptotic_large(k: u64, l: u64) -> Result<LargeRegimeEstimate> {
    check_k(k)?;
    if l == 0 {
        return Err(Error::Domain("linear regime needs l >= 1".into()));
    }
    let (kf, lf) = (k as f64, l as f64);
    let beta = lf / kf;
    let c = solve_c(beta)?;
    let f2c = f2(c)?;
    let spread = 1.0 + c * c * f2c / beta;
    let pi = std::f64::consts::PI;

    let ln_a = (c * (c - 2.0 * beta)).ln() - 0.5 * (8.0 * pi * beta * spread).ln() - c * (beta / 2.0 + 1.0);
    let ln_b = 2f64.ln() - beta * c.ln() - 0.5 * (4.0 * (beta + 1.0).powi(2) - c * c).ln();
    let closed_form = AsymptoticEstimate::from_parts(
        k,
        l,
        Regime::Large,
        Some(c),
        vec![
            ("A", ln_a),
            ("B^k", kf * ln_b),
            ("k^((1+beta)k)", (1.0 + beta) * kf * kf.ln()),
            ("k^(-3/2)", -1.5 * kf.ln()),
        ],
    );

    let p = c / kf;
    let ln_q = (-p).ln_1p();
    let edges = kf + lf - 1.0;
    let non_edges = pairs(k) as f64 - edges;
    let reassembled = AsymptoticEstimate::from_parts(
        k,
        l,
        Regime::Large,
        Some(c),
        vec![
            ("A1", (kf - 1.0) * (-(kf * ln_q).exp_m1()).ln()),
            ("A2", (1.0 - (c + 1.0) * (-c).exp()).ln()),
            ("A3", -0.5 * (2.0 * pi * kf * beta * spread).ln()),
            ("p^-(k+l-1)", -edges * p.ln()),
            ("(1-p)^-(C(k,2)-k-l+1)", -non_edges * ln_q),
        ],
    );
    Ok(LargeRegimeEstimate {
        closed_form,
        reassembled,
    })
}

/// `ln binom(C(k,2), k+l-1)`, exactly when the binomial is cheap.
pub fn log_binomial(n: u64, r: u64) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    let r_small = r.min(n - r);
    if r_small <= 4000 {
        ln_big(&binomial(n, r))
    } else {
        ln_gamma(n as f64 + 1.0) - ln_gamma(r as f64 + 1.0) - ln_gamma((n - r) as f64 + 1.0)
    }
}

/// `C(k,l) ~ binom(C(k,2), k+l-1)` for `l` well beyond `k`.
pub fn log_asymptotic_verylarge(k: u64, l: u64) -> Result<AsymptoticEstimate> {
    check_k(k)?;
    if l > max_complexity(k) {
        return Err(Error::Domain(format!("l = {l} exceeds max complexity for k = {k}")));
    }
    Ok(AsymptoticEstimate::from_parts(
        k,
        l,
        Regime::VeryLarge,
        None,
        vec![("binom(C(k,2),k+l-1)", log_binomial(pairs(k), k + l - 1))],
    ))
}

/// Exact fraction of `(k, k+l-1)` graphs that are connected.
pub fn connected_fraction(table: &CountTable, k: u64, l: u64) -> Result<f64> {
    let count = table.count_connected(k, l as i64)?;
    let all = binomial(pairs(k), k + l - 1);
    if all.is_zero() {
        return Ok(0.0);
    }
    Ok((ln_big(&count) - ln_big(&all)).exp())
}

/// Picks the formula for the regime of `(k, l)`.
pub fn log_asymptotic(k: u64, l: u64) -> Result<(RegimeTag, AsymptoticEstimate)> {
    check_k(k)?;
    let tag = classify_regime(k, l)?;
    let est = match tag.regime {
        Regime::Tree => cayley(k),
        Regime::Small => log_asymptotic_small(k, l)?,
        Regime::Large => log_asymptotic_large(k, l)?.reassembled,
        Regime::VeryLarge | Regime::OutOfRange => {
            let mut e = log_asymptotic_verylarge(k, l)?;
            e.regime = tag.regime;
            e
        }
    };
    Ok((tag, est))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub k: u64,
    pub l: u64,
    pub log_exact: f64,
    pub log_asymptotic: f64,
    /// `|log_asymptotic - log_exact| / log_exact`, or the absolute gap when
    /// the exact count is 1.
    pub rel_log_error: f64,
    pub regime: Regime,
}

/// How `l` is chosen from `k` in a comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LRule {
    /// `l = N`
    Const(u64),
    /// `l = floor(k^alpha)`
    Pow(f64),
    /// `l = floor(beta k)`
    Lin(f64),
    /// `l = floor(c k ln k)`
    NLogN(f64),
}

impl LRule {
    pub fn apply(&self, k: u64) -> u64 {
        let kf = k as f64;
        match *self {
            LRule::Const(n) => n,
            LRule::Pow(a) => kf.powf(a).floor() as u64,
            LRule::Lin(b) => (b * kf).floor() as u64,
            LRule::NLogN(c) => (c * kf * kf.ln()).floor() as u64,
        }
    }
}

impl std::str::FromStr for LRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bad l-rule {s:?}; expected const:N, pow:A, lin:B or nlogn:C"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let real = || arg.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0);
        Ok(match kind {
            "const" => LRule::Const(arg.parse().map_err(|_| bad())?),
            "pow" => LRule::Pow(real().ok_or_else(bad)?),
            "lin" => LRule::Lin(real().ok_or_else(bad)?),
            "nlogn" => LRule::NLogN(real().ok_or_else(bad)?),
            _ => return Err(bad()),
        })
    }
}

/// Exact versus regime-appropriate asymptotic log counts.
pub fn compare_table(k_values: &[u64], rule: LRule, caps: &Caps) -> Result<Vec<ComparisonRow>> {
    let queries: Vec<(u64, u64)> = k_values.iter().map(|&k| (k, rule.apply(k))).collect();
    for &(k, l) in &queries {
        check_k(k)?;
        if l > max_complexity(k) {
            return Err(Error::Domain(format!("l = {l} exceeds max complexity for k = {k}")));
        }
        caps.check_census(k, k + l - 1)?;
    }
    let Some(max_k) = queries.iter().map(|q| q.0).max() else {
        return Ok(Vec::new());
    };
    let max_m = queries.iter().map(|&(k, l)| k + l - 1).max().unwrap_or(0);
    let table = CountTable::build(max_k as usize, max_m as usize);
    queries
        .into_iter()
        .map(|(k, l)| {
            let log_exact = ln_big(&table.count_connected(k, l as i64)?);
            let (tag, est) = log_asymptotic(k, l)?;
            let log_asymptotic = if l == 0 { log_exact } else { est.log_value };
            let gap = (log_asymptotic - log_exact).abs();
            Ok(ComparisonRow {
                k,
                l,
                log_exact,
                log_asymptotic,
                rel_log_error: if log_exact > 0.0 { gap / log_exact } else { gap },
                regime: tag.regime,
            })
        })
        .collect()
}
