//! Seeded, reproducible Monte Carlo estimators for the walk and excursion
//! probabilities and the conditioned central limit theorem.
//!
//! Work is split into `workers` contiguous chunks. Worker `w` draws from a
//! ChaCha stream keyed by `(seed, w)` and results are merged in worker order,
//! so a fixed `(seed, n, workers)` reproduces bit-identical output regardless
//! of how many threads actually run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::tilt;
use crate::walk::Placement;

/// Stream index reserved for pilot runs.
const PILOT_STREAM: u64 = u64::MAX;
const PILOT_DRAWS: u64 = 10_000;
const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Streams {
    pub seed: u64,
    pub workers: usize,
}

impl Streams {
    pub fn new(seed: u64, workers: usize) -> Self {
        Streams {
            seed,
            workers: workers.max(1),
        }
    }

    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Sizes of the contiguous per-worker chunks of `n` items.
    pub fn chunks(&self, n: u64) -> Vec<u64> {
        let w = self.workers as u64;
        (0..w).map(|i| n / w + u64::from(i < n % w)).collect()
    }

    /// Runs `job(rng, chunk)` for every worker and returns results in worker order.
    pub fn run<T, F>(&self, n: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
    {
        self.chunks(n)
            .into_par_iter()
            .enumerate()
            .map(|(w, size)| job(&mut self.rng(w as u64), size))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Draws made.
    pub n: u64,
    /// Draws that entered the estimate; equals `n` for unconditioned estimators.
    pub accepted: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McEstimate {
    fn indicator(hits: u64, accepted: u64, n: u64, streams: Streams) -> Self {
        let mean = if accepted == 0 {
            0.0
        } else {
            hits as f64 / accepted as f64
        };
        let stderr = if accepted == 0 {
            f64::INFINITY
        } else {
            (mean * (1.0 - mean) / accepted as f64).sqrt()
        };
        McEstimate {
            mean,
            stderr,
            n,
            accepted,
            seed: streams.seed,
            workers: streams.workers,
        }
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.stderr
    }
}

/// Inverse-CDF sampler for the truncated geometric ball distribution.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedGeometric {
    k: usize,
    ln_q: f64,
    /// `1 - (1-p)^k`
    norm: f64,
}

impl TruncatedGeometric {
    pub fn new(k: usize, p: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!("tilt p = {p} is outside (0, 1]")));
        }
        let ln_q = (-p).ln_1p();
        Ok(TruncatedGeometric {
            k,
            ln_q,
            norm: -(k as f64 * ln_q).exp_m1(),
        })
    }

    /// A bin in `1..=k`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.ln_q == f64::NEG_INFINITY {
            return 1;
        }
        let u: f64 = rng.random();
        let t = 1.0 + ((-u * self.norm).ln_1p() / self.ln_q).floor();
        (t as usize).clamp(1, self.k)
    }
}

pub fn sample_placement<R: Rng + ?Sized>(k: usize, p: f64, rng: &mut R) -> Result<Placement> {
    let g = TruncatedGeometric::new(k, p)?;
    let bins = (1..k).map(|_| g.sample(rng)).collect();
    Placement::from_bins(k, bins)
}

/// Draws one placement into `counts` and returns `(tree, m_stat)`.
fn draw_walk<R: Rng + ?Sized>(g: &TruncatedGeometric, rng: &mut R, counts: &mut [u32]) -> (bool, i64) {
    let k = counts.len();
    counts.fill(0);
    for _ in 1..k {
        counts[g.sample(rng) - 1] += 1;
    }
    let mut y = 1i64;
    let mut excess = 0i64;
    let mut tree = true;
    for &z in &counts[..k - 1] {
        y += z as i64 - 1;
        if y <= 0 {
            tree = false;
        }
        excess += y - 1;
    }
    (tree, excess)
}

/// Indicator-mean estimate of `Pr[TREE]`.
pub fn estimate_prob_tree(k: usize, p: f64, n: u64, streams: Streams) -> Result<McEstimate> {
    check_k(k)?;
    let g = TruncatedGeometric::new(k, p)?;
    let hits: u64 = streams
        .run(n, |rng, size| {
            let mut counts = vec![0u32; k];
            (0..size).filter(|_| draw_walk(&g, rng, &mut counts).0).count() as u64
        })
        .into_iter()
        .sum();
    Ok(McEstimate::indicator(hits, n, n, streams))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::Domain("k must be at least 2".into()))
    } else {
        Ok(())
    }
}

/// `Po(lambda)` step counts.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSteps(Poisson<f64>);

impl PoissonSteps {
    pub fn new(lambda: f64) -> Result<Self> {
        Poisson::new(lambda)
            .map(PoissonSteps)
            .map_err(|e| Error::Domain(format!("Poisson mean {lambda}: {e}")))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        self.0.sample(rng) as i64
    }
}

/// Fraction of left walks (`Y_0 = 1`, `Y_i = Y_{i-1} + Po(lambda) - 1`) that stay
/// positive for `1 <= i <= horizon`.
pub fn estimate_esc_left(lambda: f64, horizon: u64, n: u64, streams: Streams) -> Result<McEstimate> {
    escape(lambda, horizon, n, streams, 1, 1)
}

/// Fraction of right walks (`Y_0 = 0`, `Y_i = Y_{i-1} + 1 - Po(lambda_r)`) that
/// stay positive for `1 <= i <= horizon`.
pub fn estimate_esc_right(lambda_r: f64, horizon: u64, n: u64, streams: Streams) -> Result<McEstimate> {
    escape(lambda_r, horizon, n, streams, 0, -1)
}

fn escape(lambda: f64, horizon: u64, n: u64, streams: Streams, start: i64, sign: i64) -> Result<McEstimate> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let steps = PoissonSteps::new(lambda)?;
    let hits: u64 = streams
        .run(n, |rng, size| {
            let mut hits = 0;
            for _ in 0..size {
                let mut y = start;
                let mut alive = true;
                for _ in 0..horizon {
                    y += sign * (steps.sample(rng) - 1);
                    if y <= 0 {
                        alive = false;
                        break;
                    }
                }
                hits += u64::from(alive);
            }
            hits
        })
        .into_iter()
        .sum();
    Ok(McEstimate::indicator(hits, n, n, streams))
}

/// Standard normal CDF.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * erfc(-u / std::f64::consts::SQRT_2)
}

fn pilot(g: &TruncatedGeometric, k: usize, streams: Streams) -> Result<f64> {
    let mut rng = streams.rng(PILOT_STREAM);
    let mut counts = vec![0u32; k];
    let accepted = (0..PILOT_DRAWS)
        .filter(|_| draw_walk(g, &mut rng, &mut counts).0)
        .count() as u64;
    let rate = accepted as f64 / PILOT_DRAWS as f64;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::AcceptanceTooLow {
            accepted,
            drawn: PILOT_DRAWS,
            rate,
            min_rate: MIN_ACCEPTANCE,
        });
    }
    Ok(rate)
}

/// Accepted draws of `M*` obtained by rejection on TREE.
#[derive(Debug, Clone)]
pub struct MStarSample {
    pub values: Vec<i64>,
    pub drawn: u64,
}

/// Rejection-samples `target` values of `M*` after a pilot acceptance check.
pub fn sample_mstar(k: usize, p: f64, target: u64, streams: Streams) -> Result<MStarSample> {
    check_k(k)?;
    let g = TruncatedGeometric::new(k, p)?;
    pilot(&g, k, streams)?;
    let parts = streams.run(target, |rng, want| {
        let mut counts = vec![0u32; k];
        let mut values = Vec::with_capacity(want as usize);
        let mut drawn = 0u64;
        while (values.len() as u64) < want {
            drawn += 1;
            let (tree, m) = draw_walk(&g, rng, &mut counts);
            if tree {
                values.push(m);
            }
        }
        (values, drawn)
    });
    let mut values = Vec::with_capacity(target as usize);
    let mut drawn = 0;
    for (v, d) in parts {
        values.extend(v);
        drawn += d;
    }
    Ok(MStarSample { values, drawn })
}

#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub k: usize,
    pub p: f64,
    /// Mean and standard deviation of the unconditioned `M`.
    pub mu: f64,
    pub sigma: f64,
    pub u_grid: Vec<f64>,
    /// `P[M* <= mu + u sigma]`
    pub empirical: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub max_abs_dev: f64,
    pub accepted: u64,
    pub drawn: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Empirical CDF of the standardized `M*` against `Phi` on `u_grid`.
pub fn sample_mstar_clt(
    k: usize,
    p: f64,
    target: u64,
    u_grid: &[f64],
    streams: Streams,
) -> Result<CltReport> {
    let sample = sample_mstar(k, p, target, streams)?;
    let mu = tilt::mean_m(k as u64, p);
    let sigma = tilt::var_m(k as u64, p).sqrt();
    Ok(clt_report(k, p, mu, sigma, &sample, u_grid, streams))
}

pub(crate) fn clt_report(
    k: usize,
    p: f64,
    mu: f64,
    sigma: f64,
    sample: &MStarSample,
    u_grid: &[f64],
    streams: Streams,
) -> CltReport {
    let mut sorted = sample.values.clone();
    sorted.sort_unstable();
    let n = sorted.len().max(1) as f64;
    let mut u_grid = u_grid.to_vec();
    u_grid.sort_by(f64::total_cmp);
    let empirical: Vec<f64> = u_grid
        .iter()
        .map(|&u| {
            let cut = mu + u * sigma;
            sorted.partition_point(|&m| (m as f64) <= cut) as f64 / n
        })
        .collect();
    let gaussian: Vec<f64> = u_grid.iter().map(|&u| normal_cdf(u)).collect();
    let max_abs_dev = empirical
        .iter()
        .zip(&gaussian)
        .map(|(e, g)| (e - g).abs())
        .fold(0.0, f64::max);
    CltReport {
        k,
        p,
        mu,
        sigma,
        u_grid,
        empirical,
        gaussian,
        max_abs_dev,
        accepted: sample.values.len() as u64,
        drawn: sample.drawn,
        seed: streams.seed,
        workers: streams.workers,
    }
}

/// Conditioned estimate of `Pr[Bin(M*, p) = l]` from `n` placement draws.
pub fn estimate_a3(k: usize, p: f64, l: u64, n: u64, streams: Streams) -> Result<McEstimate> {
    check_k(k)?;
    let g = TruncatedGeometric::new(k, p)?;
    pilot(&g, k, streams)?;
    let parts = streams.run(n, |rng, size| {
        let mut counts = vec![0u32; k];
        let (mut accepted, mut hits) = (0u64, 0u64);
        for _ in 0..size {
            let (tree, m) = draw_walk(&g, rng, &mut counts);
            if !tree {
                continue;
            }
            accepted += 1;
            let heads = if p >= 1.0 {
                m as u64
            } else {
                Binomial::new(m as u64, p)
                    .expect("p checked in (0, 1]")
                    .sample(rng)
            };
            hits += u64::from(heads == l);
        }
        (accepted, hits)
    });
    let (accepted, hits) = parts
        .into_iter()
        .fold((0, 0), |(a, h), (x, y)| (a + x, h + y));
    Ok(McEstimate::indicator(hits, accepted, n, streams))
}
