//! Exact and asymptotic enumeration of labeled connected graphs by complexity.
//!
//! The count `C(k, l)` of connected labeled graphs on `k` vertices with
//! `k - 1 + l` edges is tied to a tilted balls-into-bins process: breadth-first
//! search on `G(k, p)` turns "connected with complexity `l`" into three
//! independent-looking factors (every vertex is reached, the queue never
//! empties early, exactly `l` surplus edges appear). This crate
//!
//! * computes `C(k, l)` exactly ([`census`]),
//! * evaluates the tilted distribution and its moments ([`tilt`]),
//! * computes `Pr[TREE]` and the conditioned excess law exactly and checks the
//!   identity bit for bit ([`walk`]),
//! * estimates the walk and excursion probabilities by simulation ([`mc`]),
//! * evaluates the three asymptotic regimes in log space ([`asymptotics`]),
//! * samples uniform connected graphs of given size and complexity ([`graph`]).
//!
//! The `census-lab` binary exposes all of this through [`cli`].

pub mod asymptotics;
pub mod census;
pub mod cli;
pub mod config;
pub mod error;
pub mod graph;
pub mod mc;
pub mod tilt;
pub mod walk;

pub use census::{binomial, count_connected, max_complexity, CountTable, ExactInteger};
pub use config::Caps;
pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub type ExactRational = BigRational;

/// Parses `"a/b"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}
