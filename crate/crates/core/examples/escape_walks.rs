//! Finite-horizon escape of Poisson walks against the branching fixed points.
//!
//! `cargo run --release --example escape_walks -- 0.05`

use census_lab::mc::{estimate_esc_left, estimate_esc_right, Streams};
use census_lab::walk::{esc_right_probability, survival_probability};

fn main() -> census_lab::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let horizon = (10.0 / (eps * eps)).round() as u64;
    let streams = Streams::new(7, 4);

    let left = estimate_esc_left(1.0 + eps, horizon, 50_000, streams)?;
    let y = survival_probability(1.0 + eps)?;
    println!("left  Po({:.3}), L = {horizon}: {:.5} +- {:.5}  survival {y:.5}  2eps {:.5}",
        1.0 + eps, left.mean, left.stderr, 2.0 * eps);

    let right = estimate_esc_right(1.0 - eps, horizon, 50_000, streams)?;
    println!("right Po({:.3}), L = {horizon}: {:.5} +- {:.5}  exact {:.5}",
        1.0 - eps, right.mean, right.stderr, esc_right_probability(eps)?);
    Ok(())
}
