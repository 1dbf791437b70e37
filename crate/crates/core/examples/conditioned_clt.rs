//! Empirical CDF of `M*` standardized by the unconditioned mean and variance.
//!
//! `cargo run --release --example conditioned_clt -- 500 2`

use census_lab::mc::{sample_mstar_clt, Streams};

fn main() -> census_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map(|s| s.parse().expect("k")).unwrap_or(500);
    let c: f64 = args.next().map(|s| s.parse().expect("c")).unwrap_or(2.0);
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];

    let r = sample_mstar_clt(k, c / k as f64, 20_000, &grid, Streams::new(3, 1))?;
    println!("k = {k}, p = {:.5}, mu = {:.1}, sigma = {:.1}", r.p, r.mu, r.sigma);
    println!("accepted {} of {} placements", r.accepted, r.drawn);
    for ((u, e), g) in r.u_grid.iter().zip(&r.empirical).zip(&r.gaussian) {
        println!("u = {u:>4}: empirical {e:.4}  Phi {g:.4}");
    }
    println!("max deviation {:.4}", r.max_abs_dev);
    Ok(())
}
