//! Exact law of the excess `M*` given TREE, with a brute-force cross-check.
//!
//! `cargo run --example mstar_law`

use census_lab::config::Caps;
use census_lab::walk::{brute_force_joint, mstar_distribution, prob_tree_exact, prob_tree_float};
use num_traits::ToPrimitive;

fn main() -> census_lab::Result<()> {
    let caps = Caps::default();
    let p = census_lab::parse_rational("1/2")?;
    let k = 5;

    let dist = mstar_distribution(k, &p, &caps)?;
    let (tree, brute) = brute_force_joint(k, &p, &caps)?;
    println!("k = {k}, p = {p}: Pr[TREE] = {} (brute force {tree})", dist.prob_tree);
    for (m, w) in &dist.mass {
        println!("  Pr[M* = {m:>2}] = {w:<12} {:.6}", w.to_f64().unwrap());
    }
    assert_eq!(dist.mass, brute.mass);

    // exact against floating point at larger k
    for k in [20u64, 60, 120] {
        let p = census_lab::parse_rational(&format!("2/{k}"))?;
        let exact = prob_tree_exact(k, &p, &caps)?.to_f64().unwrap();
        println!("k = {k:>3}: exact {exact:.12}  float {:.12}", prob_tree_float(k, 2.0 / k as f64)?);
    }
    Ok(())
}
