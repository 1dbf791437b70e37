//! Checks `A1 A2 A3 = C(k,l) p^(k+l-1) (1-p)^(C(k,2)-k-l+1)` in exact rationals.
//!
//! `cargo run --example verify_identity -- 6 2/5`

use census_lab::config::Caps;
use census_lab::walk::identity_sweep;

fn main() -> census_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let k_max: u64 = args.next().map(|s| s.parse().expect("k_max")).unwrap_or(5);
    let p = census_lab::parse_rational(&args.next().unwrap_or_else(|| "1/3".into()))?;

    let rows = identity_sweep(k_max, std::slice::from_ref(&p), &Caps::default())?;
    for r in &rows {
        println!(
            "k={} l={:<3} a1={} a2={} a3={}  {}",
            r.k,
            r.l,
            r.a1,
            r.a2,
            r.a3,
            if r.equal { "ok" } else { "MISMATCH" }
        );
    }
    let bad = rows.iter().filter(|r| !r.equal).count();
    println!("{} rows, {bad} mismatches", rows.len());
    Ok(())
}
