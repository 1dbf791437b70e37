//! Exact against asymptotic log-counts along an `l`-rule, as CSV.
//!
//! `cargo run --example asymptotic_table -- lin:1 20 40 60`

use census_lab::asymptotics::{compare_table, LRule};
use census_lab::config::Caps;

fn main() -> census_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let rule: LRule = args.next().unwrap_or_else(|| "pow:0.4".into()).parse()?;
    let mut ks: Vec<u64> = args.map(|s| s.parse().expect("k")).collect();
    if ks.is_empty() {
        ks = vec![20, 40, 80];
    }
    println!("k,l,log_exact,log_asymptotic,rel_log_error,regime");
    for r in compare_table(&ks, rule, &Caps::default())? {
        println!("{},{},{:.6},{:.6},{:.3e},{}", r.k, r.l, r.log_exact, r.log_asymptotic, r.rel_log_error, r.regime);
    }
    Ok(())
}
