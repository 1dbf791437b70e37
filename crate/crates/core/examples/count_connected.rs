//! Exact counts of connected labeled graphs by complexity.
//!
//! `cargo run --example count_connected -- 8`

use census_lab::{max_complexity, CountTable};

fn main() {
    let k: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let top = max_complexity(k);
    let table = CountTable::build(k as usize, (k - 1 + top) as usize);
    println!("connected graphs on {k} labeled vertices");
    println!("   l  C(k, l)");
    for l in 0..=top as i64 {
        println!("{l:>4}  {}", table.count_connected(k, l).unwrap());
    }
    println!("total {}", table.row_total(k as usize));
}
