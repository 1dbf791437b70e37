//! Solves `p * mu(p) = l` and shows the regime-level scalars.
//!
//! `cargo run --example tilt_solver -- 1000 1000`

use census_lab::tilt::{classify_regime, f1, mean_m, TiltedModel};

fn main() -> census_lab::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().expect("integer argument"));
    let k = args.next().unwrap_or(1000);
    let l = args.next().unwrap_or(k);

    let model = TiltedModel::at_complexity(k, l)?;
    let tag = classify_regime(k, l)?;
    println!("k = {k}, l = {l}, regime {}", tag.regime);
    println!("p        {:.12e}", model.p);
    println!("residual {:.3e}", model.p * mean_m(k, model.p) - l as f64);
    println!("c = pk   {:.6}", model.c);
    println!("lambda   {:.6}  lambda_r {:.6}", model.lambda, model.lambda_r);
    println!("mu       {:.6}  sigma^2 {:.6}", model.mu, model.sigma2);
    if let Some(c) = tag.c {
        println!("f1(c) = {:.9} against beta = {:.9}", f1(c)?, l as f64 / k as f64);
    }
    Ok(())
}
