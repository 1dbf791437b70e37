//! Uniform connected graphs by tilted rejection, tallied over a small census.
//!
//! `cargo run --release --example sample_graph`

use std::collections::BTreeMap;

use census_lab::config::Caps;
use census_lab::graph::{sample_graphs, GraphSampler};
use census_lab::mc::Streams;

fn main() -> census_lab::Result<()> {
    let (k, l) = (4, 1);
    let sampler = GraphSampler::new(k, l, &Caps::default())?;
    println!("k = {k}, l = {l}, tilt {:.6}", sampler.tilt());

    let graphs = sample_graphs(&sampler, 15_000, Streams::new(11, 2))?;
    let mut tally = BTreeMap::new();
    for g in &graphs {
        *tally.entry(g.to_edge_list().replace('\n', " ")).or_insert(0u32) += 1;
    }
    for (edges, n) in &tally {
        println!("{n:>6}  {edges}");
    }
    println!("{} distinct graphs", tally.len());

    let big = GraphSampler::new(30, 5, &Caps::default())?;
    let g = big.sample(&mut Streams::new(1, 1).rng(0))?;
    println!("\none graph with k = 30, l = 5 after {} trials:\n{}", g.trials, g.graph.to_json());
    Ok(())
}
