//! Uniform random connected labeled graphs with given size and complexity.
//!
//! A draw runs breadth-first search from vertex 0 on a virtual `G(k, p)`:
//! non-root vertex `j` enters the queue as a child of the vertex popped at
//! stage `T_j`, where `T_j` is its first head. Under TREE the search reaches
//! everything and the only pairs whose adjacency is still undecided are
//! `(popped, waiting)` pairs, one coin each. Every connected graph with
//! `k - 1 + l` edges arises with the same probability
//! `p^(k+l-1) (1-p)^(C(k,2)-k-l+1)`, so accepting exactly `l` extra edges
//! gives a uniform sample.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::census::max_complexity;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::mc::{Streams, TruncatedGeometric};
use crate::tilt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LabeledGraph {
    pub k: usize,
    /// Unordered pairs stored as `(u, v)` with `u < v`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl LabeledGraph {
    pub fn new(k: usize) -> Self {
        LabeledGraph {
            k,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v && u < self.k && v < self.k, "bad edge ({u}, {v})");
        self.edges.insert((u.min(v), u.max(v)))
    }

    /// Edges minus vertices plus one.
    pub fn complexity(&self) -> i64 {
        self.edges.len() as i64 - self.k as i64 + 1
    }

    pub fn is_connected(&self) -> bool {
        if self.k == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.k];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.k];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == self.k
    }

    /// One `"u v"` line per edge.
    pub fn to_edge_list(&self) -> String {
        self.edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect()
    }

    /// `{"k": .., "l": .., "edges": [[u, v], ..]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.k,
            "l": self.complexity(),
            "edges": self.edges.iter().map(|&(u, v)| [u, v]).collect::<Vec<_>>(),
        })
    }
}

/// One accepted graph with the bookkeeping of the draw that produced it.
#[derive(Debug, Clone)]
pub struct GraphDraw {
    pub graph: LabeledGraph,
    pub trials: u64,
    /// Undecided pairs examined in the accepted trial.
    pub eligible_pairs: u64,
    /// `C(k,2) - sum T_j` of the accepted placement.
    pub m_stat: i64,
}

#[derive(Debug, Clone)]
pub struct GraphSampler {
    k: usize,
    l: u64,
    p: f64,
    budget: u64,
    balls: TruncatedGeometric,
}

impl GraphSampler {
    /// Sampler at the tilt solving `p * mu(p) = l`; for trees the tilt solves
    /// `p * mu(p) = 1/2` instead.
    pub fn new(k: usize, l: u64, caps: &Caps) -> Result<Self> {
        check_args(k, l)?;
        let top = max_complexity(k as u64);
        let p = if l == top {
            1.0
        } else if l == 0 {
            tilt::solve_tilt_with(k as u64, 0.5, 1e-9)?
        } else {
            tilt::solve_tilt(k as u64, l)?
        };
        Self::with_tilt(k, l, p, caps)
    }

    /// Any tilt in `(0, 1]` gives uniform output; only the acceptance rate changes.
    pub fn with_tilt(k: usize, l: u64, p: f64, caps: &Caps) -> Result<Self> {
        check_args(k, l)?;
        Ok(GraphSampler {
            k,
            l,
            p,
            budget: caps.retry_budget,
            balls: TruncatedGeometric::new(k, p)?,
        })
    }

    pub fn tilt(&self) -> f64 {
        self.p
    }

    /// Rough expected number of trials per accepted graph, from the
    /// floating-point `Pr[TREE]` and the local-limit value of `A3`.
    pub fn expected_trials(&self) -> Option<f64> {
        let k = self.k as u64;
        if self.p >= 1.0 || self.l == 0 {
            return None;
        }
        let a2 = crate::walk::prob_tree_float(k, self.p).ok()?;
        let a3 = crate::asymptotics::a3_local_limit(k, self.p);
        Some(1.0 / (a2 * a3))
    }

    pub fn budget_warning(&self) -> Option<String> {
        let t = self.expected_trials()?;
        (t > self.budget as f64).then(|| {
            format!("expected {t:.3e} trials per graph exceeds the retry budget of {}", self.budget)
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GraphDraw> {
        let k = self.k;
        let mut stage_of = vec![0usize; k];
        let mut by_stage: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        let mut order: Vec<usize> = Vec::with_capacity(k);
        for trial in 1..=self.budget {
            for b in by_stage.iter_mut() {
                b.clear();
            }
            for (j, st) in stage_of.iter_mut().enumerate().skip(1) {
                *st = self.balls.sample(rng);
                by_stage[*st].push(j);
            }
            // TREE: the queue stays nonempty through stage k - 1
            let mut queue = 1i64;
            let tree = (1..k).all(|i| {
                queue += by_stage[i].len() as i64 - 1;
                queue > 0
            });
            if !tree {
                continue;
            }

            let mut graph = LabeledGraph::new(k);
            order.clear();
            order.push(0);
            let mut extra = 0u64;
            let mut eligible = 0u64;
            let mut rejected = false;
            for stage in 1..=k {
                let popped = order[stage - 1];
                for &waiting in &order[stage..] {
                    eligible += 1;
                    if rng.random_bool(self.p) {
                        extra += 1;
                        if extra > self.l {
                            rejected = true;
                            break;
                        }
                        graph.add_edge(popped, waiting);
                    }
                }
                if rejected {
                    break;
                }
                for &child in &by_stage[stage] {
                    graph.add_edge(popped, child);
                    order.push(child);
                }
            }
            if rejected || extra != self.l {
                continue;
            }
            let m_stat = crate::census::pairs(k as u64) as i64
                - stage_of[1..].iter().map(|&t| t as i64).sum::<i64>();
            return Ok(GraphDraw {
                graph,
                trials: trial,
                eligible_pairs: eligible,
                m_stat,
            });
        }
        Err(Error::BudgetExhausted {
            budget: self.budget,
        })
    }
}

fn check_args(k: usize, l: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain("k must be at least 2".into()));
    }
    let top = max_complexity(k as u64);
    if l > top {
        return Err(Error::Domain(format!(
            "l = {l} exceeds max complexity {top} for k = {k}"
        )));
    }
    Ok(())
}

/// Uniform connected graph with `k` vertices and complexity `l`.
pub fn sample_connected_graph<R: Rng + ?Sized>(k: usize, l: u64, rng: &mut R) -> Result<LabeledGraph> {
    Ok(GraphSampler::new(k, l, &Caps::default())?.sample(rng)?.graph)
}

/// `count` graphs drawn across per-worker streams, in worker order.
pub fn sample_graphs(sampler: &GraphSampler, count: u64, streams: Streams) -> Result<Vec<LabeledGraph>> {
    let parts = streams.run(count, |rng, size| {
        (0..size)
            .map(|_| sampler.sample(rng).map(|d| d.graph))
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(count as usize);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        let mut rng = Streams::new(9, 1).rng(0);
        let g = sample_connected_graph(2, 0, &mut rng).unwrap();
        assert_eq!(g.to_edge_list(), "0 1\n");
    }

    #[test]
    fn complete_graph_endpoint() {
        let mut rng = Streams::new(1, 1).rng(0);
        let g = sample_connected_graph(6, max_complexity(6), &mut rng).unwrap();
        assert_eq!(g.edges.len(), 15);
    }

    #[test]
    fn outputs_are_connected_with_right_size() {
        let caps = Caps::default();
        let mut rng = Streams::new(4, 1).rng(0);
        for &(k, l) in &[(5usize, 0u64), (7, 2), (10, 5), (12, 20), (30, 3)] {
            let s = GraphSampler::new(k, l, &caps).unwrap();
            for _ in 0..20 {
                let d = s.sample(&mut rng).unwrap();
                assert!(d.graph.is_connected());
                assert_eq!(d.graph.edges.len(), k - 1 + l as usize);
                assert_eq!(d.eligible_pairs as i64, d.m_stat);
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        let caps = Caps::default();
        assert!(GraphSampler::new(1, 0, &caps).is_err());
        assert!(GraphSampler::new(4, 4, &caps).is_err());
    }

    #[test]
    fn budget_exhaustion() {
        let caps = Caps {
            retry_budget: 3,
            ..Caps::default()
        };
        let s = GraphSampler::with_tilt(40, 0, 0.9, &caps).unwrap();
        let mut rng = Streams::new(2, 1).rng(0);
        assert!(matches!(s.sample(&mut rng), Err(Error::BudgetExhausted { budget: 3 })));
    }

    #[test]
    fn json_shape() {
        let mut g = LabeledGraph::new(3);
        g.add_edge(1, 0);
        g.add_edge(2, 1);
        let v = g.to_json();
        assert_eq!(v["k"], 3);
        assert_eq!(v["l"], 0);
        assert_eq!(v["edges"], serde_json::json!([[0, 1], [1, 2]]));
    }
}
