//! Exact counts of labeled connected graphs by vertex and edge count.
//!
//! The table is filled with the subtract-disconnected recurrence: every
//! labeled graph on `n` vertices splits uniquely into the component that
//! contains vertex 1 (of size `j`) and an arbitrary graph on the remaining
//! `n - j` vertices, so
//!
//! ```text
//! binom(C(n,2), m) = sum_{j=1..n} binom(n-1, j-1) sum_i conn(j, i) * binom(C(n-j,2), m-i)
//! ```
//!
//! and the `j = n` term is the connected count being solved for.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::config::Caps;
use crate::error::{Error, Result};

pub type ExactInteger = BigInt;

/// `n` choose `r`, zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigInt::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Complexity of the complete graph on `k` vertices.
pub fn max_complexity(k: u64) -> u64 {
    if k < 2 {
        0
    } else {
        k * (k - 1) / 2 + 1 - k
    }
}

pub(crate) fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Memoized connected counts `conn(n, m)` for `n <= max_vertices`, `m <= max_edges`.
///
/// Immutable once built and safe to share between threads.
#[derive(Debug, Clone)]
pub struct CountTable {
    max_vertices: usize,
    max_edges: usize,
    // rows[n][m], truncated at min(C(n,2), max_edges)
    rows: Vec<Vec<BigInt>>,
}

impl CountTable {
    pub fn build(max_vertices: usize, max_edges: usize) -> Self {
        let max_vertices = max_vertices.max(1);
        let totals: Vec<Vec<BigInt>> = (0..=max_vertices)
            .map(|n| binomial_row(pairs(n as u64), max_edges))
            .collect();

        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_vertices + 1);
        rows.push(vec![BigInt::zero()]);
        rows.push(vec![BigInt::one()]);
        for n in 2..=max_vertices {
            let width = totals[n].len();
            let mut disconnected = vec![BigInt::zero(); width];
            for j in 1..n {
                let choose = binomial((n - 1) as u64, (j - 1) as u64);
                let rest = &totals[n - j];
                let first = j - 1;
                for (i, conn) in rows[j].iter().enumerate().skip(first) {
                    if i >= width {
                        break;
                    }
                    if conn.is_zero() {
                        continue;
                    }
                    let weight = conn * &choose;
                    for (g, slot) in rest.iter().zip(&mut disconnected[i..]) {
                        *slot += &weight * g;
                    }
                }
            }
            let row = totals[n]
                .iter()
                .zip(disconnected)
                .map(|(total, minus)| total - minus)
                .collect();
            rows.push(row);
        }

        CountTable {
            max_vertices,
            max_edges,
            rows,
        }
    }

    /// Smallest table that answers `count_connected(k, l)`, subject to `caps`.
    pub fn for_query(k: u64, l: i64, caps: &Caps) -> Result<Self> {
        let edges = (k as i64 - 1 + l.max(0)) as u64;
        caps.check_census(k, edges)?;
        Ok(Self::build(k as usize, edges as usize))
    }

    pub fn max_vertices(&self) -> usize {
        self.max_vertices
    }

    pub fn max_edges(&self) -> usize {
        self.max_edges
    }

    /// Connected graphs with `n` vertices and `m` edges.
    pub fn connected(&self, n: usize, m: usize) -> Result<BigInt> {
        if n > self.max_vertices {
            return Err(Error::CapExceeded {
                what: "vertices",
                requested: n as u64,
                cap: self.max_vertices as u64,
            });
        }
        if m > self.max_edges {
            return Err(Error::CapExceeded {
                what: "edges",
                requested: m as u64,
                cap: self.max_edges as u64,
            });
        }
        Ok(self.rows[n].get(m).cloned().unwrap_or_default())
    }

    /// C(k, l): connected graphs on `k` vertices with `k - 1 + l` edges.
    pub fn count_connected(&self, k: u64, l: i64) -> Result<BigInt> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if l < 0 || l as u64 > max_complexity(k) {
            return Ok(BigInt::zero());
        }
        self.connected(k as usize, (k - 1 + l as u64) as usize)
    }

    /// Sum over all edge counts present in the table for `n` vertices.
    ///
    /// This is the total number of connected graphs on `n` vertices only when
    /// the table holds every edge count up to `C(n,2)`.
    pub fn row_total(&self, n: usize) -> BigInt {
        self.rows.get(n).map(|r| r.iter().sum()).unwrap_or_default()
    }
}

fn binomial_row(n: u64, max_r: usize) -> Vec<BigInt> {
    let len = (n as usize).min(max_r) + 1;
    let mut row = Vec::with_capacity(len);
    let mut cur = BigInt::one();
    row.push(cur.clone());
    for r in 1..len as u64 {
        cur = cur * (n - r + 1) / r;
        row.push(cur.clone());
    }
    row
}

/// C(k, l) with a freshly built table sized to the query.
pub fn count_connected(k: u64, l: i64, caps: &Caps) -> Result<BigInt> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if l < 0 || l as u64 > max_complexity(k) {
        return Ok(BigInt::zero());
    }
    CountTable::for_query(k, l, caps)?.count_connected(k, l)
}
