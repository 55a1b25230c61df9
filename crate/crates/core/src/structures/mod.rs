//! Seeded binomial graphs and uniform hypergraphs, and exact count
//! statistics on them.
//!
//! Subset-indexed statistics are stored in colexicographic rank order: the
//! rank of `c_1 < … < c_s` is `Σ_i C(c_i, i)`.

mod graph;
mod hypergraph;
mod stats;

pub use graph::{gen_graph, Graph};
pub use hypergraph::{for_each_hyperedge, gen_hypergraph, Hypergraph};
pub use stats::{
    clique_cond_expectation, clique_counts, codegrees, common_neighbours, degrees, hyper_degrees,
    overlapping_exceedances, surrogate_deviation, truncation_event, StatKind, StatVector, Truncation,
    MAX_CLIQUE_K, MAX_COMMON_H,
};

use crate::error::{Error, Result};

/// Default cap on the number of set inspections of one enumeration.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Checks `cost <= budget`.
pub(crate) fn within_budget(cost: f64, budget: u64, what: &str) -> Result<()> {
    if cost > budget as f64 {
        Err(Error::Resource(format!(
            "{what} needs about {cost:.3e} set inspections, budget is {budget}"
        )))
    } else {
        Ok(())
    }
}

/// Calls `f` on every `s`-subset of `lo..n` in lexicographic order.
pub(crate) fn for_each_subset<F: FnMut(&[usize])>(lo: usize, n: usize, s: usize, mut f: F) {
    if s == 0 {
        f(&[]);
        return;
    }
    if n < lo + s {
        return;
    }
    let mut c: Vec<usize> = (lo..lo + s).collect();
    loop {
        f(&c);
        // Advance the rightmost position that can still move.
        let mut i = s;
        while i > 0 && c[i - 1] == n - s + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        c[i - 1] += 1;
        for t in i..s {
            c[t] = c[t - 1] + 1;
        }
    }
}

/// Exact binomial coefficients `C(m, r)` for `m <= n`, `r <= s`.
#[derive(Debug, Clone)]
pub(crate) struct BinomTable {
    s: usize,
    table: Vec<u64>,
}

impl BinomTable {
    pub(crate) fn new(n: usize, s: usize) -> Self {
        let mut table = vec![0u64; (n + 1) * (s + 1)];
        for m in 0..=n {
            table[m * (s + 1)] = 1;
            for r in 1..=s.min(m) {
                table[m * (s + 1) + r] = table[(m - 1) * (s + 1) + r - 1].saturating_add(if r < m {
                    table[(m - 1) * (s + 1) + r]
                } else {
                    0
                });
            }
        }
        Self { s, table }
    }

    pub(crate) fn get(&self, m: usize, r: usize) -> u64 {
        self.table[m * (self.s + 1) + r]
    }

    /// Colexicographic rank of a strictly increasing set.
    pub(crate) fn rank(&self, set: &[usize]) -> usize {
        set.iter().enumerate().map(|(i, &c)| self.get(c, i + 1) as usize).sum()
    }

    /// Inverse of [`Self::rank`] for sets of size `s` over `0..n`.
    pub(crate) fn unrank(&self, mut rank: usize, s: usize, n: usize) -> Vec<usize> {
        let mut out = vec![0; s];
        let mut top = n;
        for i in (1..=s).rev() {
            let mut c = top - 1;
            while self.get(c, i) as usize > rank {
                c -= 1;
            }
            out[i - 1] = c;
            rank -= self.get(c, i) as usize;
            top = c;
        }
        out
    }
}
