use super::{for_each_subset, within_budget, DEFAULT_BUDGET};
use crate::error::{domain, Result};
use crate::numeric::choose_f64;
use crate::rng::{entity_rng, BernoulliSelector};

/// `k`-uniform hypergraph on `0..n`; each edge is stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    flat: Vec<u32>,
}

impl Hypergraph {
    /// Validates that every edge has `k` distinct vertices below `n`.
    pub fn new(n: usize, k: usize, edges: &[Vec<usize>]) -> Result<Self> {
        if k == 0 || k > n {
            return Err(domain!("need 1 <= k <= n (n={n}, k={k})"));
        }
        let mut flat = Vec::with_capacity(edges.len() * k);
        for e in edges {
            let mut e = e.clone();
            e.sort_unstable();
            e.dedup();
            if e.len() != k || e.last().is_some_and(|&v| v >= n) {
                return Err(crate::Error::Structural(format!("edge {e:?} is not a {k}-subset of [{n}]")));
            }
            flat.extend(e.iter().map(|&v| v as u32));
        }
        Ok(Self { n, k, flat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> {
        self.flat.chunks_exact(self.k)
    }
}

fn check_shape(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(domain!("need 2 <= k <= n (n={n}, k={k})"));
    }
    Ok(())
}

/// Draws `H(n, k, p)` and calls `f` on each present edge without storing
/// the hypergraph.
///
/// Edges are grouped by their smallest vertex `a`; group `a` walks the
/// `(k-1)`-subsets of `a+1..n` in lexicographic order using stream `a` of
/// `seed`. For `k = 2` this is exactly the pair order of
/// [`super::gen_graph`].
pub fn for_each_hyperedge<F: FnMut(&[usize])>(n: usize, k: usize, p: f64, seed: u64, mut f: F) -> Result<()> {
    check_shape(n, k)?;
    let mut edge = vec![0usize; k];
    for a in 0..n {
        let mut sel = BernoulliSelector::new(entity_rng(seed, a as u64), p);
        edge[0] = a;
        for_each_subset(a + 1, n, k - 1, |rest| {
            if sel.hit() {
                edge[1..].copy_from_slice(rest);
                f(&edge);
            }
        });
    }
    Ok(())
}

/// Materialized `H(n, k, p)`; fails when `C(n, k)` exceeds `budget`
/// (default [`DEFAULT_BUDGET`]).
pub fn gen_hypergraph(n: usize, k: usize, p: f64, seed: u64, budget: Option<u64>) -> Result<Hypergraph> {
    check_shape(n, k)?;
    within_budget(choose_f64(n as u64, k as u64), budget.unwrap_or(DEFAULT_BUDGET), "hyperedge enumeration")?;
    let mut flat = Vec::new();
    for_each_hyperedge(n, k, p, seed, |e| flat.extend(e.iter().map(|&v| v as u32)))?;
    Ok(Hypergraph { n, k, flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{gen_graph, Graph};

    #[test]
    fn extremes() {
        assert_eq!(gen_hypergraph(4, 3, 1.0, 0, None).unwrap().edge_count(), 4);
        assert_eq!(gen_hypergraph(9, 3, 0.0, 0, None).unwrap().edge_count(), 0);
        assert!(gen_hypergraph(3, 4, 0.5, 0, None).is_err());
        assert!(gen_hypergraph(1000, 4, 0.5, 0, None).is_err());
        assert!(gen_hypergraph(20, 3, 0.5, 0, Some(100)).is_err());
    }

    #[test]
    fn deterministic_sorted_edges() {
        let a = gen_hypergraph(30, 4, 0.2, 11, None).unwrap();
        assert_eq!(a, gen_hypergraph(30, 4, 0.2, 11, None).unwrap());
        for e in a.edges() {
            assert!(e.windows(2).all(|w| w[0] < w[1]) && (e[3] as usize) < 30);
        }
    }

    #[test]
    fn pairs_match_graph_generator() {
        for &p in &[0.03, 0.4] {
            let h = gen_hypergraph(90, 2, p, 21, None).unwrap();
            let g = gen_graph(90, p, 21);
            let edges: Vec<(usize, usize)> = h.edges().map(|e| (e[0] as usize, e[1] as usize)).collect();
            assert_eq!(Graph::from_edges(90, &edges), g);
        }
    }

    #[test]
    fn edge_frequency() {
        let (n, k, p) = (12, 3, 0.35);
        let trials = 4000;
        let total: usize = (0..trials).map(|t| gen_hypergraph(n, k, p, t, None).unwrap().edge_count()).sum();
        let mean = total as f64 / trials as f64;
        let want = 220.0 * p;
        let sd = (220.0 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - want).abs() < 5.0 * sd, "{mean}");
    }

    #[test]
    fn validation() {
        assert!(Hypergraph::new(4, 3, &[vec![0, 1, 2], vec![3, 2, 1]]).is_ok());
        assert!(Hypergraph::new(4, 3, &[vec![0, 1, 1]]).is_err());
        assert!(Hypergraph::new(4, 3, &[vec![0, 1, 4]]).is_err());
    }
}
