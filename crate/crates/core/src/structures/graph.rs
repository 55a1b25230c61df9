use crate::rng::{entity_rng, BernoulliSelector};
use rayon::prelude::*;

/// Simple undirected graph on `0..n` stored as adjacency bitsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Graph with the given edges; self-loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i != j {
                g.add_edge(i, j);
            }
        }
        g
    }

    fn add_edge(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
        self.rows[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Words per adjacency row.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.row(i)[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        bits(self.row(i))
    }
}

/// Indices of the set bits of a bitset.
pub(crate) fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

/// `G(n, p)`: row `i` decides the pairs `(i, j)`, `j > i`, in increasing
/// `j` from stream `i` of `seed`. Dense `p` spends one 64-bit draw per pair;
/// `p < 0.1` jumps between edges with geometric gaps.
pub fn gen_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut g = Graph::empty(n);
    let words = g.words;
    g.rows
        .par_chunks_mut(words.max(1))
        .enumerate()
        .take(n)
        .for_each(|(i, row)| {
            let mut sel = BernoulliSelector::new(entity_rng(seed, i as u64), p);
            for j in (i + 1)..n {
                if sel.hit() {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
        });
    // Mirror the upper triangle.
    for i in 0..n {
        for j in bits(&g.rows[i * words..(i + 1) * words]).filter(|&j| j > i).collect::<Vec<_>>() {
            g.rows[j * words + i / 64] |= 1 << (i % 64);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_and_determinism() {
        assert_eq!(gen_graph(40, 1.0, 1), Graph::complete(40));
        assert_eq!(gen_graph(40, 0.0, 1), Graph::empty(40));
        assert_eq!(gen_graph(130, 0.3, 5), gen_graph(130, 0.3, 5));
        assert_ne!(gen_graph(130, 0.3, 5), gen_graph(130, 0.3, 6));
        assert_eq!(gen_graph(1, 0.5, 0).edge_count(), 0);
    }

    #[test]
    fn symmetric_without_loops() {
        for &p in &[0.05, 0.5] {
            let g = gen_graph(150, p, 3);
            for i in 0..150 {
                assert!(!g.has_edge(i, i));
                for j in 0..150 {
                    assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                }
            }
            assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        }
    }

    #[test]
    fn pair_frequencies() {
        let (n, p, trials) = (30, 0.3, 10_000);
        let mut counts = vec![0u32; n * n];
        for t in 0..trials {
            let g = gen_graph(n, p, 1000 + t);
            for i in 0..n {
                for j in g.neighbors(i) {
                    counts[i * n + j] += 1;
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let f = counts[i * n + j] as f64 / trials as f64;
                assert!((f - p).abs() <= 0.02, "({i},{j}) {f}");
            }
        }
    }

    #[test]
    fn sparse_regime_density() {
        let g = gen_graph(2000, 0.01, 9);
        let m = g.edge_count() as f64;
        let mean = 0.01 * 2000.0 * 1999.0 / 2.0;
        assert!((m - mean).abs() < 5.0 * mean.sqrt(), "{m}");
    }
}
