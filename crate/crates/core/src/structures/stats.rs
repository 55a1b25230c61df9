use super::graph::bits;
use super::{for_each_subset, within_budget, BinomTable, Graph, Hypergraph, DEFAULT_BUDGET};
use crate::error::{domain, Result};
use crate::numeric::{choose_f64, ln_choose};
use serde::{Deserialize, Serialize};

/// Largest clique size accepted by [`clique_counts`].
pub const MAX_CLIQUE_K: usize = 6;

/// Largest set size accepted by [`common_neighbours`].
pub const MAX_COMMON_H: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StatKind {
    Degree,
    HyperDegree,
    Codegree { s: usize },
    Clique { k: usize },
    CommonNeighbours { h: usize },
    CondExpectation { k: usize },
}

impl StatKind {
    /// Size of the index sets labelling the values.
    pub fn arity(&self) -> usize {
        match *self {
            StatKind::Codegree { s } => s,
            StatKind::CommonNeighbours { h } => h,
            _ => 1,
        }
    }
}

/// Statistic indexed by vertices or by vertex sets (colex rank order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatVector {
    pub kind: StatKind,
    pub n: usize,
    pub values: Vec<f64>,
}

impl StatVector {
    /// Vertex set labelling `values[index]`.
    pub fn label(&self, index: usize) -> Vec<usize> {
        let s = self.kind.arity();
        if s == 1 {
            vec![index]
        } else {
            BinomTable::new(self.n, s).unrank(index, s, self.n)
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn counts_to_stat(kind: StatKind, n: usize, counts: Vec<u64>) -> StatVector {
    StatVector {
        kind,
        n,
        values: counts.into_iter().map(|c| c as f64).collect(),
    }
}

pub fn degrees(g: &Graph) -> StatVector {
    counts_to_stat(StatKind::Degree, g.n(), g.degrees().into_iter().map(|d| d as u64).collect())
}

pub fn hyper_degrees(h: &Hypergraph) -> StatVector {
    let mut counts = vec![0u64; h.n()];
    for e in h.edges() {
        for &v in e {
            counts[v as usize] += 1;
        }
    }
    counts_to_stat(StatKind::HyperDegree, h.n(), counts)
}

/// `X_S`, the number of edges containing `S`, for every `s`-set `S`.
pub fn codegrees(h: &Hypergraph, s: usize, budget: Option<u64>) -> Result<StatVector> {
    if s == 0 || s >= h.k() {
        return Err(domain!("codegree order must satisfy 1 <= s < k (s={s}, k={})", h.k()));
    }
    let (n, k) = (h.n(), h.k());
    let cost = choose_f64(n as u64, s as u64) + h.edge_count() as f64 * choose_f64(k as u64, s as u64);
    within_budget(cost, budget.unwrap_or(DEFAULT_BUDGET), "codegree enumeration")?;
    let table = BinomTable::new(n, s);
    let mut counts = vec![0u64; table.get(n, s) as usize];
    let mut sub = vec![0usize; s];
    for e in h.edges() {
        for_each_subset(0, k, s, |pos| {
            for (t, &q) in pos.iter().enumerate() {
                sub[t] = e[q] as usize;
            }
            counts[table.rank(&sub)] += 1;
        });
    }
    Ok(counts_to_stat(StatKind::Codegree { s }, n, counts))
}

/// Neighbours of each vertex with a larger index.
fn forward_rows(g: &Graph) -> Vec<Vec<u64>> {
    (0..g.n())
        .map(|v| {
            let mut row = g.row(v).to_vec();
            for (wi, w) in row.iter_mut().enumerate() {
                let lo = wi * 64;
                if v + 1 >= lo + 64 {
                    *w = 0;
                } else if v + 1 > lo {
                    *w &= !0u64 << (v + 1 - lo);
                }
            }
            row
        })
        .collect()
}

fn extend_cliques(plus: &[Vec<u64>], stack: &mut Vec<usize>, cand: &[u64], remaining: usize, counts: &mut [u64]) {
    if remaining == 1 {
        let c: u64 = cand.iter().map(|w| u64::from(w.count_ones())).sum();
        if c > 0 {
            for &v in stack.iter() {
                counts[v] += c;
            }
            for v in bits(cand) {
                counts[v] += 1;
            }
        }
        return;
    }
    let mut next = vec![0u64; cand.len()];
    for v in bits(cand) {
        let mut size = 0;
        for (t, w) in next.iter_mut().enumerate() {
            *w = cand[t] & plus[v][t];
            size += w.count_ones() as usize;
        }
        if size + 1 >= remaining {
            stack.push(v);
            extend_cliques(plus, stack, &next, remaining - 1, counts);
            stack.pop();
        }
    }
}

/// Number of `k`-cliques through each vertex, for `3 <= k <= 6`.
///
/// Each clique is found once from its smallest vertex by growing inside
/// forward neighbourhoods, then credited to all of its members.
pub fn clique_counts(g: &Graph, k: usize) -> Result<StatVector> {
    if !(3..=MAX_CLIQUE_K).contains(&k) {
        return Err(domain!("clique size must lie in [3, {MAX_CLIQUE_K}] (k={k})"));
    }
    let plus = forward_rows(g);
    let mut counts = vec![0u64; g.n()];
    let mut stack = Vec::with_capacity(k);
    for v in 0..g.n() {
        stack.push(v);
        extend_cliques(&plus, &mut stack, &plus[v], k - 1, &mut counts);
        stack.pop();
    }
    Ok(counts_to_stat(StatKind::Clique { k }, g.n(), counts))
}

/// `Y_i = C(d_i, k-1) p^{C(k-1,2)}`.
pub fn clique_cond_expectation(g: &Graph, k: usize, p: f64) -> Result<StatVector> {
    if k < 3 {
        return Err(domain!("clique size must be at least 3 (k={k})"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("edge probability must lie in [0, 1] (p={p})"));
    }
    let w = p.powi(((k - 1) * (k - 2) / 2) as i32);
    let values = g
        .degrees()
        .into_iter()
        .map(|d| {
            if d + 1 < k {
                0.0
            } else if let Some(c) = crate::numeric::choose_exact(d as u64, (k - 1) as u64) {
                c as f64 * w
            } else {
                (ln_choose(d as u64, (k - 1) as u64) + w.ln()).exp()
            }
        })
        .collect();
    Ok(StatVector {
        kind: StatKind::CondExpectation { k },
        n: g.n(),
        values,
    })
}

/// Calls `f(set, count)` for every `h`-set in lexicographic order, where
/// `count` is the number of common neighbours of the set.
fn walk_common<F: FnMut(&[usize], u64)>(g: &Graph, h: usize, mut f: F) {
    let words = g.words();
    let mut acc = vec![vec![0u64; words]; h + 1];
    acc[0].iter_mut().for_each(|w| *w = !0);
    let mut set = Vec::with_capacity(h);
    fn rec<F: FnMut(&[usize], u64)>(g: &Graph, h: usize, start: usize, set: &mut Vec<usize>, acc: &mut [Vec<u64>], f: &mut F) {
        let depth = set.len();
        for v in start..g.n() {
            if g.n() - v < h - depth {
                break;
            }
            let (prev, rest) = acc.split_at_mut(depth + 1);
            for (t, w) in rest[0].iter_mut().enumerate() {
                *w = prev[depth][t] & g.row(v)[t];
            }
            set.push(v);
            if depth + 1 == h {
                let c = rest[0].iter().map(|w| u64::from(w.count_ones())).sum();
                f(set, c);
            } else {
                rec(g, h, v + 1, set, acc, f);
            }
            set.pop();
        }
    }
    rec(g, h, 0, &mut set, &mut acc, &mut f);
}

/// `X_x`, the number of vertices adjacent to every vertex of `x`, for every
/// `h`-set `x` (`1 <= h <= 3`).
pub fn common_neighbours(g: &Graph, h: usize, budget: Option<u64>) -> Result<StatVector> {
    if !(1..=MAX_COMMON_H).contains(&h) || h > g.n() {
        return Err(domain!("set size must lie in [1, {MAX_COMMON_H}] and not exceed n (h={h})"));
    }
    let n = g.n();
    within_budget(
        choose_f64(n as u64, h as u64) * g.words().max(1) as f64,
        budget.unwrap_or(DEFAULT_BUDGET),
        "common-neighbour enumeration",
    )?;
    let table = BinomTable::new(n, h);
    let mut counts = vec![0u64; table.get(n, h) as usize];
    walk_common(g, h, |set, c| counts[table.rank(set)] = c);
    Ok(counts_to_stat(StatKind::CommonNeighbours { h }, n, counts))
}

/// Outcome of [`truncation_event`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub holds: bool,
    /// First violating set in order of size, then lexicographic order:
    /// `(ℓ, set, common-neighbour count, threshold)`.
    pub violation: Option<(usize, Vec<usize>, u64, f64)>,
}

/// Whether every `ℓ`-set with `ℓ < h` has at most
/// `n p^ℓ + √(2 ℓ n p^ℓ (1 - p^ℓ) ln n)` common neighbours.
pub fn truncation_event(g: &Graph, h: usize, p: f64, budget: Option<u64>) -> Result<Truncation> {
    if h < 2 {
        return Err(domain!("truncation event needs h >= 2 (h={h})"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("edge probability must lie in [0, 1] (p={p})"));
    }
    let n = g.n();
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let ln_n = (n as f64).ln();
    for l in 1..h.min(n + 1) {
        within_budget(choose_f64(n as u64, l as u64) * g.words().max(1) as f64, budget, "truncation check")?;
        let pl = p.powi(l as i32);
        let m = n as f64 * pl;
        let threshold = m + (2.0 * l as f64 * m * (1.0 - pl) * ln_n).sqrt();
        let mut first = None;
        walk_common(g, l, |set, c| {
            if first.is_none() && c as f64 > threshold {
                first = Some((l, set.to_vec(), c, threshold));
            }
        });
        if first.is_some() {
            return Ok(Truncation {
                holds: false,
                violation: first,
            });
        }
    }
    Ok(Truncation {
        holds: true,
        violation: None,
    })
}

/// `max_{j≠i} |X_{ij} - C(n-2, k-2) p|` over pair codegrees through `i`.
pub fn surrogate_deviation(h: &Hypergraph, i: usize, p: f64) -> Result<f64> {
    let (n, k) = (h.n(), h.k());
    if k < 2 || i >= n || n < 2 {
        return Err(domain!("need k >= 2 and a vertex below n (k={k}, i={i}, n={n})"));
    }
    let mut pair = vec![0u64; n];
    for e in h.edges().filter(|e| e.contains(&(i as u32))) {
        for &v in e {
            pair[v as usize] += 1;
        }
    }
    let mean = choose_f64((n - 2) as u64, (k - 2) as u64) * p;
    Ok((0..n)
        .filter(|&j| j != i)
        .map(|j| (pair[j] as f64 - mean).abs())
        .fold(0.0, f64::max))
}

/// Number of unordered pairs of distinct, intersecting label sets whose
/// values both exceed `threshold`.
pub fn overlapping_exceedances(stat: &StatVector, threshold: f64) -> u64 {
    let hits: Vec<Vec<usize>> = stat
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| stat.label(i))
        .collect();
    let mut count = 0;
    for a in 0..hits.len() {
        for b in (a + 1)..hits.len() {
            if hits[a].iter().any(|v| hits[b].contains(v)) {
                count += 1;
            }
        }
    }
    count
}
