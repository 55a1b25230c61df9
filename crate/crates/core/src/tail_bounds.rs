//! Concentration bounds for binomial counts and for counts of
//! `(k-1)`-cliques inside a vertex neighbourhood.
//!
//! Every bound is an upper bound on a probability and is clamped to 1.

use crate::error::{domain, Result};
use crate::numeric::{choose_exact, choose_f64, NeumaierSum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChernoffForm {
    /// `2 exp(-t² / (2μ + t))`.
    Additive,
    /// `2 exp(-t² / (2(μ + t/3)))`.
    Bernstein,
}

/// Two-sided deviation bound `P(|X - μ| ≥ t)` for a binomial count with
/// mean `μ`.
pub fn chernoff_dev(mu: f64, t: f64, form: ChernoffForm) -> Result<f64> {
    if !(mu >= 0.0 && t >= 0.0) {
        return Err(domain!("Chernoff bound needs mu, t >= 0 (mu={mu}, t={t})"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let denom = match form {
        ChernoffForm::Additive => 2.0 * mu + t,
        ChernoffForm::Bernstein => 2.0 * (mu + t / 3.0),
    };
    Ok((2.0 * (-t * t / denom).exp()).min(1.0))
}

/// Overlap statistics for the `(k-1)`-subsets of a `j`-element neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliqueOverlap {
    /// Number of `(k-1)`-subsets sharing at least two elements with a fixed
    /// one (the fixed one included).
    pub delta: u128,
    /// Expected number of ordered pairs of distinct `(k-1)`-cliques sharing
    /// at least one edge.
    pub deltabar_pairs: f64,
    /// Expected number of `(k-1)`-cliques, `C(j, k-1) p^{C(k-1,2)}`.
    pub mu: f64,
    /// `mu + deltabar_pairs`, the overlap term including the diagonal.
    pub deltabar_total: f64,
}

fn choose(n: u64, k: u64) -> Result<u128> {
    choose_exact(n, k).ok_or_else(|| domain!("C({n}, {k}) overflows 128 bits"))
}

pub fn clique_overlap(j: u64, k: u64, p: f64) -> Result<CliqueOverlap> {
    if k < 3 {
        return Err(domain!("clique size must be at least 3 (k={k})"));
    }
    if j < k - 1 {
        return Err(domain!("need j >= k - 1 (j={j}, k={k})"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("edge probability must lie in [0, 1] (p={p})"));
    }
    let m = k - 1;
    let rest = j - m;
    let delta = choose(j, m)? - choose(rest, m)? - u128::from(m) * choose(rest, m - 1)?;
    let edges = m * (m - 1) / 2;
    let mut sum = NeumaierSum::new();
    for l in 2..m {
        let shared = l * (l - 1) / 2;
        sum.add(choose_f64(m, l) * choose_f64(rest, m - l) * p.powi((2 * edges - shared) as i32));
    }
    let total_sets = choose_f64(j, m);
    let deltabar_pairs = total_sets * sum.total();
    let mu = total_sets * p.powi(edges as i32);
    Ok(CliqueOverlap {
        delta,
        deltabar_pairs,
        mu,
        deltabar_total: mu + deltabar_pairs,
    })
}

/// `exp(-t² / (2 Δ̄))`, a bound on `P(X ≤ μ - t)`.
pub fn janson_lower_tail(deltabar_total: f64, t: f64) -> Result<f64> {
    if !(deltabar_total > 0.0) {
        return Err(domain!("overlap term must be positive (got {deltabar_total})"));
    }
    if !(t >= 0.0) {
        return Err(domain!("deviation must be nonnegative (t={t})"));
    }
    Ok((-t * t / (2.0 * deltabar_total)).exp().min(1.0))
}

/// `(Δ + 1) exp(-t² / (4(Δ + 1)(μ + t/3)))`, a bound on `P(X ≥ μ + t)`.
pub fn janson_upper_weak(delta: u128, mu: f64, t: f64) -> Result<f64> {
    if !(mu >= 0.0 && t >= 0.0) {
        return Err(domain!("upper tail needs mu, t >= 0 (mu={mu}, t={t})"));
    }
    let c = delta as f64 + 1.0;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((c * (-t * t / (4.0 * c * (mu + t / 3.0))).exp()).min(1.0))
}
