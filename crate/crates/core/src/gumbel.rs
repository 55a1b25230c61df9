//! Normalizing constants for maxima of binomial counts and the exact
//! reference laws they are compared with.
//!
//! All logarithms are natural. The number of variables `d` only enters
//! through `ln d`, so constructors also accept it in log form.

use crate::error::{domain, Result};
use crate::numeric::{binomial_tails, ln_choose};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use crate::numeric::binomial_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    Binomial,
    Clique { k: u64 },
    CommonNeighbour { h: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Binomial => "binomial",
            Family::Clique { .. } => "clique",
            Family::CommonNeighbour { .. } => "common-neighbour",
        }
    }
}

/// Location `a` and scale `b` such that `(max - a) / b` is close to a
/// standard Gumbel variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub a: f64,
    pub b: f64,
    /// Number of variables; may be `inf` when only `log_d` is representable.
    pub d: f64,
    pub log_d: f64,
    /// Binomial trial count.
    #[serde(rename = "N")]
    pub n_trials: u64,
    pub p: f64,
    pub family: Family,
    /// Regime conditions that fail for these parameters.
    pub warnings: Vec<String>,
}

impl NormConstants {
    /// Maps a raw maximum to the Gumbel scale.
    pub fn normalize(&self, raw: f64) -> f64 {
        (raw - self.a) / self.b
    }

    /// Raw threshold `a + b x`.
    pub fn threshold(&self, x: f64) -> f64 {
        self.a + self.b * x
    }
}

/// `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Inverse of [`gumbel_cdf`] on `(0, 1)`.
pub fn gumbel_quantile(u: f64) -> f64 {
    -(-u.ln()).ln()
}

/// `1 - lnln d / (4 ln d) - ln(2√π) / (2 ln d)`.
fn bracket(log_d: f64) -> f64 {
    1.0 - log_d.ln() / (4.0 * log_d) - (2.0 * PI.sqrt()).ln() / (2.0 * log_d)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(domain!("success probability must lie in (0, 1) (p={p})"))
    }
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    log::warn!("{msg}");
    warnings.push(msg);
}

/// Constants for the maximum of `d` independent `Bin(N, p)` variables.
pub fn norm_constants(d: u64, n_trials: u64, p: f64) -> Result<NormConstants> {
    if d < 3 {
        return Err(domain!("need at least 3 variables (d={d})"));
    }
    let mut c = norm_constants_from_log_d((d as f64).ln(), n_trials, p)?;
    c.d = d as f64;
    Ok(c)
}

/// As [`norm_constants`], with `d` given as `ln d`.
pub fn norm_constants_from_log_d(log_d: f64, n_trials: u64, p: f64) -> Result<NormConstants> {
    check_p(p)?;
    if !(log_d >= 3f64.ln() - 1e-12) {
        return Err(domain!("need at least 3 variables (ln d={log_d})"));
    }
    if n_trials == 0 {
        return Err(domain!("need at least one binomial trial"));
    }
    let var = n_trials as f64 * p * (1.0 - p);
    let mut warnings = Vec::new();
    if var < log_d.powi(3) {
        warn(
            &mut warnings,
            format!("N p (1-p) = {var:.4} is below ln^3 d = {:.4}", log_d.powi(3)),
        );
    }
    Ok(NormConstants {
        a: p * n_trials as f64 + (2.0 * var * log_d).sqrt() * bracket(log_d),
        b: (var / (2.0 * log_d)).sqrt(),
        d: log_d.exp(),
        log_d,
        n_trials,
        p,
        family: Family::Binomial,
        warnings,
    })
}

/// Constants for the maximum over vertices of the number of `k`-cliques
/// containing the vertex in `G(n, p)`.
pub fn clique_constants(n: u64, p: f64, k: u64) -> Result<NormConstants> {
    if k < 3 {
        return Err(domain!("clique size must be at least 3 (k={k})"));
    }
    if n < k {
        return Err(domain!("need n >= k (n={n}, k={k})"));
    }
    check_p(p)?;
    let nf = n as f64;
    let ln_n = nf.ln();
    let var = nf * p * (1.0 - p);
    let mut warnings = Vec::new();
    if var <= f64::MIN_POSITIVE {
        warn(&mut warnings, format!("n p (1-p) underflows (p={p})"));
    } else if var < ln_n.powi(3) {
        warn(
            &mut warnings,
            format!("n p (1-p) = {var:.4} is below ln^3 n = {:.4}", ln_n.powi(3)),
        );
    }
    let km1 = (k - 1) as f64;
    let pairs = ((k - 1) * (k - 2) / 2) as f64;
    let ln_front = (k - 2) as f64 * (p * nf).ln() + pairs * p.ln() - ln_factorial(k - 1);
    let front = ln_front.exp();
    let a = front * (p * nf + km1 * (2.0 * var * ln_n).sqrt() * bracket(ln_n));
    // 1/(k-2)! = (k-1)/(k-1)!.
    let b = (ln_front + km1.ln()).exp() * (var / (2.0 * ln_n)).sqrt();
    Ok(NormConstants {
        a,
        b,
        d: nf,
        log_d: ln_n,
        n_trials: n,
        p,
        family: Family::Clique { k },
        warnings,
    })
}

fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Constants for the maximum common-neighbour count over `h`-sets of
/// `G(n, p)`: the binomial constants with `d = C(n, h)`, `N = n` and
/// success probability `p^h`.
pub fn common_neighbour_constants(n: u64, p: f64, h: u64) -> Result<NormConstants> {
    if h == 0 || h >= n {
        return Err(domain!("need 1 <= h < n (n={n}, h={h})"));
    }
    check_p(p)?;
    let mut c = norm_constants_from_log_d(ln_choose(n, h), n, p.powi(h as i32))?;
    c.family = Family::CommonNeighbour { h };
    c.d = crate::numeric::choose_f64(n, h);
    let ln_n = (n as f64).ln();
    let margin = (ln_n.ln() / ln_n).sqrt();
    if ln_n > 1.0 && 1.0 - p < margin {
        warn(
            &mut c.warnings,
            format!("1 - p = {:.4} is not large against sqrt(lnln n / ln n) = {margin:.4}", 1.0 - p),
        );
    }
    Ok(c)
}

/// `P(max of d independent Bin(N, p) <= t)`, with `d` real so that it can
/// exceed the range of integers.
pub fn binomial_power_cdf(d: f64, n_trials: u64, p: f64, t: f64) -> Result<f64> {
    let (cdf, sf) = binomial_tails(n_trials, p, t)?;
    if sf < 0.5 {
        Ok((d * (-sf).ln_1p()).exp())
    } else {
        Ok((d * cdf.ln()).exp())
    }
}

/// `[P(Bin(N, p) <= a + b x)]^d`.
pub fn product_max_cdf(d: f64, n_trials: u64, p: f64, x: f64, consts: &NormConstants) -> Result<f64> {
    binomial_power_cdf(d, n_trials, p, consts.threshold(x))
}

/// `d · P(Bin(N, p) > a + b x)` with the binomial constants for `(d, N, p)`.
pub fn tail_limit_check(d: u64, n_trials: u64, p: f64, x: f64) -> Result<f64> {
    let c = norm_constants(d, n_trials, p)?;
    let (_, sf) = binomial_tails(n_trials, p, c.threshold(x))?;
    Ok(d as f64 * sf)
}

/// `P(Y <= t)` for `Y = C(D, k-1) p^{C(k-1,2)}` with `D ~ Bin(n-1, p)`, the
/// conditional expectation of a vertex's `k`-clique count given its degree.
pub fn cond_expectation_cdf(n: u64, p: f64, k: u64, t: f64) -> Result<f64> {
    let m = cond_expectation_degree_cut(n, p, k, t);
    match m {
        None => Ok(0.0),
        Some(m) => binomial_cdf(n - 1, p, m as f64),
    }
}

/// Largest degree `D` with `C(D, k-1) p^{C(k-1,2)} <= t`.
fn cond_expectation_degree_cut(n: u64, p: f64, k: u64, t: f64) -> Option<u64> {
    if t < 0.0 {
        return None;
    }
    let ln_w = ((k - 1) * (k - 2) / 2) as f64 * p.ln();
    let fits = |deg: u64| deg < k - 1 || ln_choose(deg, k - 1) + ln_w <= t.ln() + 1e-12;
    // `fits` is monotone in the degree.
    let (mut lo, mut hi) = (0u64, n - 1);
    if fits(hi) {
        return Some(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}
