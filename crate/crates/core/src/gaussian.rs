//! Gaussian vectors: Mills-ratio tail bounds, the normal comparison bound
//! for pairs, finite-`d` diagnostics for the weak-dependence conditions and
//! a seeded sampler.

use crate::error::{domain, Error, Result};
use crate::numeric::{accurate_sum, normal_cdf, normal_pdf, NeumaierSum};
use crate::prob::DependencyGraph;
use crate::rng::entity_rng;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default `ε` for the condition flags.
pub const DEFAULT_EPS: f64 = 0.05;

/// Trials generated per matrix product in [`sample`].
const BATCH: usize = 128;

const JITTER: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Covariance {
    Dense(DMatrix<f64>),
    /// Stationary: entry `(i, j)` is `acov[|i - j|]`.
    Toeplitz(Vec<f64>),
}

/// Mean vector and covariance of a Gaussian vector.
#[derive(Debug, Clone)]
pub struct GaussianSystem {
    means: Vec<f64>,
    cov: Covariance,
    sd: Vec<f64>,
}

impl GaussianSystem {
    /// Validates symmetry (to 1e-10), a positive diagonal and correlations
    /// bounded by `1 + 1e-10`. Positive semidefiniteness is only checked when
    /// the covariance is factorized.
    pub fn new(means: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let d = means.len();
        if d == 0 {
            return Err(Error::Structural("Gaussian system needs at least one coordinate".into()));
        }
        if covariance.len() != d || covariance.iter().any(|r| r.len() != d) {
            return Err(Error::Structural(format!("covariance must be {d}x{d}")));
        }
        let m = DMatrix::from_fn(d, d, |i, j| covariance[i][j]);
        for i in 0..d {
            if !(m[(i, i)] > 0.0) {
                return Err(domain!("variance of coordinate {i} must be positive"));
            }
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 {
                    return Err(Error::Structural(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let sd: Vec<f64> = (0..d).map(|i| m[(i, i)].sqrt()).collect();
        for i in 0..d {
            for j in 0..i {
                let r = m[(i, j)] / (sd[i] * sd[j]);
                if r.abs() > 1.0 + 1e-10 {
                    return Err(domain!("correlation {r} at ({i}, {j}) exceeds 1"));
                }
            }
        }
        Ok(Self {
            means,
            cov: Covariance::Dense(m),
            sd,
        })
    }

    pub fn d(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.sd[i] * self.sd[i]
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        match &self.cov {
            Covariance::Dense(m) => m[(i, j)],
            Covariance::Toeplitz(acov) => acov[i.abs_diff(j)],
        }
    }

    /// `r_ij`.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.covariance(i, j) / (self.sd[i] * self.sd[j])
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        match &self.cov {
            Covariance::Dense(m) => m.clone(),
            Covariance::Toeplitz(acov) => DMatrix::from_fn(self.d(), self.d(), |i, j| acov[i.abs_diff(j)]),
        }
    }

    /// Lower Cholesky factor, retrying once with `1e-12` added to the
    /// diagonal.
    pub fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        let m = self.dense();
        if let Some(c) = m.clone().cholesky() {
            return Ok(c.unpack());
        }
        let d = self.d();
        let jittered = m + DMatrix::identity(d, d) * JITTER;
        match jittered.cholesky() {
            Some(c) => {
                log::warn!("covariance factorized only after adding {JITTER} to the diagonal");
                Ok(c.unpack())
            }
            None => Err(Error::Numeric("covariance is not positive semidefinite".into())),
        }
    }
}

/// Stationary correlation families `r(k)` for lag `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CorrelationFamily {
    /// `r(k) = ρ^k`.
    Ar1 { rho: f64 },
    /// `r(k) = γ / ln(2 + k)`.
    LogDecay { gamma: f64 },
    /// `r(k) = ρ^k` up to lag `max_lag`, zero beyond.
    Truncated { rho: f64, max_lag: usize },
}

impl CorrelationFamily {
    pub fn correlation(&self, lag: usize) -> f64 {
        if lag == 0 {
            return 1.0;
        }
        match *self {
            CorrelationFamily::Ar1 { rho } => rho.powi(lag as i32),
            CorrelationFamily::LogDecay { gamma } => gamma / (2.0 + lag as f64).ln(),
            CorrelationFamily::Truncated { rho, max_lag } => {
                if lag <= max_lag {
                    rho.powi(lag as i32)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Toeplitz system with covariance `variance · r(|i - j|)` and constant mean.
pub fn stationary_system(d: usize, family: CorrelationFamily, variance: f64, mean: f64) -> Result<GaussianSystem> {
    if d == 0 {
        return Err(Error::Structural("Gaussian system needs at least one coordinate".into()));
    }
    if !(variance > 0.0) {
        return Err(domain!("variance must be positive (got {variance})"));
    }
    let acov: Vec<f64> = (0..d).map(|k| variance * family.correlation(k)).collect();
    if let Some(k) = (1..d).find(|&k| acov[k].abs() > variance * (1.0 + 1e-10)) {
        return Err(domain!("correlation at lag {k} exceeds 1"));
    }
    Ok(GaussianSystem {
        means: vec![mean; d],
        cov: Covariance::Toeplitz(acov),
        sd: vec![variance.sqrt(); d],
    })
}

/// The common raw level `a + b x` and its standardized values
/// `u_i = (a + b x - μ_i) / σ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub a: f64,
    pub b: f64,
    pub x: f64,
}

impl ThresholdSet {
    pub fn new(a: f64, b: f64, x: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(domain!("threshold scale must be positive (b={b})"));
        }
        Ok(Self { a, b, x })
    }

    /// The raw level `level` itself.
    pub fn level(level: f64) -> Self {
        Self { a: level, b: 1.0, x: 0.0 }
    }

    pub fn raw(&self) -> f64 {
        self.a + self.b * self.x
    }

    pub fn standardized(&self, system: &GaussianSystem) -> Vec<f64> {
        let t = self.raw();
        (0..system.d()).map(|i| (t - system.means[i]) / system.sd[i]).collect()
    }
}

/// `(φ(x)/x · (1 - x⁻²), φ(x)/x)`, the lower part floored at 0.
pub fn mills_bounds(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(domain!("Mills-ratio bounds need x > 0 (x={x})"));
    }
    let upper = normal_pdf(x) / x;
    Ok(((upper * (1.0 - 1.0 / (x * x))).max(0.0), upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BermanForm {
    /// Factor `(1 - r²)^{-1/2}`.
    #[default]
    Classical,
    /// Factor `(1 - r²)^{-1}`, which is larger.
    Loose,
}

/// `(1/2π) |r| (1 - r²)^{-1/2} exp(-(u_i² + u_j²) / (2(1 + |r|)))`.
pub fn berman_pair_bound(u_i: f64, u_j: f64, r: f64) -> Result<f64> {
    berman_pair_bound_with(u_i, u_j, r, BermanForm::Classical)
}

pub fn berman_pair_bound_with(u_i: f64, u_j: f64, r: f64, form: BermanForm) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(domain!("pair bound needs |r| < 1 (r={r})"));
    }
    let s = 1.0 - r * r;
    let factor = match form {
        BermanForm::Classical => s.sqrt(),
        BermanForm::Loose => s,
    };
    Ok(r.abs() / (2.0 * PI * factor) * (-(u_i * u_i + u_j * u_j) / (2.0 * (1.0 + r.abs()))).exp())
}

/// Upper estimate of the `i`-th mixing term: the pair bounds over weakly
/// dependent predecessors divided by the Mills lower bound for `P(A_i)`.
pub fn phi_upper_estimate(
    system: &GaussianSystem,
    thresholds: &ThresholdSet,
    dep: &DependencyGraph,
    i: usize,
) -> Result<f64> {
    dep.check_matches(system.d())?;
    let u = thresholds.standardized(system);
    if !(u[i] > 1.0) {
        return Err(domain!("u_{i} = {} must exceed 1", u[i]));
    }
    let mut s = NeumaierSum::new();
    for j in (0..i).filter(|&j| !dep.contains(i, j)) {
        s.add(berman_pair_bound(u[i], u[j], system.correlation(i, j))?);
    }
    Ok(s.total() / mills_bounds(u[i])?.0)
}

/// Finite-`d` diagnostics for the weak-dependence conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `u_min`.
    pub g1: f64,
    /// `max_i max_{j<i, j∉D_i} |r_ij| · ln d`.
    pub g2: f64,
    /// `Σ_i Σ_{j<i, j∈D_i} exp(-(u_i² + u_j²) / (2(1 + |r_ij|)))`.
    pub g3: f64,
    /// `exp(-u_min² / (1 + ρ)) · Σ_i |{j<i : j∈D_i}|`.
    pub g3_sufficient: f64,
    /// `max_{i≠j} |r_ij|`.
    pub g4: f64,
    pub rho: f64,
    pub eps: f64,
    pub g1_ok: bool,
    pub g2_ok: bool,
    pub g3_ok: bool,
    pub g4_ok: bool,
}

impl ConditionReport {
    /// Conditions whose finite-`d` flag is raised.
    pub fn raised(&self) -> Vec<&'static str> {
        [
            (self.g1_ok, "g1"),
            (self.g2_ok, "g2"),
            (self.g3_ok, "g3"),
            (self.g4_ok, "g4"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, n)| n)
        .collect()
    }
}

pub fn check_conditions(
    system: &GaussianSystem,
    thresholds: &ThresholdSet,
    dep: &DependencyGraph,
    rho: f64,
    eps: f64,
) -> Result<ConditionReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain!("rho must lie in (0, 1) (rho={rho})"));
    }
    dep.check_matches(system.d())?;
    let d = system.d();
    let u = thresholds.standardized(system);
    let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
    let ln_d = (d as f64).ln();
    let rows: Vec<(f64, f64, f64, usize)> = (0..d)
        .into_par_iter()
        .map(|i| {
            let (mut weak, mut all) = (0.0f64, 0.0f64);
            let mut g3 = NeumaierSum::new();
            let mut strong = 0;
            for j in 0..i {
                let r = system.correlation(i, j).abs();
                all = all.max(r);
                if dep.contains(i, j) {
                    strong += 1;
                    g3.add((-(u[i] * u[i] + u[j] * u[j]) / (2.0 * (1.0 + r))).exp());
                } else {
                    weak = weak.max(r);
                }
            }
            (weak, all, g3.total(), strong)
        })
        .collect();
    let g2 = rows.iter().map(|r| r.0).fold(0.0, f64::max) * ln_d;
    let g4 = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let g3 = accurate_sum(rows.iter().map(|r| r.2));
    let strong: usize = rows.iter().map(|r| r.3).sum();
    let g3_sufficient = (-u_min * u_min / (1.0 + rho)).exp() * strong as f64;
    Ok(ConditionReport {
        g1: u_min,
        g2,
        g3,
        g3_sufficient,
        g4,
        rho,
        eps,
        g1_ok: u_min > 1.0,
        g2_ok: g2 < eps,
        g3_ok: g3 < eps,
        g4_ok: g4 < rho,
    })
}

/// Standard normal draws for one trial: `d` values from stream `trial`.
fn fill_normals(seed: u64, trial: usize, out: &mut [f64]) {
    let mut rng = entity_rng(seed, trial as u64);
    for z in out.iter_mut() {
        *z = StandardNormal.sample(&mut rng);
    }
}

/// Calls `f(first_trial, block)` where `block` is `d × m` and column `c`
/// holds trial `first_trial + c`.
fn for_each_block<T: Send, F>(system: &GaussianSystem, trials: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    F: Fn(usize, &DMatrix<f64>) -> T + Sync,
{
    let d = system.d();
    let l = system.cholesky_factor()?;
    let mu = DVector::from_column_slice(&system.means);
    let starts: Vec<usize> = (0..trials).step_by(BATCH).collect();
    Ok(starts
        .into_par_iter()
        .map(|start| {
            // Full-width blocks keep each trial's arithmetic independent of
            // the total trial count.
            let mut z = DMatrix::<f64>::zeros(d, BATCH);
            for c in 0..BATCH {
                fill_normals(seed, start + c, z.column_mut(c).as_mut_slice());
            }
            let m = BATCH.min(trials - start);
            let mut x = (&l * z).columns(0, m).into_owned();
            for mut col in x.column_iter_mut() {
                col += &mu;
            }
            f(start, &x)
        })
        .collect())
}

/// `trials × d` matrix of samples; row `t` depends only on `(seed, t)`.
pub fn sample(system: &GaussianSystem, trials: usize, seed: u64) -> Result<DMatrix<f64>> {
    let d = system.d();
    let blocks = for_each_block(system, trials, seed, |start, x| (start, x.transpose()))?;
    let mut out = DMatrix::<f64>::zeros(trials, d);
    for (start, block) in blocks {
        out.rows_mut(start, block.nrows()).copy_from(&block);
    }
    Ok(out)
}

/// `max_i X_i` for each trial, identical to the row maxima of [`sample`].
pub fn sample_max(system: &GaussianSystem, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let blocks = for_each_block(system, trials, seed, |_, x| {
        x.column_iter().map(|c| c.max()).collect::<Vec<f64>>()
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Empirical and independent-copy values of `P(max_i X_i ≤ level)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxCdfPoint {
    pub level: f64,
    pub empirical: f64,
    /// `∏_i Φ(u_i)`.
    pub independent: f64,
}

pub fn max_cdf_points(system: &GaussianSystem, maxima: &[f64], levels: &[f64]) -> Vec<MaxCdfPoint> {
    levels
        .iter()
        .map(|&level| {
            let u = ThresholdSet::level(level).standardized(system);
            let ln = accurate_sum(u.iter().map(|&ui| normal_cdf(ui).ln()));
            MaxCdfPoint {
                level,
                empirical: maxima.iter().filter(|&&m| m <= level).count() as f64 / maxima.len() as f64,
                independent: ln.exp(),
            }
        })
        .collect()
}

/// How the Gaussian vector of a [`GaussianConfig`] is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SystemSpec {
    Stationary {
        d: usize,
        correlation: CorrelationFamily,
        #[serde(default = "unit")]
        variance: f64,
        #[serde(default)]
        mean: f64,
    },
    Explicit {
        means: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    0.5
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_trials() -> usize {
    10_000
}

/// File format for the Gaussian command-line tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianConfig {
    pub system: SystemSpec,
    /// Defaults to the common level `√(2 ln d)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSet>,
    /// `D_i = {j : 0 < |i - j| <= band}`; `D` is empty when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<usize>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Levels for the empirical CDF of the maximum; defaults to the
    /// threshold level shifted by `-1, -0.5, …, 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
}

impl GaussianConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build_system(&self) -> Result<GaussianSystem> {
        match &self.system {
            SystemSpec::Stationary {
                d,
                correlation,
                variance,
                mean,
            } => stationary_system(*d, *correlation, *variance, *mean),
            SystemSpec::Explicit { means, covariance } => GaussianSystem::new(means.clone(), covariance.clone()),
        }
    }

    pub fn thresholds(&self, system: &GaussianSystem) -> ThresholdSet {
        self.threshold
            .unwrap_or_else(|| ThresholdSet::level((2.0 * (system.d() as f64).ln()).sqrt()))
    }

    pub fn dependency(&self, d: usize) -> DependencyGraph {
        match self.band {
            Some(w) => DependencyGraph::band(d, w),
            None => DependencyGraph::empty(d),
        }
    }

    pub fn levels(&self, system: &GaussianSystem) -> Vec<f64> {
        self.levels.clone().unwrap_or_else(|| {
            let t = self.thresholds(system).raw();
            (-4..=4).map(|i| t + 0.25 * i as f64).collect()
        })
    }

    pub fn check(&self) -> Result<ConditionReport> {
        let sys = self.build_system()?;
        check_conditions(&sys, &self.thresholds(&sys), &self.dependency(sys.d()), self.rho, self.eps)
    }

    /// Empirical and independent-copy CDF of the maximum at [`Self::levels`].
    pub fn simulate(&self) -> Result<Vec<MaxCdfPoint>> {
        if self.trials == 0 {
            return Err(domain!("need at least one trial"));
        }
        let sys = self.build_system()?;
        let maxima = sample_max(&sys, self.trials, self.seed)?;
        Ok(max_cdf_points(&sys, &maxima, &self.levels(&sys)))
    }
}
