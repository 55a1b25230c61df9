use super::ks::{ks_distance, ks_two_sample, XGrid};
use crate::error::{domain, Result};
use crate::gumbel::{
    binomial_power_cdf, clique_constants, common_neighbour_constants, cond_expectation_cdf, gumbel_cdf,
    norm_constants, Family, NormConstants,
};
use crate::numeric::{choose_exact, choose_f64};
use crate::rng::derive_seed;
use crate::structures::{
    clique_cond_expectation, clique_counts, common_neighbours, for_each_hyperedge, gen_graph, truncation_event,
    BinomTable, DEFAULT_BUDGET, MAX_CLIQUE_K, MAX_COMMON_H,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Maximum degree of `G(n, p)`.
    GraphMaxdeg,
    /// Maximum vertex degree of `H_k(n, p)`.
    HypergraphMaxdeg,
    /// Maximum codegree over `s`-sets of `H_k(n, p)`.
    HypergraphCodegree,
    /// Maximum number of `k`-cliques through a vertex of `G(n, p)`.
    CliqueExt,
    /// Maximum common-neighbour count over `h`-sets of `G(n, p)`.
    CommonNeighbours,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::GraphMaxdeg,
        ExperimentKind::HypergraphMaxdeg,
        ExperimentKind::HypergraphCodegree,
        ExperimentKind::CliqueExt,
        ExperimentKind::CommonNeighbours,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::GraphMaxdeg => "graph-maxdeg",
            ExperimentKind::HypergraphMaxdeg => "hypergraph-maxdeg",
            ExperimentKind::HypergraphCodegree => "hypergraph-codegree",
            ExperimentKind::CliqueExt => "clique-ext",
            ExperimentKind::CommonNeighbours => "common-neighbours",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::Error::Parse(format!("unknown experiment kind '{s}'")))
    }
}

/// Reference CDF the empirical maxima are compared with.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Maximum of independent copies with the same marginals.
    #[default]
    Indep,
    /// Standard Gumbel law on the normalized scale.
    Gumbel,
}

impl FromStr for Reference {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indep" => Ok(Reference::Indep),
            "gumbel" => Ok(Reference::Gumbel),
            _ => Err(crate::Error::Parse(format!("unknown reference '{s}' (indep or gumbel)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Edge size (hypergraphs) or clique size.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Codegree set size.
    #[serde(default = "default_s")]
    pub s: usize,
    /// Common-neighbour set size.
    #[serde(default = "default_h")]
    pub h: usize,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub grid: XGrid,
    #[serde(default)]
    pub reference: Reference,
    /// Cap on set inspections per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

fn default_k() -> usize {
    3
}

fn default_s() -> usize {
    2
}

fn default_h() -> usize {
    2
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, n: usize, p: f64, trials: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            k: default_k(),
            s: default_s(),
            h: default_h(),
            p,
            trials,
            seed,
            grid: XGrid::default(),
            reference: Reference::default(),
            budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain!("need at least one trial"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(domain!("edge probability must lie in [0, 1] (p={})", self.p));
        }
        self.grid.validate()?;
        let (n, k, s, h) = (self.n, self.k, self.s, self.h);
        if n < 3 {
            return Err(domain!("need n >= 3 (n={n})"));
        }
        match self.kind {
            ExperimentKind::GraphMaxdeg => {}
            ExperimentKind::HypergraphMaxdeg => {
                if k < 2 || k > n {
                    return Err(domain!("need 2 <= k <= n (k={k}, n={n})"));
                }
            }
            ExperimentKind::HypergraphCodegree => {
                if k < 2 || k > n || s == 0 || s >= k {
                    return Err(domain!("need 1 <= s < k <= n (s={s}, k={k}, n={n})"));
                }
                if choose_f64(n as u64, s as u64) < 3.0 {
                    return Err(domain!("need at least 3 codegree sets"));
                }
            }
            ExperimentKind::CliqueExt => {
                if !(3..=MAX_CLIQUE_K).contains(&k) || k > n {
                    return Err(domain!("clique size must lie in [3, {MAX_CLIQUE_K}] and not exceed n (k={k})"));
                }
            }
            ExperimentKind::CommonNeighbours => {
                if !(1..=MAX_COMMON_H).contains(&h) || h >= n {
                    return Err(domain!("set size must lie in [1, {MAX_COMMON_H}] and below n (h={h})"));
                }
            }
        }
        let budget = self.budget.unwrap_or(DEFAULT_BUDGET) as f64;
        let cost = self.cost_per_trial();
        if cost > budget {
            return Err(crate::Error::Resource(format!(
                "{} needs about {cost:.3e} set inspections per trial, budget is {budget}",
                self.kind
            )));
        }
        Ok(())
    }

    fn cost_per_trial(&self) -> f64 {
        let n = self.n as u64;
        let words = self.n.div_ceil(64) as f64;
        match self.kind {
            ExperimentKind::GraphMaxdeg | ExperimentKind::CliqueExt => choose_f64(n, 2),
            ExperimentKind::HypergraphMaxdeg => choose_f64(n, self.k as u64),
            ExperimentKind::HypergraphCodegree => {
                choose_f64(n, self.k as u64) + choose_f64(n, self.s as u64)
            }
            ExperimentKind::CommonNeighbours => choose_f64(n, 2) + choose_f64(n, self.h as u64) * words,
        }
    }

    /// Shape of the independent reference: `d` copies of `Bin(N, q)`.
    fn binomial_shape(&self) -> Option<(f64, u64, f64)> {
        let (n, k, s, h) = (self.n as u64, self.k as u64, self.s as u64, self.h as u64);
        match self.kind {
            ExperimentKind::GraphMaxdeg => Some((n as f64, n - 1, self.p)),
            ExperimentKind::HypergraphMaxdeg => Some((n as f64, exact_count(n - 1, k - 1), self.p)),
            ExperimentKind::HypergraphCodegree => {
                Some((choose_f64(n, s), exact_count(n - s, k - s), self.p))
            }
            ExperimentKind::CommonNeighbours => Some((choose_f64(n, h), n - h, self.p.powi(h as i32))),
            ExperimentKind::CliqueExt => None,
        }
    }
}

fn exact_count(n: u64, k: u64) -> u64 {
    choose_exact(n, k).map_or(u64::MAX, |c| c.min(u64::MAX as u128) as u64)
}

/// Normalizing constants for the configured statistic. For `p ∈ {0, 1}`
/// every structure is deterministic; `a` is then that value and `b = 1`.
pub fn experiment_constants(cfg: &ExperimentConfig) -> Result<NormConstants> {
    let (n, k, s, h) = (cfg.n as u64, cfg.k as u64, cfg.s as u64, cfg.h as u64);
    if cfg.p == 0.0 || cfg.p == 1.0 {
        return Ok(degenerate_constants(cfg));
    }
    match cfg.kind {
        ExperimentKind::CliqueExt => clique_constants(n, cfg.p, k),
        ExperimentKind::CommonNeighbours => common_neighbour_constants(n, cfg.p, h),
        ExperimentKind::HypergraphCodegree => {
            let mut c = crate::gumbel::norm_constants_from_log_d(
                crate::numeric::ln_choose(n, s),
                exact_count(n - s, k - s),
                cfg.p,
            )?;
            c.d = choose_f64(n, s);
            Ok(c)
        }
        _ => {
            let (d, big_n, p) = cfg.binomial_shape().expect("binomial kind");
            norm_constants(d as u64, big_n, p)
        }
    }
}

fn degenerate_constants(cfg: &ExperimentConfig) -> NormConstants {
    let (n, k, h) = (cfg.n as u64, cfg.k as u64, cfg.h as u64);
    let (d, family, a) = match cfg.kind {
        ExperimentKind::CliqueExt => (n as f64, Family::Clique { k }, cfg.p * choose_f64(n - 1, k - 1)),
        ExperimentKind::CommonNeighbours => {
            (choose_f64(n, h), Family::CommonNeighbour { h }, cfg.p * (n - h) as f64)
        }
        _ => {
            let (d, big_n, _) = cfg.binomial_shape().expect("binomial kind");
            (d, Family::Binomial, cfg.p * big_n as f64)
        }
    };
    NormConstants {
        a,
        b: 1.0,
        d,
        log_d: d.ln(),
        n_trials: cfg.binomial_shape().map_or(n, |(_, big_n, _)| big_n),
        p: cfg.p,
        family,
        warnings: vec![format!("p = {} makes the structure deterministic; using a = value, b = 1", cfg.p)],
    }
}

/// Reference CDF at the normalized point `x`.
pub fn reference_cdf(cfg: &ExperimentConfig, consts: &NormConstants, x: f64) -> Result<f64> {
    match cfg.reference {
        Reference::Gumbel => Ok(gumbel_cdf(x)),
        Reference::Indep => independent_cdf(cfg, consts.threshold(x)),
    }
}

/// `P(max ≤ t)` when the underlying variables are made independent with
/// their exact marginals. For clique extensions the marginal is that of the
/// conditional expectation given the degree.
pub fn independent_cdf(cfg: &ExperimentConfig, t: f64) -> Result<f64> {
    match cfg.binomial_shape() {
        Some((d, big_n, p)) => binomial_power_cdf(d, big_n, p, t),
        None => {
            let f = cond_expectation_cdf(cfg.n as u64, cfg.p, cfg.k as u64, t)?;
            Ok(f.powf(cfg.n as f64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrialOutcome {
    raw: f64,
    surrogate: Option<f64>,
    truncation: Option<bool>,
}

fn hyperdegree_max(cfg: &ExperimentConfig, seed: u64) -> Result<f64> {
    let mut deg = vec![0u64; cfg.n];
    for_each_hyperedge(cfg.n, cfg.k, cfg.p, seed, |e| {
        for &v in e {
            deg[v] += 1;
        }
    })?;
    Ok(deg.into_iter().max().unwrap_or(0) as f64)
}

fn codegree_max(cfg: &ExperimentConfig, seed: u64) -> Result<f64> {
    let (n, k, s) = (cfg.n, cfg.k, cfg.s);
    let table = BinomTable::new(n, s);
    let mut counts = vec![0u32; table.get(n, s) as usize];
    let mut sub = vec![0usize; s];
    let positions = {
        let mut out = Vec::new();
        crate::structures::for_each_subset(0, k, s, |c| out.push(c.to_vec()));
        out
    };
    for_each_hyperedge(n, k, cfg.p, seed, |e| {
        for pos in &positions {
            for (t, &q) in pos.iter().enumerate() {
                sub[t] = e[q];
            }
            counts[table.rank(&sub)] += 1;
        }
    })?;
    Ok(counts.into_iter().max().unwrap_or(0) as f64)
}

fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialOutcome> {
    let plain = |raw| TrialOutcome {
        raw,
        surrogate: None,
        truncation: None,
    };
    match cfg.kind {
        ExperimentKind::GraphMaxdeg => {
            let g = gen_graph(cfg.n, cfg.p, seed);
            Ok(plain((0..cfg.n).map(|i| g.degree(i)).max().unwrap_or(0) as f64))
        }
        ExperimentKind::HypergraphMaxdeg => Ok(plain(hyperdegree_max(cfg, seed)?)),
        ExperimentKind::HypergraphCodegree => Ok(plain(codegree_max(cfg, seed)?)),
        ExperimentKind::CliqueExt => {
            let g = gen_graph(cfg.n, cfg.p, seed);
            Ok(TrialOutcome {
                raw: clique_counts(&g, cfg.k)?.max(),
                surrogate: Some(clique_cond_expectation(&g, cfg.k, cfg.p)?.max()),
                truncation: None,
            })
        }
        ExperimentKind::CommonNeighbours => {
            let g = gen_graph(cfg.n, cfg.p, seed);
            let truncation = if cfg.h >= 2 {
                Some(truncation_event(&g, cfg.h, cfg.p, cfg.budget)?.holds)
            } else {
                None
            };
            Ok(TrialOutcome {
                raw: common_neighbours(&g, cfg.h, cfg.budget)?.max(),
                surrogate: None,
                truncation,
            })
        }
    }
}

/// Monte Carlo maxima with their normalized values and the grid KS distance
/// to the configured reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalResult {
    pub config: ExperimentConfig,
    pub constants: NormConstants,
    pub seed: u64,
    pub ks: f64,
    pub grid_points: usize,
    /// Fraction of trials on which the truncation event held
    /// (common-neighbour experiments with `h >= 2`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_frequency: Option<f64>,
    /// Grid KS between the normalized maxima and the normalized maxima of
    /// the conditional expectations (clique extensions).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_ks: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<f64>,
    #[serde(skip)]
    pub normalized: Vec<f64>,
    #[serde(skip)]
    pub surrogate_samples: Option<Vec<f64>>,
}

/// Runs `cfg.trials` independent trials with seeds
/// `derive_seed(cfg.seed, t)`, in parallel, keeping trial order.
pub fn run_max_experiment(cfg: &ExperimentConfig) -> Result<EmpiricalResult> {
    cfg.validate()?;
    let constants = experiment_constants(cfg)?;
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, derive_seed(cfg.seed, t)))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = outcomes.iter().map(|o| o.raw).collect();
    let normalized: Vec<f64> = samples.iter().map(|&r| constants.normalize(r)).collect();
    let grid = cfg.grid.points();
    let ks = ks_distance(&normalized, |x| reference_cdf(cfg, &constants, x), &grid)?;
    let surrogate_samples: Option<Vec<f64>> = outcomes.iter().map(|o| o.surrogate).collect();
    let surrogate_ks = match &surrogate_samples {
        Some(y) => {
            let y: Vec<f64> = y.iter().map(|&v| constants.normalize(v)).collect();
            Some(ks_two_sample(&normalized, &y, &grid)?)
        }
        None => None,
    };
    let flags: Option<Vec<bool>> = outcomes.iter().map(|o| o.truncation).collect();
    let truncation_frequency = flags.map(|f| f.iter().filter(|&&b| b).count() as f64 / f.len() as f64);
    Ok(EmpiricalResult {
        config: cfg.clone(),
        constants,
        seed: cfg.seed,
        ks,
        grid_points: grid.len(),
        truncation_frequency,
        surrogate_ks,
        samples,
        normalized,
        surrogate_samples,
    })
}
