use super::generators::{random_event_system, DepFamily, GenFamily, SystemGenSpec};
use crate::coefficients::{audit, BoundAudit};
use crate::error::{domain, Result};
use crate::rng::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One audited system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub system_id: u64,
    pub seed: u64,
    pub family: GenFamily,
    pub dep_family: DepFamily,
    pub d: usize,
    pub atoms: usize,
    pub audit: BoundAudit,
}

impl AuditRow {
    /// Names of the required inequalities that fail.
    pub fn failures(&self) -> Vec<&'static str> {
        let a = &self.audit;
        let checks = [
            ("thm1", a.thm1_pass),
            ("upper", a.upper_pass),
            ("lower", a.lower_pass),
            ("dubickas", a.dubickas_pass.unwrap_or(true)),
            ("arratia-ineq", a.arratia_ineq_pass),
            ("chains", a.chains_pass),
        ];
        checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub system_id: u64,
    pub seed: u64,
    pub failed: Vec<String>,
}

/// Largest value of `lhs - rhs` seen for each inequality written as
/// `lhs <= rhs`; negative means every system had slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub thm1: f64,
    pub upper: f64,
    pub lower: f64,
    pub dubickas: f64,
    pub arratia_ineq: f64,
    pub chains: f64,
}

impl Residuals {
    fn new() -> Self {
        let m = f64::NEG_INFINITY;
        Self {
            thm1: m,
            upper: m,
            lower: m,
            dubickas: m,
            arratia_ineq: m,
            chains: m,
        }
    }

    fn update(&mut self, a: &BoundAudit) {
        let c = &a.coefficients;
        self.thm1 = self.thm1.max(a.exact_gap - a.thm1_rhs);
        self.upper = self.upper.max(a.none_occur - a.upper_rhs);
        self.lower = self.lower.max(a.lower_rhs - a.none_occur);
        if a.dubickas_valid {
            self.dubickas = self.dubickas.max(a.dubickas_rhs - a.none_occur);
        }
        self.arratia_ineq = self.arratia_ineq.max(c.phi_tilde_union_lower - c.phi_tilde);
        let chain = [
            c.delta1 - c.delta1_prime,
            c.delta1_prime - c.delta1_dprime,
            c.delta2 - c.delta2_prime,
            c.delta2_prime - c.delta2_dprime,
        ];
        self.chains = chain.iter().fold(self.chains, |m, &x| m.max(x));
    }
}

/// Result of [`bound_audit_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub count: u64,
    pub seed: u64,
    pub spec: SystemGenSpec,
    pub violations: Vec<Violation>,
    pub worst: Residuals,
    /// Systems on which every `Δ` chain inequality held.
    pub chains_held: u64,
    /// Systems on which the Dubickas bound applied.
    pub dubickas_checked: u64,
    /// Largest `exact_gap`, and how often the Arratia–Goldstein–Gordon form
    /// bounded it.
    pub max_gap: f64,
    pub arratia_held: u64,
    #[serde(skip)]
    pub rows: Vec<AuditRow>,
}

/// Audits `count` generated systems; system `i` uses seed
/// `derive_seed(seed, i)`.
pub fn bound_audit_run(spec: &SystemGenSpec, count: u64, seed: u64) -> Result<AuditSummary> {
    if count == 0 {
        return Err(domain!("audit run needs count >= 1"));
    }
    spec.validate()?;
    let rows = (0..count)
        .into_par_iter()
        .map(|id| {
            let s = derive_seed(seed, id);
            let g = random_event_system(spec, s)?;
            Ok(AuditRow {
                system_id: id,
                seed: s,
                family: g.family,
                dep_family: g.dep_family,
                d: g.system.d(),
                atoms: g.system.space().len(),
                audit: audit(&g.system, &g.dep)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(spec.clone(), count, seed, rows))
}

fn summarize(spec: SystemGenSpec, count: u64, seed: u64, rows: Vec<AuditRow>) -> AuditSummary {
    let mut worst = Residuals::new();
    let mut violations = Vec::new();
    let (mut chains_held, mut dubickas_checked, mut arratia_held) = (0, 0, 0);
    let mut max_gap = 0.0f64;
    for r in &rows {
        let a = &r.audit;
        worst.update(a);
        chains_held += a.chains_pass as u64;
        dubickas_checked += a.dubickas_valid as u64;
        arratia_held += a.arratia_holds as u64;
        max_gap = max_gap.max(a.exact_gap);
        let failed = r.failures();
        if !failed.is_empty() {
            violations.push(Violation {
                system_id: r.system_id,
                seed: r.seed,
                failed: failed.into_iter().map(String::from).collect(),
            });
        }
    }
    AuditSummary {
        count,
        seed,
        spec,
        violations,
        worst,
        chains_held,
        dubickas_checked,
        max_gap,
        arratia_held,
        rows,
    }
}
