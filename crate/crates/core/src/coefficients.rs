//! Mixing and declustering coefficients of an event system relative to a
//! dependency graph, and the bounds on `P(no event occurs)` built from them.
//!
//! Indices are zero-based: the predecessors of event `i` are `0..i`. For
//! each `i` they split into the weakly dependent ones (`j ∉ D_i`) and the
//! strongly dependent ones (`j ∈ D_i`). Empty unions have probability 0 and
//! empty products equal 1. All right-hand sides are reported unclamped.

use crate::error::Result;
use crate::numeric::{accurate_sum, NeumaierSum};
use crate::prob::{AtomSet, DependencyGraph, EventSystem};
use serde::{Deserialize, Serialize};

/// Residual slack used by every pass flag.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// `phi_minus` at or below this counts as a true dependency graph for the
/// Dubickas bound.
pub const DUBICKAS_PHI_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixing {
    pub phi: f64,
    /// Largest positive excess `P(U | A_i) - P(U)`, floored at 0.
    pub phi_plus: f64,
    /// Largest positive deficit `P(U) - P(U | A_i)`, floored at 0.
    pub phi_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Declustering {
    pub delta1: f64,
    pub delta2: f64,
    pub delta1_prime: f64,
    pub delta2_prime: f64,
    pub delta1_dprime: f64,
    pub delta2_dprime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub phi: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta1_prime: f64,
    pub delta2_prime: f64,
    pub delta1_dprime: f64,
    pub delta2_dprime: f64,
    pub phi_tilde: f64,
    /// `Σ_i P(A_i)·|P(∪_{j∉D_i∪{i}} A_j | A_i) − P(∪_{j∉D_i∪{i}} A_j)|`,
    /// a lower bound for `phi_tilde`.
    pub phi_tilde_union_lower: f64,
}

impl CoefficientReport {
    /// Whether `Δ1 ≤ Δ1' ≤ Δ1''` and `Δ2 ≤ Δ2' ≤ Δ2''` hold within `tol`.
    pub fn chains_hold(&self, tol: f64) -> bool {
        self.delta1 <= self.delta1_prime + tol
            && self.delta1_prime <= self.delta1_dprime + tol
            && self.delta2 <= self.delta2_prime + tol
            && self.delta2_prime <= self.delta2_dprime + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub none_occur: f64,
    pub indep_product: f64,
    /// `|P(∩ Ā_i) − ∏ P(Ā_i)|`.
    pub exact_gap: f64,
    pub thm1_rhs: f64,
    pub upper_rhs: f64,
    pub lower_rhs: f64,
    pub dubickas_rhs: f64,
    /// The Dubickas bound only applies when `phi_minus` vanishes.
    pub dubickas_valid: bool,
    pub arratia_rhs: f64,
    pub sum_p_sq: f64,
    pub thm1_pass: bool,
    pub upper_pass: bool,
    pub lower_pass: bool,
    /// `None` when the Dubickas bound does not apply.
    pub dubickas_pass: Option<bool>,
    /// Comparison only: the Arratia–Goldstein–Gordon value is not an
    /// inequality this crate guarantees under its own hypotheses.
    pub arratia_holds: bool,
    pub arratia_ineq_pass: bool,
    pub chains_pass: bool,
    pub coefficients: CoefficientReport,
}

impl BoundAudit {
    /// The inequalities that must hold on every input.
    pub fn all_required_pass(&self) -> bool {
        self.thm1_pass
            && self.upper_pass
            && self.lower_pass
            && self.dubickas_pass.unwrap_or(true)
            && self.arratia_ineq_pass
            && self.chains_pass
    }
}

/// Per-index split of the predecessors `0..i` into weak and strong parts.
fn predecessor_masks(system: &EventSystem, dep: &DependencyGraph, i: usize) -> (AtomSet, AtomSet, Vec<usize>) {
    let strong: Vec<usize> = (0..i).filter(|&j| dep.contains(i, j)).collect();
    let weak = system.union_mask((0..i).filter(|&j| !dep.contains(i, j)));
    let strong_mask = system.union_mask(strong.iter().copied());
    (weak, strong_mask, strong)
}

/// `φ`, `φ+` and `φ−`.
pub fn mixing_phi(system: &EventSystem, dep: &DependencyGraph) -> Result<Mixing> {
    dep.check_matches(system.d())?;
    let probs = system.space().atom_probs();
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for i in 0..system.d() {
        let (weak, _, _) = predecessor_masks(system, dep, i);
        let diff = if weak.is_empty() {
            0.0
        } else {
            let p_union = weak.measure(probs);
            let cond = weak.intersection(system.mask(i)).measure(probs) / system.probs()[i];
            cond - p_union
        };
        plus = plus.max(diff);
        minus = minus.max(-diff);
    }
    Ok(Mixing {
        phi: plus.max(minus),
        phi_plus: plus,
        phi_minus: minus,
    })
}

/// `∏_{k > i} P(Ā_k)` for every `i`.
fn suffix_products(system: &EventSystem) -> Vec<f64> {
    let d = system.d();
    let mut out = vec![1.0; d];
    for i in (0..d.saturating_sub(1)).rev() {
        out[i] = out[i + 1] * (1.0 - system.probs()[i + 1]);
    }
    out
}

/// `Δ1`, `Δ2`, their union-bound relaxations and the variants summed over
/// the whole of `D_i`.
pub fn declustering(system: &EventSystem, dep: &DependencyGraph) -> Result<Declustering> {
    dep.check_matches(system.d())?;
    let probs = system.space().atom_probs();
    let p = system.probs();
    let tail = suffix_products(system);
    let joint = |i: usize, j: usize| system.mask(i).intersection(system.mask(j)).measure(probs);
    let [mut d1, mut d2, mut d1p, mut d2p, mut d1pp, mut d2pp] = [NeumaierSum::new(); 6];
    for i in 0..system.d() {
        let (_, strong_mask, strong) = predecessor_masks(system, dep, i);
        if !strong.is_empty() {
            d1.add(strong_mask.intersection(system.mask(i)).measure(probs) * tail[i]);
            d2.add(p[i] * strong_mask.measure(probs) * tail[i]);
        }
        for &j in &strong {
            d1p.add(joint(i, j));
            d2p.add(p[i] * p[j]);
        }
        for &j in dep.neighbors(i) {
            d1pp.add(joint(i, j));
            d2pp.add(p[i] * p[j]);
        }
    }
    Ok(Declustering {
        delta1: d1.total(),
        delta2: d2.total(),
        delta1_prime: d1p.total(),
        delta2_prime: d2p.total(),
        delta1_dprime: d1pp.total(),
        delta2_dprime: d2pp.total(),
    })
}

/// Indices outside `D_i ∪ {i}`.
fn outside(dep: &DependencyGraph, i: usize) -> impl Iterator<Item = usize> + '_ {
    (0..dep.d()).filter(move |&j| j != i && !dep.contains(i, j))
}

/// `φ̃ = Σ_i P(A_i) Σ_k |P(Z^i = k | A_i) − P(Z^i = k)|` with
/// `Z^i = Σ_{j ∉ D_i ∪ {i}} 1(A_j)`.
pub fn arratia_phi_tilde(system: &EventSystem, dep: &DependencyGraph) -> Result<f64> {
    dep.check_matches(system.d())?;
    let probs = system.space().atom_probs();
    let atoms = probs.len();
    let mut total = NeumaierSum::new();
    let mut counts = vec![0usize; atoms];
    for i in 0..system.d() {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut max_count = 0;
        for j in outside(dep, i) {
            for &a in system.events()[j].atoms() {
                counts[a] += 1;
            }
            max_count += 1;
        }
        let mut uncond = vec![NeumaierSum::new(); max_count + 1];
        let mut joint = vec![NeumaierSum::new(); max_count + 1];
        let own = system.mask(i);
        for a in 0..atoms {
            uncond[counts[a]].add(probs[a]);
            if own.contains(a) {
                joint[counts[a]].add(probs[a]);
            }
        }
        let pa = system.probs()[i];
        let l1 = accurate_sum(
            uncond
                .iter()
                .zip(&joint)
                .map(|(u, j)| (j.total() / pa - u.total()).abs()),
        );
        total.add(pa * l1);
    }
    Ok(total.total())
}

/// The union form that lower-bounds `φ̃`.
pub fn arratia_union_lower(system: &EventSystem, dep: &DependencyGraph) -> Result<f64> {
    dep.check_matches(system.d())?;
    let probs = system.space().atom_probs();
    Ok(accurate_sum((0..system.d()).map(|i| {
        let u = system.union_mask(outside(dep, i));
        let pa = system.probs()[i];
        let cond = u.intersection(system.mask(i)).measure(probs) / pa;
        pa * (cond - u.measure(probs)).abs()
    })))
}

pub fn coefficient_report(system: &EventSystem, dep: &DependencyGraph) -> Result<CoefficientReport> {
    let m = mixing_phi(system, dep)?;
    let c = declustering(system, dep)?;
    Ok(CoefficientReport {
        phi: m.phi,
        phi_plus: m.phi_plus,
        phi_minus: m.phi_minus,
        delta1: c.delta1,
        delta2: c.delta2,
        delta1_prime: c.delta1_prime,
        delta2_prime: c.delta2_prime,
        delta1_dprime: c.delta1_dprime,
        delta2_dprime: c.delta2_dprime,
        phi_tilde: arratia_phi_tilde(system, dep)?,
        phi_tilde_union_lower: arratia_union_lower(system, dep)?,
    })
}

/// Evaluates every bound on `system` and checks each against the exact
/// value of `P(no event occurs)`.
pub fn audit(system: &EventSystem, dep: &DependencyGraph) -> Result<BoundAudit> {
    let c = coefficient_report(system, dep)?;
    let none = system.none_occur();
    let prod = system.indep_product();
    let gap = (none - prod).abs();
    let rest = 1.0 - prod;
    let thm1_rhs = rest * c.phi + c.delta1.max(c.delta2);
    let upper_rhs = prod + c.phi_plus * rest + c.delta1;
    let lower_rhs = prod - c.phi_minus * rest - c.delta2;
    let dubickas_rhs = prod - c.delta2;
    let dubickas_valid = c.phi_minus <= DUBICKAS_PHI_TOLERANCE;
    let sum_p_sq = accurate_sum(system.probs().iter().map(|p| p * p));
    let arratia_rhs = 2.0 * c.phi_tilde + 4.0 * c.delta1_dprime + 4.0 * c.delta2_dprime + 4.0 * sum_p_sq;
    Ok(BoundAudit {
        none_occur: none,
        indep_product: prod,
        exact_gap: gap,
        thm1_rhs,
        upper_rhs,
        lower_rhs,
        dubickas_rhs,
        dubickas_valid,
        arratia_rhs,
        sum_p_sq,
        thm1_pass: gap <= thm1_rhs + AUDIT_TOLERANCE,
        upper_pass: none <= upper_rhs + AUDIT_TOLERANCE,
        lower_pass: none >= lower_rhs - AUDIT_TOLERANCE,
        dubickas_pass: dubickas_valid.then_some(none >= dubickas_rhs - AUDIT_TOLERANCE),
        arratia_holds: gap <= arratia_rhs + AUDIT_TOLERANCE,
        arratia_ineq_pass: c.phi_tilde >= c.phi_tilde_union_lower - AUDIT_TOLERANCE,
        chains_pass: c.chains_hold(AUDIT_TOLERANCE),
        coefficients: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::reference::{correlated_pair, xor_system};
    use crate::prob::{Event, ProbSpace, ProductSpace};

    const EXACT: f64 = 1e-12;

    fn independent_system() -> EventSystem {
        let ps = ProductSpace::new(vec![vec![0.6, 0.4], vec![0.2, 0.8], vec![0.5, 0.3, 0.2]]).unwrap();
        let events = vec![ps.event(|c| c[0] == 1), ps.event(|c| c[1] == 0), ps.event(|c| c[2] >= 1)];
        EventSystem::new(ps.space().unwrap(), events).unwrap()
    }

    /// Enumeration oracle for one φ term, written from the definition with
    /// explicit atom loops instead of bitsets.
    fn phi_term_oracle(sys: &EventSystem, weak: &[usize], i: usize) -> f64 {
        if weak.is_empty() {
            return 0.0;
        }
        let probs = sys.space().atom_probs();
        let in_union = |a: usize| weak.iter().any(|&j| sys.events()[j].atoms().contains(&a));
        let in_i = |a: usize| sys.events()[i].atoms().contains(&a);
        let pu: f64 = (0..probs.len()).filter(|&a| in_union(a)).map(|a| probs[a]).sum();
        let pj: f64 = (0..probs.len()).filter(|&a| in_union(a) && in_i(a)).map(|a| probs[a]).sum();
        pj / sys.probs()[i] - pu
    }

    #[test]
    fn xor_mixing() {
        let x = xor_system();
        let m = mixing_phi(&x, &DependencyGraph::empty(3)).unwrap();
        assert!((m.phi - 0.25).abs() < EXACT);
        assert!((m.phi_plus - 0.25).abs() < EXACT);
        assert!(m.phi_minus.abs() < EXACT);
        assert!((phi_term_oracle(&x, &[0, 1], 2) - 0.25).abs() < EXACT);
        assert!(phi_term_oracle(&x, &[0], 1).abs() < EXACT);
    }

    #[test]
    fn independence_gives_zero_mixing() {
        let s = independent_system();
        for dep in [DependencyGraph::empty(3), DependencyGraph::complete(3), DependencyGraph::band(3, 1)] {
            let m = mixing_phi(&s, &dep).unwrap();
            assert!(m.phi < EXACT && m.phi_plus < EXACT && m.phi_minus < EXACT);
            assert!(arratia_phi_tilde(&s, &dep).unwrap() < EXACT);
        }
    }

    #[test]
    fn identical_events_mix_maximally() {
        let space = ProbSpace::new(vec![0.3, 0.7]).unwrap();
        let sys = EventSystem::new(space, vec![Event::new([0]), Event::new([0])]).unwrap();
        let m = mixing_phi(&sys, &DependencyGraph::empty(2)).unwrap();
        assert!((m.phi - 0.7).abs() < EXACT);
        assert!((m.phi_plus - 0.7).abs() < EXACT);
    }

    #[test]
    fn xor_declustering_complete_graph() {
        let c = declustering(&xor_system(), &DependencyGraph::complete(3)).unwrap();
        assert!((c.delta1 - 0.625).abs() < EXACT);
        assert!((c.delta2 - 0.5).abs() < EXACT);
        // Δ1' = P(A2A1) + P(A3A1) + P(A3A2) = 3/4; Δ2' = 3 · 1/4.
        assert!((c.delta1_prime - 0.75).abs() < EXACT);
        assert!((c.delta2_prime - 0.75).abs() < EXACT);
        assert!((c.delta1_dprime - 1.5).abs() < EXACT);
        assert!((c.delta2_dprime - 1.5).abs() < EXACT);
    }

    #[test]
    fn empty_graph_and_single_event_declustering() {
        let c = declustering(&xor_system(), &DependencyGraph::empty(3)).unwrap();
        assert_eq!((c.delta1, c.delta2), (0.0, 0.0));
        let space = ProbSpace::new(vec![0.3, 0.7]).unwrap();
        let one = EventSystem::new(space, vec![Event::new([0])]).unwrap();
        let c = declustering(&one, &DependencyGraph::empty(1)).unwrap();
        assert_eq!(
            [c.delta1, c.delta2, c.delta1_prime, c.delta2_prime, c.delta1_dprime, c.delta2_dprime],
            [0.0; 6]
        );
    }

    #[test]
    fn phi_tilde_examples() {
        // i=1: 0.5 · (|0.6-0.4| + |0.4-0.6|); i=2: 0.4 · (|0.75-0.5| + |0.25-0.5|).
        let v = arratia_phi_tilde(&correlated_pair(), &DependencyGraph::empty(2)).unwrap();
        assert!((v - 0.4).abs() < EXACT, "{v}");
        let full = arratia_phi_tilde(&xor_system(), &DependencyGraph::complete(3)).unwrap();
        assert!(full.abs() < EXACT);
    }

    #[test]
    fn audit_xor() {
        let a = audit(&xor_system(), &DependencyGraph::empty(3)).unwrap();
        assert!((a.exact_gap - 0.125).abs() < EXACT);
        assert!((a.thm1_rhs - 0.21875).abs() < EXACT);
        assert!(a.thm1_pass && a.all_required_pass());
    }

    #[test]
    fn audit_independent_and_single() {
        let a = audit(&independent_system(), &DependencyGraph::empty(3)).unwrap();
        assert!(a.exact_gap < EXACT);
        assert!(a.thm1_rhs >= 0.0 && a.upper_rhs >= 0.0 && a.arratia_rhs >= 0.0);
        assert!(a.all_required_pass());
        assert_eq!(a.dubickas_pass, Some(true));

        let space = ProbSpace::new(vec![0.3, 0.7]).unwrap();
        let one = EventSystem::new(space, vec![Event::new([0])]).unwrap();
        let a = audit(&one, &DependencyGraph::empty(1)).unwrap();
        assert!(a.exact_gap < EXACT && a.thm1_rhs.abs() < EXACT && a.thm1_pass);
    }

    #[test]
    fn mismatched_graph_is_structural_error() {
        assert!(mixing_phi(&xor_system(), &DependencyGraph::empty(2)).is_err());
        assert!(audit(&xor_system(), &DependencyGraph::complete(4)).is_err());
    }

    #[test]
    fn ordering_changes_coefficients() {
        let x = xor_system();
        let dep = DependencyGraph::empty(3);
        let perm = [2, 0, 1];
        let a = mixing_phi(&x, &dep).unwrap();
        let b = mixing_phi(&x.permuted(&perm).unwrap(), &dep.permuted(&perm).unwrap()).unwrap();
        // Any order of the XOR triple still ends with a pairwise-independent
        // event conditioned on the other two.
        assert!((a.phi - b.phi).abs() < EXACT);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_system() -> impl Strategy<Value = (EventSystem, DependencyGraph)> {
            (1usize..7, 2usize..24).prop_flat_map(|(d, atoms)| {
                (
                    prop::collection::vec(0.01f64..1.0, atoms),
                    prop::collection::vec(prop::collection::vec(any::<bool>(), atoms), d),
                    prop::collection::vec(prop::collection::vec(any::<bool>(), d), d),
                )
                    .prop_filter_map("needs positive events", move |(w, ev, adj)| {
                        let total: f64 = w.iter().sum();
                        let space = ProbSpace::new(w.iter().map(|x| x / total).collect()).ok()?;
                        let events: Vec<Event> = ev
                            .iter()
                            .map(|m| Event::new((0..atoms).filter(|&a| m[a])))
                            .collect();
                        if events.iter().any(|e| e.atoms().is_empty()) {
                            return None;
                        }
                        let sys = EventSystem::new(space, events).ok()?;
                        let dep = DependencyGraph::from_fn(d, |i, j| adj[i][j]);
                        Some((sys, dep))
                    })
            })
        }

        proptest! {
            #[test]
            fn every_bound_holds((sys, dep) in arb_system()) {
                let a = audit(&sys, &dep).unwrap();
                prop_assert!(a.thm1_pass, "{a:?}");
                prop_assert!(a.upper_pass && a.lower_pass);
                prop_assert!(a.chains_pass && a.arratia_ineq_pass);
                let c = a.coefficients;
                prop_assert!((c.phi - c.phi_plus.max(c.phi_minus)).abs() < 1e-15);
                prop_assert!([c.phi, c.phi_plus, c.phi_minus, c.delta1, c.delta2, c.delta1_prime,
                    c.delta2_prime, c.delta1_dprime, c.delta2_dprime, c.phi_tilde].iter().all(|v| *v >= 0.0));
                if c.phi_minus == 0.0 {
                    prop_assert!(a.lower_rhs >= a.dubickas_rhs - 1e-12);
                }
            }

            #[test]
            fn phi_matches_explicit_enumeration((sys, dep) in arb_system()) {
                let m = mixing_phi(&sys, &dep).unwrap();
                let want = (0..sys.d())
                    .map(|i| {
                        let weak: Vec<usize> = (0..i).filter(|&j| !dep.contains(i, j)).collect();
                        phi_term_oracle(&sys, &weak, i).abs()
                    })
                    .fold(0.0, f64::max);
                prop_assert!((m.phi - want).abs() < 1e-12);
            }
        }
    }
}
