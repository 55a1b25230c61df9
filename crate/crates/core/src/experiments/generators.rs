use crate::error::{domain, Result};
use crate::prob::{DependencyGraph, Event, EventSystem, ProbSpace, ProductSpace};
use crate::rng::entity_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenFamily {
    /// Random atom weights and arbitrary random events.
    Uniform,
    /// Event `i` depends only on coordinate `i` of a product space.
    Product,
    /// Fair bits plus parities of bit subsets.
    Xor,
    /// Increasing threshold events of independent ordered coordinates.
    Monotone,
    /// Events grouped into blocks; each block reads its own coordinate.
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum DepFamily {
    Empty,
    Complete,
    /// Each ordered pair `(i, j)` put in `D_i` with probability `q`.
    Random { q: f64 },
    /// `D_i = {j : 0 < |i - j| <= width}`.
    Band { width: usize },
    /// The true dependency graph where the family has one (blocks of the
    /// clustered family, the empty graph for product systems), the complete
    /// graph otherwise.
    Natural,
}

/// Ranges and families for random event systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemGenSpec {
    pub d_min: usize,
    pub d_max: usize,
    pub atoms_min: usize,
    pub atoms_max: usize,
    pub families: Vec<GenFamily>,
    pub deps: Vec<DepFamily>,
}

impl Default for SystemGenSpec {
    fn default() -> Self {
        Self {
            d_min: 1,
            d_max: 8,
            atoms_min: 2,
            atoms_max: 256,
            families: vec![
                GenFamily::Uniform,
                GenFamily::Product,
                GenFamily::Xor,
                GenFamily::Monotone,
                GenFamily::Clustered,
            ],
            deps: vec![
                DepFamily::Empty,
                DepFamily::Complete,
                DepFamily::Random { q: 0.3 },
                DepFamily::Band { width: 2 },
                DepFamily::Natural,
            ],
        }
    }
}

impl SystemGenSpec {
    pub fn with_families(families: Vec<GenFamily>, deps: Vec<DepFamily>) -> Self {
        Self {
            families,
            deps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_min == 0 || self.d_min > self.d_max {
            return Err(domain!("event count range [{}, {}] is empty or starts at 0", self.d_min, self.d_max));
        }
        if self.atoms_min < 2 || self.atoms_min > self.atoms_max {
            return Err(domain!("atom range [{}, {}] is empty or below 2", self.atoms_min, self.atoms_max));
        }
        if self.families.is_empty() || self.deps.is_empty() {
            return Err(domain!("family lists must be nonempty"));
        }
        if let Some(DepFamily::Random { q }) = self.deps.iter().find(|f| matches!(f, DepFamily::Random { q } if !(0.0..=1.0).contains(q))) {
            return Err(domain!("random dependency probability must lie in [0, 1] (q={q})"));
        }
        Ok(())
    }
}

/// A generated system together with how it was produced.
#[derive(Debug, Clone)]
pub struct GeneratedSystem {
    pub family: GenFamily,
    pub dep_family: DepFamily,
    pub system: EventSystem,
    pub dep: DependencyGraph,
}

/// Event count and the block of each event for the clustered family.
struct Layout {
    d: usize,
    blocks: Option<Vec<usize>>,
}

fn random_weights(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Random `(radix, marginal)` per coordinate with product of radices at
/// most `cap`.
fn random_marginals(rng: &mut ChaCha8Rng, coords: usize, cap: usize) -> Vec<Vec<f64>> {
    let mut remaining = cap;
    (0..coords)
        .map(|c| {
            let left = coords - c - 1;
            // Leave room for radix 2 in each later coordinate.
            let room = (remaining >> left).clamp(2, 6);
            let r = rng.random_range(2..=room);
            remaining /= r;
            random_weights(rng, r)
        })
        .collect()
}

/// Nonempty random subset of `0..r` (the full set allowed).
fn random_values(rng: &mut ChaCha8Rng, r: usize) -> Vec<bool> {
    loop {
        let v: Vec<bool> = (0..r).map(|_| rng.random_bool(0.5)).collect();
        if v.iter().any(|&b| b) {
            return v;
        }
    }
}

fn uniform_family(rng: &mut ChaCha8Rng, d: usize, spec: &SystemGenSpec) -> Result<EventSystem> {
    let atoms = rng.random_range(spec.atoms_min..=spec.atoms_max);
    let space = ProbSpace::new(random_weights(rng, atoms))?;
    let events = (0..d)
        .map(|_| {
            let q = rng.random_range(0.05..0.6);
            loop {
                let e = Event::new((0..atoms).filter(|_| rng.random_bool(q)));
                if !e.atoms().is_empty() {
                    return e;
                }
            }
        })
        .collect();
    EventSystem::new(space, events)
}

fn product_family(rng: &mut ChaCha8Rng, d: usize, spec: &SystemGenSpec) -> Result<EventSystem> {
    let ps = ProductSpace::new(random_marginals(rng, d, spec.atoms_max))?;
    let choices: Vec<Vec<bool>> = (0..d).map(|c| random_values(rng, ps_radix(&ps, c))).collect();
    let events = (0..d).map(|i| ps.event(|x| choices[i][x[i]])).collect();
    EventSystem::new(ps.space()?, events)
}

fn ps_radix(ps: &ProductSpace, c: usize) -> usize {
    ps.decode(ps.atom_count() - 1)[c] + 1
}

/// Bits `0..m`, then the parity of all bits, then parities of random
/// subsets of at least two bits.
fn xor_family(rng: &mut ChaCha8Rng, d: usize, spec: &SystemGenSpec) -> Result<EventSystem> {
    let max_bits = (usize::BITS - 1 - spec.atoms_max.leading_zeros()) as usize;
    let m = if d <= 2 { d } else { (d - 1).min(max_bits) }.max(1);
    let atoms = 1usize << m;
    let bit = |a: usize, b: usize| a >> b & 1 == 1;
    let mut events: Vec<Event> = (0..m.min(d)).map(|b| Event::new((0..atoms).filter(|&a| bit(a, b)))).collect();
    if d > m {
        events.push(Event::new((0..atoms).filter(|&a| (a.count_ones() & 1) == 1)));
    }
    while events.len() < d {
        let mask = loop {
            let mask = rng.random_range(0..atoms);
            if mask.count_ones() >= 2 {
                break mask;
            }
        };
        events.push(Event::new((0..atoms).filter(|&a| ((a & mask).count_ones() & 1) == 1)));
    }
    EventSystem::new(ProbSpace::uniform(atoms)?, events)
}

/// `A_i = {x : Σ_{j∈S_i} w_j x_j ≥ θ_i}` with nonnegative weights: every
/// event is increasing in each coordinate.
fn monotone_family(rng: &mut ChaCha8Rng, d: usize, spec: &SystemGenSpec) -> Result<EventSystem> {
    let coords = rng.random_range(1..=d.clamp(1, 6));
    let marg = random_marginals(rng, coords, spec.atoms_max);
    let radix: Vec<usize> = marg.iter().map(Vec::len).collect();
    let ps = ProductSpace::new(marg)?;
    let events = (0..d)
        .map(|_| {
            let weights: Vec<f64> = (0..coords)
                .map(|_| if rng.random_bool(0.6) { rng.random_range(0.1..1.0) } else { 0.0 })
                .collect();
            let top: f64 = weights.iter().zip(&radix).map(|(w, &r)| w * (r - 1) as f64).sum();
            let theta = if top > 0.0 { rng.random_range(0.0..=top) } else { 0.0 };
            ps.event(|x| weights.iter().zip(x).map(|(w, &v)| w * v as f64).sum::<f64>() >= theta)
        })
        .collect();
    EventSystem::new(ps.space()?, events)
}

fn clustered_family(rng: &mut ChaCha8Rng, d: usize, spec: &SystemGenSpec, blocks: &[usize]) -> Result<EventSystem> {
    let count = blocks.iter().max().map_or(0, |b| b + 1);
    let ps = ProductSpace::new(random_marginals(rng, count, spec.atoms_max))?;
    let events = (0..d)
        .map(|i| {
            let c = blocks[i];
            let v = random_values(rng, ps_radix(&ps, c));
            ps.event(|x| v[x[c]])
        })
        .collect();
    EventSystem::new(ps.space()?, events)
}

fn layout(rng: &mut ChaCha8Rng, family: GenFamily, spec: &SystemGenSpec) -> Layout {
    let mut d = rng.random_range(spec.d_min..=spec.d_max);
    let cap_bits = (usize::BITS - 1 - spec.atoms_max.leading_zeros()) as usize;
    if family == GenFamily::Product {
        // One coordinate of radix >= 2 per event.
        d = d.min(cap_bits.max(1));
    }
    let blocks = (family == GenFamily::Clustered).then(|| {
        let count = rng.random_range(1..=d.min(cap_bits.max(1)));
        let mut b: Vec<usize> = (0..d).map(|i| if i < count { i } else { rng.random_range(0..count) }).collect();
        // Interleave blocks so that strong dependence is not only local.
        for i in (1..d).rev() {
            let j = rng.random_range(0..=i);
            b.swap(i, j);
        }
        b
    });
    Layout { d, blocks }
}

fn dependency(rng: &mut ChaCha8Rng, fam: DepFamily, family: GenFamily, lay: &Layout, d: usize) -> DependencyGraph {
    match fam {
        DepFamily::Empty => DependencyGraph::empty(d),
        DepFamily::Complete => DependencyGraph::complete(d),
        DepFamily::Random { q } => {
            let draws: Vec<bool> = (0..d * d).map(|_| rng.random_bool(q)).collect();
            DependencyGraph::from_fn(d, |i, j| draws[i * d + j])
        }
        DepFamily::Band { width } => DependencyGraph::band(d, width),
        DepFamily::Natural => match (&lay.blocks, family) {
            (Some(b), _) => DependencyGraph::from_fn(d, |i, j| b[i] == b[j]),
            (None, GenFamily::Product) => DependencyGraph::empty(d),
            _ => DependencyGraph::complete(d),
        },
    }
}

/// Deterministic random system for `seed`. Events of probability zero are
/// redrawn by construction, so no event is ever filtered out.
pub fn random_event_system(spec: &SystemGenSpec, seed: u64) -> Result<GeneratedSystem> {
    spec.validate()?;
    let mut rng = entity_rng(seed, 0);
    let family = spec.families[rng.random_range(0..spec.families.len())];
    let dep_family = spec.deps[rng.random_range(0..spec.deps.len())];
    let lay = layout(&mut rng, family, spec);
    let d = lay.d;
    let system = match family {
        GenFamily::Uniform => uniform_family(&mut rng, d, spec)?,
        GenFamily::Product => product_family(&mut rng, d, spec)?,
        GenFamily::Xor => xor_family(&mut rng, d, spec)?,
        GenFamily::Monotone => monotone_family(&mut rng, d, spec)?,
        GenFamily::Clustered => clustered_family(&mut rng, d, spec, lay.blocks.as_deref().unwrap_or(&[]))?,
    };
    debug_assert_eq!(system.d(), d);
    let dep = dependency(&mut rng, dep_family, family, &lay, d);
    Ok(GeneratedSystem {
        family,
        dep_family,
        system,
        dep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{declustering, mixing_phi};
    use crate::prob::reference::xor_system;

    fn only(f: GenFamily) -> SystemGenSpec {
        SystemGenSpec::with_families(vec![f], SystemGenSpec::default().deps)
    }

    #[test]
    fn product_family_has_no_mixing() {
        for seed in 0..200 {
            let g = random_event_system(&only(GenFamily::Product), seed).unwrap();
            assert!(g.system.space().len() <= 256);
            let m = mixing_phi(&g.system, &g.dep).unwrap();
            assert!(m.phi < 1e-12, "seed {seed}: {}", m.phi);
        }
    }

    #[test]
    fn xor_family_reproduces_reference() {
        let spec = SystemGenSpec {
            d_min: 3,
            d_max: 3,
            ..only(GenFamily::Xor)
        };
        let g = random_event_system(&spec, 4).unwrap();
        let r = xor_system();
        assert_eq!(g.system.events(), r.events());
        assert_eq!(g.system.space(), r.space());
    }

    #[test]
    fn deterministic_and_valid() {
        let spec = SystemGenSpec::default();
        for seed in 0..300 {
            let a = random_event_system(&spec, seed).unwrap();
            let b = random_event_system(&spec, seed).unwrap();
            assert_eq!(a.system.events(), b.system.events());
            assert_eq!(a.dep, b.dep);
            let s = &a.system;
            assert!((1..=8).contains(&s.d()) && s.space().len() <= 256);
            assert!(s.dropped().is_empty() && s.probs().iter().all(|&p| p > 0.0));
            a.dep.check_matches(s.d()).unwrap();
        }
    }

    #[test]
    fn clustered_natural_graph_is_a_true_dependency_graph() {
        let spec = SystemGenSpec::with_families(vec![GenFamily::Clustered], vec![DepFamily::Natural]);
        for seed in 0..200 {
            let g = random_event_system(&spec, seed).unwrap();
            assert!(mixing_phi(&g.system, &g.dep).unwrap().phi_minus <= 1e-12);
        }
    }

    #[test]
    fn monotone_family_is_positively_correlated() {
        for seed in 0..200 {
            let g = random_event_system(&only(GenFamily::Monotone), seed).unwrap();
            let c = declustering(&g.system, &g.dep).unwrap();
            assert!(c.delta2_prime <= c.delta1_prime + 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn invalid_specs() {
        let s = SystemGenSpec {
            d_min: 0,
            ..SystemGenSpec::default()
        };
        assert!(s.validate().is_err());
        let s = SystemGenSpec::with_families(vec![], vec![DepFamily::Empty]);
        assert!(s.validate().is_err());
        let s = SystemGenSpec::with_families(vec![GenFamily::Xor], vec![DepFamily::Random { q: 2.0 }]);
        assert!(s.validate().is_err());
    }
}
