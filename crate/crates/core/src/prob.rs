//! Finite probability spaces, events and dependency graphs.
//!
//! Everything downstream is computed by exact enumeration over atoms, so
//! these types are the oracle the coefficient audit is checked against.

use crate::error::{domain, Error, Result};
use crate::numeric::{accurate_sum, NeumaierSum};
use serde::{Deserialize, Serialize};

/// Default cap on the number of atoms of a [`ProbSpace`].
pub const DEFAULT_ATOM_CAP: usize = 1 << 20;

const MASS_TOLERANCE: f64 = 1e-12;

/// A probability measure on finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbSpace {
    atom_probs: Vec<f64>,
}

impl ProbSpace {
    pub fn new(atom_probs: Vec<f64>) -> Result<Self> {
        Self::with_cap(atom_probs, DEFAULT_ATOM_CAP)
    }

    pub fn with_cap(atom_probs: Vec<f64>, cap: usize) -> Result<Self> {
        if atom_probs.is_empty() {
            return Err(Error::Structural("probability space has no atoms".into()));
        }
        if atom_probs.len() > cap {
            return Err(Error::Resource(format!(
                "{} atoms exceed the cap of {cap}",
                atom_probs.len()
            )));
        }
        if let Some((i, p)) = atom_probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(domain!("atom {i} has probability {p} outside [0, 1]"));
        }
        let total = accurate_sum(atom_probs.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(domain!("atom probabilities sum to {total}, not 1"));
        }
        Ok(Self { atom_probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("probability space has no atoms".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.atom_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_probs.is_empty()
    }

    pub fn atom_probs(&self) -> &[f64] {
        &self.atom_probs
    }
}

/// Independent coordinates with finite alphabets. Atoms are indexed in
/// mixed radix with coordinate 0 varying fastest.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    marginals: Vec<Vec<f64>>,
}

impl ProductSpace {
    pub fn new(marginals: Vec<Vec<f64>>) -> Result<Self> {
        for (c, m) in marginals.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::Structural(format!("coordinate {c} has an empty alphabet")));
            }
            let s = accurate_sum(m.iter().copied());
            if (s - 1.0).abs() > MASS_TOLERANCE || m.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(domain!("coordinate {c} marginal is not a probability vector"));
            }
        }
        Ok(Self { marginals })
    }

    pub fn coordinates(&self) -> usize {
        self.marginals.len()
    }

    pub fn atom_count(&self) -> usize {
        self.marginals.iter().map(Vec::len).product()
    }

    /// Coordinate values of an atom.
    pub fn decode(&self, mut atom: usize) -> Vec<usize> {
        self.marginals
            .iter()
            .map(|m| {
                let v = atom % m.len();
                atom /= m.len();
                v
            })
            .collect()
    }

    pub fn space(&self) -> Result<ProbSpace> {
        let probs = (0..self.atom_count())
            .map(|a| {
                self.decode(a)
                    .iter()
                    .zip(&self.marginals)
                    .map(|(&v, m)| m[v])
                    .product()
            })
            .collect::<Vec<f64>>();
        // Products of normalized marginals can drift by a few ulps.
        let total = accurate_sum(probs.iter().copied());
        ProbSpace::new(probs.into_iter().map(|p| p / total).collect())
    }

    /// The event `{ω : pred(coordinates of ω)}`.
    pub fn event<F: Fn(&[usize]) -> bool>(&self, pred: F) -> Event {
        Event::new((0..self.atom_count()).filter(|&a| pred(&self.decode(a))))
    }
}

/// A set of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    atoms: Vec<usize>,
}

impl Event {
    pub fn new<I: IntoIterator<Item = usize>>(atoms: I) -> Self {
        let mut atoms: Vec<usize> = atoms.into_iter().collect();
        atoms.sort_unstable();
        atoms.dedup();
        Self { atoms }
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }

    fn check(&self, space: &ProbSpace) -> Result<()> {
        match self.atoms.last() {
            Some(&a) if a >= space.len() => Err(Error::Structural(format!(
                "atom index {a} out of range for a space of {} atoms",
                space.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Bitset over the atoms of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSet {
    words: Vec<u64>,
}

impl AtomSet {
    pub fn none(atoms: usize) -> Self {
        Self {
            words: vec![0; atoms.div_ceil(64)],
        }
    }

    pub fn from_event(e: &Event, atoms: usize) -> Self {
        let mut s = Self::none(atoms);
        for &a in e.atoms() {
            s.words[a / 64] |= 1 << (a % 64);
        }
        s
    }

    #[inline]
    pub fn contains(&self, atom: usize) -> bool {
        self.words[atom / 64] >> (atom % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &AtomSet) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        AtomSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Measure of the set under `probs`.
    pub fn measure(&self, probs: &[f64]) -> f64 {
        let mut s = NeumaierSum::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                s.add(probs[wi * 64 + b]);
                w &= w - 1;
            }
        }
        // Atom masses sum to 1 only up to rounding.
        s.total().min(1.0)
    }

    /// Measure of the complement under `probs`.
    pub fn complement_measure(&self, probs: &[f64]) -> f64 {
        accurate_sum(
            probs
                .iter()
                .enumerate()
                .filter(|&(a, _)| !self.contains(a))
                .map(|(_, &p)| p),
        )
        .min(1.0)
    }
}

/// `P(e)`.
pub fn prob(space: &ProbSpace, e: &Event) -> Result<f64> {
    e.check(space)?;
    Ok(accurate_sum(e.atoms().iter().map(|&a| space.atom_probs[a])).min(1.0))
}

/// `P(e | given)`.
pub fn cond_prob(space: &ProbSpace, e: &Event, given: &Event) -> Result<f64> {
    e.check(space)?;
    let pg = prob(space, given)?;
    if pg <= 0.0 {
        return Err(Error::Conditioning("conditioning event has probability zero".into()));
    }
    let mask = AtomSet::from_event(e, space.len());
    let joint = accurate_sum(
        given
            .atoms()
            .iter()
            .filter(|&&a| mask.contains(a))
            .map(|&a| space.atom_probs[a]),
    );
    Ok(joint / pg)
}

/// An ordered system of events of positive probability on one space.
#[derive(Debug, Clone)]
pub struct EventSystem {
    space: ProbSpace,
    events: Vec<Event>,
    masks: Vec<AtomSet>,
    probs: Vec<f64>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
}

impl EventSystem {
    /// Builds the system, removing events of probability zero. The indices
    /// (in the input order) of removed events are kept in [`Self::dropped`].
    pub fn new(space: ProbSpace, events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::Structural("an event system needs at least one event".into()));
        }
        let mut kept_events = Vec::with_capacity(events.len());
        let mut masks = Vec::with_capacity(events.len());
        let mut probs = Vec::with_capacity(events.len());
        let mut kept = Vec::with_capacity(events.len());
        let mut dropped = Vec::new();
        for (i, e) in events.into_iter().enumerate() {
            let p = prob(&space, &e)?;
            if p > 0.0 {
                masks.push(AtomSet::from_event(&e, space.len()));
                probs.push(p);
                kept_events.push(e);
                kept.push(i);
            } else {
                dropped.push(i);
            }
        }
        if !dropped.is_empty() {
            log::warn!("dropped zero-probability events at input indices {dropped:?}");
        }
        Ok(Self {
            space,
            events: kept_events,
            masks,
            probs,
            kept,
            dropped,
        })
    }

    pub fn space(&self) -> &ProbSpace {
        &self.space
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of (kept) events.
    pub fn d(&self) -> usize {
        self.events.len()
    }

    /// `P(A_i)` for every kept event.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mask(&self, i: usize) -> &AtomSet {
        &self.masks[i]
    }

    /// Input indices of the events removed for having probability zero.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// Input index of kept event `i`.
    pub fn original_index(&self, i: usize) -> usize {
        self.kept[i]
    }

    /// Atoms lying in the union of the events in `indices`.
    pub fn union_mask<I: IntoIterator<Item = usize>>(&self, indices: I) -> AtomSet {
        let mut u = AtomSet::none(self.space.len());
        for j in indices {
            u.union_with(&self.masks[j]);
        }
        u
    }

    /// Exact `P(no event occurs)`.
    pub fn none_occur(&self) -> f64 {
        self.union_mask(0..self.d())
            .complement_measure(self.space.atom_probs())
    }

    /// `∏ (1 - P(A_i))`.
    pub fn indep_product(&self) -> f64 {
        if self.d() > 64 {
            accurate_sum(self.probs.iter().map(|&p| (-p).ln_1p())).exp()
        } else {
            self.probs.iter().map(|&p| 1.0 - p).product()
        }
    }

    /// The same events in the order `perm` (entry `i` is the old index of
    /// the new `i`-th event).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.d())?;
        Ok(Self {
            space: self.space.clone(),
            events: perm.iter().map(|&i| self.events[i].clone()).collect(),
            masks: perm.iter().map(|&i| self.masks[i].clone()).collect(),
            probs: perm.iter().map(|&i| self.probs[i]).collect(),
            kept: perm.iter().map(|&i| self.kept[i]).collect(),
            dropped: self.dropped.clone(),
        })
    }
}

fn check_permutation(perm: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if perm.len() != d {
        return Err(Error::Structural(format!("permutation of length {} for d={d}", perm.len())));
    }
    for &i in perm {
        if i >= d || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Structural("not a permutation".into()));
        }
    }
    Ok(())
}

/// Per-index sets `D_i ⊆ [d] \ {i}`. Need not be symmetric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    neighbor_sets: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn new(d: usize, neighbor_sets: Vec<Vec<usize>>) -> Result<Self> {
        if neighbor_sets.len() != d {
            return Err(Error::Structural(format!(
                "dependency graph has {} neighbour sets for d={d}",
                neighbor_sets.len()
            )));
        }
        let mut sets = neighbor_sets;
        for (i, s) in sets.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.binary_search(&i).is_ok() {
                return Err(Error::Structural(format!("D_{i} contains {i}")));
            }
            if let Some(&j) = s.last() {
                if j >= d {
                    return Err(Error::Structural(format!("D_{i} contains {j} >= d={d}")));
                }
            }
        }
        Ok(Self { neighbor_sets: sets })
    }

    pub fn empty(d: usize) -> Self {
        Self {
            neighbor_sets: vec![Vec::new(); d],
        }
    }

    pub fn complete(d: usize) -> Self {
        Self::from_fn(d, |_, _| true)
    }

    /// `D_i = {j ≠ i : |i - j| ≤ width}`.
    pub fn band(d: usize, width: usize) -> Self {
        Self::from_fn(d, |i, j| i.abs_diff(j) <= width)
    }

    /// `j ∈ D_i` iff `pred(i, j)`, for `j ≠ i`.
    pub fn from_fn<F: Fn(usize, usize) -> bool>(d: usize, pred: F) -> Self {
        Self {
            neighbor_sets: (0..d)
                .map(|i| (0..d).filter(|&j| j != i && pred(i, j)).collect())
                .collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.neighbor_sets.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_sets[i]
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbor_sets[i].binary_search(&j).is_ok()
    }

    pub fn check_matches(&self, d: usize) -> Result<()> {
        if self.d() == d {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "dependency graph on {} vertices for a system of {d} events",
                self.d()
            )))
        }
    }

    /// Relabels vertices consistently with [`EventSystem::permuted`].
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.d())?;
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let sets = perm
            .iter()
            .map(|&old| self.neighbor_sets[old].iter().map(|&j| inverse[j]).collect())
            .collect();
        Self::new(self.d(), sets)
    }

    /// Keeps only the vertices in `kept` (ascending), renumbering them.
    fn restricted(&self, kept: &[usize]) -> Result<Self> {
        let mut new_index = vec![usize::MAX; self.d()];
        for (n, &o) in kept.iter().enumerate() {
            new_index[o] = n;
        }
        let sets = kept
            .iter()
            .map(|&o| {
                self.neighbor_sets[o]
                    .iter()
                    .filter_map(|&j| (new_index[j] != usize::MAX).then_some(new_index[j]))
                    .collect()
            })
            .collect();
        Self::new(kept.len(), sets)
    }
}

/// JSON document `{"atoms":[p...],"events":[[idx...]...],"dep":[[j...]...]}`.
///
/// `dep` is optional and defaults to the empty graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub atoms: Vec<f64>,
    pub events: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep: Option<Vec<Vec<usize>>>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serialization cannot fail")
    }

    /// Builds the system and its dependency graph. The graph is stated
    /// over the input events and is restricted to the events that survive
    /// zero-probability filtering.
    pub fn build(&self) -> Result<(EventSystem, DependencyGraph)> {
        let space = ProbSpace::new(self.atoms.clone())?;
        let events = self.events.iter().map(|e| Event::new(e.iter().copied())).collect();
        let system = EventSystem::new(space, events)?;
        let full = match &self.dep {
            Some(sets) => DependencyGraph::new(self.events.len(), sets.clone())?,
            None => DependencyGraph::empty(self.events.len()),
        };
        let dep = full.restricted(&system.kept)?;
        Ok((system, dep))
    }

    pub fn from_system(system: &EventSystem, dep: &DependencyGraph) -> Self {
        Self {
            atoms: system.space.atom_probs.clone(),
            events: system.events.iter().map(|e| e.atoms.clone()).collect(),
            dep: Some(dep.neighbor_sets.clone()),
        }
    }
}

/// Small hand-checkable systems.
pub mod reference {
    use super::*;

    /// Uniform on two fair bits; `A1` = first bit, `A2` = second bit,
    /// `A3` = their parity. Pairwise independent, not mutually independent.
    pub fn xor_system() -> EventSystem {
        let space = ProbSpace::uniform(4).expect("uniform space");
        let bit = |a: usize, b: usize| a >> b & 1 == 1;
        let events = vec![
            Event::new((0..4).filter(|&a| bit(a, 0))),
            Event::new((0..4).filter(|&a| bit(a, 1))),
            Event::new((0..4).filter(|&a| bit(a, 0) ^ bit(a, 1))),
        ];
        EventSystem::new(space, events).expect("valid system")
    }

    /// Atoms `{0.4, 0.1, 0.2, 0.3}` with `A1 = {2, 3}` and `A2 = {1, 3}`.
    pub fn correlated_pair() -> EventSystem {
        let space = ProbSpace::new(vec![0.4, 0.1, 0.2, 0.3]).expect("valid space");
        EventSystem::new(space, vec![Event::new([2, 3]), Event::new([1, 3])]).expect("valid system")
    }
}
