//! Minimal conflicts, HS-Tree diagnosis search and diagnosis probabilities.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::ComponentSet;
use crate::dpi::Dpi;
use crate::logic::{Formula, Reasoner};
use crate::minimize::quick_xplain;

/// A set of faulty components.
pub type Diagnosis = ComponentSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosisError {
    #[error("empty diagnosis list")]
    Empty,
}

/// Order in which the HS-Tree visits candidate diagnoses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOrder {
    /// Minimum cardinality first.
    BreadthFirst,
    /// Most probable first.
    UniformCostProbability,
}

/// Leading diagnoses with normalized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisSet {
    diagnoses: Vec<Diagnosis>,
    probabilities: Vec<f64>,
    exhaustive: bool,
}

impl DiagnosisSet {
    /// Builds a set from diagnoses and unnormalized positive masses.
    pub fn with_masses(diagnoses: Vec<Diagnosis>, masses: Vec<f64>, exhaustive: bool) -> Result<Self, DiagnosisError> {
        assert_eq!(diagnoses.len(), masses.len());
        if diagnoses.is_empty() {
            return Err(DiagnosisError::Empty);
        }
        let total: f64 = masses.iter().sum();
        let probabilities = masses.iter().map(|m| m / total).collect();
        Ok(Self { diagnoses, probabilities, exhaustive })
    }

    pub fn len(&self) -> usize {
        self.diagnoses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagnoses.is_empty()
    }

    pub fn diagnoses(&self) -> &[Diagnosis] {
        &self.diagnoses
    }

    pub fn get(&self, i: usize) -> &Diagnosis {
        &self.diagnoses[i]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.probabilities[i]
    }

    /// True when the search proved there are no further diagnoses.
    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn position(&self, d: &Diagnosis) -> Option<usize> {
        self.diagnoses.iter().position(|x| x == d)
    }

    /// Union of all diagnoses.
    pub fn union(&self) -> ComponentSet {
        let mut u = ComponentSet::empty(0);
        for d in &self.diagnoses {
            u.union_with(d);
        }
        u
    }

    /// Intersection of all diagnoses.
    pub fn intersection(&self) -> ComponentSet {
        let mut it = self.diagnoses.iter();
        let first = it.next().cloned().unwrap_or_default();
        it.fold(first, |acc, d| acc.intersection(d))
    }
}

/// True iff assuming every component in `healthy` works violates the
/// background: `SD_extra ∪ OBS ∪ ⋃P ∪ BEH[healthy]` is inconsistent or
/// entails some negative measurement.
pub fn is_conflict(dpi: &Dpi, reasoner: &Reasoner, healthy: &[usize]) -> bool {
    let kb: Vec<&Formula> = dpi.background().chain(healthy.iter().map(|&c| dpi.behavior(c))).collect();
    !reasoner.is_consistent_iter(kb.iter().copied()) || dpi.neg().iter().any(|n| reasoner.entails_iter(kb.iter().copied(), n))
}

/// A ⊆-minimal conflict among `candidates`; earlier candidates are
/// preferred.
pub fn min_conflict(dpi: &Dpi, reasoner: &Reasoner, candidates: &[usize]) -> Option<ComponentSet> {
    quick_xplain(candidates, |subset| is_conflict(dpi, reasoner, subset))
        .map(|c| ComponentSet::from_indices(dpi.num_components(), c))
}

/// Diagnosis check without minimality: `sdaa(delta)` is consistent and entails
/// no negative measurement.
pub fn explains(dpi: &Dpi, reasoner: &Reasoner, delta: &ComponentSet) -> bool {
    let healthy: Vec<usize> = delta.complement().iter().collect();
    !is_conflict(dpi, reasoner, &healthy)
}

#[derive(PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

enum Frontier {
    Fifo(VecDeque<ComponentSet>),
    Uniform(BinaryHeap<Reverse<(Cost, usize, ComponentSet)>>, Vec<f64>),
}

impl Frontier {
    fn push(&mut self, node: ComponentSet) {
        match self {
            Frontier::Fifo(q) => q.push_back(node),
            Frontier::Uniform(heap, weights) => {
                let cost = node.iter().map(|c| weights[c]).sum();
                heap.push(Reverse((Cost(cost), node.len(), node)));
            }
        }
    }

    fn pop(&mut self) -> Option<ComponentSet> {
        match self {
            Frontier::Fifo(q) => q.pop_front(),
            Frontier::Uniform(heap, _) => heap.pop().map(|Reverse((_, _, n))| n),
        }
    }
}

/// HS-Tree over minimal conflicts.
///
/// `rng_seed` permutes the candidate order handed to conflict computation,
/// which changes which conflicts label the tree and, when `max_count`
/// truncates the search, which diagnoses are returned.
pub fn compute_diagnoses(dpi: &Dpi, reasoner: &Reasoner, max_count: usize, order: SearchOrder, rng_seed: u64) -> Vec<Diagnosis> {
    let n = dpi.num_components();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));

    // -ln of the odds p/(1-p); summed over Δ it ranks p(Δ) in reverse
    let weights: Vec<f64> = (0..n)
        .map(|c| {
            let p = dpi.fault_probability(c);
            libm::log((1.0 - p) / p)
        })
        .collect();
    let monotone = order == SearchOrder::BreadthFirst || weights.iter().all(|w| *w > 0.0);
    let mut frontier = match order {
        SearchOrder::BreadthFirst => Frontier::Fifo(VecDeque::new()),
        SearchOrder::UniformCostProbability => Frontier::Uniform(BinaryHeap::new(), weights),
    };

    let mut conflicts: Vec<ComponentSet> = Vec::new();
    let mut found: Vec<Diagnosis> = Vec::new();
    let mut seen = BTreeSet::new();
    let root = ComponentSet::empty(n);
    seen.insert(root.clone());
    frontier.push(root);

    while found.len() < max_count {
        let Some(path) = frontier.pop() else { break };
        if found.iter().any(|d| d.is_subset(&path)) {
            continue;
        }
        let label = match conflicts.iter().find(|c| c.is_disjoint(&path)) {
            Some(c) => c.clone(),
            None => {
                let candidates: Vec<usize> = permutation.iter().copied().filter(|c| !path.contains(*c)).collect();
                match min_conflict(dpi, reasoner, &candidates) {
                    Some(c) => {
                        conflicts.push(c.clone());
                        c
                    }
                    None => {
                        let minimal = monotone || path.iter().all(|c| {
                            let mut smaller = path.clone();
                            smaller.remove(c);
                            !explains(dpi, reasoner, &smaller)
                        });
                        if minimal {
                            found.retain(|d| !path.is_subset(d));
                            found.push(path);
                        }
                        continue;
                    }
                }
            }
        };
        for c in permutation.iter().copied().filter(|c| label.contains(*c)) {
            let mut child = path.clone();
            child.insert(c);
            if seen.insert(child.clone()) {
                frontier.push(child);
            }
        }
    }
    found
}

/// Diagnoses with `p(Δ) = ∏_{c∈Δ} p(c) · ∏_{c∉Δ} (1 − p(c))`, normalized.
pub fn diagnosis_probabilities(dpi: &Dpi, diagnoses: Vec<Diagnosis>, exhaustive: bool) -> Result<DiagnosisSet, DiagnosisError> {
    let logs: Vec<f64> = diagnoses
        .iter()
        .map(|d| {
            (0..dpi.num_components())
                .map(|c| {
                    let p = dpi.fault_probability(c);
                    libm::log(if d.contains(c) { p } else { 1.0 - p })
                })
                .sum()
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let masses = logs.iter().map(|l| libm::exp(l - max)).collect();
    DiagnosisSet::with_masses(diagnoses, masses, exhaustive)
}

/// Computes up to `max_count` diagnoses, attaches probabilities and sorts
/// them: by cardinality for breadth-first search, by descending probability
/// otherwise, ties broken lexicographically.
pub fn leading_diagnoses(
    dpi: &Dpi,
    reasoner: &Reasoner,
    max_count: usize,
    order: SearchOrder,
    rng_seed: u64,
) -> Result<DiagnosisSet, DiagnosisError> {
    // one extra to learn whether the search was exhaustive
    let mut found = compute_diagnoses(dpi, reasoner, max_count.saturating_add(1), order, rng_seed);
    let exhaustive = found.len() <= max_count;
    let probs = diagnosis_probabilities(dpi, found.clone(), exhaustive)?;
    let mut ranked: Vec<(Diagnosis, f64)> = found.drain(..).zip(probs.probabilities.iter().copied()).collect();
    match order {
        SearchOrder::BreadthFirst => ranked.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0))),
        SearchOrder::UniformCostProbability => ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))),
    }
    ranked.truncate(max_count);
    let (diagnoses, masses): (Vec<_>, Vec<_>) = ranked.into_iter().unzip();
    DiagnosisSet::with_masses(diagnoses, masses, exhaustive)
}
