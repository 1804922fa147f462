//! Seeded random DPIs built from acyclic implication networks.
//!
//! Atoms `X0, X1, ...` are ordered; every behavior implies later atoms from
//! earlier ones, so the all-false assignment satisfies the whole system and
//! the all-healthy system is always consistent. Negative measurements are
//! implications `Xs -> Xt` that the all-healthy system entails, so each one
//! needs at least one faulty component to be explained.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dpi::{Dpi, DpiParts};
use crate::logic::{Formula, Reasoner};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomDpiConfig {
    pub components: usize,
    /// Number of atoms; `None` picks `components / 2 + 3`.
    pub atoms: Option<usize>,
    pub negatives: usize,
    /// Probability that a behavior gets a second body or head atom.
    pub compound_ratio: f64,
    /// Fault probabilities are drawn uniformly from this range.
    pub fault_prob_range: (f64, f64),
}

impl Default for RandomDpiConfig {
    fn default() -> Self {
        Self { components: 8, atoms: None, negatives: 2, compound_ratio: 0.3, fault_prob_range: (0.02, 0.3) }
    }
}

fn atom(i: usize) -> Formula {
    Formula::atom(format!("X{i}"))
}

fn random_behavior(rng: &mut ChaCha8Rng, atoms: usize, compound_ratio: f64) -> Formula {
    let head = rng.random_range(1..atoms);
    let body = rng.random_range(0..head);
    if rng.random_bool(compound_ratio) {
        let other = rng.random_range(0..atoms);
        match rng.random_range(0..3) {
            0 if other < head && other != body => Formula::implies(Formula::or(atom(body), atom(other)), atom(head)),
            1 if other < head && other != body => Formula::implies(Formula::and(atom(body), atom(other)), atom(head)),
            _ if other > body && other != head => Formula::implies(atom(body), Formula::and(atom(head), atom(other))),
            _ => Formula::implies(atom(body), atom(head)),
        }
    } else {
        Formula::implies(atom(body), atom(head))
    }
}

/// Generates a DPI; identical `(config, seed)` pairs give identical DPIs.
pub fn random_dpi(config: &RandomDpiConfig, seed: u64) -> Dpi {
    assert!(config.components > 0, "random DPI needs components");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = config.atoms.unwrap_or(config.components / 2 + 3).max(2);
    let reasoner = Reasoner::new();

    let mut seen = BTreeSet::new();
    let mut behaviors = Vec::with_capacity(config.components);
    let mut attempts = 0;
    while behaviors.len() < config.components {
        attempts += 1;
        let f = if attempts > 64 * config.components {
            // vocabulary exhausted; fresh head atoms are always new
            Formula::implies(atom(0), atom(atoms + behaviors.len()))
        } else {
            random_behavior(&mut rng, atoms, config.compound_ratio)
        };
        if seen.insert(f.clone()) {
            behaviors.push(f);
        }
    }

    let mut reachable = Vec::new();
    for s in 0..atoms {
        for t in s + 1..atoms {
            let f = Formula::implies(atom(s), atom(t));
            if reasoner.entails_iter(behaviors.iter(), [&f]) {
                reachable.push(f);
            }
        }
    }
    let neg: Vec<Vec<Formula>> =
        reachable.choose_multiple(&mut rng, config.negatives).map(|f| alloc::vec![f.clone()]).collect();

    let names: Vec<String> = (1..=config.components).map(|i| format!("c{i}")).collect();
    let (lo, hi) = config.fault_prob_range;
    let fault_probs: BTreeMap<String, f64> = names.iter().map(|c| (c.clone(), rng.random_range(lo..hi))).collect();
    let parts = DpiParts {
        components: names.clone(),
        behaviors: names.into_iter().zip(behaviors).collect(),
        neg,
        fault_probs,
        ..DpiParts::default()
    };
    Dpi::new(parts, &reasoner).expect("generated DPI is valid by construction")
}
