//! Optional reasoner-backed phase: expand a canonical query with entailed
//! sentences of selected shapes, then shrink the expansion to a ⊆-minimal
//! query that keeps the q-partition and favors cheap, preferred sentences.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::diagnosis::DiagnosisSet;
use crate::dpi::Dpi;
use crate::logic::{EntailmentType, EntailmentTypes, Formula, KnowledgeBase, Reasoner};
use crate::measures::SentenceCost;
use crate::minimize::quick_xplain;
use crate::qspace::{canonical_query, partition_reasoned, QPartition, QSpaceError, Query};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum P3Error {
    #[error(transparent)]
    QSpace(#[from] QSpaceError),
    #[error("partition has no canonical query")]
    NotCqp,
    #[error("background theory together with the canonical query is inconsistent")]
    Inconsistent,
    #[error("no subset of the expanded query preserves the partition")]
    NotPreserved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct P3Config {
    /// Shapes of entailments added to the query.
    pub entailments: EntailmentTypes,
    /// Shapes of sentences that are cheaper to ask about than their literal
    /// cost suggests.
    pub preferred: EntailmentTypes,
    pub cost: SentenceCost,
}

impl Default for P3Config {
    fn default() -> Self {
        let sbd = EntailmentTypes::new([EntailmentType::SingletonBodyDefinite]);
        Self { entailments: sbd.clone(), preferred: sbd, cost: SentenceCost::LiteralCount }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionResult {
    pub canonical: Query,
    /// Entailments new relative to the background.
    pub added: BTreeSet<Formula>,
    /// Preferred sentences, ascending by cost then text.
    pub preferred: Vec<Formula>,
    /// The rest, ordered the same way.
    pub dispreferred: Vec<Formula>,
    pub costs: BTreeMap<Formula, u64>,
}

impl ExpansionResult {
    /// The expanded query, canonical query plus additions.
    pub fn expanded(&self) -> BTreeSet<Formula> {
        self.preferred.iter().chain(&self.dispreferred).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.preferred.len() + self.dispreferred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn cost_order(costs: &BTreeMap<Formula, u64>, mut v: Vec<Formula>) -> Vec<Formula> {
    use alloc::string::ToString;
    v.sort_by_cached_key(|f| (costs[f], f.to_string()));
    v
}

/// `Ent(K ∪ Q_k) \ Ent(K)` for `K = sdaa(U_D)` and the canonical query
/// `Q_k` of `p`, over the atoms of `K ∪ Q_k`.
pub fn expand_query(
    dpi: &Dpi,
    d: &DiagnosisSet,
    p: &QPartition,
    config: &P3Config,
    reasoner: &Reasoner,
) -> Result<ExpansionResult, P3Error> {
    let canonical = canonical_query(dpi, d, &p.dplus)?.ok_or(P3Error::NotCqp)?;
    let background: KnowledgeBase = dpi.sdaa(&d.union());
    let mut with_query = background.clone();
    with_query.extend(canonical.sentences.iter().cloned());
    let candidates = reasoner
        .enumerate_entailments(&with_query, &config.entailments, &BTreeSet::new())
        .map_err(|_| P3Error::Inconsistent)?;
    let added: BTreeSet<Formula> = candidates.into_iter().filter(|f| !reasoner.entails(&background, [f])).collect();

    let all: BTreeSet<Formula> = canonical.sentences.iter().chain(&added).cloned().collect();
    let costs: BTreeMap<Formula, u64> = all.iter().map(|f| (f.clone(), config.cost.cost(f))).collect();
    let (preferred, dispreferred): (Vec<_>, Vec<_>) = all.into_iter().partition(|f| config.preferred.matches(f));
    Ok(ExpansionResult {
        canonical,
        added,
        preferred: cost_order(&costs, preferred),
        dispreferred: cost_order(&costs, dispreferred),
        costs,
    })
}

/// A ⊆-minimal subset of the expansion with q-partition `p`. Preferred
/// sentences are used whenever they suffice; among the rest cheaper ones
/// are favored.
pub fn opti_minimize_query(
    dpi: &Dpi,
    d: &DiagnosisSet,
    p: &QPartition,
    exp: &ExpansionResult,
    reasoner: &Reasoner,
) -> Result<Query, P3Error> {
    let items: Vec<Formula> = exp.preferred.iter().chain(&exp.dispreferred).cloned().collect();
    let found = quick_xplain(&items, |x| partition_reasoned(dpi, reasoner, d, x) == *p).ok_or(P3Error::NotPreserved)?;
    let mut query = Query::from_sentences(found);
    if let Some(comps) = &exp.canonical.components {
        let beh: Vec<usize> = comps.iter().filter(|&c| query.sentences.contains(dpi.behavior(c))).collect();
        if beh.len() == query.len() {
            query.components = Some(crate::bits::ComponentSet::from_indices(dpi.num_components(), beh));
        }
    }
    Ok(query)
}

fn ceil_log2(n: usize) -> u64 {
    (usize::BITS - n.max(1).saturating_sub(1).leading_zeros()) as u64
}

/// Upper bound on reasoner calls made by [`expand_query`] for a vocabulary
/// of `atoms` atoms.
pub fn expansion_call_ceiling(atoms: usize, config: &P3Config) -> u64 {
    let v = atoms as u64;
    let per_type: u64 = config
        .entailments
        .iter()
        .map(|t| match t {
            EntailmentType::Atoms => v,
            EntailmentType::SingletonBodyDefinite => v * v,
        })
        .sum();
    // one consistency check, then each candidate once against each KB
    1 + 2 * per_type
}

/// Upper bound on reasoner calls made by [`opti_minimize_query`] when `n`
/// sentences are reduced to `k`: divide and conquer needs `O(k log n)`
/// partition checks, each of which costs at most one entailment per
/// sentence, one consistency check and one entailment per negative
/// measurement sentence for every diagnosis.
pub fn minimization_call_ceiling(n: usize, k: usize, diagnoses: usize, negative_sentences: usize) -> u64 {
    let k = k.max(1) as u64;
    let checks = 2 + 2 * k * (ceil_log2(n) + 1);
    checks * diagnoses as u64 * (n as u64 + 1 + negative_sentences as u64)
}

/// Atoms of `sdaa(U_D)` together with the canonical query; the vocabulary
/// the expansion ranges over.
pub fn expansion_vocabulary(dpi: &Dpi, d: &DiagnosisSet, exp: &ExpansionResult) -> BTreeSet<alloc::string::String> {
    let mut atoms = dpi.sdaa(&d.union()).atoms();
    for f in &exp.canonical.sentences {
        atoms.extend(f.atoms());
    }
    atoms
}
