//! Q-partitions, canonical queries, traits and the successor function of the
//! canonical q-partition search.
//!
//! Everything here except [`partition_reasoned`] is pure set arithmetic over
//! the leading diagnoses and never touches a reasoner.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::bits::{ComponentSet, IndexSet};
use crate::diagnosis::DiagnosisSet;
use crate::dpi::{BehSet, Dpi};
use crate::logic::{Formula, KnowledgeBase, Reasoner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QSpaceError {
    #[error("need at least two leading diagnoses, got {0}")]
    TooFewDiagnoses(usize),
    #[error("seed must be a non-empty proper subset of the leading diagnoses")]
    InvalidSeed,
    #[error("query has no component provenance")]
    MissingProvenance,
    #[error("partition is not canonical")]
    NotCanonical,
    #[error("traits are defined relative to a non-empty D+")]
    EmptyDplus,
}

/// `⟨D+, D−, D0⟩` over indices into a [`DiagnosisSet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QPartition {
    pub dplus: IndexSet,
    pub dminus: IndexSet,
    pub dzero: IndexSet,
}

impl QPartition {
    /// `⟨dplus, D \ dplus, ∅⟩`.
    pub fn canonical(dplus: IndexSet, size: usize) -> Self {
        let dplus = IndexSet::from_indices(size, dplus.iter());
        let dminus = dplus.complement();
        Self { dplus, dminus, dzero: IndexSet::empty(size) }
    }

    pub fn is_canonical(&self) -> bool {
        self.dzero.is_empty()
    }

    /// Both outcomes eliminate at least one diagnosis.
    pub fn is_query_partition(&self) -> bool {
        !self.dplus.is_empty() && !self.dminus.is_empty()
    }
}

/// A set of sentences, with the components whose behaviors they are when
/// the query is a subset of `BEH[COMPS]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub sentences: BTreeSet<Formula>,
    pub components: Option<ComponentSet>,
}

impl Query {
    pub fn from_beh(beh: BehSet) -> Self {
        Self { sentences: beh.sentences.into_iter().collect(), components: Some(beh.components) }
    }

    pub fn from_sentences(sentences: impl IntoIterator<Item = Formula>) -> Self {
        Self { sentences: sentences.into_iter().collect(), components: None }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Partition of `d` induced by `x` using the reasoner: `D+` entails `x`,
/// `D−` becomes inconsistent or entails a negative measurement once `x` is
/// added, `D0` is the rest.
pub fn partition_reasoned(dpi: &Dpi, reasoner: &Reasoner, d: &DiagnosisSet, x: &[Formula]) -> QPartition {
    let size = d.len();
    let mut p = QPartition { dplus: IndexSet::empty(size), dminus: IndexSet::empty(size), dzero: IndexSet::empty(size) };
    for (i, delta) in d.diagnoses().iter().enumerate() {
        let kb = dpi.sdaa_refs(delta);
        if reasoner.entails_iter(kb.iter().copied(), x) {
            p.dplus.insert(i);
            continue;
        }
        let with_x = || kb.iter().copied().chain(x);
        if !reasoner.is_consistent_iter(with_x()) || dpi.neg().iter().any(|n| reasoner.entails_iter(with_x(), n)) {
            p.dminus.insert(i);
        } else {
            p.dzero.insert(i);
        }
    }
    p
}

/// Same as [`partition_reasoned`] for an owned knowledge base of sentences.
pub fn partition_reasoned_kb(dpi: &Dpi, reasoner: &Reasoner, d: &DiagnosisSet, x: &KnowledgeBase) -> QPartition {
    let sentences: Vec<Formula> = x.iter().cloned().collect();
    partition_reasoned(dpi, reasoner, d, &sentences)
}

/// `U_D \ I_D`, the components whose behaviors discriminate within `d`.
pub fn disc_components(d: &DiagnosisSet) -> ComponentSet {
    d.union().difference(&d.intersection())
}

/// `Disc_D = BEH[U_D \ I_D]`.
pub fn disc_sentences(dpi: &Dpi, d: &DiagnosisSet) -> BehSet {
    dpi.beh_set(&disc_components(d))
}

fn union_of(d: &DiagnosisSet, ids: &IndexSet) -> ComponentSet {
    let mut u = ComponentSet::empty(0);
    for i in ids.iter() {
        u.union_with(d.get(i));
    }
    u
}

/// Components of the canonical query for `seed`: `(COMPS \ U_seed) ∩ Disc`.
/// Empty means no canonical query exists.
pub fn canonical_components(d: &DiagnosisSet, seed: &IndexSet) -> Result<ComponentSet, QSpaceError> {
    if seed.is_empty() || seed.len() >= d.len() || seed.iter().any(|i| i >= d.len()) {
        return Err(QSpaceError::InvalidSeed);
    }
    Ok(disc_components(d).difference(&union_of(d, seed)))
}

/// The canonical query wrt. `seed`, or `None` when it is empty.
pub fn canonical_query(dpi: &Dpi, d: &DiagnosisSet, seed: &IndexSet) -> Result<Option<Query>, QSpaceError> {
    let x = canonical_components(d, seed)?;
    Ok((!x.is_empty()).then(|| Query::from_beh(dpi.beh_set(&x))))
}

/// Partition of a behavior query by set containment: `Δ ∈ D+` iff the query
/// components avoid `Δ`.
pub fn partition_of_components(d: &DiagnosisSet, x: &ComponentSet) -> QPartition {
    let dplus = IndexSet::from_indices(d.len(), (0..d.len()).filter(|&i| d.get(i).is_disjoint(x)));
    QPartition::canonical(dplus, d.len())
}

pub fn partition_canonical(d: &DiagnosisSet, q: &Query) -> Result<QPartition, QSpaceError> {
    let x = q.components.as_ref().ok_or(QSpaceError::MissingProvenance)?;
    Ok(partition_of_components(d, x))
}

/// The canonical query of a canonical partition, recovered from its `D+`.
pub fn canonical_query_of(dpi: &Dpi, d: &DiagnosisSet, p: &QPartition) -> Result<Option<Query>, QSpaceError> {
    canonical_query(dpi, d, &p.dplus)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitClass {
    /// Diagnoses of `D−` sharing this trait.
    pub members: IndexSet,
    /// Components `Δ \ U_{D+}` of the shared trait.
    pub components: ComponentSet,
    /// No other class has a strictly smaller trait.
    pub minimal: bool,
}

/// Equivalence classes of `D−` under equal traits, ordered by trait.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitClasses(pub Vec<TraitClass>);

impl TraitClasses {
    pub fn minimal(&self) -> impl Iterator<Item = &TraitClass> {
        self.0.iter().filter(|c| c.minimal)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn trait_classes(d: &DiagnosisSet, p: &QPartition) -> Result<TraitClasses, QSpaceError> {
    if !p.is_canonical() {
        return Err(QSpaceError::NotCanonical);
    }
    if p.dplus.is_empty() {
        return Err(QSpaceError::EmptyDplus);
    }
    let seed_union = union_of(d, &p.dplus);
    let mut by_trait: BTreeMap<ComponentSet, IndexSet> = BTreeMap::new();
    for i in p.dminus.iter() {
        by_trait.entry(d.get(i).difference(&seed_union)).or_insert_with(|| IndexSet::empty(d.len())).insert(i);
    }
    let traits: Vec<ComponentSet> = by_trait.keys().cloned().collect();
    let classes = by_trait
        .into_iter()
        .map(|(components, members)| {
            let minimal = !traits.iter().any(|t| t.is_proper_subset(&components));
            TraitClass { members, components, minimal }
        })
        .collect();
    Ok(TraitClasses(classes))
}

/// `⟨{Δ}, D \ {Δ}, ∅⟩` for every `Δ`.
pub fn initial_successors(d: &DiagnosisSet) -> Result<Vec<QPartition>, QSpaceError> {
    if d.len() < 2 {
        return Err(QSpaceError::TooFewDiagnoses(d.len()));
    }
    Ok((0..d.len()).map(|i| QPartition::canonical(IndexSet::from_indices(d.len(), [i]), d.len())).collect())
}

/// Successors of a canonical partition: move one class with a ⊆-minimal
/// trait to `D+`; none when `D−` forms a single class.
pub fn successors(d: &DiagnosisSet, p: &QPartition) -> Result<Vec<QPartition>, QSpaceError> {
    let classes = trait_classes(d, p)?;
    if classes.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(classes.minimal().map(|c| QPartition::canonical(p.dplus.union(&c.members), d.len())).collect())
}

/// Distinct seed unions `U_{D+} ≠ U_D`, closed under union with single
/// diagnoses.
fn cqp_unions(d: &DiagnosisSet) -> BTreeSet<ComponentSet> {
    let all = d.union();
    let mut unions = BTreeSet::new();
    let mut stack: Vec<ComponentSet> = Vec::new();
    for delta in d.diagnoses() {
        if *delta != all && unions.insert(delta.clone()) {
            stack.push(delta.clone());
        }
    }
    while let Some(u) = stack.pop() {
        for delta in d.diagnoses() {
            if delta.is_subset(&u) {
                continue;
            }
            let v = u.union(delta);
            if v != all && unions.insert(v.clone()) {
                stack.push(v);
            }
        }
    }
    unions
}

/// Number of canonical q-partitions.
pub fn count_cqps(d: &DiagnosisSet) -> Result<usize, QSpaceError> {
    if d.len() < 2 {
        return Err(QSpaceError::TooFewDiagnoses(d.len()));
    }
    Ok(cqp_unions(d).len())
}

/// All canonical q-partitions, sorted by `D+`.
pub fn enumerate_cqps(d: &DiagnosisSet) -> Result<Vec<QPartition>, QSpaceError> {
    if d.len() < 2 {
        return Err(QSpaceError::TooFewDiagnoses(d.len()));
    }
    let disc = disc_components(d);
    let mut out: Vec<QPartition> =
        cqp_unions(d).iter().map(|u| partition_of_components(d, &disc.difference(u))).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Partitions reachable from `⟨∅, D, ∅⟩` through the successor function.
pub fn reachable_cqps(d: &DiagnosisSet) -> Result<Vec<QPartition>, QSpaceError> {
    let mut seen: BTreeSet<QPartition> = BTreeSet::new();
    let mut stack = initial_successors(d)?;
    while let Some(p) = stack.pop() {
        if seen.contains(&p) {
            continue;
        }
        stack.extend(successors(d, &p)?);
        seen.insert(p);
    }
    Ok(seen.into_iter().collect())
}
