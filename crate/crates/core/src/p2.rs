//! Cost-optimal ⊆-minimal query for a fixed canonical q-partition, found as
//! a hitting set of the ⊆-minimal traits.
//!
//! Pure set arithmetic; no reasoner involved.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use thiserror::Error;

use crate::bits::ComponentSet;
use crate::diagnosis::DiagnosisSet;
use crate::dpi::Dpi;
use crate::measures::{QcmKind, QcmSpec};
use crate::qspace::{trait_classes, QPartition, QSpaceError, Query};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum P2Error {
    #[error(transparent)]
    QSpace(#[from] QSpaceError),
    #[error("partition is not a canonical q-partition")]
    NotCqp,
}

/// Deduplicated traits of the classes with ⊆-minimal traits, in ascending
/// order.
pub fn minimal_traits(d: &DiagnosisSet, p: &QPartition) -> Result<Vec<ComponentSet>, P2Error> {
    if p.dminus.is_empty() {
        return Err(P2Error::NotCqp);
    }
    let classes = trait_classes(d, p)?;
    if classes.0.iter().any(|c| c.components.is_empty()) {
        return Err(P2Error::NotCqp);
    }
    Ok(classes.minimal().map(|c| c.components.clone()).collect())
}

/// All ⊆-minimal hitting sets of `sets`, sorted. Exponential; meant for
/// small inputs and cross-checks.
pub fn minimal_hitting_sets(sets: &[ComponentSet]) -> Vec<ComponentSet> {
    fn grow(sets: &[ComponentSet], h: ComponentSet, out: &mut BTreeSet<ComponentSet>) {
        match sets.iter().find(|s| s.is_disjoint(&h)) {
            None => {
                out.insert(h);
            }
            Some(s) => {
                for c in s.iter() {
                    let mut next = h.clone();
                    next.insert(c);
                    grow(sets, next, out);
                }
            }
        }
    }
    let mut all = BTreeSet::new();
    grow(sets, ComponentSet::empty(0), &mut all);
    let all: Vec<_> = all.into_iter().collect();
    all.iter().filter(|h| !all.iter().any(|g| g.is_proper_subset(h))).cloned().collect()
}

/// Search key: primary cost measure, then total cost as tie-breaker. Both
/// grow monotonically when elements are added.
fn key(qcm: &QcmSpec, costs: &[u64], h: &ComponentSet) -> (u64, u64) {
    let sum: u64 = h.iter().map(|c| costs[c]).sum();
    let primary = match qcm.kind {
        QcmKind::Sum => sum,
        QcmKind::Max => h.iter().map(|c| costs[c]).max().unwrap_or(0),
        QcmKind::Card => h.len() as u64,
    };
    (primary, sum)
}

/// Uniform-cost hitting-set search. The first complete node popped minimizes
/// `(measure, total cost)` lexicographically, which makes it ⊆-minimal since
/// removing an element lowers the total cost.
fn cheapest_hitting_set(sets: &[ComponentSet], costs: &[u64], qcm: &QcmSpec) -> ComponentSet {
    let root = ComponentSet::empty(costs.len());
    let mut seen = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((key(qcm, costs, &root), root)));
    while let Some(Reverse((_, h))) = heap.pop() {
        let Some(open) = sets.iter().find(|s| s.is_disjoint(&h)) else {
            return h;
        };
        let mut labels: Vec<usize> = open.iter().collect();
        labels.sort_by_key(|&c| (costs[c], c));
        for c in labels {
            let mut next = h.clone();
            next.insert(c);
            if seen.insert(next.clone()) {
                heap.push(Reverse((key(qcm, costs, &next), next)));
            }
        }
    }
    unreachable!("non-empty traits always have a hitting set")
}

/// A ⊆-minimal query with q-partition `p` that minimizes `qcm` among all
/// ⊆-minimal queries made of component behaviors.
pub fn optimize_query_for_qpartition(dpi: &Dpi, d: &DiagnosisSet, p: &QPartition, qcm: &QcmSpec) -> Result<Query, P2Error> {
    let traits = minimal_traits(d, p)?;
    let costs: Vec<u64> = dpi.behaviors().iter().map(|f| qcm.sentence_cost(f)).collect();
    let h = cheapest_hitting_set(&traits, &costs, qcm);
    Ok(Query::from_beh(dpi.beh_set(&h)))
}
