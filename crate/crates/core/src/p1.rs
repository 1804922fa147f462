//! Depth-first, local best-first backtracking search over canonical
//! q-partitions for one that optimizes a query selection measure.
//!
//! Works on diagnosis sets only and never calls a reasoner.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::diagnosis::DiagnosisSet;
use crate::measures::{outcome_probability, MeasureError, QsmKind, QsmSpec};
use crate::qspace::{initial_successors, successors, QPartition, QSpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum P1Error {
    #[error(transparent)]
    QSpace(#[from] QSpaceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("node budget must be positive")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct P1Stats {
    pub nodes_expanded: usize,
    pub cqps_visited: usize,
    pub best_m: f64,
    /// Always zero; kept so callers can report it alongside phase 3.
    pub reasoner_calls: u64,
    /// The search stopped because the budget ran out.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct P1Result {
    pub partition: QPartition,
    pub m: f64,
    pub goal_reached: bool,
    pub stats: P1Stats,
}

/// Measure values this close count as equal, so ties fall to `D+` order.
const M_EPSILON: f64 = 1e-12;

enum Flow {
    Continue,
    Stop,
}

struct Search<'a> {
    d: &'a DiagnosisSet,
    qsm: QsmSpec,
    budget: Option<usize>,
    visited: BTreeSet<QPartition>,
    best: Option<(f64, QPartition)>,
    goal: bool,
    stats: P1Stats,
}

impl Search<'_> {
    /// Mass-based key for ENT, cardinality-based for SPL; 0.5 is the target.
    fn fraction(&self, p: &QPartition) -> Result<f64, P1Error> {
        Ok(match self.qsm.kind {
            QsmKind::Ent => outcome_probability(p, self.d)?,
            QsmKind::Spl => p.dplus.len() as f64 / self.d.len() as f64,
        })
    }

    /// Successors at or below the target first, closest first; then those
    /// above it, closest first; ties by smallest `D+`.
    fn order(&self, nodes: Vec<QPartition>) -> Result<Vec<QPartition>, P1Error> {
        let mut keyed = Vec::with_capacity(nodes.len());
        for p in nodes {
            keyed.push((self.fraction(&p)?, p));
        }
        keyed.sort_by(|(a, pa), (b, pb)| {
            let (over_a, over_b) = (*a > 0.5, *b > 0.5);
            over_a
                .cmp(&over_b)
                .then_with(|| if over_a { a.total_cmp(b) } else { b.total_cmp(a) })
                .then_with(|| pa.dplus.cmp(&pb.dplus))
        });
        Ok(keyed.into_iter().map(|(_, p)| p).collect())
    }

    /// `D+` only grows along a branch, so once the outcome split is at or
    /// past balance no descendant can score better.
    fn past_balance(&self, p: &QPartition) -> Result<bool, P1Error> {
        Ok(match self.qsm.kind {
            QsmKind::Ent => outcome_probability(p, self.d)? >= 0.5,
            QsmKind::Spl => p.dplus.len() >= p.dminus.len(),
        })
    }

    fn visit(&mut self, p: QPartition) -> Result<Flow, P1Error> {
        if self.visited.contains(&p) {
            return Ok(Flow::Continue);
        }
        if self.budget.is_some_and(|b| self.stats.cqps_visited >= b) {
            self.stats.budget_exhausted = true;
            return Ok(Flow::Stop);
        }
        self.stats.cqps_visited += 1;
        let m = self.qsm.value(&p, self.d)?;
        let better = match &self.best {
            None => true,
            Some((bm, bp)) => {
                let by_m = if (m - bm).abs() <= M_EPSILON { Ordering::Equal } else { m.total_cmp(bm) };
                by_m.then_with(|| p.dplus.cmp(&bp.dplus)) == Ordering::Less
            }
        };
        if better {
            self.best = Some((m, p.clone()));
        }
        if self.qsm.is_goal(m, self.d) {
            self.goal = true;
            return Ok(Flow::Stop);
        }
        let prune = self.past_balance(&p)?;
        let next = if prune { Vec::new() } else { successors(self.d, &p)? };
        self.visited.insert(p);
        if next.is_empty() {
            return Ok(Flow::Continue);
        }
        self.stats.nodes_expanded += 1;
        let next: Vec<_> = next.into_iter().filter(|s| !self.visited.contains(s)).collect();
        for s in self.order(next)? {
            if let Flow::Stop = self.visit(s)? {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }
}

/// Searches the canonical q-partitions of `d` for one whose measure is
/// within the threshold of the optimum. Returns the best partition seen when
/// no such partition exists or `budget` (a limit on evaluated partitions)
/// runs out.
pub fn optimize_qpartition(d: &DiagnosisSet, qsm: QsmSpec, budget: Option<usize>) -> Result<P1Result, P1Error> {
    if budget == Some(0) {
        return Err(P1Error::ZeroBudget);
    }
    let roots = initial_successors(d)?;
    let mut search = Search { d, qsm, budget, visited: BTreeSet::new(), best: None, goal: false, stats: P1Stats::default() };
    for p in search.order(roots)? {
        if let Flow::Stop = search.visit(p)? {
            break;
        }
    }
    let (m, partition) = search.best.expect("at least one initial partition is always evaluated");
    search.stats.best_m = m;
    Ok(P1Result { partition, m, goal_reached: search.goal, stats: search.stats })
}
