//! Query selection measures over q-partitions and query cost measures over
//! queries. Lower is better for both.

use thiserror::Error;

use crate::diagnosis::DiagnosisSet;
use crate::logic::cnf::literal_count;
use crate::logic::Formula;
use crate::qspace::{QPartition, Query};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("threshold must be a finite non-negative number, got {0}")]
    InvalidThreshold(f64),
    #[error("partition refers to diagnosis {index} but only {len} are given")]
    SizeMismatch { index: usize, len: usize },
    #[error("cost of an empty query is undefined")]
    EmptyQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QsmKind {
    /// Entropy: expected information loss of a binary outcome.
    Ent,
    /// Split-in-half: imbalance between the outcome sets.
    Spl,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsmSpec {
    pub kind: QsmKind,
    threshold: f64,
}

impl QsmSpec {
    pub fn new(kind: QsmKind, threshold: f64) -> Result<Self, MeasureError> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(MeasureError::InvalidThreshold(threshold));
        }
        Ok(Self { kind, threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn value(&self, p: &QPartition, d: &DiagnosisSet) -> Result<f64, MeasureError> {
        qsm_value(self.kind, p, d)
    }

    /// Best attainable value over canonical partitions of `d`.
    pub fn optimum(&self, d: &DiagnosisSet) -> f64 {
        match self.kind {
            QsmKind::Ent => 0.0,
            QsmKind::Spl => (d.len() % 2) as f64,
        }
    }

    pub fn is_goal(&self, m: f64, d: &DiagnosisSet) -> bool {
        (m - self.optimum(d)).abs() <= self.threshold
    }
}

fn check(p: &QPartition, d: &DiagnosisSet) -> Result<(), MeasureError> {
    let len = d.len();
    match p.dplus.iter().chain(p.dminus.iter()).chain(p.dzero.iter()).find(|&i| i >= len) {
        Some(index) => Err(MeasureError::SizeMismatch { index, len }),
        None => Ok(()),
    }
}

/// `p(Q = t)`: mass of `D+` plus half the mass of `D0`.
pub fn outcome_probability(p: &QPartition, d: &DiagnosisSet) -> Result<f64, MeasureError> {
    check(p, d)?;
    let plus: f64 = p.dplus.iter().map(|i| d.probability(i)).sum();
    let zero: f64 = p.dzero.iter().map(|i| d.probability(i)).sum();
    Ok((plus + zero / 2.0).clamp(0.0, 1.0))
}

/// `1 + p log2 p + (1-p) log2 (1-p)`, with `0 log2 0 = 0`.
pub fn entropy_measure(pt: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { x * libm::log2(x) };
    (1.0 + term(pt) + term(1.0 - pt)).clamp(0.0, 1.0)
}

pub fn split_measure(p: &QPartition) -> f64 {
    (p.dplus.len().abs_diff(p.dminus.len()) + p.dzero.len()) as f64
}

pub fn qsm_value(kind: QsmKind, p: &QPartition, d: &DiagnosisSet) -> Result<f64, MeasureError> {
    match kind {
        QsmKind::Ent => outcome_probability(p, d).map(entropy_measure),
        QsmKind::Spl => check(p, d).map(|_| split_measure(p)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QcmKind {
    Sum,
    Max,
    Card,
}

/// Per-sentence cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SentenceCost {
    /// Distinct literals in the clausal form.
    #[default]
    LiteralCount,
    Unit,
}

impl SentenceCost {
    pub fn cost(self, f: &Formula) -> u64 {
        match self {
            // a tautology clausifies to nothing but still costs something to ask
            SentenceCost::LiteralCount => literal_count(f).max(1) as u64,
            SentenceCost::Unit => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QcmSpec {
    pub kind: QcmKind,
    pub cost: SentenceCost,
}

impl QcmSpec {
    pub fn new(kind: QcmKind) -> Self {
        Self { kind, cost: SentenceCost::default() }
    }

    pub fn sentence_cost(&self, f: &Formula) -> u64 {
        self.cost.cost(f)
    }

    pub fn value(&self, q: &Query) -> Result<u64, MeasureError> {
        self.value_of(q.sentences.iter())
    }

    pub fn value_of<'a>(&self, sentences: impl IntoIterator<Item = &'a Formula>) -> Result<u64, MeasureError> {
        self.combine(sentences.into_iter().map(|f| self.sentence_cost(f)))
    }

    /// Aggregates per-sentence costs.
    pub fn combine(&self, costs: impl IntoIterator<Item = u64>) -> Result<u64, MeasureError> {
        let mut costs = costs.into_iter().peekable();
        if costs.peek().is_none() {
            return Err(MeasureError::EmptyQuery);
        }
        Ok(match self.kind {
            QcmKind::Sum => costs.sum(),
            QcmKind::Max => costs.max().unwrap_or(0),
            QcmKind::Card => costs.count() as u64,
        })
    }
}
