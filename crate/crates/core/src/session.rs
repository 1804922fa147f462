//! Sequential diagnosis: propose a query, record the answer as a positive or
//! negative measurement, recompute the leading diagnoses, repeat until one
//! diagnosis is left.

use alloc::vec::Vec;

use thiserror::Error;

use crate::diagnosis::{leading_diagnoses, Diagnosis, DiagnosisError, DiagnosisSet, SearchOrder};
use crate::dpi::Dpi;
use crate::logic::Reasoner;
use crate::measures::{outcome_probability, MeasureError, QcmSpec, QsmSpec};
use crate::p1::{optimize_qpartition, P1Error, P1Stats};
use crate::p2::{optimize_query_for_qpartition, P2Error};
use crate::p3::{expand_query, opti_minimize_query, P3Config, P3Error};
use crate::qspace::{QPartition, Query};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("leading diagnosis count must be at least 2, got {0}")]
    LeadingCount(usize),
    #[error("the DPI has no diagnosis")]
    NoDiagnosis,
    #[error("session has converged; no further query exists")]
    Converged,
    #[error("no query is awaiting an answer")]
    NoPendingQuery,
    #[error("answer refers to a query that is not the pending one")]
    StaleQuery,
    #[error("answer contradicts earlier answers; no diagnosis would remain")]
    ContradictoryAnswer,
    #[error("simulated actual diagnosis is not a diagnosis of the DPI")]
    NotADiagnosis,
    #[error("an interactive oracle cannot drive a session on its own")]
    InteractiveOracle,
    #[error("query computation called the reasoner {0} times")]
    ReasonerUsed(u64),
    #[error(transparent)]
    P1(#[from] P1Error),
    #[error(transparent)]
    P2(#[from] P2Error),
    #[error(transparent)]
    P3(#[from] P3Error),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl From<DiagnosisError> for SessionError {
    fn from(_: DiagnosisError) -> Self {
        SessionError::NoDiagnosis
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub qsm: QsmSpec,
    pub qcm: QcmSpec,
    pub enhance: bool,
    pub p3: P3Config,
    pub leading_count: usize,
    pub max_queries: usize,
    /// Limit on partitions evaluated by the partition search.
    pub p1_budget: Option<usize>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    /// Selection measure of the partition.
    pub m: f64,
    /// Cost measure of the query.
    pub c: u64,
    /// Probability of a positive answer.
    pub p_true: f64,
}

/// Reasoner calls and partition-search statistics of one proposal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProposalStats {
    pub p1: P1Stats,
    pub reasoner_calls_p1p2: u64,
    pub reasoner_calls_p3: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub query: Query,
    pub partition: QPartition,
    pub scores: Scores,
    pub stats: ProposalStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    /// Leading diagnoses the query was computed for.
    pub leading: DiagnosisSet,
    pub proposal: Proposal,
    pub answer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    /// Answers as the system would if exactly these components were faulty.
    Simulated(Diagnosis),
    /// Answers come from outside, one at a time.
    Interactive,
}

impl Oracle {
    /// Positive iff `sdaa(actual)` entails every sentence of `q`.
    pub fn answer(&self, dpi: &Dpi, reasoner: &Reasoner, q: &Query) -> Option<bool> {
        match self {
            Oracle::Simulated(actual) => Some(reasoner.entails_iter(dpi.sdaa_refs(actual), &q.sentences)),
            Oracle::Interactive => None,
        }
    }
}

#[derive(Debug)]
pub struct Session {
    config: SessionConfig,
    dpi: Dpi,
    leading: DiagnosisSet,
    history: Vec<HistoryEntry>,
    pending: Option<Proposal>,
    reasoner: Reasoner,
    /// Reasoner calls spent recomputing diagnoses.
    diagnosis_calls: u64,
}

impl Session {
    pub fn new(dpi: Dpi, config: SessionConfig) -> Result<Self, SessionError> {
        if config.leading_count < 2 {
            return Err(SessionError::LeadingCount(config.leading_count));
        }
        let reasoner = Reasoner::new();
        let leading = Self::diagnose(&dpi, &config, &reasoner)?;
        let diagnosis_calls = reasoner.calls();
        Ok(Self { config, dpi, leading, history: Vec::new(), pending: None, reasoner, diagnosis_calls })
    }

    fn diagnose(dpi: &Dpi, config: &SessionConfig, reasoner: &Reasoner) -> Result<DiagnosisSet, SessionError> {
        Ok(leading_diagnoses(dpi, reasoner, config.leading_count, SearchOrder::UniformCostProbability, config.rng_seed)?)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn dpi(&self) -> &Dpi {
        &self.dpi
    }

    pub fn leading(&self) -> &DiagnosisSet {
        &self.leading
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn pending(&self) -> Option<&Proposal> {
        self.pending.as_ref()
    }

    pub fn reasoner(&self) -> &Reasoner {
        &self.reasoner
    }

    pub fn diagnosis_calls(&self) -> u64 {
        self.diagnosis_calls
    }

    /// Exactly one diagnosis is left.
    pub fn is_converged(&self) -> bool {
        self.leading.len() == 1
    }

    /// The sole remaining diagnosis once converged.
    pub fn result(&self) -> Option<&Diagnosis> {
        self.is_converged().then(|| self.leading.get(0))
    }

    /// Computes the next query, or returns the one still awaiting an answer.
    pub fn next_query(&mut self) -> Result<&Proposal, SessionError> {
        if self.pending.is_none() {
            if self.is_converged() {
                return Err(SessionError::Converged);
            }
            self.pending = Some(compute_query(&self.dpi, &self.leading, &self.config, &self.reasoner)?);
        }
        Ok(self.pending.as_ref().expect("pending query was just set"))
    }

    /// Records the answer to the pending query.
    pub fn answer(&mut self, answer: bool) -> Result<(), SessionError> {
        let proposal = self.pending.as_ref().ok_or(SessionError::NoPendingQuery)?;
        let sentences = proposal.query.sentences.iter().cloned().collect();
        let dpi = if answer { self.dpi.with_positive(sentences) } else { self.dpi.with_negative(sentences) };
        let before = self.reasoner.calls();
        let leading = Self::diagnose(&dpi, &self.config, &self.reasoner);
        self.diagnosis_calls += self.reasoner.calls() - before;
        let leading = leading.map_err(|e| match e {
            SessionError::NoDiagnosis => SessionError::ContradictoryAnswer,
            e => e,
        })?;
        let proposal = self.pending.take().expect("checked above");
        let previous = core::mem::replace(&mut self.leading, leading);
        self.dpi = dpi;
        self.history.push(HistoryEntry { leading: previous, proposal, answer });
        Ok(())
    }

    /// Like [`Session::answer`] but checks that `query` is the pending one.
    pub fn apply_answer(&mut self, query: &Query, answer: bool) -> Result<(), SessionError> {
        match &self.pending {
            None => Err(SessionError::NoPendingQuery),
            Some(p) if p.query != *query => Err(SessionError::StaleQuery),
            Some(_) => self.answer(answer),
        }
    }
}

/// Partition search and hitting-set minimization, followed by expansion and
/// re-minimization when enabled.
pub fn compute_query(dpi: &Dpi, d: &DiagnosisSet, config: &SessionConfig, reasoner: &Reasoner) -> Result<Proposal, SessionError> {
    if d.len() < 2 {
        return Err(SessionError::Converged);
    }
    let start = reasoner.calls();
    let best = optimize_qpartition(d, config.qsm, config.p1_budget)?;
    let mut query = optimize_query_for_qpartition(dpi, d, &best.partition, &config.qcm)?;
    let reasoner_calls_p1p2 = reasoner.calls() - start;
    if reasoner_calls_p1p2 != 0 {
        return Err(SessionError::ReasonerUsed(reasoner_calls_p1p2));
    }
    let mut reasoner_calls_p3 = 0;
    if config.enhance {
        let before = reasoner.calls();
        let exp = expand_query(dpi, d, &best.partition, &config.p3, reasoner)?;
        query = opti_minimize_query(dpi, d, &best.partition, &exp, reasoner)?;
        reasoner_calls_p3 = reasoner.calls() - before;
    }
    let scores = Scores {
        m: best.m,
        c: config.qcm.value(&query)?,
        p_true: outcome_probability(&best.partition, d)?,
    };
    Ok(Proposal {
        query,
        partition: best.partition,
        scores,
        stats: ProposalStats { p1: best.stats, reasoner_calls_p1p2, reasoner_calls_p3 },
    })
}

/// Runs a session with a simulated oracle until convergence or until
/// `max_queries` answers have been given.
pub fn run_session(dpi: Dpi, config: SessionConfig, oracle: &Oracle) -> Result<Session, SessionError> {
    let mut session = Session::new(dpi, config)?;
    if let Oracle::Simulated(actual) = oracle {
        if !crate::diagnosis::explains(&session.dpi, &session.reasoner, actual) {
            return Err(SessionError::NotADiagnosis);
        }
    }
    while !session.is_converged() && session.history.len() < session.config.max_queries {
        let query = session.next_query()?.query.clone();
        let answer = oracle.answer(&session.dpi, &session.reasoner, &query).ok_or(SessionError::InteractiveOracle)?;
        session.answer(answer)?;
    }
    Ok(session)
}
