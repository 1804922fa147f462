//! Serializable snapshots of sessions, used by the service and the CLI.

use serde::{Deserialize, Serialize};
use sqd_core::bits::IndexSet;
use sqd_core::diagnosis::DiagnosisSet;
use sqd_core::dpi::Dpi;
use sqd_core::measures::QcmSpec;
use sqd_core::session::{HistoryEntry, Proposal, Session};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisView {
    pub components: Vec<String>,
    pub probability: f64,
}

/// Positions in the accompanying diagnosis list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionView {
    pub dplus: Vec<usize>,
    pub dminus: Vec<usize>,
    pub dzero: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceView {
    pub formula: String,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalView {
    pub sentences: Vec<SentenceView>,
    /// Components whose behaviors make up the query, when it has that form.
    pub components: Option<Vec<String>>,
    pub partition: PartitionView,
    pub m: f64,
    pub c: u64,
    pub p_true: f64,
    pub cqps_visited: usize,
    pub reasoner_calls_p1p2: u64,
    pub reasoner_calls_p3: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    pub diagnoses: Vec<DiagnosisView>,
    pub proposal: ProposalView,
    pub answer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Created,
    Querying,
    AwaitingAnswer,
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub status: Status,
    pub diagnoses: Vec<DiagnosisView>,
    pub pending: Option<ProposalView>,
    pub answered: usize,
    /// The sole remaining diagnosis once converged.
    pub result: Option<Vec<String>>,
}

fn names(dpi: &Dpi, set: &IndexSet) -> Vec<String> {
    dpi.component_names(set).into_iter().map(String::from).collect()
}

pub fn diagnoses(dpi: &Dpi, d: &DiagnosisSet) -> Vec<DiagnosisView> {
    d.diagnoses()
        .iter()
        .zip(d.probabilities())
        .map(|(delta, &p)| DiagnosisView { components: names(dpi, delta), probability: p })
        .collect()
}

pub fn proposal(dpi: &Dpi, qcm: &QcmSpec, p: &Proposal) -> ProposalView {
    ProposalView {
        sentences: p
            .query
            .sentences
            .iter()
            .map(|f| SentenceView { formula: f.to_string(), cost: qcm.sentence_cost(f) })
            .collect(),
        components: p.query.components.as_ref().map(|c| names(dpi, c)),
        partition: PartitionView {
            dplus: p.partition.dplus.to_vec(),
            dminus: p.partition.dminus.to_vec(),
            dzero: p.partition.dzero.to_vec(),
        },
        m: p.scores.m,
        c: p.scores.c,
        p_true: p.scores.p_true,
        cqps_visited: p.stats.p1.cqps_visited,
        reasoner_calls_p1p2: p.stats.reasoner_calls_p1p2,
        reasoner_calls_p3: p.stats.reasoner_calls_p3,
    }
}

pub fn status(s: &Session) -> Status {
    if s.is_converged() {
        Status::Converged
    } else if s.pending().is_some() {
        Status::AwaitingAnswer
    } else if s.history().is_empty() {
        Status::Created
    } else {
        Status::Querying
    }
}

pub fn session(id: &str, s: &Session) -> SessionView {
    let qcm = s.config().qcm;
    SessionView {
        session_id: id.to_string(),
        status: status(s),
        diagnoses: diagnoses(s.dpi(), s.leading()),
        pending: s.pending().map(|p| proposal(s.dpi(), &qcm, p)),
        answered: s.history().len(),
        result: s.result().map(|r| names(s.dpi(), r)),
    }
}

/// History entries render against the DPI at the time of the question,
/// which has the same components as the current one.
pub fn history(s: &Session) -> Vec<HistoryView> {
    let qcm = s.config().qcm;
    s.history()
        .iter()
        .map(|h: &HistoryEntry| HistoryView {
            diagnoses: diagnoses(s.dpi(), &h.leading),
            proposal: proposal(s.dpi(), &qcm, &h.proposal),
            answer: h.answer,
        })
        .collect()
}
