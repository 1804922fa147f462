//! Timing and reasoner-call measurements of the three query phases.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sqd_core::diagnosis::{leading_diagnoses, DiagnosisError, SearchOrder};
use sqd_core::dpi::Dpi;
use sqd_core::logic::Reasoner;
use sqd_core::measures::MeasureError;
use sqd_core::p1::{optimize_qpartition, P1Error};
use sqd_core::p2::{optimize_query_for_qpartition, P2Error};
use sqd_core::p3::{
    expand_query, expansion_call_ceiling, expansion_vocabulary, minimization_call_ceiling, opti_minimize_query, P3Error,
};
use sqd_core::qspace::count_cqps;
use sqd_core::random::{random_dpi, RandomDpiConfig};
use thiserror::Error;

use crate::options::QueryOptions;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0} has fewer than two diagnoses")]
    TooFewDiagnoses(String),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    P1(#[from] P1Error),
    #[error(transparent)]
    P2(#[from] P2Error),
    #[error(transparent)]
    P3(#[from] P3Error),
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dpi: String,
    pub name: String,
    #[serde(rename = "|D|")]
    pub diagnoses: usize,
    pub cqp_count: usize,
    pub time_p1p2_ms: f64,
    pub time_p3_ms: f64,
    pub reasoner_calls_p1p2: u64,
    pub reasoner_calls_p3: u64,
    pub query_size: usize,
    pub m_value: f64,
    pub c_value: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub row: BenchRow,
    /// Size of the query before expansion.
    pub p2_query_size: usize,
    /// Bound the phase-3 reasoner calls must stay below.
    pub p3_call_ceiling: u64,
}

/// Runs all three phases once on the leading diagnoses of `dpi`.
pub fn measure(source: &str, name: &str, dpi: &Dpi, options: &QueryOptions) -> Result<Measurement, BenchError> {
    let qsm = options.qsm_spec()?;
    let qcm = options.qcm_spec();
    let p3 = options.p3_config();
    let reasoner = Reasoner::new();
    let d = leading_diagnoses(dpi, &reasoner, options.leading, SearchOrder::UniformCostProbability, options.seed)?;
    if d.len() < 2 {
        return Err(BenchError::TooFewDiagnoses(name.to_string()));
    }
    let cqp_count = count_cqps(&d).expect("at least two diagnoses");

    let calls = reasoner.calls();
    let start = Instant::now();
    let best = optimize_qpartition(&d, qsm, options.budget)?;
    let p2_query = optimize_query_for_qpartition(dpi, &d, &best.partition, &qcm)?;
    let time_p1p2 = start.elapsed();
    let reasoner_calls_p1p2 = reasoner.calls() - calls;

    let calls = reasoner.calls();
    let start = Instant::now();
    let exp = expand_query(dpi, &d, &best.partition, &p3, &reasoner)?;
    let query = opti_minimize_query(dpi, &d, &best.partition, &exp, &reasoner)?;
    let time_p3 = start.elapsed();
    let reasoner_calls_p3 = reasoner.calls() - calls;

    let atoms = expansion_vocabulary(dpi, &d, &exp).len();
    let neg_sentences: usize = dpi.neg().iter().map(Vec::len).sum();
    let p3_call_ceiling = expansion_call_ceiling(atoms, &p3)
        + minimization_call_ceiling(exp.len(), query.len(), d.len(), neg_sentences);
    Ok(Measurement {
        row: BenchRow {
            dpi: source.to_string(),
            name: name.to_string(),
            diagnoses: d.len(),
            cqp_count,
            time_p1p2_ms: time_p1p2.as_secs_f64() * 1e3,
            time_p3_ms: time_p3.as_secs_f64() * 1e3,
            reasoner_calls_p1p2,
            reasoner_calls_p3,
            query_size: query.len(),
            m_value: best.m,
            c_value: qcm.value(&query)?,
        },
        p2_query_size: p2_query.len(),
        p3_call_ceiling,
    })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub median_query_size: Option<f64>,
    pub max_time_p1p2_ms: f64,
    pub max_time_p3_ms: f64,
    pub reasoner_calls_p1p2: u64,
    pub ceiling_violations: usize,
}

pub fn summarize(ms: &[Measurement]) -> Summary {
    let sizes: Vec<f64> = ms.iter().map(|m| m.row.query_size as f64).collect();
    Summary {
        rows: ms.len(),
        median_query_size: median(&sizes),
        max_time_p1p2_ms: ms.iter().map(|m| m.row.time_p1p2_ms).fold(0.0, f64::max),
        max_time_p3_ms: ms.iter().map(|m| m.row.time_p3_ms).fold(0.0, f64::max),
        reasoner_calls_p1p2: ms.iter().map(|m| m.row.reasoner_calls_p1p2).sum(),
        ceiling_violations: ms.iter().filter(|m| m.row.reasoner_calls_p3 > m.p3_call_ceiling).count(),
    }
}

pub fn write_csv<W: std::io::Write>(out: W, ms: &[Measurement]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in ms {
        w.serialize(&m.row)?;
    }
    w.flush()?;
    Ok(())
}

/// Random DPIs for seeds `start, start + 1, ...`, keeping the first `count`
/// whose leading set reaches `min_diagnoses`. Gives up after `count * 50`
/// seeds.
pub fn random_corpus(
    config: &RandomDpiConfig,
    count: usize,
    min_diagnoses: usize,
    leading: usize,
    start: u64,
) -> Vec<(u64, Dpi)> {
    let mut out = Vec::new();
    for seed in start..start + (count as u64) * 50 {
        if out.len() == count {
            break;
        }
        let dpi = random_dpi(config, seed);
        let r = Reasoner::new();
        let n = leading_diagnoses(&dpi, &r, leading, SearchOrder::UniformCostProbability, seed).map_or(0, |d| d.len());
        if n >= min_diagnoses.max(2) {
            out.push((seed, dpi));
        }
    }
    out
}
