//! Query computation settings shared by the command line and the service.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sqd_core::logic::{EntailmentType, EntailmentTypes};
use sqd_core::measures::{MeasureError, QcmKind, QcmSpec, QsmKind, QsmSpec};
use sqd_core::p3::P3Config;
use sqd_core::session::SessionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qsm {
    Ent,
    Spl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qcm {
    Sum,
    Max,
    Card,
}

/// Entailment shapes added during query expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Et {
    /// Entailed atoms.
    Atoms,
    /// Entailed implications between two atoms.
    Defclause,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryOptions {
    /// Query selection measure.
    #[arg(long, value_enum, default_value = "ent")]
    pub qsm: Qsm,
    /// Query cost measure.
    #[arg(long, value_enum, default_value = "card")]
    pub qcm: Qcm,
    /// Accepted distance from the optimal selection measure.
    #[arg(long, default_value_t = 0.01)]
    pub tm: f64,
    /// Expand and re-minimize queries with the reasoner.
    #[arg(long)]
    pub enhance: bool,
    /// Entailment shapes used by the expansion.
    #[arg(long, value_enum, default_value = "defclause")]
    pub et: Et,
    /// Number of leading diagnoses queries are computed for.
    #[arg(long, default_value_t = 10)]
    pub leading: usize,
    /// Stop a session after this many answers.
    #[arg(long, default_value_t = 50)]
    pub max_queries: usize,
    /// Limit on partitions evaluated per query.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            qsm: Qsm::Ent,
            qcm: Qcm::Card,
            tm: 0.01,
            enhance: false,
            et: Et::Defclause,
            leading: 10,
            max_queries: 50,
            budget: None,
            seed: 0,
        }
    }
}

impl QueryOptions {
    pub fn qsm_spec(&self) -> Result<QsmSpec, MeasureError> {
        let kind = match self.qsm {
            Qsm::Ent => QsmKind::Ent,
            Qsm::Spl => QsmKind::Spl,
        };
        QsmSpec::new(kind, self.tm)
    }

    pub fn qcm_spec(&self) -> QcmSpec {
        QcmSpec::new(match self.qcm {
            Qcm::Sum => QcmKind::Sum,
            Qcm::Max => QcmKind::Max,
            Qcm::Card => QcmKind::Card,
        })
    }

    pub fn p3_config(&self) -> P3Config {
        let et = match self.et {
            Et::Atoms => EntailmentType::Atoms,
            Et::Defclause => EntailmentType::SingletonBodyDefinite,
        };
        P3Config { entailments: EntailmentTypes::new([et]), ..P3Config::default() }
    }

    pub fn session_config(&self) -> Result<SessionConfig, MeasureError> {
        Ok(SessionConfig {
            qsm: self.qsm_spec()?,
            qcm: self.qcm_spec(),
            enhance: self.enhance,
            p3: self.p3_config(),
            leading_count: self.leading,
            max_queries: self.max_queries,
            p1_budget: self.budget,
            rng_seed: self.seed,
        })
    }
}
