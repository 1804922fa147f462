//! JSON document format for diagnosis problem instances.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sqd_core::dpi::{Dpi, DpiError, DpiParts};
use sqd_core::logic::{parse_formula, Formula, ParseError, Reasoner};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed DPI document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad formula in {context}: {source}")]
    Formula { context: String, source: ParseError },
    #[error("invalid DPI: {0}")]
    Dpi(#[from] DpiError),
}

/// On-disk shape of a DPI. Formulas are strings in the parser's syntax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpiDocument {
    pub components: Vec<String>,
    pub behaviors: BTreeMap<String, String>,
    #[serde(default)]
    pub sd_extra: Vec<String>,
    #[serde(default)]
    pub obs: Vec<String>,
    #[serde(default)]
    pub pos: Vec<Vec<String>>,
    #[serde(default)]
    pub neg: Vec<Vec<String>>,
    #[serde(default)]
    pub fault_probs: BTreeMap<String, f64>,
}

fn parse_all(context: &str, texts: &[String]) -> Result<Vec<Formula>, FormatError> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            parse_formula(t).map_err(|source| FormatError::Formula { context: format!("{context}[{i}]"), source })
        })
        .collect()
}

fn parse_sets(context: &str, sets: &[Vec<String>]) -> Result<Vec<Vec<Formula>>, FormatError> {
    sets.iter().enumerate().map(|(i, s)| parse_all(&format!("{context}[{i}]"), s)).collect()
}

fn texts(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(ToString::to_string).collect()
}

impl DpiDocument {
    pub fn to_parts(&self) -> Result<DpiParts, FormatError> {
        let behaviors = self
            .behaviors
            .iter()
            .map(|(c, t)| {
                parse_formula(t)
                    .map(|f| (c.clone(), f))
                    .map_err(|source| FormatError::Formula { context: format!("behaviors.{c}"), source })
            })
            .collect::<Result<_, _>>()?;
        Ok(DpiParts {
            components: self.components.clone(),
            behaviors,
            sd_extra: parse_all("sd_extra", &self.sd_extra)?,
            obs: parse_all("obs", &self.obs)?,
            pos: parse_sets("pos", &self.pos)?,
            neg: parse_sets("neg", &self.neg)?,
            fault_probs: self.fault_probs.clone(),
        })
    }

    pub fn to_dpi(&self) -> Result<Dpi, FormatError> {
        Ok(Dpi::new(self.to_parts()?, &Reasoner::new())?)
    }

    /// Writes every fault probability explicitly.
    pub fn from_dpi(dpi: &Dpi) -> Self {
        let parts = dpi.to_parts();
        Self {
            components: parts.components,
            behaviors: parts.behaviors.iter().map(|(c, f)| (c.clone(), f.to_string())).collect(),
            sd_extra: texts(&parts.sd_extra),
            obs: texts(&parts.obs),
            pos: parts.pos.iter().map(|s| texts(s)).collect(),
            neg: parts.neg.iter().map(|s| texts(s)).collect(),
            fault_probs: parts.fault_probs,
        }
    }
}

pub fn parse_dpi(text: &str) -> Result<Dpi, FormatError> {
    serde_json::from_str::<DpiDocument>(text)?.to_dpi()
}

pub fn read_dpi(reader: impl Read) -> Result<Dpi, FormatError> {
    serde_json::from_reader::<_, DpiDocument>(reader)?.to_dpi()
}

pub fn load_dpi(path: &Path) -> Result<Dpi, FormatError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
    parse_dpi(&text)
}

pub fn to_json(dpi: &Dpi) -> String {
    serde_json::to_string_pretty(&DpiDocument::from_dpi(dpi)).expect("document serializes")
}
