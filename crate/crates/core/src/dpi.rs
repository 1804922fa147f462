//! Diagnosis problem instances.
//!
//! Components are addressed by their position in [`Dpi::components`]; the
//! abnormality predicate is never materialized. Instead `sdaa(Δ)` includes
//! `beh(c)` exactly for the components outside `Δ`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::bits::ComponentSet;
use crate::logic::{Formula, KnowledgeBase, Reasoner};

pub type ComponentId = String;

/// Fault probability used for components without an explicit one.
pub const DEFAULT_FAULT_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpiError {
    #[error("a DPI needs at least one component")]
    NoComponents,
    #[error("duplicate component {0:?}")]
    DuplicateComponent(ComponentId),
    #[error("unknown component {0:?}")]
    UnknownComponent(ComponentId),
    #[error("component {0:?} has no behavior")]
    MissingBehavior(ComponentId),
    #[error("components {0:?} and {1:?} have the same behavior")]
    DuplicateBehavior(ComponentId, ComponentId),
    #[error("fault probability {1} of {0:?} is outside (0, 1)")]
    ProbabilityOutOfRange(ComponentId, f64),
    #[error("system description with all components healthy is inconsistent")]
    InconsistentSystem,
    #[error("observations are inconsistent")]
    InconsistentObservations,
    #[error("positive measurement {0} is inconsistent")]
    InconsistentPositive(usize),
    #[error("negative measurement {0} is inconsistent")]
    InconsistentNegative(usize),
}

/// Unvalidated DPI content keyed by component name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DpiParts {
    pub components: Vec<ComponentId>,
    pub behaviors: BTreeMap<ComponentId, Formula>,
    pub sd_extra: Vec<Formula>,
    pub obs: Vec<Formula>,
    pub pos: Vec<Vec<Formula>>,
    pub neg: Vec<Vec<Formula>>,
    pub fault_probs: BTreeMap<ComponentId, f64>,
}

/// A validated diagnosis problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dpi {
    components: Vec<ComponentId>,
    index: BTreeMap<ComponentId, usize>,
    behaviors: Vec<Formula>,
    sd_extra: Vec<Formula>,
    obs: Vec<Formula>,
    pos: Vec<Vec<Formula>>,
    neg: Vec<Vec<Formula>>,
    fault_probs: Vec<f64>,
}

/// Behavior sentences of a component set, `BEH[X]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehSet {
    pub components: ComponentSet,
    pub sentences: Vec<Formula>,
}

impl Dpi {
    /// Validates `parts`. Uses `reasoner` for the consistency requirements.
    pub fn new(parts: DpiParts, reasoner: &Reasoner) -> Result<Self, DpiError> {
        let DpiParts { components, mut behaviors, sd_extra, obs, pos, neg, mut fault_probs } = parts;
        if components.is_empty() {
            return Err(DpiError::NoComponents);
        }
        let mut index = BTreeMap::new();
        for (i, c) in components.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(DpiError::DuplicateComponent(c.clone()));
            }
        }
        if let Some(c) = behaviors.keys().chain(fault_probs.keys()).find(|c| !index.contains_key(*c)) {
            return Err(DpiError::UnknownComponent(c.clone()));
        }
        let mut behs = Vec::with_capacity(components.len());
        let mut seen: BTreeMap<&Formula, &ComponentId> = BTreeMap::new();
        let mut probs = Vec::with_capacity(components.len());
        for c in &components {
            let beh = behaviors.remove(c).ok_or_else(|| DpiError::MissingBehavior(c.clone()))?;
            behs.push(beh);
            let p = fault_probs.remove(c).unwrap_or(DEFAULT_FAULT_PROBABILITY);
            if !(p > 0.0 && p < 1.0) {
                return Err(DpiError::ProbabilityOutOfRange(c.clone(), p));
            }
            probs.push(p);
        }
        for (c, beh) in components.iter().zip(&behs) {
            if let Some(other) = seen.insert(beh, c) {
                return Err(DpiError::DuplicateBehavior(other.clone(), c.clone()));
            }
        }
        if !reasoner.is_consistent_iter(sd_extra.iter().chain(&behs)) {
            return Err(DpiError::InconsistentSystem);
        }
        if !reasoner.is_consistent_iter(&obs) {
            return Err(DpiError::InconsistentObservations);
        }
        if let Some(i) = pos.iter().position(|p| !reasoner.is_consistent_iter(p)) {
            return Err(DpiError::InconsistentPositive(i));
        }
        if let Some(i) = neg.iter().position(|n| !reasoner.is_consistent_iter(n)) {
            return Err(DpiError::InconsistentNegative(i));
        }
        Ok(Self { components, index, behaviors: behs, sd_extra, obs, pos, neg, fault_probs: probs })
    }

    pub fn to_parts(&self) -> DpiParts {
        DpiParts {
            components: self.components.clone(),
            behaviors: self.components.iter().cloned().zip(self.behaviors.iter().cloned()).collect(),
            sd_extra: self.sd_extra.clone(),
            obs: self.obs.clone(),
            pos: self.pos.clone(),
            neg: self.neg.clone(),
            fault_probs: self.components.iter().cloned().zip(self.fault_probs.iter().copied()).collect(),
        }
    }

    pub fn components(&self) -> &[ComponentId] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn component_set<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<ComponentSet, DpiError> {
        let mut set = ComponentSet::empty(self.num_components());
        for id in ids {
            set.insert(self.component_index(id).ok_or_else(|| DpiError::UnknownComponent(id.into()))?);
        }
        Ok(set)
    }

    pub fn component_names(&self, set: &ComponentSet) -> Vec<&str> {
        set.iter().map(|i| self.components[i].as_str()).collect()
    }

    pub fn all_components(&self) -> ComponentSet {
        ComponentSet::full(self.num_components())
    }

    pub fn behavior(&self, component: usize) -> &Formula {
        &self.behaviors[component]
    }

    pub fn behaviors(&self) -> &[Formula] {
        &self.behaviors
    }

    pub fn fault_probability(&self, component: usize) -> f64 {
        self.fault_probs[component]
    }

    pub fn sd_extra(&self) -> &[Formula] {
        &self.sd_extra
    }

    pub fn obs(&self) -> &[Formula] {
        &self.obs
    }

    pub fn pos(&self) -> &[Vec<Formula>] {
        &self.pos
    }

    pub fn neg(&self) -> &[Vec<Formula>] {
        &self.neg
    }

    /// `SD_extra ∪ OBS ∪ ⋃P`, the part of every `sdaa(Δ)` that does not
    /// depend on `Δ`.
    pub fn background(&self) -> impl Iterator<Item = &Formula> + Clone {
        self.sd_extra.iter().chain(&self.obs).chain(self.pos.iter().flatten())
    }

    /// Formulas of `sdaa(delta)` by reference.
    pub fn sdaa_refs(&self, delta: &ComponentSet) -> Vec<&Formula> {
        self.background()
            .chain(self.behaviors.iter().enumerate().filter(|(i, _)| !delta.contains(*i)).map(|(_, f)| f))
            .collect()
    }

    /// The system behavior assuming exactly `delta` is faulty.
    pub fn sdaa(&self, delta: &ComponentSet) -> KnowledgeBase {
        self.sdaa_refs(delta).into_iter().cloned().collect()
    }

    /// `BEH[x]`.
    pub fn beh_set(&self, x: &ComponentSet) -> BehSet {
        BehSet { components: x.clone(), sentences: x.iter().map(|i| self.behaviors[i].clone()).collect() }
    }

    /// True iff `sdaa(COMPS)` is consistent and entails no negative
    /// measurement.
    pub fn diagnosis_exists(&self, reasoner: &Reasoner) -> bool {
        let kb: Vec<&Formula> = self.background().collect();
        reasoner.is_consistent_iter(kb.iter().copied())
            && self.neg.iter().all(|n| !reasoner.entails_iter(kb.iter().copied(), n))
    }

    /// Copy with `sentences` appended to the positive measurements.
    pub fn with_positive(&self, sentences: Vec<Formula>) -> Self {
        let mut out = self.clone();
        out.pos.push(sentences);
        out
    }

    /// Copy with `sentences` appended to the negative measurements.
    pub fn with_negative(&self, sentences: Vec<Formula>) -> Self {
        let mut out = self.clone();
        out.neg.push(sentences);
        out
    }
}
