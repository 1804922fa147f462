use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use thiserror::Error;

use super::cnf;
use super::sat::{self, Lit};
use super::Formula;

/// A finite set of formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase(BTreeSet<Formula>);

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, f: Formula) -> bool {
        self.0.insert(f)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains(f)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> alloc::collections::btree_set::Iter<'_, Formula> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in &self.0 {
            f.collect_atoms(&mut out);
        }
        out
    }

    pub fn as_set(&self) -> &BTreeSet<Formula> {
        &self.0
    }
}

impl FromIterator<Formula> for KnowledgeBase {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl Extend<Formula> for KnowledgeBase {
    fn extend<I: IntoIterator<Item = Formula>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

impl IntoIterator for KnowledgeBase {
    type Item = Formula;
    type IntoIter = alloc::collections::btree_set::IntoIter<Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a KnowledgeBase {
    type Item = &'a Formula;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Candidate shapes for typed entailment enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntailmentType {
    /// `a` for atoms `a` of the vocabulary.
    Atoms,
    /// `a -> b` for atoms `a`, `b` (possibly equal).
    SingletonBodyDefinite,
}

impl EntailmentType {
    pub fn matches(self, f: &Formula) -> bool {
        match self {
            EntailmentType::Atoms => matches!(f, Formula::Atom(_)),
            EntailmentType::SingletonBodyDefinite => f.is_singleton_body_definite(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntailmentTypes(BTreeSet<EntailmentType>);

impl EntailmentTypes {
    pub fn new(types: impl IntoIterator<Item = EntailmentType>) -> Self {
        Self(types.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, t: EntailmentType) -> bool {
        self.0.contains(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = EntailmentType> + '_ {
        self.0.iter().copied()
    }

    /// True if `f` has one of the shapes.
    pub fn matches(&self, f: &Formula) -> bool {
        self.iter().any(|t| t.matches(f))
    }
}

/// Number of satisfiability checks performed.
#[derive(Debug, Default)]
pub struct InferenceCounter(Cell<u64>);

impl InferenceCounter {
    pub fn get(&self) -> u64 {
        self.0.get()
    }

    pub fn reset(&self) {
        self.0.set(0)
    }

    fn bump(&self) {
        self.0.set(self.0.get() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("inconsistent knowledge base")]
pub struct InconsistentKb;

#[derive(Debug, Default)]
struct ClauseCache {
    vars: BTreeMap<String, u32>,
    positive: BTreeMap<Formula, Vec<Vec<Lit>>>,
    negated: BTreeMap<Formula, Vec<Vec<Lit>>>,
}

impl ClauseCache {
    fn load(&mut self, f: &Formula, positive: bool, out: &mut Vec<Vec<Lit>>) {
        let known = if positive { &self.positive } else { &self.negated };
        if let Some(cs) = known.get(f) {
            out.extend(cs.iter().cloned());
            return;
        }
        let raw = if positive { cnf::clauses(f) } else { cnf::negated_clauses(f) };
        let mut interned = Vec::with_capacity(raw.len());
        for clause in raw {
            let mut c: Vec<Lit> = clause
                .into_iter()
                .map(|(name, pol)| {
                    let next = self.vars.len() as u32;
                    let var = *self.vars.entry(String::from(name)).or_insert(next);
                    Lit::new(var, pol)
                })
                .collect();
            c.sort_unstable();
            c.dedup();
            // tautological clauses never constrain
            if c.windows(2).any(|w| w[0].var() == w[1].var()) {
                continue;
            }
            interned.push(c);
        }
        out.extend(interned.iter().cloned());
        if positive {
            self.positive.insert(f.clone(), interned);
        } else {
            self.negated.insert(f.clone(), interned);
        }
    }
}

/// Sound and complete propositional reasoner with call instrumentation.
///
/// Every satisfiability check bumps [`Reasoner::counter`].
#[derive(Debug, Default)]
pub struct Reasoner {
    counter: InferenceCounter,
    cache: RefCell<ClauseCache>,
}

impl Reasoner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counter(&self) -> &InferenceCounter {
        &self.counter
    }

    /// Number of satisfiability checks so far.
    pub fn calls(&self) -> u64 {
        self.counter.get()
    }

    fn satisfiable<'a>(&self, kb: impl IntoIterator<Item = &'a Formula>, negated: Option<&Formula>) -> bool {
        self.counter.bump();
        let mut cache = self.cache.borrow_mut();
        let mut clauses = Vec::new();
        for f in kb {
            cache.load(f, true, &mut clauses);
        }
        if let Some(f) = negated {
            cache.load(f, false, &mut clauses);
        }
        sat::satisfiable(&clauses, cache.vars.len())
    }

    pub fn is_consistent(&self, kb: &KnowledgeBase) -> bool {
        self.is_consistent_iter(kb.iter())
    }

    /// Consistency of a union given as formula references.
    pub fn is_consistent_iter<'a>(&self, kb: impl IntoIterator<Item = &'a Formula>) -> bool {
        self.satisfiable(kb, None)
    }

    /// `kb ⊨ s` for every `s` in `sentences`; stops at the first failure.
    pub fn entails<'a>(&self, kb: &KnowledgeBase, sentences: impl IntoIterator<Item = &'a Formula>) -> bool {
        self.entails_iter(kb.iter(), sentences)
    }

    pub fn entails_iter<'a, 'b>(
        &self,
        kb: impl IntoIterator<Item = &'a Formula> + Clone,
        sentences: impl IntoIterator<Item = &'b Formula>,
    ) -> bool {
        sentences.into_iter().all(|s| !self.satisfiable(kb.clone(), Some(s)))
    }

    /// Entailments of `kb` of the given shapes over the atoms of `kb` plus
    /// `extra_vocabulary`.
    pub fn enumerate_entailments(
        &self,
        kb: &KnowledgeBase,
        types: &EntailmentTypes,
        extra_vocabulary: &BTreeSet<String>,
    ) -> Result<BTreeSet<Formula>, InconsistentKb> {
        if !self.is_consistent(kb) {
            return Err(InconsistentKb);
        }
        let mut vocabulary = kb.atoms();
        vocabulary.extend(extra_vocabulary.iter().cloned());
        let mut out = BTreeSet::new();
        for t in types.iter() {
            match t {
                EntailmentType::Atoms => {
                    for a in &vocabulary {
                        let f = Formula::atom(a.clone());
                        if self.entails(kb, [&f]) {
                            out.insert(f);
                        }
                    }
                }
                EntailmentType::SingletonBodyDefinite => {
                    for a in &vocabulary {
                        for b in &vocabulary {
                            let f = Formula::implies(Formula::atom(a.clone()), Formula::atom(b.clone()));
                            if self.entails(kb, [&f]) {
                                out.insert(f);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
