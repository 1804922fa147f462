use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

/// Propositional sentence.
///
/// Binary connectives are stored as parsed: `&` and `|` associate to the
/// left, `->` to the right.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Every atom name occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Truth value under `assignment`; unassigned atoms are false.
    pub fn eval(&self, assignment: &BTreeMap<String, bool>) -> bool {
        match self {
            Formula::Atom(a) => assignment.get(a).copied().unwrap_or(false),
            Formula::Not(f) => !f.eval(assignment),
            Formula::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Formula::Or(a, b) => a.eval(assignment) || b.eval(assignment),
            Formula::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
        }
    }

    /// `a -> b` with both sides atoms.
    pub fn is_singleton_body_definite(&self) -> bool {
        matches!(self, Formula::Implies(a, b)
            if matches!(**a, Formula::Atom(_)) && matches!(**b, Formula::Atom(_)))
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) | Formula::Not(_) => 4,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Implies(..) => 1,
        }
    }
}

struct Operand<'a> {
    formula: &'a Formula,
    parens: bool,
}

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parens {
            write!(f, "({})", self.formula)
        } else {
            write!(f, "{}", self.formula)
        }
    }
}

/// Prints in the input grammar with the fewest parentheses that re-parse to
/// the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        fn left(x: &Formula, prec: u8, left_assoc: bool) -> Operand<'_> {
            let p = x.precedence();
            Operand { formula: x, parens: p < prec || (p == prec && !left_assoc) }
        }
        fn right(x: &Formula, prec: u8, left_assoc: bool) -> Operand<'_> {
            let p = x.precedence();
            Operand { formula: x, parens: p < prec || (p == prec && left_assoc) }
        }
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(x) => write!(f, "!{}", Operand { formula: x, parens: x.precedence() < 4 }),
            Formula::And(a, b) => write!(f, "{} & {}", left(a, prec, true), right(b, prec, true)),
            Formula::Or(a, b) => write!(f, "{} | {}", left(a, prec, true), right(b, prec, true)),
            Formula::Implies(a, b) => write!(f, "{} -> {}", left(a, prec, false), right(b, prec, false)),
        }
    }
}
