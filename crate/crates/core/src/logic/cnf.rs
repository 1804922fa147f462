//! Clausal form by NNF conversion and distribution of `|` over `&`, no
//! renaming. The result is deterministic, so literal counts are stable.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::Formula;

/// A literal borrowing its atom name; `true` is positive polarity.
pub type Literal<'a> = (&'a str, bool);

/// Clause as a sorted, duplicate-free literal list.
pub type Clause<'a> = Vec<Literal<'a>>;

pub fn clauses(f: &Formula) -> Vec<Clause<'_>> {
    cnf(f, true)
}

/// Clausal form of `!f`.
pub fn negated_clauses(f: &Formula) -> Vec<Clause<'_>> {
    cnf(f, false)
}

/// Number of distinct literals in the clausal form of `f`.
///
/// `B | F -> H` becomes `(!B | H) & (!F | H)`, which has three distinct
/// literals.
pub fn literal_count(f: &Formula) -> usize {
    clauses(f).into_iter().flatten().collect::<BTreeSet<_>>().len()
}

fn cnf(f: &Formula, positive: bool) -> Vec<Clause<'_>> {
    match (f, positive) {
        (Formula::Atom(a), pol) => vec![vec![(a.as_str(), pol)]],
        (Formula::Not(x), pol) => cnf(x, !pol),
        (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
            let mut out = cnf(a, positive);
            out.extend(cnf(b, positive));
            out
        }
        (Formula::Or(a, b), true) | (Formula::And(a, b), false) => distribute(cnf(a, positive), cnf(b, positive)),
        // a -> b  ==  !a | b ;  !(a -> b)  ==  a & !b
        (Formula::Implies(a, b), true) => distribute(cnf(a, false), cnf(b, true)),
        (Formula::Implies(a, b), false) => {
            let mut out = cnf(a, true);
            out.extend(cnf(b, false));
            out
        }
    }
}

fn distribute<'a>(left: Vec<Clause<'a>>, right: Vec<Clause<'a>>) -> Vec<Clause<'a>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in &left {
        for r in &right {
            let mut c: Clause<'a> = l.iter().chain(r.iter()).copied().collect();
            c.sort_unstable();
            c.dedup();
            out.push(c);
        }
    }
    out
}
