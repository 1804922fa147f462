//! DPLL satisfiability over interned clauses.

use alloc::vec;
use alloc::vec::Vec;

/// Literal `2*var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        Lit(var * 2 + u32::from(!positive))
    }

    pub fn var(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn negate(self) -> Self {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Value {
    Unset,
    True,
    False,
}

struct Solver<'a> {
    clauses: &'a [Vec<Lit>],
    values: Vec<Value>,
    trail: Vec<usize>,
}

impl Solver<'_> {
    fn value(&self, lit: Lit) -> Value {
        match self.values[lit.var()] {
            Value::Unset => Value::Unset,
            Value::True if lit.positive() => Value::True,
            Value::False if !lit.positive() => Value::True,
            _ => Value::False,
        }
    }

    fn assign(&mut self, lit: Lit) {
        self.values[lit.var()] = if lit.positive() { Value::True } else { Value::False };
        self.trail.push(lit.var());
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let var = self.trail.pop().expect("trail shorter than mark");
            self.values[var] = Value::Unset;
        }
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            for clause in self.clauses {
                let mut unset = None;
                let mut unset_count = 0;
                let mut satisfied = false;
                for &lit in clause {
                    match self.value(lit) {
                        Value::True => {
                            satisfied = true;
                            break;
                        }
                        Value::Unset => {
                            unset_count += 1;
                            unset = Some(lit);
                        }
                        Value::False => {}
                    }
                }
                if satisfied {
                    continue;
                }
                match (unset_count, unset) {
                    (0, _) => return false,
                    (1, Some(lit)) => {
                        self.assign(lit);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn branch_literal(&self) -> Option<Lit> {
        self.clauses
            .iter()
            .filter(|c| !c.iter().any(|&l| self.value(l) == Value::True))
            .flat_map(|c| c.iter().copied())
            .find(|&l| self.value(l) == Value::Unset)
    }

    fn solve(&mut self) -> bool {
        if !self.propagate() {
            return false;
        }
        let Some(lit) = self.branch_literal() else {
            return true;
        };
        let mark = self.trail.len();
        for choice in [lit, lit.negate()] {
            self.assign(choice);
            if self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Decides satisfiability of a clause set over variables `0..num_vars`.
pub fn satisfiable(clauses: &[Vec<Lit>], num_vars: usize) -> bool {
    if clauses.iter().any(Vec::is_empty) {
        return false;
    }
    let mut solver = Solver { clauses, values: vec![Value::Unset; num_vars], trail: Vec::new() };
    solver.solve()
}
