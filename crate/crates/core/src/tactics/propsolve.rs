use std::collections::BTreeMap;

use crate::classify::{classify_formula, LogicClass};
use crate::logic::{Connective, Term};

use super::TacticError;

/// Largest atom count decided by truth table.
pub const MAX_ATOMS: usize = 16;

/// Decides whether the conjunction of `supports` implies `goal`
/// propositionally, by truth table over the atoms.
pub fn prop_solve(goal: &Term, supports: &[Term]) -> Result<bool, TacticError> {
    for t in std::iter::once(goal).chain(supports) {
        let class = classify_formula(t);
        if class != LogicClass::Prop {
            return Err(TacticError::Class {
                formula: t.to_string(),
                class,
            });
        }
    }
    let mut atoms = BTreeMap::new();
    for t in std::iter::once(goal).chain(supports) {
        collect_atoms(t, &mut atoms);
    }
    if atoms.len() > MAX_ATOMS {
        return Err(TacticError::ResourceRefused {
            atoms: atoms.len(),
            limit: MAX_ATOMS,
        });
    }
    for (i, slot) in atoms.values_mut().enumerate() {
        *slot = i;
    }
    let rows: u32 = 1 << atoms.len();
    Ok((0..rows).all(|row| {
        let holds = supports.iter().all(|s| eval(s, &atoms, row));
        !holds || eval(goal, &atoms, row)
    }))
}

fn collect_atoms<'a>(t: &'a Term, atoms: &mut BTreeMap<&'a Term, usize>) {
    match t {
        Term::Not(b) => collect_atoms(b, atoms),
        Term::Binary(_, l, r) => {
            collect_atoms(l, atoms);
            collect_atoms(r, atoms);
        }
        _ => {
            atoms.insert(t, 0);
        }
    }
}

fn eval(t: &Term, atoms: &BTreeMap<&Term, usize>, row: u32) -> bool {
    match t {
        Term::Not(b) => !eval(b, atoms, row),
        Term::Binary(op, l, r) => {
            let (a, b) = (eval(l, atoms, row), eval(r, atoms, row));
            match op {
                Connective::And => a && b,
                Connective::Or => a || b,
                Connective::Implies => !a || b,
                Connective::Iff => a == b,
            }
        }
        atom => row & (1 << atoms[atom]) != 0,
    }
}
