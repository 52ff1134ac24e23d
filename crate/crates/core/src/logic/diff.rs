//! Single-subterm difference analysis between two formulas.

use super::{Position, Term};

/// Result of [`diff_single_subterm`]: replacing `from` by `to` at every
/// position of `positions` in the first term yields the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtermDiff {
    pub from: Term,
    pub to: Term,
    pub positions: Vec<Position>,
}

/// Finds the outermost pair of proper subterms `(s1, s2)` such that
/// replacing `s1` by `s2` at a set of positions turns `t1` into `t2`.
///
/// Bound variable names are compared literally.
pub fn diff_single_subterm(t1: &Term, t2: &Term) -> Option<SubtermDiff> {
    let first = first_divergence(t1, t2)?;
    // every candidate pair sits on the path to the first divergence;
    // shorter prefixes give outer pairs
    for len in 1..=first.len() {
        let prefix = Position::new(first.indices()[..len].to_vec());
        let s1 = t1.subterm_at(&prefix).ok()?;
        let s2 = t2.subterm_at(&prefix).ok()?;
        if s1.ty() != s2.ty() {
            continue;
        }
        let mut positions = Vec::new();
        let mut path = Vec::new();
        if covers(t1, t2, s1, s2, &mut path, &mut positions) {
            return Some(SubtermDiff {
                from: s1.clone(),
                to: s2.clone(),
                positions,
            });
        }
    }
    None
}

/// Two nodes have the same shape when they agree on everything except
/// their children.
fn same_shape(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::App(..), Term::App(..)) | (Term::Not(_), Term::Not(_)) | (Term::Eq(..), Term::Eq(..)) => true,
        (Term::Binary(x, ..), Term::Binary(y, ..)) => x == y,
        (Term::Quant(q1, v1, _), Term::Quant(q2, v2, _)) => q1 == q2 && v1 == v2,
        _ => false,
    }
}

/// Leftmost position at which the two terms stop sharing structure.
fn first_divergence(a: &Term, b: &Term) -> Option<Position> {
    if a == b {
        return None;
    }
    if !same_shape(a, b) {
        return Some(Position::root());
    }
    for ((i, ca), (_, cb)) in a.children().into_iter().zip(b.children()) {
        if let Some(p) = first_divergence(ca, cb) {
            let mut v = vec![i];
            v.extend_from_slice(p.indices());
            return Some(Position::new(v));
        }
    }
    None
}

fn covers(
    a: &Term,
    b: &Term,
    s1: &Term,
    s2: &Term,
    path: &mut Vec<usize>,
    out: &mut Vec<Position>,
) -> bool {
    if a == b {
        return true;
    }
    if a == s1 && b == s2 {
        out.push(Position::new(path.clone()));
        return true;
    }
    if !same_shape(a, b) {
        return false;
    }
    for ((i, ca), (_, cb)) in a.children().into_iter().zip(b.children()) {
        path.push(i);
        let ok = covers(ca, cb, s1, s2, path, out);
        path.pop();
        if !ok {
            return false;
        }
    }
    true
}
