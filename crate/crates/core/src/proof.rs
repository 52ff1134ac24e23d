//! Linearized natural-deduction proofs, open goals and foci.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{format_positions, Position, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("unknown line {0}")]
    UnknownLine(Label),
    #[error("line {0} is not an open goal")]
    NotOpen(Label),
    #[error("conjecture is not a formula: {0}")]
    NotFormula(String),
}

/// Tactic parameter recorded in a justification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
    Positions(Vec<Position>),
    Term(Term),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Positions(ps) => f.write_str(&format_positions(ps)),
            Param::Term(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Hyp,
    Open,
    Tactic {
        name: String,
        params: Vec<Param>,
        premises: Vec<Label>,
    },
}

impl Justification {
    pub fn premises(&self) -> &[Label] {
        match self {
            Justification::Tactic { premises, .. } => premises,
            _ => &[],
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Hyp => f.write_str("Hyp"),
            Justification::Open => f.write_str("Open"),
            Justification::Tactic {
                name,
                params,
                premises,
            } => {
                f.write_str(name)?;
                if params.is_empty() && premises.is_empty() {
                    return Ok(());
                }
                f.write_str(":")?;
                if !params.is_empty() {
                    let ps: Vec<String> = params.iter().map(Param::to_string).collect();
                    write!(f, " ({})", ps.join(" "))?;
                }
                if !premises.is_empty() {
                    let ls: Vec<&str> = premises.iter().map(Label::as_str).collect();
                    write!(f, " ({})", ls.join(" "))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub label: Label,
    pub hyps: Vec<Label>,
    pub formula: Term,
    pub justification: Justification,
}

impl ProofLine {
    pub fn is_open(&self) -> bool {
        self.justification == Justification::Open
    }
}

impl fmt::Display for ProofLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hyps: Vec<&str> = self.hyps.iter().map(Label::as_str).collect();
        write!(
            f,
            "{} ({}) |- {} {}",
            self.label,
            hyps.join(" "),
            self.formula,
            self.justification
        )
    }
}

/// Immutable proof snapshot. Lines are kept in creation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialProof {
    lines: Vec<ProofLine>,
    counter: usize,
}

impl PartialProof {
    /// A proof consisting of the open conjecture `C`.
    pub fn new(conjecture: Term) -> Result<Self, ProofError> {
        if !conjecture.is_formula() {
            return Err(ProofError::NotFormula(conjecture.to_string()));
        }
        Ok(PartialProof {
            lines: vec![ProofLine {
                label: Label::new("C"),
                hyps: Vec::new(),
                formula: conjecture,
                justification: Justification::Open,
            }],
            counter: 0,
        })
    }

    /// Builds a proof from explicit lines; `counter` is the index of the
    /// last generated `L` label.
    pub fn from_lines(lines: Vec<ProofLine>, counter: usize) -> Self {
        PartialProof { lines, counter }
    }

    pub fn lines(&self) -> &[ProofLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn line(&self, label: &Label) -> Option<&ProofLine> {
        self.lines.iter().find(|l| &l.label == label)
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.lines.iter().position(|l| &l.label == label)
    }

    pub fn require(&self, label: &Label) -> Result<&ProofLine, ProofError> {
        self.line(label)
            .ok_or_else(|| ProofError::UnknownLine(label.clone()))
    }

    pub fn open_goals(&self) -> impl Iterator<Item = &ProofLine> {
        self.lines.iter().filter(|l| l.is_open())
    }

    pub fn is_complete(&self) -> bool {
        self.open_goals().next().is_none()
    }

    /// True when `line` is (transitively) justified using `target`.
    pub fn depends_on(&self, line: &Label, target: &Label) -> bool {
        let mut stack = vec![line.clone()];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            if let Some(l) = self.line(&cur) {
                for p in l.justification.premises() {
                    if p == target {
                        return true;
                    }
                    stack.push(p.clone());
                }
            }
        }
        false
    }

    /// True when `support` may serve as a premise for `goal`.
    pub fn usable_for(&self, support: &ProofLine, goal: &ProofLine) -> bool {
        support.label != goal.label
            && !support.is_open()
            && support.hyps.iter().all(|h| goal.hyps.contains(h))
            && !self.depends_on(&support.label, &goal.label)
    }

    pub(crate) fn fresh_label(&mut self) -> Label {
        self.counter += 1;
        Label(format!("L{}", self.counter))
    }

    pub(crate) fn push_line(&mut self, hyps: Vec<Label>, formula: Term, justification: Justification) -> Label {
        let label = self.fresh_label();
        self.lines.push(ProofLine {
            label: label.clone(),
            hyps,
            formula,
            justification,
        });
        label
    }

    /// Pushes a hypothesis line whose hypothesis set includes itself.
    pub(crate) fn push_hyp(&mut self, mut hyps: Vec<Label>, formula: Term) -> Label {
        let label = self.fresh_label();
        hyps.push(label.clone());
        self.lines.push(ProofLine {
            label: label.clone(),
            hyps,
            formula,
            justification: Justification::Hyp,
        });
        label
    }

    pub(crate) fn justify(&mut self, label: &Label, justification: Justification) {
        if let Some(l) = self.lines.iter_mut().find(|l| &l.label == label) {
            l.justification = justification;
        }
    }

    /// Lines in presentation order: hypotheses and premises before the
    /// lines that use them, rooted at the conjecture.
    pub fn presentation_order(&self) -> Vec<&ProofLine> {
        fn visit<'a>(
            proof: &'a PartialProof,
            label: &Label,
            seen: &mut BTreeSet<Label>,
            out: &mut Vec<&'a ProofLine>,
        ) {
            if !seen.insert(label.clone()) {
                return;
            }
            let Some(line) = proof.line(label) else { return };
            for h in &line.hyps {
                visit(proof, h, seen, out);
            }
            for p in line.justification.premises() {
                visit(proof, p, seen, out);
            }
            out.push(line);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        if let Some(root) = self.lines.first() {
            visit(self, &root.label, &mut seen, &mut out);
        }
        for l in &self.lines {
            visit(self, &l.label, &mut seen, &mut out);
        }
        out
    }

    /// Line-per-record text, one `label (hyps) |- formula justification`
    /// record per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for l in self.presentation_order() {
            s.push_str(&l.to_string());
            s.push('\n');
        }
        s
    }
}

/// An open goal together with the lines usable for it, oldest first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Focus {
    pub goal: Label,
    pub support: Vec<Label>,
}

impl Focus {
    /// Support lines, most recently introduced first.
    pub fn support_recent_first(&self) -> impl Iterator<Item = &Label> {
        self.support.iter().rev()
    }
}

/// Focus on `selection`, or on the most recently created open goal.
/// `None` means the proof is complete.
pub fn current_focus(proof: &PartialProof, selection: Option<&Label>) -> Result<Option<Focus>, ProofError> {
    let goal = match selection {
        Some(label) => {
            let line = proof.require(label)?;
            if !line.is_open() {
                return Err(ProofError::NotOpen(label.clone()));
            }
            line
        }
        None => match proof.open_goals().last() {
            Some(g) => g,
            None => return Ok(None),
        },
    };
    let support = proof
        .lines()
        .iter()
        .filter(|l| proof.usable_for(l, goal))
        .map(|l| l.label.clone())
        .collect();
    Ok(Some(Focus {
        goal: goal.label.clone(),
        support,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn two_goals() -> PartialProof {
        let mut p = PartialProof::new(parse_formula("a:o & b:o").unwrap()).unwrap();
        let a = parse_formula("a:o").unwrap();
        let b = parse_formula("b:o").unwrap();
        let g1 = p.push_line(vec![], a, Justification::Open);
        let g2 = p.push_line(vec![], b, Justification::Open);
        p.justify(
            &Label::new("C"),
            Justification::Tactic {
                name: "&I".into(),
                params: vec![],
                premises: vec![g1, g2],
            },
        );
        p
    }

    #[test]
    fn initial_proof_is_open() {
        let p = PartialProof::new(parse_formula("a:o => a").unwrap()).unwrap();
        assert!(!p.is_complete());
        let f = current_focus(&p, None).unwrap().unwrap();
        assert_eq!(f.goal, Label::new("C"));
        assert!(f.support.is_empty());
    }

    #[test]
    fn non_formula_conjecture_rejected() {
        let c = crate::logic::Term::constant("c", crate::logic::Type::Individual);
        assert!(matches!(PartialProof::new(c), Err(ProofError::NotFormula(_))));
    }

    #[test]
    fn most_recent_goal_is_default_focus() {
        let p = two_goals();
        let f = current_focus(&p, None).unwrap().unwrap();
        assert_eq!(f.goal, Label::new("L2"));
        let f = current_focus(&p, Some(&Label::new("L1"))).unwrap().unwrap();
        assert_eq!(f.goal, Label::new("L1"));
    }

    #[test]
    fn focus_on_closed_line_fails() {
        let p = two_goals();
        assert_eq!(
            current_focus(&p, Some(&Label::new("C"))),
            Err(ProofError::NotOpen(Label::new("C")))
        );
        assert!(matches!(
            current_focus(&p, Some(&Label::new("L9"))),
            Err(ProofError::UnknownLine(_))
        ));
    }

    #[test]
    fn complete_proof_has_no_focus() {
        let mut p = PartialProof::new(parse_formula("a:o").unwrap()).unwrap();
        p.justify(
            &Label::new("C"),
            Justification::Tactic {
                name: "PropSolve".into(),
                params: vec![],
                premises: vec![],
            },
        );
        assert!(p.is_complete());
        assert_eq!(current_focus(&p, None).unwrap(), None);
    }

    #[test]
    fn conjecture_depending_on_goal_is_not_support() {
        let p = two_goals();
        let f = current_focus(&p, None).unwrap().unwrap();
        assert!(f.support.is_empty());
        assert!(p.depends_on(&Label::new("C"), &Label::new("L2")));
    }

    #[test]
    fn justification_rendering() {
        let j = Justification::Tactic {
            name: "=Subst".into(),
            params: vec![Param::Positions(vec![Position::new(vec![1])])],
            premises: vec![Label::new("L1"), Label::new("L3")],
        };
        assert_eq!(j.to_string(), "=Subst: ([1]) (L1 L3)");
        let j = Justification::Tactic {
            name: "Otter".into(),
            params: vec![],
            premises: vec![],
        };
        assert_eq!(j.to_string(), "Otter");
    }
}
