//! The command catalog: tactic outlines, applicability checks and
//! expansions.

mod propsolve;

pub use propsolve::{prop_solve, MAX_ATOMS};

use thiserror::Error;

use crate::classify::{classify_formula, LogicClass};
use crate::logic::{Connective, Position, Term};
use crate::pai::{Actual, FormalArgument, Pai, PaiError, PaiLiteral, SlotKind};
use crate::proof::{Justification, Label, Param, PartialProof, ProofLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TacticError {
    #[error("{command}: argument `{slot}` {reason}")]
    Slot {
        command: String,
        slot: String,
        reason: String,
    },
    #[error("{formula} is {class}, not propositional")]
    Class { formula: String, class: LogicClass },
    #[error("{atoms} atoms exceed the truth-table limit of {limit}")]
    ResourceRefused { atoms: usize, limit: usize },
    #[error("line {label}: {reason}")]
    Unsound { label: Label, reason: String },
    #[error(transparent)]
    Pai(#[from] PaiError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tactic {
    Axiom,
    ImpIntro,
    AndIntro,
    AndElim,
    AllElim,
    EqSubst,
    IffToEq,
    PropSolve,
}

use SlotKind::*;

const AXIOM: &[FormalArgument] = &[
    FormalArgument::new("conc", ConclusionLine),
    FormalArgument::new("prem", PremiseLine),
];
const IMP_I: &[FormalArgument] = &[FormalArgument::new("conc", ConclusionLine)];
const AND_I: &[FormalArgument] = &[
    FormalArgument::new("conc", ConclusionLine),
    FormalArgument::new("lprem", PremiseLine),
    FormalArgument::new("rprem", PremiseLine),
];
const AND_E: &[FormalArgument] = &[
    FormalArgument::new("prem", PremiseLine),
    FormalArgument::new("conc", ConclusionLine),
];
const ALL_E: &[FormalArgument] = &[
    FormalArgument::new("p", PremiseLine),
    FormalArgument::new("t", SlotKind::Term),
    FormalArgument::new("c", ConclusionLine),
];
const SUBST: &[FormalArgument] = &[
    FormalArgument::new("u", PremiseLine),
    FormalArgument::new("eq", PremiseLine),
    FormalArgument::new("s", ConclusionLine),
    FormalArgument::new("pl", Positions),
];
const IFF_EQ: &[FormalArgument] = &[
    FormalArgument::new("conc", ConclusionLine),
    FormalArgument::new("prem", PremiseLine),
];
const PROP: &[FormalArgument] = &[
    FormalArgument::new("conc", ConclusionLine),
    FormalArgument::new("prems", PremiseLines),
];

/// A command: its name, formal arguments and the tactic it invokes.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandDescriptor {
    pub name: &'static str,
    pub tactic: Tactic,
    pub formals: &'static [FormalArgument],
    /// Arguments that must be instantiated to execute.
    pub mandatory: &'static [&'static str],
    /// Minimum logic class in which the tactic is meaningful.
    pub class: LogicClass,
    /// Whether executing it closes the goal without new subgoals.
    pub goal_closing: bool,
}

impl CommandDescriptor {
    pub fn empty_pai(&self, epoch: u64) -> Pai {
        Pai::empty(self.name, self.formals, epoch)
    }

    pub fn formal(&self, name: &str) -> Option<&FormalArgument> {
        self.formals.iter().find(|f| f.name == name)
    }
}

/// The fixed set of commands.
#[derive(Clone, Debug)]
pub struct Catalog {
    commands: Vec<CommandDescriptor>,
    prop_label: String,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::standard()
    }
}

impl Catalog {
    pub fn standard() -> Self {
        let cmd = |name, tactic, formals, mandatory, class, goal_closing| CommandDescriptor {
            name,
            tactic,
            formals,
            mandatory,
            class,
            goal_closing,
        };
        Catalog {
            commands: vec![
                cmd("Axiom", Tactic::Axiom, AXIOM, &["conc", "prem"], LogicClass::Prop, true),
                cmd("=>I", Tactic::ImpIntro, IMP_I, &["conc"], LogicClass::Prop, false),
                cmd("&I", Tactic::AndIntro, AND_I, &["conc"], LogicClass::Prop, false),
                cmd("&E", Tactic::AndElim, AND_E, &["prem"], LogicClass::Prop, false),
                cmd("AllE", Tactic::AllElim, ALL_E, &["p", "t"], LogicClass::Fo, false),
                cmd("=Subst", Tactic::EqSubst, SUBST, &["u", "s", "pl"], LogicClass::Ho, false),
                cmd("<=>2=", Tactic::IffToEq, IFF_EQ, &["conc"], LogicClass::Ho, false),
                cmd("PropSolve", Tactic::PropSolve, PROP, &["conc"], LogicClass::Prop, true),
            ],
            prop_label: "PropSolve".to_string(),
        }
    }

    /// Justification label written by PropSolve, e.g. the name of the
    /// prover it stands in for.
    pub fn with_prop_label(mut self, label: impl Into<String>) -> Self {
        self.prop_label = label.into();
        self
    }

    pub fn prop_label(&self) -> &str {
        &self.prop_label
    }

    pub fn commands(&self) -> &[CommandDescriptor] {
        &self.commands
    }

    pub fn get(&self, name: &str) -> Option<&CommandDescriptor> {
        self.commands.iter().find(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&CommandDescriptor, TacticError> {
        self.get(name)
            .ok_or_else(|| PaiError::UnknownCommand(name.to_string()).into())
    }

    /// Validates a parsed literal against its command and totalizes it.
    pub fn resolve(&self, lit: &PaiLiteral) -> Result<Pai, TacticError> {
        let cmd = self.require(&lit.command)?;
        for f in cmd.formals {
            let Some(value) = lit.get(f.name) else { continue };
            let ok = match (f.kind, value) {
                (_, Actual::Empty) => true,
                (PremiseLine | ConclusionLine, Actual::Line(_)) => true,
                (PremiseLines, Actual::Lines(_)) => true,
                (Positions, Actual::Positions(_)) => true,
                (SlotKind::Term, Actual::Term(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(slot_err(cmd, f.name, &format!("has the wrong kind of value {value}")));
            }
        }
        Ok(lit.totalize(cmd.formals)?)
    }
}

/// The catalog in its default configuration.
pub fn catalog() -> Vec<CommandDescriptor> {
    Catalog::standard().commands
}

fn slot_err(cmd: &CommandDescriptor, slot: &str, reason: &str) -> TacticError {
    TacticError::Slot {
        command: cmd.name.to_string(),
        slot: slot.to_string(),
        reason: reason.to_string(),
    }
}

struct Check<'a> {
    cmd: &'a CommandDescriptor,
    proof: &'a PartialProof,
    pai: &'a Pai,
}

impl<'a> Check<'a> {
    fn err(&self, slot: &str, reason: impl AsRef<str>) -> TacticError {
        slot_err(self.cmd, slot, reason.as_ref())
    }

    fn line(&self, slot: &str) -> Result<Option<&'a ProofLine>, TacticError> {
        match self.pai.get(slot) {
            None | Some(Actual::Empty) => Ok(None),
            Some(Actual::Line(l)) => self
                .proof
                .line(l)
                .map(Some)
                .ok_or_else(|| self.err(slot, format!("refers to unknown line {l}"))),
            Some(other) => Err(self.err(slot, format!("expects a line, got {other}"))),
        }
    }

    fn goal(&self, slot: &str) -> Result<Option<&'a ProofLine>, TacticError> {
        let line = self.line(slot)?;
        if let Some(l) = line {
            if !l.is_open() {
                return Err(self.err(slot, format!("line {} is not an open goal", l.label)));
            }
        }
        Ok(line)
    }

    fn support(&self, slot: &str, goal: Option<&ProofLine>) -> Result<Option<&'a ProofLine>, TacticError> {
        let line = self.line(slot)?;
        if let Some(l) = line {
            self.usable(slot, l, goal)?;
        }
        Ok(line)
    }

    fn usable(&self, slot: &str, l: &ProofLine, goal: Option<&ProofLine>) -> Result<(), TacticError> {
        if l.is_open() {
            return Err(self.err(slot, format!("line {} is still open", l.label)));
        }
        if let Some(g) = goal {
            if !self.proof.usable_for(l, g) {
                return Err(self.err(
                    slot,
                    format!("line {} cannot support goal {}", l.label, g.label),
                ));
            }
        }
        Ok(())
    }

    fn mandatory(&self) -> Result<(), TacticError> {
        for m in self.cmd.mandatory {
            if !self.pai.is_set(m) {
                return Err(self.err(m, "must be instantiated"));
            }
        }
        Ok(())
    }
}

/// Checks the instantiated arguments of a (possibly partial) PAI.
pub fn precheck(catalog: &Catalog, proof: &PartialProof, pai: &Pai) -> Result<(), TacticError> {
    let cmd = catalog.require(pai.command())?;
    check(cmd, proof, pai).map(|_| ())
}

/// Arguments resolved by [`check`], enough to expand the tactic.
#[derive(Default)]
struct Resolved {
    /// Formula of a new subgoal per missing premise slot.
    missing: Vec<(&'static str, Term)>,
    conc: Option<Label>,
    /// Forward-derived lines when no conclusion is given.
    derived: Vec<Term>,
    params: Vec<Param>,
}

fn check(cmd: &CommandDescriptor, proof: &PartialProof, pai: &Pai) -> Result<Resolved, TacticError> {
    if pai.command() != cmd.name {
        return Err(PaiError::CommandMismatch(pai.command().into(), cmd.name.into()).into());
    }
    let c = Check { cmd, proof, pai };
    let mut r = Resolved::default();
    match cmd.tactic {
        Tactic::Axiom => {
            let conc = c.goal("conc")?;
            let prem = c.support("prem", conc)?;
            if let (Some(g), Some(p)) = (conc, prem) {
                if g.formula != p.formula {
                    return Err(c.err("prem", format!("{} differs from the goal", p.formula)));
                }
            }
            r.conc = conc.map(|l| l.label.clone());
        }
        Tactic::ImpIntro => {
            if let Some(g) = c.goal("conc")? {
                if g.formula.as_binary(Connective::Implies).is_none() {
                    return Err(c.err("conc", format!("{} is not an implication", g.formula)));
                }
                r.conc = Some(g.label.clone());
            }
        }
        Tactic::AndIntro => {
            let conc = c.goal("conc")?;
            let parts = match conc {
                Some(g) => Some(
                    g.formula
                        .as_binary(Connective::And)
                        .ok_or_else(|| c.err("conc", format!("{} is not a conjunction", g.formula)))?,
                ),
                None => None,
            };
            for (slot, k) in [("lprem", 0), ("rprem", 1)] {
                let prem = c.support(slot, conc)?;
                if let Some((l, rt)) = parts {
                    let want = if k == 0 { l } else { rt };
                    match prem {
                        Some(p) if p.formula != *want => {
                            return Err(c.err(slot, format!("{} is not {want}", p.formula)))
                        }
                        Some(_) => {}
                        None => r.missing.push((slot, want.clone())),
                    }
                }
            }
            r.conc = conc.map(|l| l.label.clone());
        }
        Tactic::AndElim => {
            let prem = c.line("prem")?;
            let parts = match prem {
                Some(p) => {
                    c.usable("prem", p, None)?;
                    Some(p.formula.as_binary(Connective::And).ok_or_else(|| {
                        c.err("prem", format!("{} is not a conjunction", p.formula))
                    })?)
                }
                None => None,
            };
            let conc = c.goal("conc")?;
            if let (Some(g), Some(p)) = (conc, prem) {
                c.usable("prem", p, Some(g))?;
            }
            match (conc, parts) {
                (Some(g), Some((l, rt))) if g.formula != *l && g.formula != *rt => {
                    return Err(c.err("conc", format!("{} is not a conjunct of the premise", g.formula)))
                }
                (None, Some((l, rt))) => r.derived = vec![l.clone(), rt.clone()],
                _ => {}
            }
            r.conc = conc.map(|l| l.label.clone());
        }
        Tactic::AllElim => {
            let conc = c.goal("c")?;
            let prem = c.support("p", conc)?;
            let quant = match prem {
                Some(p) => match &p.formula {
                    Term::Quant(crate::logic::Quantifier::All, v, body) => Some((v, body)),
                    other => return Err(c.err("p", format!("{other} is not universally quantified"))),
                },
                None => None,
            };
            let witness = match pai.get("t") {
                None | Some(Actual::Empty) => None,
                Some(Actual::Term(t)) => {
                    if !t.is_ground() {
                        return Err(c.err("t", format!("{t} is not ground")));
                    }
                    Some(t)
                }
                Some(other) => return Err(c.err("t", format!("expects a term, got {other}"))),
            };
            if let (Some((v, _)), Some(t)) = (quant, witness) {
                if v.ty != t.ty() {
                    return Err(c.err("t", format!("{t} : {} does not match {} : {}", t.ty(), v.name, v.ty)));
                }
            }
            if let (Some((v, body)), Some(t)) = (quant, witness) {
                let inst = body.instantiate(v, t);
                match conc {
                    Some(g) if g.formula != inst => {
                        return Err(c.err("c", format!("{} is not the instance {inst}", g.formula)))
                    }
                    Some(_) => {}
                    None => r.derived.push(inst),
                }
                r.params.push(Param::Term(t.clone()));
            }
            r.conc = conc.map(|l| l.label.clone());
        }
        Tactic::EqSubst => {
            let s = c.goal("s")?;
            let u = c.support("u", s)?;
            let eq = c.support("eq", s)?;
            if let Some(e) = eq {
                if e.formula.as_eq().is_none() {
                    return Err(c.err("eq", format!("{} is not an equation", e.formula)));
                }
            }
            let pl = match pai.get("pl") {
                None | Some(Actual::Empty) => None,
                Some(Actual::Positions(ps)) if ps.is_empty() => {
                    return Err(c.err("pl", "is an empty position list"))
                }
                Some(Actual::Positions(ps)) => Some(ps.as_slice()),
                Some(other) => return Err(c.err("pl", format!("expects positions, got {other}"))),
            };
            if let (Some(u), Some(s), Some(pl)) = (u, s, pl) {
                let (from, to) = subst_terms(&c, u, s, pl)?;
                match eq {
                    Some(e) => {
                        let (l, rt) = e.formula.as_eq().expect("checked above");
                        if !((l == &to && rt == &from) || (l == &from && rt == &to)) {
                            return Err(c.err("eq", format!("{} does not equate {from} and {to}", e.formula)));
                        }
                    }
                    None => r.missing.push((
                        "eq",
                        Term::eq(to.clone(), from.clone())
                            .map_err(|e| c.err("eq", e.to_string()))?,
                    )),
                }
                r.params.push(Param::Positions(pl.to_vec()));
            }
            r.conc = s.map(|l| l.label.clone());
        }
        Tactic::IffToEq => {
            let conc = c.goal("conc")?;
            let want = match conc {
                Some(g) => match g.formula.as_eq() {
                    Some((l, rt)) if l.ty().is_bool() => Some(
                        Term::iff(l.clone(), rt.clone()).map_err(|e| c.err("conc", e.to_string()))?,
                    ),
                    _ => return Err(c.err("conc", format!("{} is not an equation of formulas", g.formula))),
                },
                None => None,
            };
            let prem = c.support("prem", conc)?;
            match (prem, want) {
                (Some(p), Some(w)) if p.formula != w => {
                    return Err(c.err("prem", format!("{} is not {w}", p.formula)))
                }
                (None, Some(w)) => r.missing.push(("prem", w)),
                _ => {}
            }
            r.conc = conc.map(|l| l.label.clone());
        }
        Tactic::PropSolve => {
            let conc = c.goal("conc")?;
            let prems: Vec<&ProofLine> = match pai.get("prems") {
                None | Some(Actual::Empty) => Vec::new(),
                Some(Actual::Lines(ls)) => ls
                    .iter()
                    .map(|l| {
                        let line = proof
                            .line(l)
                            .ok_or_else(|| c.err("prems", format!("refers to unknown line {l}")))?;
                        c.usable("prems", line, conc)?;
                        Ok(line)
                    })
                    .collect::<Result<_, TacticError>>()?,
                Some(other) => return Err(c.err("prems", format!("expects lines, got {other}"))),
            };
            if let Some(g) = conc {
                let class = classify_formula(&g.formula);
                if class != LogicClass::Prop {
                    return Err(c.err("conc", format!("{} is {class}", g.formula)));
                }
                for p in &prems {
                    let class = classify_formula(&p.formula);
                    if class != LogicClass::Prop {
                        return Err(c.err("prems", format!("{} is {class}", p.formula)));
                    }
                }
            }
            r.conc = conc.map(|l| l.label.clone());
        }
    }
    Ok(r)
}

/// Resolves the replaced and the replacing subterm of an `=Subst` step.
fn subst_terms(c: &Check<'_>, u: &ProofLine, s: &ProofLine, pl: &[Position]) -> Result<(Term, Term), TacticError> {
    let at = |t: &Term, p: &Position, slot: &str| {
        t.subterm_at(p).cloned().map_err(|e| c.err(slot, e.to_string()))
    };
    let from = at(&u.formula, &pl[0], "u")?;
    let to = at(&s.formula, &pl[0], "s")?;
    if from == to {
        return Err(c.err("pl", format!("{from} is replaced by itself")));
    }
    for p in &pl[1..] {
        if at(&u.formula, p, "u")? != from || at(&s.formula, p, "s")? != to {
            return Err(c.err("pl", format!("position {p} does not hold {from} / {to}")));
        }
    }
    let replaced = u
        .formula
        .replace_at(pl, &to)
        .map_err(|e| c.err("pl", e.to_string()))?;
    if replaced != s.formula {
        return Err(c.err(
            "pl",
            format!("replacing at these positions gives {replaced}, not {}", s.formula),
        ));
    }
    Ok((from, to))
}

/// Applies a command to the proof, returning the new snapshot.
///
/// Uninstantiated premise slots become new open lines; the conclusion
/// line (if any) is justified by the tactic.
pub fn apply_tactic(
    catalog: &Catalog,
    proof: &PartialProof,
    pai: &Pai,
) -> Result<PartialProof, TacticError> {
    let cmd = catalog.require(pai.command())?;
    Check { cmd, proof, pai }.mandatory()?;
    let r = check(cmd, proof, pai)?;
    let mut next = proof.clone();
    let conc_line = r.conc.as_ref().and_then(|l| proof.line(l)).cloned();
    let hyps = conc_line.as_ref().map(|l| l.hyps.clone()).unwrap_or_default();
    let label_of = |slot: &str| pai.line(slot).cloned();

    let (name, premises): (String, Vec<Label>) = match cmd.tactic {
        Tactic::ImpIntro => {
            let goal = conc_line.as_ref().expect("mandatory");
            let (a, b) = goal.formula.as_binary(Connective::Implies).expect("checked");
            let h = next.push_hyp(hyps.clone(), a.clone());
            let mut inner = hyps.clone();
            inner.push(h);
            let g = next.push_line(inner, b.clone(), Justification::Open);
            (cmd.name.into(), vec![g])
        }
        Tactic::PropSolve => {
            let goal = conc_line.as_ref().expect("mandatory");
            let prems: Vec<Label> = pai
                .get("prems")
                .and_then(Actual::as_lines)
                .map(<[Label]>::to_vec)
                .unwrap_or_default();
            let supports: Vec<Term> = prems
                .iter()
                .map(|l| proof.line(l).expect("checked").formula.clone())
                .collect();
            if !prop_solve(&goal.formula, &supports)? {
                return Err(slot_err(cmd, "conc", &format!("{} does not follow", goal.formula)));
            }
            (catalog.prop_label().to_string(), prems)
        }
        _ => {
            let mut premises = Vec::new();
            let slots: Vec<&'static str> = cmd
                .formals
                .iter()
                .filter(|f| matches!(f.kind, PremiseLine | PremiseLines))
                .map(|f| f.name)
                .collect();
            for slot in slots {
                if let Some(l) = label_of(slot) {
                    premises.push(l);
                } else if let Some((_, formula)) = r.missing.iter().find(|(s, _)| *s == slot) {
                    premises.push(next.push_line(hyps.clone(), formula.clone(), Justification::Open));
                }
            }
            (cmd.name.into(), premises)
        }
    };

    let justification = Justification::Tactic {
        name,
        params: r.params.clone(),
        premises,
    };
    match &r.conc {
        Some(conc) => next.justify(conc, justification),
        None => {
            // forward step: derived lines inherit the premise hypotheses
            let prem = cmd
                .formals
                .iter()
                .find(|f| f.kind == PremiseLine)
                .and_then(|f| label_of(f.name))
                .and_then(|l| proof.line(&l))
                .expect("forward tactics have a mandatory premise");
            for t in r.derived {
                next.push_line(prem.hyps.clone(), t, justification.clone());
            }
        }
    }
    Ok(next)
}

/// Re-checks every tactic justification of a proof.
pub fn verify_proof(catalog: &Catalog, proof: &PartialProof) -> Result<(), TacticError> {
    for line in proof.lines() {
        let Justification::Tactic { name, params, premises } = &line.justification else {
            continue;
        };
        let unsound = |reason: String| TacticError::Unsound {
            label: line.label.clone(),
            reason,
        };
        let prem = |i: usize| -> Result<&ProofLine, TacticError> {
            let l = premises
                .get(i)
                .ok_or_else(|| unsound(format!("missing premise {i}")))?;
            proof.line(l).ok_or_else(|| unsound(format!("unknown premise {l}")))
        };
        for l in premises {
            let p = proof.line(l).ok_or_else(|| unsound(format!("unknown premise {l}")))?;
            if !p.hyps.iter().all(|h| line.hyps.contains(h)) && !matches!(name.as_str(), "=>I") {
                return Err(unsound(format!("premise {l} has foreign hypotheses")));
            }
        }
        let expect = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(unsound(format!("{what} does not yield {}", line.formula)))
            }
        };
        let tactic = if name == catalog.prop_label() {
            Tactic::PropSolve
        } else {
            catalog
                .get(name)
                .ok_or_else(|| unsound(format!("unknown tactic {name}")))?
                .tactic
        };
        match tactic {
            Tactic::Axiom => expect(prem(0)?.formula == line.formula, name)?,
            Tactic::ImpIntro => {
                let body = prem(0)?;
                let new: Vec<&Label> = body.hyps.iter().filter(|h| !line.hyps.contains(h)).collect();
                let [h] = new.as_slice() else {
                    return Err(unsound("=>I premise must add exactly one hypothesis".into()));
                };
                let h = proof.line(h).ok_or_else(|| unsound(format!("unknown hypothesis {h}")))?;
                let want = Term::implies(h.formula.clone(), body.formula.clone())
                    .map_err(|e| unsound(e.to_string()))?;
                expect(want == line.formula, name)?;
            }
            Tactic::AndIntro => {
                let want = Term::and(prem(0)?.formula.clone(), prem(1)?.formula.clone())
                    .map_err(|e| unsound(e.to_string()))?;
                expect(want == line.formula, name)?;
            }
            Tactic::AndElim => {
                let ok = prem(0)?
                    .formula
                    .as_binary(Connective::And)
                    .is_some_and(|(l, r)| *l == line.formula || *r == line.formula);
                expect(ok, name)?;
            }
            Tactic::AllElim => {
                let ok = match (&prem(0)?.formula, params.first()) {
                    (Term::Quant(crate::logic::Quantifier::All, v, body), Some(Param::Term(t))) => {
                        body.instantiate(v, t) == line.formula
                    }
                    _ => false,
                };
                expect(ok, name)?;
            }
            Tactic::EqSubst => {
                let u = prem(0)?;
                let eq = prem(1)?;
                let Some(Param::Positions(pl)) = params.first() else {
                    return Err(unsound("=Subst without positions".into()));
                };
                let (l, r) = eq
                    .formula
                    .as_eq()
                    .ok_or_else(|| unsound(format!("{} is not an equation", eq.formula)))?;
                let from = u
                    .formula
                    .subterm_at(&pl[0])
                    .map_err(|e| unsound(e.to_string()))?;
                let to = if from == l { r } else { l };
                let ok = (from == l || from == r)
                    && u.formula.replace_at(pl, to).ok().as_ref() == Some(&line.formula);
                expect(ok, name)?;
            }
            Tactic::IffToEq => {
                let ok = match (prem(0)?.formula.as_binary(Connective::Iff), line.formula.as_eq()) {
                    (Some((a, b)), Some((c, d))) => a == c && b == d,
                    _ => false,
                };
                expect(ok, name)?;
            }
            Tactic::PropSolve => {
                let supports: Vec<Term> = (0..premises.len())
                    .map(|i| prem(i).map(|p| p.formula.clone()))
                    .collect::<Result<_, _>>()?;
                expect(prop_solve(&line.formula, &supports)?, name)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_term, Signature};

    struct Fixture {
        catalog: Catalog,
        sig: Signature,
        proof: PartialProof,
    }

    impl Fixture {
        fn new(conjecture: &str) -> Self {
            let mut sig = Signature::new();
            let c = parse_term(conjecture, &mut sig).unwrap();
            Fixture {
                catalog: Catalog::standard(),
                sig,
                proof: PartialProof::new(c).unwrap(),
            }
        }

        fn pai(&mut self, text: &str) -> Pai {
            let lit = PaiLiteral::parse(text, &mut self.sig).unwrap();
            self.catalog.resolve(&lit).unwrap()
        }

        fn run(&mut self, text: &str) -> Result<(), TacticError> {
            let pai = self.pai(text);
            self.proof = apply_tactic(&self.catalog, &self.proof, &pai)?;
            verify_proof(&self.catalog, &self.proof).unwrap();
            Ok(())
        }

        fn line(&self, label: &str) -> String {
            self.proof.line(&Label::new(label)).unwrap().to_string()
        }
    }

    fn reference() -> Fixture {
        Fixture::new("(p:(o>o) (a:o & b:o)) => (p (b & a))")
    }

    #[test]
    fn catalog_descriptors() {
        let cat = catalog();
        let subst = cat.iter().find(|c| c.name == "=Subst").unwrap();
        let names: Vec<&str> = subst.formals.iter().map(|f| f.name).collect();
        assert_eq!(names, ["u", "eq", "s", "pl"]);
        assert_eq!(subst.class, LogicClass::Ho);
        let imp = cat.iter().find(|c| c.name == "=>I").unwrap();
        assert_eq!(imp.formals.len(), 1);
        assert_eq!(imp.class, LogicClass::Prop);
        let ps = cat.iter().find(|c| c.name == "PropSolve").unwrap();
        let names: Vec<&str> = ps.formals.iter().map(|f| f.name).collect();
        assert_eq!(names, ["conc", "prems"]);
        assert_eq!(ps.class, LogicClass::Prop);
        let alle = cat.iter().find(|c| c.name == "AllE").unwrap();
        let names: Vec<&str> = alle.formals.iter().map(|f| f.name).collect();
        assert_eq!(names, ["p", "t", "c"]);
    }

    #[test]
    fn reference_proof_steps() {
        let mut f = reference();
        f.run("=>I{conc:C}").unwrap();
        assert_eq!(f.line("L1"), "L1 (L1) |- (p (a & b)) Hyp");
        assert_eq!(f.line("L2"), "L2 (L1) |- (p (b & a)) Open");
        assert_eq!(f.line("C"), "C () |- (p (a & b)) => (p (b & a)) =>I: (L2)");

        f.run("=Subst{u:L1,s:L2,pl:[1]}").unwrap();
        assert_eq!(f.line("L3"), "L3 (L1) |- (b & a) = (a & b) Open");
        assert_eq!(f.line("L2"), "L2 (L1) |- (p (b & a)) =Subst: ([1]) (L1 L3)");

        f.run("<=>2={conc:L3}").unwrap();
        assert_eq!(f.line("L4"), "L4 (L1) |- (b & a) <=> (a & b) Open");
        assert_eq!(f.line("L3"), "L3 (L1) |- (b & a) = (a & b) <=>2=: (L4)");

        f.catalog = Catalog::standard().with_prop_label("Otter");
        f.run("PropSolve{conc:L4,prems:()}").unwrap();
        assert!(f.proof.is_complete());
        assert_eq!(
            f.proof.dump(),
            "L1 (L1) |- (p (a & b)) Hyp\n\
             L4 (L1) |- (b & a) <=> (a & b) Otter\n\
             L3 (L1) |- (b & a) = (a & b) <=>2=: (L4)\n\
             L2 (L1) |- (p (b & a)) =Subst: ([1]) (L1 L3)\n\
             C () |- (p (a & b)) => (p (b & a)) =>I: (L2)\n"
        );
    }

    #[test]
    fn failing_check_leaves_proof_unchanged() {
        let mut f = reference();
        let before = f.proof.clone();
        let err = f.run("&I{conc:C}").unwrap_err();
        assert!(matches!(err, TacticError::Slot { ref slot, .. } if slot == "conc"));
        assert_eq!(f.proof, before);
    }

    #[test]
    fn goal_cannot_support_itself() {
        let mut f = reference();
        f.run("=>I{conc:C}").unwrap();
        let err = f.run("=Subst{u:L2,s:L2,pl:[1]}").unwrap_err();
        assert!(matches!(err, TacticError::Slot { ref slot, .. } if slot == "u"));
    }

    #[test]
    fn mandatory_slots_enforced() {
        let mut f = reference();
        f.run("=>I{conc:C}").unwrap();
        let err = f.run("=Subst{u:L1,s:L2}").unwrap_err();
        assert!(matches!(err, TacticError::Slot { ref slot, .. } if slot == "pl"));
        let partial = f.pai("=Subst{u:L1,s:L2}");
        assert!(precheck(&f.catalog, &f.proof, &partial).is_ok());
    }

    #[test]
    fn subst_with_given_equation_either_orientation() {
        for eq in ["(b & a) = (a & b)", "(a & b) = (b & a)"] {
            let mut f = reference();
            f.run("=>I{conc:C}").unwrap();
            // fabricate a proved equation line usable by L2
            let t = parse_term(eq, &mut f.sig).unwrap();
            let mut lines = f.proof.lines().to_vec();
            lines.push(ProofLine {
                label: Label::new("L9"),
                hyps: vec![],
                formula: t,
                justification: Justification::Tactic {
                    name: "Given".into(),
                    params: vec![],
                    premises: vec![],
                },
            });
            let proof = PartialProof::from_lines(lines, 9);
            let pai = f.pai("=Subst{u:L1,eq:L9,s:L2,pl:[1]}");
            let next = apply_tactic(&f.catalog, &proof, &pai).unwrap();
            assert_eq!(next.len(), proof.len());
            assert_eq!(
                next.line(&Label::new("L2")).unwrap().justification.to_string(),
                "=Subst: ([1]) (L1 L9)"
            );
        }
    }

    #[test]
    fn subst_rejects_wrong_positions() {
        let mut f = reference();
        f.run("=>I{conc:C}").unwrap();
        assert!(f.run("=Subst{u:L1,s:L2,pl:[0]}").is_err());
        assert!(f.run("=Subst{u:L1,s:L2,pl:[1,1]}").is_err());
        assert!(f.run("=Subst{u:L1,s:L2,pl:[7]}").is_err());
    }

    #[test]
    fn and_intro_creates_missing_subgoals() {
        let mut f = Fixture::new("a:o & b:o");
        f.run("&I{conc:C}").unwrap();
        assert_eq!(f.line("L1"), "L1 () |- a Open");
        assert_eq!(f.line("L2"), "L2 () |- b Open");
        assert_eq!(f.line("C"), "C () |- a & b &I: (L1 L2)");
    }

    #[test]
    fn and_elim_forward_and_closing() {
        let mut f = Fixture::new("(a:o & b:o) => b");
        f.run("=>I{conc:C}").unwrap();
        f.run("&E{prem:L1,conc:L2}").unwrap();
        assert!(f.proof.is_complete());

        let mut f = Fixture::new("(a:o & b:o) => b");
        f.run("=>I{conc:C}").unwrap();
        f.run("&E{prem:L1}").unwrap();
        assert_eq!(f.line("L3"), "L3 (L1) |- a &E: (L1)");
        assert_eq!(f.line("L4"), "L4 (L1) |- b &E: (L1)");
        f.run("Axiom{conc:L2,prem:L4}").unwrap();
        assert!(f.proof.is_complete());
    }

    #[test]
    fn forall_elimination() {
        let mut f = Fixture::new("(all x:i . (q:(i>o) x)) => (q c:i)");
        f.run("=>I{conc:C}").unwrap();
        f.run("AllE{p:L1,t:'c',c:L2}").unwrap();
        assert!(f.proof.is_complete());
        assert_eq!(f.line("L2"), "L2 (L1) |- (q c) AllE: (c) (L1)");

        let mut f = Fixture::new("(all x:i . (q:(i>o) x)) => (q c:i)");
        f.run("=>I{conc:C}").unwrap();
        assert!(f.run("AllE{p:L1,t:'(q c)'}").is_err());
        f.run("AllE{p:L1,t:'c'}").unwrap();
        assert_eq!(f.line("L3"), "L3 (L1) |- (q c) AllE: (c) (L1)");
    }

    #[test]
    fn iff_to_eq_requires_formula_equation() {
        let mut f = Fixture::new("c:i = c");
        assert!(f.run("<=>2={conc:C}").is_err());
    }

    #[test]
    fn propsolve_rejects_invalid_and_higher_order() {
        let mut f = Fixture::new("a:o | b:o");
        let err = f.run("PropSolve{conc:C}").unwrap_err();
        assert!(matches!(err, TacticError::Slot { ref slot, .. } if slot == "conc"));
        let mut f = reference();
        assert!(f.run("PropSolve{conc:C}").is_err());
    }

    #[test]
    fn verify_detects_tampering() {
        let mut f = reference();
        f.run("=>I{conc:C}").unwrap();
        let mut lines = f.proof.lines().to_vec();
        let bogus = parse_term("(p (a & a))", &mut f.sig).unwrap();
        lines[2].formula = bogus.clone();
        lines[2].justification = Justification::Tactic {
            name: "=Subst".into(),
            params: vec![Param::Positions(vec![Position::new(vec![1])])],
            premises: vec![Label::new("L1"), Label::new("L1")],
        };
        let proof = PartialProof::from_lines(lines, 2);
        assert!(matches!(
            verify_proof(&f.catalog, &proof),
            Err(TacticError::Unsound { .. })
        ));
    }

    #[test]
    fn resolve_checks_value_kinds() {
        let f = reference();
        let mut sig = Signature::new();
        let lit = PaiLiteral::parse("=Subst{u:[1]}", &mut sig).unwrap();
        assert!(f.catalog.resolve(&lit).is_err());
        let lit = PaiLiteral::parse("Nope{u:L1}", &mut sig).unwrap();
        assert!(matches!(
            f.catalog.resolve(&lit),
            Err(TacticError::Pai(PaiError::UnknownCommand(_)))
        ));
    }
}
