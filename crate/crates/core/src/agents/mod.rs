//! Argument agents, command-agent election, and suggestion ordering.

mod library;
mod runtime;

pub use library::standard_agents;
pub use runtime::{elect_all, run_deterministic, run_rounds, EpochRun};

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::board::{BoardView, TriggerRef};
use crate::classify::LogicClass;
use crate::pai::{Actual, FormalArgument, Pai};
use crate::proof::{Focus, PartialProof, ProofLine};
use crate::tactics::{precheck, Catalog};

/// Default bound on results per agent run.
pub const MAX_RESULTS: usize = 3;

/// Everything an agent may read: an immutable proof snapshot and focus.
#[derive(Clone, Copy)]
pub struct AgentContext<'a> {
    pub proof: &'a PartialProof,
    pub focus: &'a Focus,
    pub catalog: &'a Catalog,
}

impl<'a> AgentContext<'a> {
    pub fn goal(&self) -> &'a ProofLine {
        self.proof
            .line(&self.focus.goal)
            .expect("focus goal belongs to the proof")
    }

    /// Support lines, most recent first.
    pub fn supports(&self) -> impl Iterator<Item = &'a ProofLine> + 'a {
        let proof = self.proof;
        self.focus
            .support_recent_first()
            .filter_map(move |l| proof.line(l))
    }

    /// The line bound to `slot` in `pai`.
    pub fn slot_line(&self, pai: &Pai, slot: &str) -> Option<&'a ProofLine> {
        pai.line(slot).and_then(|l| self.proof.line(l))
    }
}

/// Collects an agent's results, enforcing the result bound and polling for
/// interruption between results.
pub struct Sink<'a> {
    limit: usize,
    interrupted: &'a dyn Fn() -> bool,
    out: Vec<Vec<(&'static str, Actual)>>,
    stopped: bool,
    was_interrupted: bool,
}

impl Sink<'_> {
    /// Offers one result. Returns `false` when the agent should stop.
    pub fn emit(&mut self, assignment: Vec<(&'static str, Actual)>) -> bool {
        if self.stopped {
            return false;
        }
        if (self.interrupted)() {
            self.stopped = true;
            self.was_interrupted = true;
            return false;
        }
        if !self.out.contains(&assignment) {
            self.out.push(assignment);
        }
        if self.out.len() >= self.limit {
            self.stopped = true;
        }
        !self.stopped
    }

    /// Polls for interruption during long searches.
    pub fn should_stop(&mut self) -> bool {
        if !self.stopped && (self.interrupted)() {
            self.stopped = true;
            self.was_interrupted = true;
        }
        self.stopped
    }
}

pub type SearchFn = fn(&AgentContext<'_>, &Pai, &mut Sink<'_>);

/// An argument agent: computes the `computes` slots of PAIs in which the
/// `requires` slots are instantiated.
#[derive(Clone)]
pub struct AgentSpec {
    pub id: String,
    pub command: &'static str,
    pub formals: &'static [FormalArgument],
    pub computes: Vec<&'static str>,
    pub requires: Vec<&'static str>,
    /// Weakest goal class in which the agent is useful.
    pub requirement: LogicClass,
    /// Strongest goal class the agent can handle.
    pub ceiling: LogicClass,
    pub baseline: f64,
    pub search: SearchFn,
}

impl std::fmt::Debug for AgentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AgentSpec")
            .field("id", &self.id)
            .field("computes", &self.computes)
            .field("requires", &self.requires)
            .finish_non_exhaustive()
    }
}

impl AgentSpec {
    /// `<cmd>:A(<computes>|<requires>)`, e.g. `=Subst:A(pl|u s)`.
    pub fn make_id(command: &str, computes: &[&str], requires: &[&str]) -> String {
        format!("{command}:A({}|{})", computes.join(" "), requires.join(" "))
    }

    pub fn is_well_formed(&self) -> bool {
        let formal = |n: &&str| self.formals.iter().any(|f| f.name == *n);
        !self.computes.is_empty()
            && self.computes.iter().all(formal)
            && self.requires.iter().all(formal)
            && self.computes.iter().all(|c| !self.requires.contains(c))
    }

    /// Whether the agent is gated in by the goal class.
    pub fn admits(&self, class: LogicClass) -> bool {
        self.requirement <= class && class <= self.ceiling
    }

    fn triggered_by(&self, pai: &Pai) -> bool {
        self.requires.iter().all(|r| pai.is_set(r)) && self.computes.iter().all(|c| !pai.is_set(c))
    }
}

/// Unprocessed PAIs on `view` that the agent can extend. Agents without
/// required arguments are triggered once per epoch by the empty PAI.
pub fn trigger_set(spec: &AgentSpec, view: &BoardView) -> Vec<(TriggerRef, Arc<Pai>)> {
    if view.command != spec.command {
        return Vec::new();
    }
    let class = view.classification().unwrap_or(LogicClass::Ho);
    if !spec.admits(class) {
        return Vec::new();
    }
    if spec.requires.is_empty() {
        if view.is_processed(&spec.id, TriggerRef::Empty) {
            return Vec::new();
        }
        return vec![(
            TriggerRef::Empty,
            Arc::new(Pai::empty(spec.command, spec.formals, view.epoch)),
        )];
    }
    view.pais
        .iter()
        .enumerate()
        .filter(|(i, p)| !view.is_processed(&spec.id, TriggerRef::Entry(*i)) && spec.triggered_by(p))
        .map(|(i, p)| (TriggerRef::Entry(i), Arc::clone(p)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interrupted;

/// Runs one agent on one trigger. Every result extends the trigger by
/// exactly the computed arguments.
pub fn run_agent(
    spec: &AgentSpec,
    trigger: &Pai,
    ctx: &AgentContext<'_>,
    max_results: usize,
    interrupted: &dyn Fn() -> bool,
) -> Result<Vec<Pai>, Interrupted> {
    let mut sink = Sink {
        limit: max_results.max(1),
        interrupted,
        out: Vec::new(),
        stopped: false,
        was_interrupted: false,
    };
    (spec.search)(ctx, trigger, &mut sink);
    if sink.was_interrupted {
        return Err(Interrupted);
    }
    let mut out = Vec::new();
    for assignment in sink.out {
        let mut next = trigger.clone();
        let mut ok = assignment.len() == spec.computes.len();
        for (name, value) in assignment {
            ok &= spec.computes.contains(&name) && !value.is_empty();
            match next.with(name, value) {
                Ok(p) => next = p,
                Err(_) => ok = false,
            }
        }
        debug_assert!(ok, "{} produced an ill-formed result", spec.id);
        if ok {
            out.push(next.produced_by(&spec.id, trigger.epoch));
        }
    }
    Ok(out)
}

/// A command agent's elected suggestion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuggestionEntry {
    pub command: String,
    #[serde(serialize_with = "ser_canonical")]
    pub pai: Pai,
    pub completeness: f64,
    pub complete: bool,
    pub goal_closing: bool,
    #[serde(skip)]
    pub class: LogicClass,
}

fn ser_canonical<S: serde::Serializer>(p: &Pai, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.canonical())
}

impl SuggestionEntry {
    pub fn new(pai: Pai, goal_closing: bool) -> Self {
        Self::with_class(pai, goal_closing, LogicClass::Prop)
    }

    pub fn with_class(pai: Pai, goal_closing: bool, class: LogicClass) -> Self {
        SuggestionEntry {
            command: pai.command().to_string(),
            completeness: pai.completeness(),
            complete: pai.is_complete(),
            goal_closing,
            class,
            pai,
        }
    }

    pub fn for_command(pai: Pai, catalog: &Catalog) -> Self {
        match catalog.get(pai.command()) {
            Some(c) => Self::with_class(pai, c.goal_closing, c.class),
            None => Self::new(pai, false),
        }
    }

    fn sort_cmp(&self, other: &Self) -> Ordering {
        other
            .complete
            .cmp(&self.complete)
            .then(other.completeness.total_cmp(&self.completeness))
            .then(other.goal_closing.cmp(&self.goal_closing))
            .then_with(|| self.command.cmp(&other.command))
    }
}

/// The command agent's election: the best PAI with at least one argument
/// that passes the applicability check on its instantiated arguments.
pub fn elect(view: &BoardView, proof: &PartialProof, catalog: &Catalog) -> Option<SuggestionEntry> {
    let mut best: Option<&Pai> = None;
    for p in &view.pais {
        if p.instantiated_count() == 0 || precheck(catalog, proof, p).is_err() {
            continue;
        }
        let wins = match best {
            None => true,
            Some(b) => crate::pai::better(p, b).map(Ordering::is_gt).unwrap_or(false),
        };
        if wins {
            best = Some(p);
        }
    }
    best.map(|p| SuggestionEntry::for_command(p.clone(), catalog))
}

/// Complete suggestions first, then by completeness, goal-closing
/// commands, and name. Stable.
pub fn sort_suggestions(mut entries: Vec<SuggestionEntry>) -> Vec<SuggestionEntry> {
    entries.sort_by(SuggestionEntry::sort_cmp);
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pai::PaiLiteral;

    fn pai(text: &str) -> Pai {
        let lit = PaiLiteral::parse(text, &mut Default::default()).unwrap();
        Catalog::standard().resolve(&lit).unwrap()
    }

    fn entry(text: &str) -> SuggestionEntry {
        SuggestionEntry::for_command(pai(text), &Catalog::standard())
    }

    #[test]
    fn complete_goal_closer_first() {
        let sorted = sort_suggestions(vec![
            entry("=Subst{u:L1,s:L2,pl:[1]}"),
            entry("PropSolve{conc:L4,prems:()}"),
        ]);
        assert_eq!(sorted[0].command, "PropSolve");
    }

    #[test]
    fn name_breaks_ties() {
        let sorted = sort_suggestions(vec![entry("&I{conc:C}"), entry("&E{prem:L1}")]);
        let names: Vec<&str> = sorted.iter().map(|e| e.command.as_str()).collect();
        assert_eq!(names, ["&E", "&I"]);
    }

    #[test]
    fn single_entry() {
        let e = entry("=>I{conc:C}");
        assert_eq!(sort_suggestions(vec![e.clone()]), vec![e]);
    }

    #[test]
    fn goal_closing_beats_name() {
        let sorted = sort_suggestions(vec![entry("&E{prem:L1}"), entry("PropSolve{conc:C}")]);
        assert_eq!(sorted[0].command, "PropSolve");
        assert_eq!(sorted[0].completeness, 0.5);
    }

    #[test]
    fn agent_ids() {
        assert_eq!(AgentSpec::make_id("=Subst", &["pl"], &["u", "s"]), "=Subst:A(pl|u s)");
        for a in standard_agents(&Catalog::standard()) {
            assert!(a.is_well_formed(), "{}", a.id);
            assert!(!a.id.contains(','));
        }
    }
}
