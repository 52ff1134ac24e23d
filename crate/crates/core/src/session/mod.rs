//! Session lifecycle: load a conjecture, keep the agent societies running
//! on the current proof state, execute commands, and report events.

mod concurrent;
mod events;
pub mod protocol;

pub use events::{line_views, EventPayload, LineView, SessionEvent};

use std::collections::{BTreeSet, HashSet};
use std::sync::mpsc::Receiver;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{
    run_deterministic, sort_suggestions, standard_agents, AgentContext, AgentSpec, SuggestionEntry, MAX_RESULTS,
};
use crate::board::{Blackboards, BoardMessage, CommandView, MessagePayload};
use crate::classify::{broadcast_class, classify_goal, LogicClass};
use crate::logic::{parse_formula, Signature, Term};
use crate::pai::{Pai, PaiLiteral};
use crate::proof::{current_focus, Focus, Label, PartialProof, ProofError};
use crate::resources::{
    apply_directives, is_active, resource_csv, resource_step, society_reports, AgentRunRecord, ConfigError,
    Directive, RatingState, ResourceConfig,
};
use crate::tactics::{apply_tactic, Catalog, TacticError};

use concurrent::{EpochCtx, Runtime};
use events::EventLog;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Deterministic,
    Concurrent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SessionConfig {
    pub mode: Mode,
    pub max_results: usize,
    #[serde(flatten)]
    pub resources: ResourceConfig,
    /// Agents switched off by identifier.
    pub disabled: BTreeSet<String>,
    /// Justification name written by PropSolve.
    pub prop_label: String,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            mode: Mode::Deterministic,
            max_results: MAX_RESULTS,
            resources: ResourceConfig::default(),
            disabled: BTreeSet::new(),
            prop_label: "PropSolve".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Tactic(#[from] TacticError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl SessionError {
    /// Error kind on the wire.
    pub fn kind(&self) -> &'static str {
        match self {
            SessionError::Input(_) | SessionError::Proof(_) => "input-error",
            SessionError::Tactic(_) => "tactic-error",
            SessionError::Config(_) => "config-error",
        }
    }
}

/// State shared with the concurrent runtime.
pub(crate) struct Core {
    catalog: Arc<Catalog>,
    agents: Arc<Vec<AgentSpec>>,
    boards: Arc<Blackboards>,
    log: EventLog,
    ratings: Mutex<Vec<RatingState>>,
    config: Mutex<SessionConfig>,
    records: Mutex<Vec<AgentRunRecord>>,
}

impl Core {
    /// Folds queued run records into the ratings. Returns whether any
    /// were pending.
    fn apply_records(&self) -> bool {
        let records = std::mem::take(&mut *self.records.lock());
        if records.is_empty() {
            return false;
        }
        let cfg = self.config.lock().resources.clone();
        let mut ratings = self.ratings.lock();
        for r in &records {
            if let Some(s) = ratings.iter_mut().find(|s| s.agent == r.agent) {
                *s = s.record_run(r, &cfg);
            }
        }
        true
    }

    /// Runs the resource agent and posts its directives.
    fn resource_step(&self, class: LogicClass, epoch: u64) -> Vec<Directive> {
        let cfg = self.config.lock().resources.clone();
        let mut ratings = self.ratings.lock();
        let directives = resource_step(&ratings, &cfg, class);
        apply_directives(&mut ratings, &directives, &cfg);
        for d in &directives {
            self.boards.command().post_message(BoardMessage {
                epoch,
                payload: MessagePayload::Directive(d.clone()),
            });
        }
        directives
    }

    /// Posts rating reports on the suggestion boards and society reports
    /// on the command board.
    fn publish_reports(&self, epoch: u64) -> EventPayload {
        let ratings = self.ratings.lock().clone();
        for s in &ratings {
            if let Some(b) = self.boards.board(&s.command) {
                b.post_message(BoardMessage {
                    epoch,
                    payload: MessagePayload::Rating(s.report()),
                });
            }
        }
        let societies = society_reports(&ratings);
        for r in &societies {
            self.boards.command().post_message(BoardMessage {
                epoch,
                payload: MessagePayload::Society(r.clone()),
            });
        }
        EventPayload::ResourceReport {
            agents: ratings.iter().map(RatingState::report).collect(),
            societies,
        }
    }

    fn active_set(&self, class: LogicClass) -> HashSet<String> {
        let cfg = self.config.lock().clone();
        let ratings = self.ratings.lock();
        self.agents
            .iter()
            .filter(|a| !cfg.disabled.contains(&a.id))
            .filter(|a| {
                ratings
                    .iter()
                    .find(|s| s.agent == a.id)
                    .is_some_and(|s| is_active(s, &cfg.resources, class, a.requirement))
            })
            .map(|a| a.id.clone())
            .collect()
    }
}

fn sorted_entries(view: &CommandView) -> Vec<SuggestionEntry> {
    sort_suggestions(view.entries.values().cloned().collect())
}

/// An interactive proof with its agent societies.
pub struct Session {
    core: Arc<Core>,
    proof: Arc<PartialProof>,
    selection: Option<Label>,
    focus: Option<Focus>,
    epoch: u64,
    sig: Signature,
    runtime: Option<Runtime>,
}

impl Session {
    pub fn start(conjecture: Term, config: SessionConfig) -> Result<Session, SessionError> {
        let proof = PartialProof::new(conjecture)?;
        Session::from_proof(proof, config)
    }

    /// Parses and starts; the conjecture must be a formula.
    pub fn start_text(conjecture: &str, config: SessionConfig) -> Result<Session, SessionError> {
        let t = parse_formula(conjecture).map_err(|e| SessionError::Input(e.to_string()))?;
        Session::start(t, config)
    }

    /// Starts on an existing partial proof.
    pub fn from_proof(proof: PartialProof, config: SessionConfig) -> Result<Session, SessionError> {
        config.resources.validate()?;
        let catalog = Catalog::standard().with_prop_label(config.prop_label.clone());
        let agents = standard_agents(&catalog);
        let ratings = agents
            .iter()
            .map(|a| {
                let class = catalog.get(a.command).map_or(LogicClass::Ho, |c| c.class);
                RatingState::new(&a.id, a.command, class, a.baseline, &config.resources)
            })
            .collect();
        let boards = Blackboards::new(catalog.commands().iter().map(|c| c.name), 1);
        let mut sig = Signature::new();
        for l in proof.lines() {
            sig.absorb(&l.formula).map_err(|e| SessionError::Input(e.to_string()))?;
        }
        let mode = config.mode;
        let core = Arc::new(Core {
            catalog: Arc::new(catalog),
            agents: Arc::new(agents),
            boards: Arc::new(boards),
            log: EventLog::default(),
            ratings: Mutex::new(ratings),
            config: Mutex::new(config),
            records: Mutex::new(Vec::new()),
        });
        let runtime = (mode == Mode::Concurrent).then(|| Runtime::start(Arc::clone(&core)));
        let mut s = Session {
            core,
            proof: Arc::new(proof),
            selection: None,
            focus: None,
            epoch: 1,
            sig,
            runtime,
        };
        s.core.log.advance(1);
        s.begin_epoch();
        Ok(s)
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn proof(&self) -> &PartialProof {
        &self.proof
    }

    pub fn focus(&self) -> Option<&Focus> {
        self.focus.as_ref()
    }

    pub fn config(&self) -> SessionConfig {
        self.core.config.lock().clone()
    }

    pub fn mode(&self) -> Mode {
        if self.runtime.is_some() {
            Mode::Concurrent
        } else {
            Mode::Deterministic
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.core.catalog
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.core.agents
    }

    pub fn boards(&self) -> &Blackboards {
        &self.core.boards
    }

    /// The current suggestions, best first. Never blocks on agents.
    pub fn suggestions(&self) -> Vec<SuggestionEntry> {
        sorted_entries(&self.core.boards.command().snapshot())
    }

    /// The class broadcast for the current goal, if it has arrived.
    pub fn classification(&self) -> Option<LogicClass> {
        self.core.boards.command().snapshot().classification()
    }

    pub fn ratings(&self) -> Vec<RatingState> {
        self.core.ratings.lock().clone()
    }

    pub fn resource_csv(&self) -> String {
        resource_csv(&self.core.ratings.lock())
    }

    pub fn events(&self) -> Vec<SessionEvent> {
        self.core.log.events()
    }

    pub fn subscribe(&self) -> Receiver<SessionEvent> {
        self.core.log.subscribe()
    }

    /// Blocks until the agents can make no further progress on the
    /// current epoch. Always true in deterministic mode.
    pub fn wait_quiescent(&self, timeout: Duration) -> bool {
        self.runtime.as_ref().is_none_or(|r| r.wait_quiescent(timeout))
    }

    /// Parses a PAI literal against the catalog and the proof's constants.
    pub fn parse_pai(&self, text: &str) -> Result<Pai, SessionError> {
        let mut sig = self.sig.clone();
        let lit = PaiLiteral::parse(text, &mut sig).map_err(|e| SessionError::Input(e.to_string()))?;
        self.core.catalog.resolve(&lit).map_err(|e| match e {
            TacticError::Pai(p) => SessionError::Input(p.to_string()),
            other => SessionError::Tactic(other),
        })
    }

    /// Applies a command; on success the epoch advances and the
    /// societies restart on the new proof.
    pub fn execute(&mut self, pai: &Pai) -> Result<SessionEvent, SessionError> {
        let next = apply_tactic(&self.core.catalog, &self.proof, pai)?;
        Ok(self.advance(next))
    }

    pub fn execute_text(&mut self, text: &str) -> Result<SessionEvent, SessionError> {
        let pai = self.parse_pai(text)?;
        self.execute(&pai)
    }

    /// Focuses on another open goal (or back on the default with `None`).
    pub fn select_focus(&mut self, goal: Option<Label>) -> Result<SessionEvent, SessionError> {
        current_focus(&self.proof, goal.as_ref())?;
        self.selection = goal;
        let same = (*self.proof).clone();
        Ok(self.advance(same))
    }

    /// Replaces the configuration; the current epoch is restarted.
    pub fn set_config(&mut self, config: SessionConfig) -> Result<SessionEvent, SessionError> {
        config.resources.validate()?;
        {
            let mut ratings = self.core.ratings.lock();
            for s in ratings.iter_mut().filter(|s| !s.pinned) {
                s.recompute(&config.resources);
            }
        }
        let mode = config.mode;
        *self.core.config.lock() = config;
        match (mode, self.runtime.is_some()) {
            (Mode::Concurrent, false) => self.runtime = Some(Runtime::start(Arc::clone(&self.core))),
            (Mode::Deterministic, true) => self.runtime = None,
            _ => {}
        }
        let same = (*self.proof).clone();
        Ok(self.advance(same))
    }

    fn advance(&mut self, next: PartialProof) -> SessionEvent {
        self.epoch += 1;
        self.core.log.advance(self.epoch);
        self.core
            .boards
            .reinitialize_all(self.epoch)
            .expect("session epochs increase");
        for l in next.lines() {
            // new lines only mention known constants; ignore clashes
            let _ = self.sig.absorb(&l.formula);
        }
        self.proof = Arc::new(next);
        if let Some(sel) = &self.selection {
            if !self.proof.line(sel).is_some_and(|l| l.is_open()) {
                self.selection = None;
            }
        }
        self.begin_epoch()
    }

    /// Starts the societies on the current proof; returns the
    /// proof-updated event.
    fn begin_epoch(&mut self) -> SessionEvent {
        let epoch = self.epoch;
        let core = Arc::clone(&self.core);
        self.focus = current_focus(&self.proof, self.selection.as_ref()).ok().flatten();
        let updated = core
            .log
            .emit(
                epoch,
                EventPayload::ProofUpdated {
                    lines: line_views(&self.proof),
                    focus: self.focus.as_ref().map(|f| f.goal.to_string()),
                },
            )
            .expect("session owns the current epoch");
        core.apply_records();
        let max_results = core.config.lock().max_results;

        let Some(focus) = self.focus.clone() else {
            core.log.emit(epoch, EventPayload::ProofComplete { lines: self.proof.len() });
            if let Some(rt) = &self.runtime {
                rt.begin_epoch(EpochCtx {
                    epoch,
                    proof: Arc::clone(&self.proof),
                    focus: None,
                    active: HashSet::new(),
                    max_results,
                });
            }
            return updated;
        };

        // the resource agent reads the goal itself; the broadcast below
        // (or the classification thread) informs the argument agents
        let class = classify_goal(&self.proof, &focus);
        match &self.runtime {
            None => {
                broadcast_class(class, epoch, &core.boards);
                core.log.emit(
                    epoch,
                    EventPayload::Classification {
                        class,
                        goal: focus.goal.to_string(),
                    },
                );
                core.resource_step(class, epoch);
                let active = core.active_set(class);
                let agents: Vec<AgentSpec> =
                    core.agents.iter().filter(|a| active.contains(&a.id)).cloned().collect();
                let ctx = AgentContext {
                    proof: &self.proof,
                    focus: &focus,
                    catalog: &core.catalog,
                };
                let run = run_deterministic(&core.boards, &ctx, &agents, max_results);
                core.records.lock().extend(run.records);
                core.apply_records();
                core.log.emit(
                    epoch,
                    EventPayload::SuggestionsUpdated {
                        suggestions: self.suggestions(),
                    },
                );
                let report = core.publish_reports(epoch);
                core.log.emit(epoch, report);
            }
            Some(rt) => {
                core.resource_step(class, epoch);
                let report = core.publish_reports(epoch);
                core.log.emit(epoch, report);
                rt.begin_epoch(EpochCtx {
                    epoch,
                    proof: Arc::clone(&self.proof),
                    focus: Some(focus),
                    active: core.active_set(class),
                    max_results,
                });
            }
        }
        updated
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(mut rt) = self.runtime.take() {
            rt.shutdown();
        }
    }
}
