//! Free-running mode: one thread per argument agent, a classification
//! thread per epoch, and a service thread that debounces suggestion events
//! and runs the resource agent.

use std::collections::HashSet;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use arc_swap::ArcSwap;
use parking_lot::{Condvar, Mutex};

use crate::agents::{elect, run_agent, trigger_set, AgentContext, AgentSpec};
use crate::board::PostOutcome;
use crate::classify::{broadcast_class, classify_goal};
use crate::proof::{Focus, PartialProof};
use crate::resources::{AgentRunRecord, RunOutcome};

use super::events::EventPayload;
use super::Core;

const DEBOUNCE: Duration = Duration::from_millis(50);
const RESOURCE_PERIOD: Duration = Duration::from_millis(250);

/// What the agents work on during one epoch.
pub(crate) struct EpochCtx {
    pub epoch: u64,
    pub proof: Arc<PartialProof>,
    pub focus: Option<Focus>,
    pub active: HashSet<String>,
    pub max_results: usize,
}

struct PulseState {
    generation: u64,
    /// Per agent: the generation it is idle at, if idle.
    idle: Vec<Option<u64>>,
    classifying: Option<u64>,
    shutdown: bool,
}

/// Change notification shared by all agent threads.
struct Pulse {
    state: Mutex<PulseState>,
    cv: Condvar,
}

impl Pulse {
    fn generation(&self) -> u64 {
        self.state.lock().generation
    }

    fn bump(&self) {
        let mut st = self.state.lock();
        st.generation += 1;
        self.cv.notify_all();
    }

    /// Blocks until something changes after `seen`. Returns `false` on
    /// shutdown.
    fn idle(&self, agent: usize, seen: u64) -> bool {
        let mut st = self.state.lock();
        while st.generation == seen && !st.shutdown {
            st.idle[agent] = Some(seen);
            self.cv.notify_all();
            self.cv.wait(&mut st);
        }
        st.idle[agent] = None;
        !st.shutdown
    }

    fn quiescent(st: &PulseState) -> bool {
        st.classifying.is_none() && st.idle.iter().all(|g| *g == Some(st.generation))
    }
}

struct Shared {
    core: Arc<Core>,
    ctx: ArcSwap<EpochCtx>,
    pulse: Pulse,
    stop: Mutex<bool>,
    stop_cv: Condvar,
}

pub(crate) struct Runtime {
    shared: Arc<Shared>,
    threads: Vec<JoinHandle<()>>,
}

impl Runtime {
    pub fn start(core: Arc<Core>) -> Runtime {
        let n = core.agents.len();
        let shared = Arc::new(Shared {
            ctx: ArcSwap::from_pointee(EpochCtx {
                epoch: core.boards.epoch(),
                proof: Arc::new(PartialProof::from_lines(Vec::new(), 0)),
                focus: None,
                active: HashSet::new(),
                max_results: 1,
            }),
            pulse: Pulse {
                state: Mutex::new(PulseState {
                    generation: 0,
                    idle: vec![None; n],
                    classifying: None,
                    shutdown: false,
                }),
                cv: Condvar::new(),
            },
            stop: Mutex::new(false),
            stop_cv: Condvar::new(),
            core,
        });
        let mut threads = Vec::with_capacity(n + 1);
        for i in 0..n {
            let sh = Arc::clone(&shared);
            threads.push(
                thread::Builder::new()
                    .name(format!("agent-{i}"))
                    .spawn(move || agent_loop(&sh, i))
                    .expect("spawn agent thread"),
            );
        }
        let sh = Arc::clone(&shared);
        threads.push(
            thread::Builder::new()
                .name("service".into())
                .spawn(move || service_loop(&sh))
                .expect("spawn service thread"),
        );
        Runtime { shared, threads }
    }

    /// Hands a new epoch to the agents and launches its classification.
    pub fn begin_epoch(&self, ctx: EpochCtx) {
        let epoch = ctx.epoch;
        let target = ctx.focus.clone().map(|f| (Arc::clone(&ctx.proof), f));
        self.shared.ctx.store(Arc::new(ctx));
        if let Some((proof, focus)) = target {
            self.shared.pulse.state.lock().classifying = Some(epoch);
            let sh = Arc::clone(&self.shared);
            thread::spawn(move || {
                let class = classify_goal(&proof, &focus);
                if broadcast_class(class, epoch, &sh.core.boards) {
                    sh.core.log.emit(
                        epoch,
                        EventPayload::Classification {
                            class,
                            goal: focus.goal.to_string(),
                        },
                    );
                }
                let mut st = sh.pulse.state.lock();
                if st.classifying == Some(epoch) {
                    st.classifying = None;
                }
                st.generation += 1;
                sh.pulse.cv.notify_all();
            });
        }
        self.shared.pulse.bump();
    }

    /// Waits until no agent can make progress on the current epoch.
    pub fn wait_quiescent(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let pulse = &self.shared.pulse;
        let mut st = pulse.state.lock();
        loop {
            if Pulse::quiescent(&st) {
                return true;
            }
            if pulse.cv.wait_until(&mut st, deadline).timed_out() {
                return Pulse::quiescent(&st);
            }
        }
    }

    pub fn shutdown(&mut self) {
        {
            let mut st = self.shared.pulse.state.lock();
            st.shutdown = true;
            self.shared.pulse.cv.notify_all();
        }
        *self.shared.stop.lock() = true;
        self.shared.stop_cv.notify_all();
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        self.shutdown();
    }
}

#[derive(Default)]
struct Tally {
    epoch: u64,
    ran: bool,
    contributed: usize,
    interrupted: bool,
    elapsed: Duration,
}

impl Tally {
    fn flush(&mut self, agent: &AgentSpec, core: &Core, next_epoch: u64) {
        if self.ran {
            let outcome = if self.interrupted {
                RunOutcome::Interrupted
            } else if self.contributed > 0 {
                RunOutcome::Contributed(self.contributed)
            } else {
                RunOutcome::NoContribution
            };
            core.records.lock().push(AgentRunRecord {
                agent: agent.id.clone(),
                epoch: self.epoch,
                elapsed_ms: self.elapsed.as_secs_f64() * 1e3,
                outcome,
            });
        }
        *self = Tally {
            epoch: next_epoch,
            ..Tally::default()
        };
    }
}

fn agent_loop(sh: &Shared, index: usize) {
    let core = &sh.core;
    let spec = &core.agents[index];
    let mut tally = Tally::default();
    loop {
        let seen = sh.pulse.generation();
        let ctx = sh.ctx.load_full();
        if tally.epoch != ctx.epoch {
            tally.flush(spec, core, ctx.epoch);
        }
        let mut worked = false;
        if let (Some(focus), true) = (&ctx.focus, ctx.active.contains(&spec.id)) {
            worked = step(sh, spec, &ctx, focus, &mut tally);
        }
        if !worked && !sh.pulse.idle(index, seen) {
            break;
        }
    }
    tally.flush(spec, core, 0);
}

/// Processes every trigger currently visible to the agent.
fn step(sh: &Shared, spec: &AgentSpec, ctx: &EpochCtx, focus: &Focus, tally: &mut Tally) -> bool {
    let core = &sh.core;
    let Some(board) = core.boards.board(spec.command) else {
        return false;
    };
    let view = board.snapshot();
    if view.epoch != ctx.epoch {
        return false;
    }
    let actx = AgentContext {
        proof: &ctx.proof,
        focus,
        catalog: &core.catalog,
    };
    let stale = || core.boards.epoch() != ctx.epoch;
    let mut worked = false;
    for (tref, trigger) in trigger_set(spec, &view) {
        if !board.claim(&spec.id, tref, ctx.epoch) {
            continue;
        }
        worked = true;
        tally.ran = true;
        let started = Instant::now();
        let result = run_agent(spec, &trigger, &actx, ctx.max_results, &stale);
        tally.elapsed += started.elapsed();
        match result {
            Ok(results) => {
                let mut posted = false;
                for p in results {
                    if board.post_pai(p) == PostOutcome::Accepted {
                        tally.contributed += 1;
                        posted = true;
                    }
                }
                if posted {
                    if let Some(entry) = elect(&board.snapshot(), &ctx.proof, &core.catalog) {
                        core.boards.command().offer(entry, ctx.epoch);
                    }
                    sh.pulse.bump();
                }
            }
            Err(_) => {
                tally.interrupted = true;
                break;
            }
        }
    }
    worked
}

fn service_loop(sh: &Shared) {
    let core = &sh.core;
    let mut last_sent: Option<(u64, Vec<String>)> = None;
    let mut last_resource = Instant::now();
    loop {
        {
            let mut stop = sh.stop.lock();
            if !*stop {
                sh.stop_cv.wait_for(&mut stop, DEBOUNCE);
            }
            if *stop {
                return;
            }
        }
        let view = core.boards.command().snapshot();
        let has_focus = sh.ctx.load().focus.is_some();
        let key: Vec<String> = view.entries.values().map(|e| e.pai.canonical()).collect();
        let changed = last_sent.as_ref() != Some(&(view.epoch, key.clone()));
        if has_focus && changed {
            let suggestions = super::sorted_entries(&view);
            if core
                .log
                .emit(view.epoch, EventPayload::SuggestionsUpdated { suggestions })
                .is_some()
            {
                last_sent = Some((view.epoch, key));
            }
        }
        if last_resource.elapsed() >= RESOURCE_PERIOD {
            last_resource = Instant::now();
            let epoch = core.boards.epoch();
            let class = view.classification().unwrap_or(crate::classify::LogicClass::Ho);
            let before = core.apply_records();
            let directives = core.resource_step(class, epoch);
            if before || !directives.is_empty() {
                let report = core.publish_reports(epoch);
                core.log.emit(epoch, report);
            }
        }
    }
}
