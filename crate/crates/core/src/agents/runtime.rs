//! Deterministic round-robin execution of agent societies.

use std::collections::BTreeMap;

use crate::board::{Blackboards, PostOutcome};
use crate::proof::PartialProof;
use crate::resources::{AgentRunRecord, RunOutcome};
use crate::tactics::Catalog;

use super::{elect, run_agent, trigger_set, AgentContext, AgentSpec};

/// Outcome of running the societies of one epoch to their fixpoint.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochRun {
    /// One record per agent that ran, in identifier order.
    pub records: Vec<AgentRunRecord>,
    pub rounds: usize,
    pub posted: usize,
}

#[derive(Default)]
struct Tally {
    contributed: usize,
    interrupted: bool,
}

/// Steps `agents` round-robin in the given order until a whole round
/// consumes no trigger.
pub fn run_rounds(
    boards: &Blackboards,
    ctx: &AgentContext<'_>,
    agents: &[&AgentSpec],
    max_results: usize,
) -> EpochRun {
    let epoch = boards.epoch();
    let mut tally: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut run = EpochRun::default();
    loop {
        let mut progressed = false;
        for spec in agents {
            let Some(board) = boards.board(spec.command) else { continue };
            for (tref, trigger) in trigger_set(spec, &board.snapshot()) {
                if !board.claim(&spec.id, tref, epoch) {
                    continue;
                }
                progressed = true;
                let t = tally.entry(spec.id.as_str()).or_default();
                let stale = || board.epoch() != epoch;
                match run_agent(spec, &trigger, ctx, max_results, &stale) {
                    Ok(results) => {
                        for p in results {
                            if board.post_pai(p) == PostOutcome::Accepted {
                                t.contributed += 1;
                                run.posted += 1;
                            }
                        }
                    }
                    Err(_) => t.interrupted = true,
                }
            }
        }
        run.rounds += 1;
        if !progressed {
            break;
        }
    }
    run.records = tally
        .into_iter()
        .map(|(agent, t)| AgentRunRecord {
            agent: agent.to_string(),
            epoch,
            elapsed_ms: 0.0,
            outcome: if t.interrupted {
                RunOutcome::Interrupted
            } else if t.contributed > 0 {
                RunOutcome::Contributed(t.contributed)
            } else {
                RunOutcome::NoContribution
            },
        })
        .collect();
    run
}

/// Every command agent elects from its board onto the command board.
pub fn elect_all(boards: &Blackboards, proof: &PartialProof, catalog: &Catalog) {
    let epoch = boards.epoch();
    for board in boards.suggestion_boards() {
        if let Some(entry) = elect(&board.snapshot(), proof, catalog) {
            boards.command().offer(entry, epoch);
        }
    }
}

/// Runs `agents` in identifier order to the fixpoint, then elects.
pub fn run_deterministic(
    boards: &Blackboards,
    ctx: &AgentContext<'_>,
    agents: &[AgentSpec],
    max_results: usize,
) -> EpochRun {
    let mut order: Vec<&AgentSpec> = agents.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let run = run_rounds(boards, ctx, &order, max_results);
    elect_all(boards, ctx.proof, ctx.catalog);
    run
}
