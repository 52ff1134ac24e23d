//! Complexity ratings, retirement, and the resource agent's policies.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::LogicClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("window must hold at least one run")]
    Window,
    #[error("penalty must be positive, got {0}")]
    Penalty(f64),
    #[error("at least one agent must stay active")]
    MinActive,
    #[error("second-chance fraction must lie in [0,1], got {0}")]
    SecondChance(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ResourceConfig {
    /// The global complexity value: agents rated above it retire.
    pub threshold: f64,
    pub window: usize,
    pub penalty: f64,
    pub min_active: usize,
    /// Retired fraction of a society that earns it a second chance.
    pub second_chance: f64,
    /// Commands excluded by the user.
    pub excluded: BTreeSet<String>,
}

impl Default for ResourceConfig {
    fn default() -> Self {
        ResourceConfig {
            threshold: 3.0,
            window: 10,
            penalty: 1.0,
            min_active: 4,
            second_chance: 0.5,
            excluded: BTreeSet::new(),
        }
    }
}

impl ResourceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        if self.window == 0 {
            return Err(ConfigError::Window);
        }
        if !(self.penalty > 0.0) {
            return Err(ConfigError::Penalty(self.penalty));
        }
        if self.min_active == 0 {
            return Err(ConfigError::MinActive);
        }
        if !(0.0..=1.0).contains(&self.second_chance) {
            return Err(ConfigError::SecondChance(self.second_chance));
        }
        Ok(())
    }

    /// Rating given to agents brought back by a directive.
    pub fn revival_rating(&self) -> f64 {
        self.threshold - self.penalty
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "count")]
pub enum RunOutcome {
    Contributed(usize),
    NoContribution,
    /// The user executed a command before the run returned.
    Interrupted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRunRecord {
    pub agent: String,
    pub epoch: u64,
    pub elapsed_ms: f64,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatingState {
    pub agent: String,
    pub command: String,
    /// Class of the owning command, used for society exclusion.
    pub class: LogicClass,
    pub baseline: f64,
    pub window: VecDeque<f64>,
    pub failures: u32,
    pub rating: f64,
    pub retired: bool,
    /// Set by a directive; local updates leave the rating alone until
    /// the agent contributes again.
    pub pinned: bool,
    /// Excluded by the resource agent because the goal class is too weak.
    pub class_excluded: bool,
}

impl RatingState {
    pub fn new(agent: &str, command: &str, class: LogicClass, baseline: f64, cfg: &ResourceConfig) -> Self {
        let mut s = RatingState {
            agent: agent.to_string(),
            command: command.to_string(),
            class,
            baseline,
            window: VecDeque::with_capacity(cfg.window),
            failures: 0,
            rating: 0.0,
            retired: false,
            pinned: false,
            class_excluded: false,
        };
        s.recompute(cfg);
        s
    }

    pub fn average_ms(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.window.iter().sum::<f64>() / self.window.len() as f64
        }
    }

    pub fn time_component(&self) -> f64 {
        self.baseline + (1.0 + self.average_ms()).log10()
    }

    pub(crate) fn recompute(&mut self, cfg: &ResourceConfig) {
        self.rating = self.time_component() + cfg.penalty * f64::from(self.failures);
        self.retired = self.rating > cfg.threshold;
    }

    /// Folds one run into the state.
    pub fn record_run(&self, record: &AgentRunRecord, cfg: &ResourceConfig) -> RatingState {
        debug_assert_eq!(record.agent, self.agent);
        let mut s = self.clone();
        s.window.push_back(record.elapsed_ms.max(0.0));
        while s.window.len() > cfg.window {
            s.window.pop_front();
        }
        match record.outcome {
            RunOutcome::Contributed(_) => {
                s.failures = 0;
                s.pinned = false;
            }
            RunOutcome::NoContribution | RunOutcome::Interrupted => s.failures += 1,
        }
        if !s.pinned {
            s.recompute(cfg);
        }
        s
    }

    pub fn report(&self) -> RatingReport {
        RatingReport {
            agent: self.agent.clone(),
            rating: self.rating,
            failures: self.failures,
            retired: self.retired,
        }
    }
}

/// Whether an agent may run for a goal of class `goal_class`.
/// `requirement` is the agent's own logic-class requirement.
pub fn is_active(state: &RatingState, cfg: &ResourceConfig, goal_class: LogicClass, requirement: LogicClass) -> bool {
    !state.retired
        && state.rating <= cfg.threshold
        && requirement <= goal_class
        && !state.class_excluded
        && !cfg.excluded.contains(&state.command)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingReport {
    pub agent: String,
    pub rating: f64,
    pub failures: u32,
    pub retired: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocietyReport {
    pub command: String,
    pub average_rating: f64,
    pub active: usize,
    pub retired: usize,
}

/// One report per command, in command order.
pub fn society_reports(states: &[RatingState]) -> Vec<SocietyReport> {
    let mut by_cmd: BTreeMap<&str, Vec<&RatingState>> = BTreeMap::new();
    for s in states {
        by_cmd.entry(&s.command).or_default().push(s);
    }
    by_cmd
        .into_iter()
        .map(|(cmd, members)| {
            let retired = members.iter().filter(|s| s.retired).count();
            SocietyReport {
                command: cmd.to_string(),
                average_rating: members.iter().map(|s| s.rating).sum::<f64>() / members.len() as f64,
                active: members.len() - retired,
                retired,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectiveReason {
    MinActive,
    SecondChance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "directive")]
pub enum Directive {
    SetRating {
        agent: String,
        rating: f64,
        reason: DirectiveReason,
    },
    Exclude { agent: String, command: String },
    Include { agent: String, command: String },
}

impl Directive {
    pub fn target(&self) -> &str {
        match self {
            Directive::SetRating { agent, .. }
            | Directive::Exclude { agent, .. }
            | Directive::Include { agent, .. } => agent,
        }
    }
}

/// Applies directives in order. Revived agents lose their failure count.
pub fn apply_directives(states: &mut [RatingState], directives: &[Directive], cfg: &ResourceConfig) {
    for d in directives {
        let Some(s) = states.iter_mut().find(|s| s.agent == d.target()) else {
            continue;
        };
        match d {
            Directive::SetRating { rating, .. } => {
                s.rating = *rating;
                s.retired = *rating > cfg.threshold;
                s.failures = 0;
                s.pinned = true;
            }
            Directive::Exclude { .. } => s.class_excluded = true,
            Directive::Include { .. } => s.class_excluded = false,
        }
    }
}

/// The resource agent's global policy.
///
/// Directives come out in priority order: minimum-activity revivals,
/// society second chances, then class exclusions.
pub fn resource_step(states: &[RatingState], cfg: &ResourceConfig, goal_class: LogicClass) -> Vec<Directive> {
    let mut work = states.to_vec();
    let mut out = Vec::new();
    let revival = cfg.revival_rating();

    let active = work.iter().filter(|s| !s.retired).count();
    if active < cfg.min_active {
        let mut retired: Vec<&RatingState> = work.iter().filter(|s| s.retired).collect();
        retired.sort_by(|a, b| a.rating.total_cmp(&b.rating).then_with(|| a.agent.cmp(&b.agent)));
        let step: Vec<Directive> = retired
            .into_iter()
            .take(cfg.min_active - active)
            .map(|s| Directive::SetRating {
                agent: s.agent.clone(),
                rating: revival,
                reason: DirectiveReason::MinActive,
            })
            .collect();
        apply_directives(&mut work, &step, cfg);
        out.extend(step);
    }

    for report in society_reports(&work) {
        let members = report.active + report.retired;
        let fraction = report.retired as f64 / members as f64;
        if report.average_rating > cfg.threshold && report.retired > 0 && fraction >= cfg.second_chance {
            let step: Vec<Directive> = work
                .iter()
                .filter(|s| s.command == report.command && s.rating > revival)
                .map(|s| Directive::SetRating {
                    agent: s.agent.clone(),
                    rating: revival,
                    reason: DirectiveReason::SecondChance,
                })
                .collect();
            apply_directives(&mut work, &step, cfg);
            out.extend(step);
        }
    }

    for s in &work {
        let exceeds = s.class > goal_class;
        if exceeds && !s.class_excluded {
            out.push(Directive::Exclude {
                agent: s.agent.clone(),
                command: s.command.clone(),
            });
        } else if !exceeds && s.class_excluded {
            out.push(Directive::Include {
                agent: s.agent.clone(),
                command: s.command.clone(),
            });
        }
    }
    out
}

/// `agent,rating,failures,retired` with one row per agent.
pub fn resource_csv(states: &[RatingState]) -> String {
    let mut out = String::from("agent,rating,failures,retired\n");
    for s in states {
        let _ = writeln!(out, "{},{:.3},{},{}", s.agent, s.rating, s.failures, s.retired);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ResourceConfig {
        ResourceConfig::default()
    }

    fn run(agent: &str, ms: f64, outcome: RunOutcome) -> AgentRunRecord {
        AgentRunRecord {
            agent: agent.into(),
            epoch: 1,
            elapsed_ms: ms,
            outcome,
        }
    }

    fn state(agent: &str, baseline: f64) -> RatingState {
        RatingState::new(agent, "cmd", LogicClass::Prop, baseline, &cfg())
    }

    #[test]
    fn three_failures_retire() {
        let mut s = state("a", 1.0);
        let mut ratings = Vec::new();
        for _ in 0..3 {
            s = s.record_run(&run("a", 0.0, RunOutcome::NoContribution), &cfg());
            ratings.push((s.rating, s.retired));
        }
        assert_eq!(ratings, vec![(2.0, false), (3.0, false), (4.0, true)]);
    }

    #[test]
    fn contribution_resets_failures() {
        let mut s = state("a", 1.0);
        for _ in 0..2 {
            s = s.record_run(&run("a", 0.0, RunOutcome::Interrupted), &cfg());
        }
        s = s.record_run(&run("a", 0.0, RunOutcome::Contributed(1)), &cfg());
        assert_eq!(s.failures, 0);
        assert_eq!(s.rating, s.time_component());
    }

    #[test]
    fn window_average() {
        let mut s = state("a", 1.0);
        for _ in 0..12 {
            s = s.record_run(&run("a", 10.0, RunOutcome::Contributed(1)), &cfg());
        }
        assert_eq!(s.window.len(), 10);
        assert!((s.rating - (1.0 + 11f64.log10())).abs() < 1e-12);
        assert!((s.rating - 2.041).abs() < 1e-3);
        assert!(is_active(&s, &cfg(), LogicClass::Ho, LogicClass::Ho));
    }

    #[test]
    fn gating() {
        let s = state("a", 1.0);
        assert!(!is_active(&s, &cfg(), LogicClass::Prop, LogicClass::Fo));
        assert!(is_active(&s, &cfg(), LogicClass::Ho, LogicClass::Ho));
        let mut c = cfg();
        c.excluded.insert("cmd".into());
        assert!(!is_active(&s, &c, LogicClass::Ho, LogicClass::Prop));
    }

    #[test]
    fn min_active_revives_lowest_first() {
        let mut c = cfg();
        c.min_active = 5;
        let mut states: Vec<RatingState> = (0..3).map(|i| state(&format!("ok{i}"), 1.0)).collect();
        for (name, r) in [("r42", 4.2), ("r50", 5.0), ("r35", 3.5)] {
            let mut s = state(name, 1.0);
            s.rating = r;
            s.retired = true;
            states.push(s);
        }
        let d = resource_step(&states, &c, LogicClass::Ho);
        assert_eq!(
            d,
            vec![
                Directive::SetRating { agent: "r35".into(), rating: 2.0, reason: DirectiveReason::MinActive },
                Directive::SetRating { agent: "r42".into(), rating: 2.0, reason: DirectiveReason::MinActive },
            ]
        );
        apply_directives(&mut states, &d, &c);
        assert!(resource_step(&states, &c, LogicClass::Ho).is_empty());
    }

    #[test]
    fn no_violation_no_directives() {
        let states: Vec<RatingState> = (0..5).map(|i| state(&format!("a{i}"), 1.0)).collect();
        assert!(resource_step(&states, &cfg(), LogicClass::Ho).is_empty());
    }

    #[test]
    fn class_exclusion_for_whole_society() {
        let mut states: Vec<RatingState> = (0..4)
            .map(|i| RatingState::new(&format!("s{i}"), "=Subst", LogicClass::Ho, 0.5, &cfg()))
            .collect();
        states.push(state("p", 0.5));
        let d = resource_step(&states, &cfg(), LogicClass::Prop);
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|d| matches!(d, Directive::Exclude { command, .. } if command == "=Subst")));
        apply_directives(&mut states, &d, &cfg());
        assert!(resource_step(&states, &cfg(), LogicClass::Prop).is_empty());
        let back = resource_step(&states, &cfg(), LogicClass::Ho);
        assert_eq!(back.len(), 4);
        assert!(back.iter().all(|d| matches!(d, Directive::Include { .. })));
    }

    #[test]
    fn second_chance() {
        let mut states: Vec<RatingState> = (0..2)
            .map(|i| RatingState::new(&format!("x{i}"), "X", LogicClass::Prop, 1.0, &cfg()))
            .collect();
        states.extend((0..4).map(|i| state(&format!("y{i}"), 1.0)));
        for s in states.iter_mut().take(2) {
            s.rating = 4.0;
            s.retired = true;
        }
        let mut c = cfg();
        c.min_active = 1;
        let d = resource_step(&states, &c, LogicClass::Ho);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|d| matches!(d, Directive::SetRating { rating, reason: DirectiveReason::SecondChance, .. } if *rating == 2.0)));
    }

    #[test]
    fn directive_rating_sticks_until_contribution() {
        let c = cfg();
        let mut states = vec![state("a", 1.0)];
        states[0].rating = 5.0;
        states[0].retired = true;
        apply_directives(
            &mut states,
            &[Directive::SetRating { agent: "a".into(), rating: 2.0, reason: DirectiveReason::MinActive }],
            &c,
        );
        let s = states[0].record_run(&run("a", 0.0, RunOutcome::NoContribution), &c);
        assert_eq!((s.rating, s.retired), (2.0, false));
        let s = s.record_run(&run("a", 0.0, RunOutcome::Contributed(2)), &c);
        assert!(!s.pinned);
        assert_eq!(s.rating, 1.0);
    }

    #[test]
    fn csv_dump() {
        let states = vec![state("a", 1.0)];
        assert_eq!(resource_csv(&states), "agent,rating,failures,retired\na,1.000,0,false\n");
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let mut c = cfg();
        c.window = 0;
        assert_eq!(c.validate(), Err(ConfigError::Window));
    }
}
