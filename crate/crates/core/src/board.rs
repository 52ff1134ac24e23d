//! Suggestion blackboards (one per command) and the command blackboard.
//!
//! Writers serialize on a per-board mutex and publish an immutable view
//! after every change; readers load the latest view without locking.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use arc_swap::ArcSwap;
use parking_lot::Mutex;
use thiserror::Error;

use crate::agents::SuggestionEntry;
use crate::classify::LogicClass;
use crate::pai::{better, Pai};
use crate::resources::{Directive, RatingReport, SocietyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("epoch {requested} does not advance past {current}")]
    EpochNotIncreasing { current: u64, requested: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MessagePayload {
    Classification(LogicClass),
    /// An argument agent's rating update.
    Rating(RatingReport),
    /// A command agent's summary of its society.
    Society(SocietyReport),
    Directive(Directive),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoardMessage {
    pub epoch: u64,
    pub payload: MessagePayload,
}

impl BoardMessage {
    pub fn classification(class: LogicClass, epoch: u64) -> Self {
        BoardMessage {
            epoch,
            payload: MessagePayload::Classification(class),
        }
    }

    /// Resource state outlives the epoch it was posted in.
    pub fn is_resource(&self) -> bool {
        !matches!(self.payload, MessagePayload::Classification(_))
    }

    /// Messages with equal keys replace each other.
    fn key(&self) -> Option<String> {
        match &self.payload {
            MessagePayload::Classification(_) => None,
            MessagePayload::Rating(r) => Some(format!("rating:{}", r.agent)),
            MessagePayload::Society(s) => Some(format!("society:{}", s.command)),
            MessagePayload::Directive(d) => Some(format!("directive:{}", d.target())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostOutcome {
    Accepted,
    Duplicate,
    /// The PAI belongs to an earlier epoch; its producer should stop.
    Stale,
}

/// What an agent consumed: a stored PAI, or the virtual empty PAI that
/// triggers agents without required arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriggerRef {
    Empty,
    Entry(usize),
}

/// Point-in-time view of a suggestion board.
#[derive(Clone, Debug, Default)]
pub struct BoardView {
    pub command: String,
    pub epoch: u64,
    pub pais: Vec<Arc<Pai>>,
    pub processed: HashSet<(String, TriggerRef)>,
    pub messages: Vec<BoardMessage>,
}

impl PartialEq for BoardView {
    fn eq(&self, other: &Self) -> bool {
        self.command == other.command
            && self.epoch == other.epoch
            && self.pais == other.pais
            && self.processed == other.processed
            && self.messages == other.messages
    }
}

impl BoardView {
    pub fn is_processed(&self, agent: &str, trigger: TriggerRef) -> bool {
        self.processed.contains(&(agent.to_string(), trigger))
    }

    /// Latest classification on the message lane.
    pub fn classification(&self) -> Option<LogicClass> {
        self.messages.iter().rev().find_map(|m| match m.payload {
            MessagePayload::Classification(c) => Some(c),
            _ => None,
        })
    }

    /// `#board <cmd> epoch=<n>` followed by one PAI per line.
    pub fn dump(&self) -> String {
        let mut s = format!("#board {} epoch={}\n", self.command, self.epoch);
        for p in &self.pais {
            s.push_str(&p.canonical());
            s.push('\n');
        }
        s
    }
}

#[derive(Default)]
struct SuggestionState {
    view: BoardView,
    keys: HashSet<String>,
}

/// Append-only PAI store of one command for the current epoch.
pub struct SuggestionBoard {
    command: String,
    state: Mutex<SuggestionState>,
    published: ArcSwap<BoardView>,
}

impl SuggestionBoard {
    pub fn new(command: &str, epoch: u64) -> Self {
        let view = BoardView {
            command: command.to_string(),
            epoch,
            ..BoardView::default()
        };
        SuggestionBoard {
            command: command.to_string(),
            published: ArcSwap::from_pointee(view.clone()),
            state: Mutex::new(SuggestionState {
                view,
                keys: HashSet::new(),
            }),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn epoch(&self) -> u64 {
        self.published.load().epoch
    }

    pub fn snapshot(&self) -> Arc<BoardView> {
        self.published.load_full()
    }

    fn publish(&self, st: &SuggestionState) {
        self.published.store(Arc::new(st.view.clone()));
    }

    pub fn post_pai(&self, pai: Pai) -> PostOutcome {
        let mut st = self.state.lock();
        if pai.epoch != st.view.epoch || pai.command() != self.command {
            return PostOutcome::Stale;
        }
        if !st.keys.insert(pai.canonical()) {
            return PostOutcome::Duplicate;
        }
        st.view.pais.push(Arc::new(pai));
        self.publish(&st);
        PostOutcome::Accepted
    }

    /// Marks `trigger` as consumed by `agent`. Returns `false` if it was
    /// already consumed or the epoch has moved on.
    pub fn claim(&self, agent: &str, trigger: TriggerRef, epoch: u64) -> bool {
        let mut st = self.state.lock();
        if epoch != st.view.epoch {
            return false;
        }
        if let TriggerRef::Entry(i) = trigger {
            if i >= st.view.pais.len() {
                return false;
            }
        }
        let fresh = st.view.processed.insert((agent.to_string(), trigger));
        if fresh {
            self.publish(&st);
        }
        fresh
    }

    /// Posts on the message lane; stale messages are dropped.
    pub fn post_message(&self, msg: BoardMessage) -> bool {
        let mut st = self.state.lock();
        if msg.epoch != st.view.epoch {
            return false;
        }
        push_message(&mut st.view.messages, msg);
        self.publish(&st);
        true
    }

    fn reinitialize(&self, epoch: u64) -> Result<(), BoardError> {
        let mut st = self.state.lock();
        if epoch <= st.view.epoch {
            return Err(BoardError::EpochNotIncreasing {
                current: st.view.epoch,
                requested: epoch,
            });
        }
        st.view.epoch = epoch;
        st.view.pais.clear();
        st.view.processed.clear();
        st.view.messages.retain(BoardMessage::is_resource);
        st.keys.clear();
        self.publish(&st);
        Ok(())
    }
}

fn push_message(lane: &mut Vec<BoardMessage>, msg: BoardMessage) {
    if let Some(k) = msg.key() {
        lane.retain(|m| m.key().as_deref() != Some(k.as_str()));
    }
    lane.push(msg);
}

/// Point-in-time view of the command board.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandView {
    pub epoch: u64,
    pub entries: BTreeMap<String, SuggestionEntry>,
    pub messages: Vec<BoardMessage>,
    /// Superseded suggestions of this epoch, oldest first.
    pub history: Vec<String>,
}

impl CommandView {
    pub fn classification(&self) -> Option<LogicClass> {
        self.messages.iter().rev().find_map(|m| match m.payload {
            MessagePayload::Classification(c) => Some(c),
            _ => None,
        })
    }

    pub fn society_reports(&self) -> Vec<&SocietyReport> {
        self.messages
            .iter()
            .filter_map(|m| match &m.payload {
                MessagePayload::Society(s) => Some(s),
                _ => None,
            })
            .collect()
    }
}

pub struct CommandBoard {
    state: Mutex<CommandView>,
    published: ArcSwap<CommandView>,
}

impl CommandBoard {
    pub fn new(epoch: u64) -> Self {
        let view = CommandView {
            epoch,
            ..CommandView::default()
        };
        CommandBoard {
            published: ArcSwap::from_pointee(view.clone()),
            state: Mutex::new(view),
        }
    }

    pub fn snapshot(&self) -> Arc<CommandView> {
        self.published.load_full()
    }

    pub fn epoch(&self) -> u64 {
        self.published.load().epoch
    }

    /// Installs `entry` if it is better than the current one for its
    /// command. Returns whether the board changed.
    pub fn offer(&self, entry: SuggestionEntry, epoch: u64) -> bool {
        let mut st = self.state.lock();
        if epoch != st.epoch {
            return false;
        }
        // the command's society is switched off for weaker goals
        if st.classification().is_some_and(|c| entry.class > c) {
            return false;
        }
        if let Some(cur) = st.entries.get(&entry.command) {
            let improves = better(&entry.pai, &cur.pai)
                .map(|o| o.is_gt())
                .unwrap_or(false);
            if !improves {
                return false;
            }
            let old = cur.pai.canonical();
            st.history.push(old);
        }
        st.entries.insert(entry.command.clone(), entry);
        self.published.store(Arc::new(st.clone()));
        true
    }

    pub fn post_message(&self, msg: BoardMessage) -> bool {
        let mut st = self.state.lock();
        if msg.epoch != st.epoch {
            return false;
        }
        if let MessagePayload::Classification(c) = msg.payload {
            st.entries.retain(|_, e| e.class <= c);
        }
        push_message(&mut st.messages, msg);
        self.published.store(Arc::new(st.clone()));
        true
    }

    fn reinitialize(&self, epoch: u64) -> Result<(), BoardError> {
        let mut st = self.state.lock();
        if epoch <= st.epoch {
            return Err(BoardError::EpochNotIncreasing {
                current: st.epoch,
                requested: epoch,
            });
        }
        st.epoch = epoch;
        st.entries.clear();
        st.history.clear();
        st.messages.retain(BoardMessage::is_resource);
        self.published.store(Arc::new(st.clone()));
        Ok(())
    }
}

/// All boards of a session.
pub struct Blackboards {
    suggestion: BTreeMap<String, Arc<SuggestionBoard>>,
    command: CommandBoard,
    reinit: Mutex<()>,
}

impl Blackboards {
    pub fn new<'a>(commands: impl IntoIterator<Item = &'a str>, epoch: u64) -> Self {
        Blackboards {
            suggestion: commands
                .into_iter()
                .map(|c| (c.to_string(), Arc::new(SuggestionBoard::new(c, epoch))))
                .collect(),
            command: CommandBoard::new(epoch),
            reinit: Mutex::new(()),
        }
    }

    pub fn epoch(&self) -> u64 {
        self.command.epoch()
    }

    pub fn board(&self, command: &str) -> Option<&Arc<SuggestionBoard>> {
        self.suggestion.get(command)
    }

    pub fn suggestion_boards(&self) -> impl Iterator<Item = &Arc<SuggestionBoard>> {
        self.suggestion.values()
    }

    pub fn command(&self) -> &CommandBoard {
        &self.command
    }

    /// Empties every board and moves all of them to `epoch`.
    pub fn reinitialize_all(&self, epoch: u64) -> Result<(), BoardError> {
        let _guard = self.reinit.lock();
        let current = self.epoch();
        if epoch <= current {
            return Err(BoardError::EpochNotIncreasing {
                current,
                requested: epoch,
            });
        }
        for b in self.suggestion.values() {
            b.reinitialize(epoch)?;
        }
        self.command.reinitialize(epoch)
    }

    pub fn dump(&self) -> String {
        self.suggestion
            .values()
            .map(|b| b.snapshot().dump())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pai::PaiLiteral;
    use crate::tactics::Catalog;

    fn pai(text: &str, epoch: u64) -> Pai {
        let lit = PaiLiteral::parse(text, &mut Default::default()).unwrap();
        let mut p = Catalog::standard().resolve(&lit).unwrap();
        p.epoch = epoch;
        p
    }

    #[test]
    fn post_then_duplicate_then_stale() {
        let b = SuggestionBoard::new("=Subst", 1);
        assert_eq!(b.post_pai(pai("=Subst{u:L1,s:L2}", 1)), PostOutcome::Accepted);
        assert_eq!(b.post_pai(pai("=Subst{u:L1,s:L2}", 1)), PostOutcome::Duplicate);
        assert_eq!(b.post_pai(pai("=Subst{u:L1,s:L2,pl:[1]}", 0)), PostOutcome::Stale);
        assert_eq!(b.snapshot().pais.len(), 1);
    }

    #[test]
    fn wrong_command_is_rejected() {
        let b = SuggestionBoard::new("=Subst", 1);
        assert_eq!(b.post_pai(pai("=>I{conc:C}", 1)), PostOutcome::Stale);
    }

    #[test]
    fn snapshot_is_isolated_from_later_posts() {
        let b = SuggestionBoard::new("=Subst", 1);
        let empty = b.snapshot();
        assert!(empty.pais.is_empty());
        assert_eq!(empty.epoch, 1);
        assert_eq!(b.snapshot(), b.snapshot());
        b.post_pai(pai("=Subst{u:L1,s:L2}", 1));
        assert!(empty.pais.is_empty());
        assert_eq!(b.snapshot().pais.len(), 1);
    }

    #[test]
    fn reinitialize_requires_advance() {
        let boards = Blackboards::new(["=Subst", "=>I"], 1);
        boards.board("=Subst").unwrap().post_pai(pai("=Subst{u:L1,s:L2}", 1));
        boards.reinitialize_all(2).unwrap();
        assert!(boards.board("=Subst").unwrap().snapshot().pais.is_empty());
        assert_eq!(boards.epoch(), 2);
        assert!(matches!(
            boards.reinitialize_all(2),
            Err(BoardError::EpochNotIncreasing { current: 2, requested: 2 })
        ));
        boards.reinitialize_all(3).unwrap();
        assert_eq!(boards.board("=>I").unwrap().epoch(), 3);
    }

    #[test]
    fn claims_are_exclusive_and_epoch_bound() {
        let b = SuggestionBoard::new("=Subst", 1);
        assert!(b.claim("a", TriggerRef::Empty, 1));
        assert!(!b.claim("a", TriggerRef::Empty, 1));
        assert!(b.claim("b", TriggerRef::Empty, 1));
        assert!(!b.claim("a", TriggerRef::Entry(0), 1));
        assert!(!b.claim("c", TriggerRef::Empty, 0));
        assert!(b.snapshot().is_processed("a", TriggerRef::Empty));
    }

    #[test]
    fn resource_messages_survive_reinit() {
        let boards = Blackboards::new(["=Subst"], 1);
        let b = boards.board("=Subst").unwrap();
        b.post_message(BoardMessage::classification(LogicClass::Prop, 1));
        b.post_message(BoardMessage {
            epoch: 1,
            payload: MessagePayload::Rating(RatingReport {
                agent: "x".into(),
                rating: 1.0,
                failures: 0,
                retired: false,
            }),
        });
        boards.reinitialize_all(2).unwrap();
        let v = b.snapshot();
        assert_eq!(v.classification(), None);
        assert_eq!(v.messages.len(), 1);
        assert!(!b.post_message(BoardMessage::classification(LogicClass::Ho, 1)));
    }

    #[test]
    fn command_board_keeps_best() {
        let cb = CommandBoard::new(1);
        let e = |t| SuggestionEntry::new(pai(t, 1), false);
        assert!(cb.offer(e("=Subst{u:L1,s:L2}"), 1));
        assert!(cb.offer(e("=Subst{u:L1,s:L2,pl:[1]}"), 1));
        assert!(!cb.offer(e("=Subst{u:L1,s:L2}"), 1));
        let v = cb.snapshot();
        assert_eq!(v.entries["=Subst"].pai.canonical(), "=Subst{u:L1,eq:~,s:L2,pl:[1]}");
        assert_eq!(v.history, vec!["=Subst{u:L1,eq:~,s:L2,pl:~}".to_string()]);
        assert!(!cb.offer(e("=Subst{u:L1,s:L2,pl:[1]}"), 0));
    }

    #[test]
    fn dump_format() {
        let b = SuggestionBoard::new("=Subst", 2);
        b.post_pai(pai("=Subst{u:L1,s:L2}", 2));
        b.post_pai(pai("=Subst{u:L1,s:L2,pl:[1]}", 2));
        assert_eq!(
            b.snapshot().dump(),
            "#board =Subst epoch=2\n=Subst{u:L1,eq:~,s:L2,pl:~}\n=Subst{u:L1,eq:~,s:L2,pl:[1]}\n"
        );
    }
}
