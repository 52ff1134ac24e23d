use std::sync::mpsc::{channel, Receiver, Sender};

use parking_lot::Mutex;
use serde::Serialize;

use crate::agents::SuggestionEntry;
use crate::classify::LogicClass;
use crate::proof::{PartialProof, ProofLine};
use crate::resources::{RatingReport, SocietyReport};

/// One proof line as shown to clients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineView {
    pub label: String,
    pub hyps: Vec<String>,
    pub formula: String,
    pub justification: String,
}

impl From<&ProofLine> for LineView {
    fn from(l: &ProofLine) -> Self {
        LineView {
            label: l.label.to_string(),
            hyps: l.hyps.iter().map(|h| h.to_string()).collect(),
            formula: l.formula.to_string(),
            justification: l.justification.to_string(),
        }
    }
}

/// Lines in presentation order.
pub fn line_views(proof: &PartialProof) -> Vec<LineView> {
    proof.presentation_order().into_iter().map(LineView::from).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum EventPayload {
    ProofUpdated {
        lines: Vec<LineView>,
        focus: Option<String>,
    },
    SuggestionsUpdated {
        suggestions: Vec<SuggestionEntry>,
    },
    ResourceReport {
        agents: Vec<RatingReport>,
        societies: Vec<SocietyReport>,
    },
    Classification {
        class: LogicClass,
        goal: String,
    },
    ProofComplete {
        lines: usize,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::ProofUpdated { .. } => "proof-updated",
            EventPayload::SuggestionsUpdated { .. } => "suggestions-updated",
            EventPayload::ResourceReport { .. } => "resource-report",
            EventPayload::Classification { .. } => "classification",
            EventPayload::ProofComplete { .. } => "proof-complete",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub epoch: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl SessionEvent {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

#[derive(Default)]
struct LogState {
    epoch: u64,
    events: Vec<SessionEvent>,
    subscribers: Vec<Sender<SessionEvent>>,
}

/// Totally ordered event stream with non-decreasing epochs.
#[derive(Default)]
pub(crate) struct EventLog {
    state: Mutex<LogState>,
}

impl EventLog {
    /// Moves the stream to `epoch`; later events of older epochs are
    /// dropped.
    pub fn advance(&self, epoch: u64) {
        let mut st = self.state.lock();
        st.epoch = st.epoch.max(epoch);
    }

    pub fn emit(&self, epoch: u64, payload: EventPayload) -> Option<SessionEvent> {
        let mut st = self.state.lock();
        if epoch < st.epoch {
            return None;
        }
        st.epoch = epoch;
        let ev = SessionEvent {
            seq: st.events.len() as u64,
            epoch,
            payload,
        };
        st.events.push(ev.clone());
        st.subscribers.retain(|s| s.send(ev.clone()).is_ok());
        Some(ev)
    }

    pub fn events(&self) -> Vec<SessionEvent> {
        self.state.lock().events.clone()
    }

    /// A stream that replays every earlier event, then follows new ones.
    pub fn subscribe(&self) -> Receiver<SessionEvent> {
        let (tx, rx) = channel();
        let mut st = self.state.lock();
        for ev in &st.events {
            let _ = tx.send(ev.clone());
        }
        st.subscribers.push(tx);
        rx
    }
}
