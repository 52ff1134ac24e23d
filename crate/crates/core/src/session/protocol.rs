//! Newline-delimited JSON protocol over a byte stream.
//!
//! See `docs/protocol.md` for the message schemas.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use parking_lot::Mutex;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{line_views, SessionConfig, SessionError, SessionEvent, Session};

#[derive(Debug, Deserialize)]
#[serde(tag = "request", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Request {
    Start {
        conjecture: String,
        #[serde(default)]
        config: Option<SessionConfig>,
    },
    Execute {
        #[serde(default)]
        pai: Option<String>,
        /// 1-based index into the current suggestion list.
        #[serde(default)]
        suggestion: Option<usize>,
    },
    GetSuggestions,
    Subscribe,
    GetResources,
    SetConfig {
        config: SessionConfig,
    },
}

#[derive(Debug, Deserialize)]
struct Envelope {
    #[serde(default)]
    id: Option<Value>,
    #[serde(flatten)]
    request: Request,
}

fn error(kind: &str, message: impl std::fmt::Display) -> Value {
    json!({"response": "error", "error": {"kind": kind, "message": message.to_string()}})
}

fn session_error(e: &SessionError) -> Value {
    error(e.kind(), e)
}

const POLL: Duration = Duration::from_millis(20);

/// One client's protocol state: its session and event subscription.
pub struct Connection {
    session: Option<Session>,
    defaults: SessionConfig,
    out: Sender<String>,
    events: Arc<Mutex<Option<Receiver<SessionEvent>>>>,
    subscribed: bool,
}

impl Connection {
    /// Responses and events are written to `out`, one JSON document each.
    pub fn new(defaults: SessionConfig, out: Sender<String>) -> Self {
        Connection {
            session: None,
            defaults,
            out,
            events: Arc::new(Mutex::new(None)),
            subscribed: false,
        }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    /// Forwards pending events; events precede the response to the request
    /// that caused them.
    fn drain(events: &Mutex<Option<Receiver<SessionEvent>>>, out: &Sender<String>) {
        let guard = events.lock();
        if let Some(rx) = guard.as_ref() {
            while let Ok(ev) = rx.try_recv() {
                let _ = out.send(ev.to_json());
            }
        }
    }

    pub fn handle_line(&mut self, line: &str) {
        let line = line.trim();
        if line.is_empty() {
            return;
        }
        let (id, mut response) = match serde_json::from_str::<Envelope>(line) {
            Ok(env) => (env.id, self.handle(env.request)),
            Err(e) => {
                let id = serde_json::from_str::<Value>(line).ok().and_then(|v| v.get("id").cloned());
                (id, error("protocol-error", e))
            }
        };
        if let (Some(id), Some(obj)) = (id, response.as_object_mut()) {
            obj.insert("id".into(), id);
        }
        Self::drain(&self.events, &self.out);
        let _ = self.out.send(response.to_string());
    }

    fn require(&mut self) -> Result<&mut Session, Value> {
        self.session
            .as_mut()
            .ok_or_else(|| error("protocol-error", "no session; send a start request first"))
    }

    fn handle(&mut self, req: Request) -> Value {
        match self.dispatch(req) {
            Ok(v) | Err(v) => v,
        }
    }

    fn dispatch(&mut self, req: Request) -> Result<Value, Value> {
        match req {
            Request::Start { conjecture, config } => {
                let cfg = config.unwrap_or_else(|| self.defaults.clone());
                // drop the old session (and its threads) first
                self.session = None;
                let s = Session::start_text(&conjecture, cfg).map_err(|e| session_error(&e))?;
                let v = json!({
                    "response": "start",
                    "epoch": s.epoch(),
                    "lines": line_views(s.proof()),
                });
                if self.subscribed {
                    *self.events.lock() = Some(s.subscribe());
                }
                self.session = Some(s);
                Ok(v)
            }
            Request::Execute { pai, suggestion } => {
                let s = self.require()?;
                let pai = match (pai, suggestion) {
                    (Some(text), None) => s.parse_pai(&text).map_err(|e| session_error(&e))?,
                    (None, Some(n)) => {
                        let list = s.suggestions();
                        list.get(n.wrapping_sub(1))
                            .map(|e| e.pai.clone())
                            .ok_or_else(|| {
                                error("input-error", format!("no suggestion {n}; {} available", list.len()))
                            })?
                    }
                    _ => return Err(error("protocol-error", "execute needs exactly one of `pai`, `suggestion`")),
                };
                let ev = s.execute(&pai).map_err(|e| session_error(&e))?;
                Ok(json!({
                    "response": "execute",
                    "pai": pai.canonical(),
                    "epoch": ev.epoch,
                    "complete": s.proof().is_complete(),
                }))
            }
            Request::GetSuggestions => {
                let s = self.require()?;
                Ok(json!({
                    "response": "suggestions",
                    "epoch": s.epoch(),
                    "suggestions": s.suggestions(),
                }))
            }
            Request::Subscribe => {
                let s = self.require()?;
                let rx = s.subscribe();
                let v = json!({
                    "response": "subscribe",
                    "epoch": s.epoch(),
                });
                *self.events.lock() = Some(rx);
                self.subscribed = true;
                Ok(v)
            }
            Request::GetResources => {
                let s = self.require()?;
                let ratings = s.ratings();
                Ok(json!({
                    "response": "resources",
                    "epoch": s.epoch(),
                    "agents": ratings.iter().map(|r| r.report()).collect::<Vec<_>>(),
                    "societies": crate::resources::society_reports(&ratings),
                    "csv": s.resource_csv(),
                }))
            }
            Request::SetConfig { config } => {
                self.defaults = config.clone();
                let Some(s) = self.session.as_mut() else {
                    return Ok(json!({"response": "set-config", "config": config}));
                };
                let ev = s.set_config(config.clone()).map_err(|e| session_error(&e))?;
                Ok(json!({"response": "set-config", "config": config, "epoch": ev.epoch}))
            }
        }
    }
}

/// Serves one client: reads requests line by line from `input` and writes
/// responses and subscribed events to `output` until end of input.
pub fn serve_stream<R, W>(input: R, mut output: W, defaults: SessionConfig) -> std::io::Result<()>
where
    R: BufRead,
    W: Write + Send + 'static,
{
    let (tx, rx) = channel::<String>();
    let writer = thread::spawn(move || -> std::io::Result<()> {
        for line in rx {
            output.write_all(line.as_bytes())?;
            output.write_all(b"\n")?;
            output.flush()?;
        }
        Ok(())
    });
    let mut conn = Connection::new(defaults, tx.clone());
    // forwards events produced between requests (concurrent sessions)
    let done = Arc::new(AtomicBool::new(false));
    let pump = {
        let events = Arc::clone(&conn.events);
        let done = Arc::clone(&done);
        let tx = tx.clone();
        thread::spawn(move || {
            while !done.load(Ordering::Relaxed) {
                Connection::drain(&events, &tx);
                thread::sleep(POLL);
            }
        })
    };
    let mut result = Ok(());
    for line in input.lines() {
        match line {
            Ok(l) => conn.handle_line(&l),
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    done.store(true, Ordering::Relaxed);
    let _ = pump.join();
    Connection::drain(&conn.events, &tx);
    drop(conn);
    drop(tx);
    match writer.join() {
        Ok(w) => result.and(w),
        Err(_) => result,
    }
}
