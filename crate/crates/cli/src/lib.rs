//! Line-oriented front end: the script runner and the interactive loop.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::time::Duration;

use ndsuggest::board::BoardView;
use ndsuggest::classify::class_entry;
use ndsuggest::session::{Mode, Session, SessionConfig};

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const SETTLE: Duration = Duration::from_secs(5);

/// A failed script step.
#[derive(Debug)]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Renders the proof and the numbered suggestion list.
pub fn render_state(s: &Session) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "epoch {}", s.epoch());
    for l in s.proof().presentation_order() {
        let _ = writeln!(out, "  {l}");
    }
    if let Some(c) = s.classification() {
        let _ = writeln!(out, "{}", class_entry(c, s.epoch()));
    }
    if let Some(f) = s.focus() {
        let _ = writeln!(out, "focus {}", f.goal);
    }
    let list = s.suggestions();
    if list.is_empty() {
        out.push_str("no suggestions\n");
    } else {
        out.push_str("suggestions:\n");
        for (i, e) in list.iter().enumerate() {
            let _ = writeln!(out, "  {}. {}", i + 1, e.pai.canonical());
        }
    }
    out
}

fn completion(s: &Session) -> String {
    match s.proof().len() {
        1 => "proof complete, 1 line".into(),
        n => format!("proof complete, {n} lines"),
    }
}

fn settle(s: &Session) {
    if s.mode() == Mode::Concurrent {
        s.wait_quiescent(SETTLE);
    }
}

/// Resolves `do` arguments: a 1-based suggestion number or a PAI literal.
fn do_command(s: &mut Session, arg: &str) -> Result<String, String> {
    let arg = arg.trim();
    let pai = if let Ok(n) = arg.parse::<usize>() {
        let list = s.suggestions();
        match n.checked_sub(1).and_then(|i| list.get(i)) {
            Some(e) => e.pai.clone(),
            None => return Err(format!("no suggestion {n}: {} available", list.len())),
        }
    } else {
        s.parse_pai(arg).map_err(|e| e.to_string())?
    };
    let text = pai.canonical();
    s.execute(&pai).map_err(|e| e.to_string())?;
    settle(s);
    Ok(text)
}

fn board_set(view: &BoardView) -> Vec<String> {
    let mut v: Vec<String> = view.pais.iter().map(|p| p.canonical()).collect();
    v.sort();
    v
}

/// Checks one `expect` line; `Err` carries the mismatch description.
fn check_expectation(s: &Session, what: &str) -> Result<(), String> {
    let (kind, rest) = what.split_once(' ').unwrap_or((what, ""));
    let rest = rest.trim();
    match kind {
        "complete" => {
            if s.proof().is_complete() {
                Ok(())
            } else {
                Err("proof is not complete".into())
            }
        }
        "lines" => {
            let want: usize = rest.parse().map_err(|_| format!("bad line count `{rest}`"))?;
            if s.proof().len() == want {
                Ok(())
            } else {
                Err(format!("expected {want} lines, found {}", s.proof().len()))
            }
        }
        "class" => {
            let got = s.classification().map(|c| c.to_string()).unwrap_or_else(|| "none".into());
            if got == rest {
                Ok(())
            } else {
                Err(format!("expected class {rest}, found {got}"))
            }
        }
        "line" => {
            let (label, formula) = rest.split_once(' ').ok_or("expect line <label> <formula>")?;
            let got = s
                .proof()
                .line(&label.into())
                .map(|l| l.formula.to_string())
                .ok_or_else(|| format!("no line {label}"))?;
            if got == formula.trim() {
                Ok(())
            } else {
                Err(format!("line {label} is {got}"))
            }
        }
        "suggestion" => {
            let (n, pai) = rest.split_once(' ').ok_or("expect suggestion <n> <pai>")?;
            let n: usize = n.parse().map_err(|_| format!("bad suggestion number `{n}`"))?;
            let list = s.suggestions();
            let got = n
                .checked_sub(1)
                .and_then(|i| list.get(i))
                .map(|e| e.pai.canonical())
                .unwrap_or_else(|| "nothing".into());
            if got == pai.trim() {
                Ok(())
            } else {
                Err(format!("suggestion {n} is {got}"))
            }
        }
        "board" => {
            let (cmd, pais) = rest.split_once(' ').unwrap_or((rest, ""));
            let board = s.boards().board(cmd).ok_or_else(|| format!("no board {cmd}"))?;
            let got = board_set(&board.snapshot());
            let mut want: Vec<String> = pais
                .split(';')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(String::from)
                .collect();
            want.sort();
            if got == want {
                Ok(())
            } else {
                Err(format!("board {cmd} holds {}", got.join("; ")))
            }
        }
        other => Err(format!("unknown expectation `{other}`")),
    }
}

/// Runs a script, appending to `transcript`. Returns the exit status.
///
/// Script lines: `conjecture <formula>`, `do <n>|<pai>`, `focus <label>`,
/// `expect ...`, `show`, `agents`, `class`; `#` starts a comment.
pub fn run_script(
    script: &str,
    config: &SessionConfig,
    conjecture: Option<&str>,
    transcript: &mut String,
) -> Result<i32, ScriptError> {
    let mut config = config.clone();
    config.mode = Mode::Deterministic;
    let mut session: Option<Session> = None;
    let mut status = EXIT_OK;
    let err = |line: usize, message: String| ScriptError { line, message };

    if let Some(c) = conjecture {
        let s = Session::start_text(c, config.clone()).map_err(|e| err(0, e.to_string()))?;
        let _ = writeln!(transcript, "conjecture {}", s.proof().lines()[0].formula);
        transcript.push_str(&render_state(&s));
        session = Some(s);
    }
    for (i, raw) in script.lines().enumerate() {
        let n = i + 1;
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (cmd, arg) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let arg = arg.trim();
        if cmd == "conjecture" {
            let s = Session::start_text(arg, config.clone()).map_err(|e| err(n, e.to_string()))?;
            let _ = writeln!(transcript, "conjecture {}", s.proof().lines()[0].formula);
            transcript.push_str(&render_state(&s));
            session = Some(s);
            continue;
        }
        let s = session
            .as_mut()
            .ok_or_else(|| err(n, "no conjecture before this line".into()))?;
        match cmd {
            "do" => {
                let text = do_command(s, arg).map_err(|m| err(n, m))?;
                let _ = writeln!(transcript, "> do {text}");
                transcript.push_str(&render_state(s));
            }
            "focus" => {
                let goal = (arg != "default").then(|| arg.into());
                s.select_focus(goal).map_err(|e| err(n, e.to_string()))?;
                let _ = writeln!(transcript, "> focus {arg}");
                transcript.push_str(&render_state(s));
            }
            "expect" => {
                if let Err(m) = check_expectation(s, arg) {
                    let _ = writeln!(transcript, "! line {n}: expectation failed: {m}");
                    status = EXIT_MISMATCH;
                }
            }
            "show" => transcript.push_str(&render_state(s)),
            "agents" => transcript.push_str(&s.resource_csv()),
            "class" => {
                let c = s.classification().map(|c| c.to_string()).unwrap_or_else(|| "none".into());
                let _ = writeln!(transcript, "{c}");
            }
            other => return Err(err(n, format!("unknown command `{other}`"))),
        }
    }
    if let Some(s) = &session {
        if s.proof().is_complete() {
            let _ = writeln!(transcript, "{}", completion(s));
        }
    }
    Ok(status)
}

const HELP: &str = "commands: start <formula> | do <n> | do <cmd>{pai} | focus <label> | \
suggestions | proof | agents | class | help | quit\n";

/// The interactive loop. Malformed input is reported and the loop goes on.
pub fn repl<R: BufRead, W: Write>(
    input: R,
    mut out: W,
    config: &SessionConfig,
    conjecture: Option<&str>,
) -> std::io::Result<i32> {
    let mut session: Option<Session> = None;
    let start = |text: &str, out: &mut W| -> std::io::Result<Option<Session>> {
        match Session::start_text(text, config.clone()) {
            Ok(s) => {
                settle(&s);
                out.write_all(render_state(&s).as_bytes())?;
                Ok(Some(s))
            }
            Err(e) => {
                writeln!(out, "error: {e}")?;
                Ok(None)
            }
        }
    };
    if let Some(c) = conjecture {
        session = start(c, &mut out)?;
    }
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        let (cmd, arg) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let arg = arg.trim();
        match (cmd, session.as_mut()) {
            ("", _) => {}
            ("quit" | "exit", _) => break,
            ("help", _) => out.write_all(HELP.as_bytes())?,
            ("start" | "conjecture", _) => {
                drop(session.take());
                session = start(arg, &mut out)?;
            }
            (_, None) => writeln!(out, "error: no conjecture; use `start <formula>`")?,
            ("do", Some(s)) => match do_command(s, arg) {
                Ok(_) => {
                    out.write_all(render_state(s).as_bytes())?;
                    if s.proof().is_complete() {
                        writeln!(out, "{}", completion(s))?;
                    }
                }
                Err(m) => writeln!(out, "error: {m}")?,
            },
            ("focus", Some(s)) => {
                let goal = (!arg.is_empty() && arg != "default").then(|| arg.into());
                match s.select_focus(goal) {
                    Ok(_) => {
                        settle(s);
                        out.write_all(render_state(s).as_bytes())?;
                    }
                    Err(e) => writeln!(out, "error: {e}")?,
                }
            }
            ("suggestions" | "proof" | "show", Some(s)) => out.write_all(render_state(s).as_bytes())?,
            ("agents", Some(s)) => out.write_all(s.resource_csv().as_bytes())?,
            ("class", Some(s)) => match s.classification() {
                Some(c) => writeln!(out, "{}", class_entry(c, s.epoch()))?,
                None => writeln!(out, "no classification yet")?,
            },
            (other, Some(_)) => writeln!(out, "error: unknown command `{other}`; try `help`")?,
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(EXIT_OK)
}
