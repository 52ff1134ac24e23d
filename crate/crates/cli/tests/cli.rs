use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ndsuggest"))
}

fn reference() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/reference.proof")
}

fn script(text: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.proof");
    std::fs::write(&path, text).unwrap();
    bin().arg("--script").arg(&path).output().unwrap()
}

#[test]
fn reference_script_completes() {
    let out = bin().arg("--script").arg(reference()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("proof complete, 5 lines\n"));
    assert!(text.contains("#class PROP epoch=4"));
}

#[test]
fn transcript_is_byte_identical_across_runs() {
    let a = bin().arg("--script").arg(reference()).output().unwrap();
    let b = bin().arg("--script").arg(reference()).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    // the library runner produces the same bytes
    let mut t = String::new();
    let text = std::fs::read_to_string(reference()).unwrap();
    ndsuggest_cli::run_script(&text, &Default::default(), None, &mut t).unwrap();
    assert_eq!(t.as_bytes(), &a.stdout[..]);
}

#[test]
fn mismatch_exits_one() {
    let out = script("conjecture a:o => a\nexpect class FO\nexpect suggestion 1 PropSolve{conc:C,prems:()}\n");
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("! line 2: expectation failed"));
    assert!(!text.contains("! line 3"));
}

#[test]
fn input_errors_exit_two_with_line() {
    let out = script("conjecture a:o => a\n\ndo =>I{conc:L9}\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = script("conjecture (a:o b:o)\n");
    assert_eq!(out.status.code(), Some(2));

    let out = script("conjecture a:o => a\ndo 99\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no suggestion 99"));
}

#[test]
fn empty_script_with_conjecture_prints_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.proof");
    std::fs::write(&path, "").unwrap();
    let out = bin()
        .args(["--conjecture", "a:o => a", "--script"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("conjecture a => a\nepoch 1\n"));
    assert!(text.contains("2. =>I{conc:C}"));
}

fn pipe(requests: &[&str], extra: &[&str]) -> Vec<Value> {
    let mut child = bin()
        .arg("--pipe")
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut stdin = child.stdin.take().unwrap();
        for r in requests {
            writeln!(stdin, "{r}").unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn responses(msgs: &[Value]) -> Vec<&Value> {
    msgs.iter().filter(|m| m.get("response").is_some()).collect()
}

#[test]
fn pipe_protocol_round_trip() {
    let msgs = pipe(
        &[
            r#"{"id":1,"request":"start","conjecture":"(p:(o>o) (a:o & b:o)) => (p (b & a))"}"#,
            r#"{"id":2,"request":"subscribe"}"#,
            r#"{"id":3,"request":"get-suggestions"}"#,
            r#"{"id":4,"request":"execute","suggestion":1}"#,
            r#"{"id":5,"request":"execute","pai":"=Subst{u:L1,s:L2,pl:[1]}"}"#,
            r#"{"id":6,"request":"execute","pai":"<=>2={conc:L3}"}"#,
            r#"{"id":7,"request":"execute","pai":"PropSolve{conc:L4,prems:()}"}"#,
            r#"{"id":8,"request":"get-resources"}"#,
        ],
        &["--deterministic"],
    );
    let r = responses(&msgs);
    assert_eq!(r.len(), 8);
    for (i, m) in r.iter().enumerate() {
        assert_eq!(m["id"], i + 1, "{m}");
        assert_ne!(m["response"], "error", "{m}");
    }
    assert_eq!(r[2]["suggestions"][0]["pai"], "=>I{conc:C}");
    assert_eq!(r[6]["complete"], true);
    assert!(r[7]["csv"].as_str().unwrap().starts_with("agent,rating,failures,retired\n"));
    let events: Vec<_> = msgs.iter().filter_map(|m| m.get("event")).collect();
    assert_eq!(*events.last().unwrap(), "proof-complete");
    let epochs: Vec<u64> = msgs
        .iter()
        .filter(|m| m.get("event").is_some())
        .map(|m| m["epoch"].as_u64().unwrap())
        .collect();
    assert!(epochs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn pipe_reports_typed_errors() {
    let msgs = pipe(
        &[
            r#"{"id":"a","request":"execute","suggestion":1}"#,
            r#"not json"#,
            r#"{"id":"b","request":"start","conjecture":"(a:o b:o)"}"#,
            r#"{"id":"c","request":"start","conjecture":"a:o => a"}"#,
            r#"{"id":"d","request":"execute","pai":"=>I{conc:L7}"}"#,
            r#"{"id":"e","request":"execute","suggestion":42}"#,
        ],
        &["--deterministic"],
    );
    let kinds: Vec<_> = responses(&msgs)
        .iter()
        .map(|m| m["error"]["kind"].as_str().unwrap_or("ok").to_string())
        .collect();
    assert_eq!(
        kinds,
        ["protocol-error", "protocol-error", "input-error", "ok", "tactic-error", "input-error"]
    );
}

#[test]
fn repl_survives_malformed_input() {
    let mut child = bin()
        .args(["--deterministic"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut stdin = child.stdin.take().unwrap();
        stdin
            .write_all(b"do 1\nstart a:o => a\nfrobnicate\ndo 99\ndo =>I{\ndo 1\nagents\nquit\n")
            .unwrap();
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("error: no conjecture"));
    assert!(text.contains("unknown command `frobnicate`"));
    assert!(text.contains("no suggestion 99"));
    assert!(text.contains("proof complete, 1 line\n"));
    assert!(text.contains("agent,rating,failures,retired"));
}

#[test]
fn tcp_serve_answers_requests() {
    use std::io::{BufRead, BufReader};
    use std::net::TcpStream;

    let mut child = bin()
        .args(["--serve", "127.0.0.1:0", "--deterministic"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut banner = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut banner).unwrap();
    let addr = banner.trim().strip_prefix("listening on ").unwrap().to_string();

    let mut conn = TcpStream::connect(&addr).unwrap();
    writeln!(conn, r#"{{"id":1,"request":"start","conjecture":"a:o => a"}}"#).unwrap();
    writeln!(conn, r#"{{"id":2,"request":"get-suggestions"}}"#).unwrap();
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut got = Vec::new();
    while got.len() < 2 {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let v: Value = serde_json::from_str(&line).unwrap();
        if v.get("response").is_some() {
            got.push(v);
        }
    }
    let _ = child.kill();
    let _ = child.wait();
    assert_eq!(got[0]["response"], "start");
    assert_eq!(got[1]["suggestions"][0]["pai"], "PropSolve{conc:C,prems:()}");
}
