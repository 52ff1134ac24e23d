use std::fs;
use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::Parser;
use ndsuggest::session::protocol::serve_stream;
use ndsuggest::session::{Mode, SessionConfig};
use ndsuggest_cli::{repl, run_script, EXIT_INPUT};

/// Interactive natural-deduction prover with agent-based suggestions.
#[derive(Parser, Debug)]
#[command(name = "ndsuggest", version)]
struct Args {
    /// Conjecture to start with.
    #[arg(long)]
    conjecture: Option<String>,
    /// Run a proof script (always deterministic) and print its transcript.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["serve", "pipe"])]
    script: Option<PathBuf>,
    /// Serve the JSON protocol on a TCP address, one session per connection.
    #[arg(long, value_name = "ADDR", conflicts_with = "pipe")]
    serve: Option<String>,
    /// Speak the JSON protocol on stdin/stdout.
    #[arg(long)]
    pipe: bool,
    /// Run agents round-robin on the calling thread.
    #[arg(long, conflicts_with = "concurrent")]
    deterministic: bool,
    /// Run each agent on its own thread.
    #[arg(long)]
    concurrent: bool,
    /// Rating above which an agent retires.
    #[arg(long)]
    threshold: Option<f64>,
    /// Runs averaged into an agent's time component.
    #[arg(long)]
    window: Option<usize>,
    /// Rating added per run without a contribution.
    #[arg(long)]
    penalty: Option<f64>,
    /// Agents kept active per command.
    #[arg(long)]
    min_active: Option<usize>,
    /// Exclude a command's agents (repeatable).
    #[arg(long, value_name = "COMMAND")]
    exclude: Vec<String>,
    /// Disable an agent by identifier (repeatable).
    #[arg(long, value_name = "AGENT")]
    disable: Vec<String>,
    /// Justification name written by the propositional solver.
    #[arg(long)]
    prop_label: Option<String>,
}

impl Args {
    fn config(&self) -> SessionConfig {
        // interactive use defaults to threads; scripts force deterministic
        let mode = if self.deterministic {
            Mode::Deterministic
        } else if self.concurrent || self.script.is_none() {
            Mode::Concurrent
        } else {
            Mode::Deterministic
        };
        let mut c = SessionConfig {
            mode,
            ..SessionConfig::default()
        };
        let r = &mut c.resources;
        if let Some(v) = self.threshold {
            r.threshold = v;
        }
        if let Some(v) = self.window {
            r.window = v;
        }
        if let Some(v) = self.penalty {
            r.penalty = v;
        }
        if let Some(v) = self.min_active {
            r.min_active = v;
        }
        r.excluded.extend(self.exclude.iter().cloned());
        c.disabled.extend(self.disable.iter().cloned());
        if let Some(l) = &self.prop_label {
            c.prop_label = l.clone();
        }
        c
    }
}

fn serve(addr: &str, config: SessionConfig) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    eprintln!("listening on {}", listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = stream?;
        let config = config.clone();
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            let result = stream
                .try_clone()
                .and_then(|w| serve_stream(BufReader::new(stream), w, config));
            if let Err(e) = result {
                eprintln!("connection {peer:?}: {e}");
            }
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = args.config();
    if let Err(e) = config.resources.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT as u8);
    }
    let result = if let Some(path) = &args.script {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        };
        let mut transcript = String::new();
        let status = run_script(&text, &config, args.conjecture.as_deref(), &mut transcript);
        print!("{transcript}");
        let _ = io::stdout().flush();
        return match status {
            Ok(code) => ExitCode::from(code as u8),
            Err(e) => {
                eprintln!("error: line {}: {}", e.line, e.message);
                ExitCode::from(EXIT_INPUT as u8)
            }
        };
    } else if let Some(addr) = &args.serve {
        serve(addr, config)
    } else if args.pipe {
        serve_stream(io::stdin().lock(), io::stdout(), config)
    } else {
        repl(io::stdin().lock(), io::stdout(), &config, args.conjecture.as_deref()).map(|_| ())
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
