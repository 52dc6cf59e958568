//! `st` — run proof scripts and apply strategies from the command line.
//!
//! Exit codes: 0 on success; 1 when a strategy fails, an expectation is
//! not met, or the time limit is exceeded; 2 for unreadable files, syntax
//! errors, and unresolved names.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use st_core::dsl::{parse_term, render_term};
use st_core::runner::{self, RunError, RunOptions, TraceEvent};
use st_core::script::{self, Env};

#[derive(Parser)]
#[command(name = "st", version, about = "Strategy-driven term rewriting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a proof script against rule packages.
    Run {
        /// The proof script (`.proof`).
        proof: PathBuf,
        /// Rule packages (`.rules`) loaded before the script, in order.
        #[arg(long = "rules", value_name = "FILE")]
        rules: Vec<PathBuf>,
        /// Print one record per `apply` step.
        #[arg(long, value_enum, default_value_t = Trace::None)]
        trace: Trace,
        /// Wall-clock budget for the whole run, e.g. `250ms`, `1s`, `2m`.
        #[arg(long, value_parser = parse_duration, value_name = "DURATION")]
        time_limit: Option<Duration>,
    },
    /// Apply a strategy expression to a term once.
    Apply {
        /// Rule packages whose names the strategy may reference.
        #[arg(long = "rules", value_name = "FILE")]
        rules: Vec<PathBuf>,
        /// Strategy expression, e.g. `TopDown(Transform(DivB))`.
        #[arg(long, value_name = "EXPR")]
        strategy: String,
        /// Subject term.
        #[arg(long, value_name = "TERM")]
        term: String,
        /// Wall-clock budget, e.g. `250ms`.
        #[arg(long, value_parser = parse_duration, value_name = "DURATION")]
        time_limit: Option<Duration>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Trace {
    None,
    Text,
    Json,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { proof, rules, trace, time_limit } => {
            run(&proof, &rules, trace, time_limit)
        }
        Cmd::Apply { rules, strategy, term, time_limit } => {
            apply(&rules, &strategy, &term, time_limit)
        }
    }
}

fn run(
    proof: &Path,
    rules: &[PathBuf],
    trace: Trace,
    time_limit: Option<Duration>,
) -> ExitCode {
    let mut rule_sources = Vec::new();
    for path in rules {
        match read(path) {
            Ok(src) => rule_sources.push(src),
            Err(code) => return code,
        }
    }
    let proof_source = match read(proof) {
        Ok(src) => src,
        Err(code) => return code,
    };
    let sources: Vec<&str> = rule_sources.iter().map(String::as_str).collect();
    let options = RunOptions { time_limit };
    let mut emit = |e: &TraceEvent| match trace {
        Trace::None => {}
        Trace::Text => print_text_event(e),
        Trace::Json => println!(
            "{}",
            serde_json::to_string(e).expect("trace events serialize")
        ),
    };
    match runner::run_sources(&sources, &proof_source, &options, &mut emit) {
        Ok(final_term) => {
            println!("{}", render_term(&final_term));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("st: {e}");
            match e {
                RunError::Script(_) | RunError::Session(_) => ExitCode::from(2),
                RunError::StrategyFailed { .. }
                | RunError::ExpectationFailed { .. }
                | RunError::TimeLimitExceeded { .. } => ExitCode::from(1),
            }
        }
    }
}

fn apply(
    rules: &[PathBuf],
    strategy: &str,
    term: &str,
    time_limit: Option<Duration>,
) -> ExitCode {
    let mut env = Env::new();
    for path in rules {
        let src = match read(path) {
            Ok(src) => src,
            Err(code) => return code,
        };
        if let Err(e) = script::load_rules(&src, &mut env) {
            eprintln!("st: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let s = match script::parse_strategy(strategy, &env) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("st: --strategy: {e}");
            return ExitCode::from(2);
        }
    };
    let t = match parse_term(term) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("st: --term: {e}");
            return ExitCode::from(2);
        }
    };
    let options = RunOptions { time_limit };
    match runner::apply_once(&env, &s, &t, &options) {
        Ok(Some(out)) => {
            println!("{}", render_term(&out));
            ExitCode::SUCCESS
        }
        Ok(None) => {
            println!("Fail");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("st: {e}");
            match e {
                RunError::Script(_) | RunError::Session(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("st: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn print_text_event(e: &TraceEvent) {
    println!("step {}: {}", e.step, e.strategy);
    println!("  input:   {}", e.input);
    println!("  output:  {}", e.output);
    if !e.fresh.is_empty() {
        let fresh: Vec<String> =
            e.fresh.iter().map(u64::to_string).collect();
        println!("  fresh:   Oeps({})", fresh.join("), Oeps("));
    }
    println!("  elapsed: {}us", e.elapsed_us);
}

/// Parses `<integer><unit>` durations with units `us`, `ms`, `s`, `m`.
fn parse_duration(s: &str) -> Result<Duration, String> {
    let split = s
        .find(|c: char| !c.is_ascii_digit())
        .ok_or_else(|| format!("`{s}` is missing a unit (us, ms, s, m)"))?;
    let (digits, unit) = s.split_at(split);
    let n: u64 = digits
        .parse()
        .map_err(|_| format!("`{s}` does not start with a number"))?;
    match unit {
        "us" => Ok(Duration::from_micros(n)),
        "ms" => Ok(Duration::from_millis(n)),
        "s" => Ok(Duration::from_secs(n)),
        "m" => Ok(Duration::from_secs(n * 60)),
        other => Err(format!("unknown unit `{other}` (use us, ms, s, m)")),
    }
}
