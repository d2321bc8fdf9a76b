//! `tsocbmc`: context-bounded reachability for TSO programs from the shell.
//!
//! Exit codes: 0 unreachable or success, 1 reachable, 2 usage or input
//! error, 3 a search budget ran out, 4 a selftest property failed.

/// Like `print!`, but a closed stdout (say, piped into `head`) is not an
/// error.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod selftest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tsocb::dsl::{parse_dfa, parse_dlcs, parse_program, render_program};
use tsocb::engine::{check_reach, concretize_witness, CheckOptions, Outcome};
use tsocb::gen::{gen_bakery, gen_dlcs_reduction, gen_intersection, GenResult};
use tsocb::program::{Program, Target};
use tsocb::report::{Report, TargetName};
use tsocb::tso::{cb_reach_bounded, tso_reach_bounded, Action, Bounds, TsoVerdict};

const EXIT_UNREACHABLE: u8 = 0;
const EXIT_REACHABLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "tsocbmc", version, about = "Context-bounded reachability for TSO programs over the naturals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a program, then print it back normalized.
    Parse { file: PathBuf },
    /// Decide whether the target is reachable within K contexts.
    Check(CheckArgs),
    /// Search the concrete semantics within explicit bounds.
    Simulate(SimulateArgs),
    /// Print a generated program.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
        /// Write the program here instead of stdout.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run randomized soundness checks of the abstraction.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// `thread:state`; defaults to the program's target.
    #[arg(long)]
    target: Option<String>,
    /// Print the concretized witness.
    #[arg(long)]
    witness: bool,
    #[arg(long, default_value_t = 20_000_000)]
    max_states: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    /// Unbounded number of contexts.
    #[arg(long, conflicts_with = "cb", required_unless_present = "cb")]
    tso: bool,
    /// At most K contexts.
    #[arg(long, value_name = "K")]
    cb: Option<u32>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 2)]
    buffer_bound: usize,
    #[arg(long, default_value_t = 3)]
    domain_bound: u64,
    #[arg(long, default_value_t = 300)]
    depth: usize,
    #[arg(long, default_value_t = 2_000_000)]
    max_states: usize,
    /// Write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Lamport's bakery with a mutual-exclusion monitor.
    Bakery {
        #[arg(long)]
        n: usize,
    },
    /// Reachable iff the automata's languages intersect.
    Intersection {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Simulation of a lossy channel system.
    Dlcs { file: PathBuf },
}

/// A failure that ends the command with exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<u8, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse { file } => cmd_parse(&file),
        Command::Check(args) => cmd_check(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Gen { what, out } => cmd_gen(&what, out.as_deref()),
        Command::Selftest { seed, cases } => Ok(if selftest::run(seed, cases) {
            EXIT_UNREACHABLE
        } else {
            EXIT_SELFTEST
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read(path: &Path) -> Result<String, UsageError> {
    fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, UsageError> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| UsageError(format!("{}:{e}", path.display())))
}

fn resolve_target(p: &Program, flag: Option<&str>) -> Result<Target, UsageError> {
    match flag {
        Some(text) => p
            .parse_target(text)
            .ok_or_else(|| UsageError(format!("unknown target `{text}`"))),
        None => p
            .target()
            .ok_or_else(|| UsageError("no target: declare one or pass --target".into())),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), UsageError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn cmd_parse(file: &Path) -> CmdResult {
    let p = load_program(file)?;
    out!("{}", render_program(&p));
    Ok(EXIT_UNREACHABLE)
}

fn max_bytes_from_env() -> Result<Option<usize>, UsageError> {
    match std::env::var("TSOCBMC_MAX_MB") {
        Ok(v) => {
            let mb: usize = v
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("TSOCBMC_MAX_MB: not a number: `{v}`")))?;
            Ok(Some(mb.saturating_mul(1 << 20)))
        }
        Err(_) => Ok(None),
    }
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    let p = load_program(&args.file)?;
    let target = resolve_target(&p, args.target.as_deref())?;
    if args.k == 0 {
        return Err(UsageError("--k must be at least 1".into()));
    }
    let opts = CheckOptions {
        max_states: args.max_states,
        max_bytes: max_bytes_from_env()?,
        threads: args.threads.max(1),
        mode: None,
    };
    let verdict = check_reach(&p, args.k, target, &opts);
    let run = match verdict.witness() {
        Some(w) => Some(concretize_witness(&p, w).map_err(|e| UsageError(format!("internal: {e}")))?),
        None => None,
    };
    let report = Report::new(&p, args.k, target, &verdict, run.as_ref());
    let (tname, sname) = p.target_name(target);
    outln!(
        "{}: {tname}:{sname} at k={} ({} states, {} ms)",
        report.outcome, args.k, report.stats.states_explored, report.stats.wall_ms
    );
    if args.witness {
        for (i, w) in report.witness.iter().enumerate() {
            let vals: Vec<String> = w
                .values
                .iter()
                .filter(|(_, v)| **v != 0)
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            outln!("{:>4} {:<8} {:<40} {}", i + 1, w.thread, w.label, vals.join(" "));
        }
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(match verdict.outcome {
        Outcome::Reachable(_) => EXIT_REACHABLE,
        Outcome::Unreachable => EXIT_UNREACHABLE,
        Outcome::BoundExhausted => EXIT_EXHAUSTED,
    })
}

#[derive(Serialize)]
struct SimStep {
    thread: String,
    label: String,
    memory: Vec<u64>,
}

#[derive(Serialize)]
struct SimReport {
    reachable: bool,
    outcome: String,
    contexts: Option<u32>,
    target: TargetName,
    run: Vec<SimStep>,
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let p = load_program(&args.file)?;
    let target = resolve_target(&p, args.target.as_deref())?;
    let bounds = Bounds {
        buffer_bound: args.buffer_bound,
        domain_bound: args.domain_bound,
        depth: args.depth,
        max_states: args.max_states,
    };
    let verdict = match args.cb {
        Some(0) => return Err(UsageError("--cb must be at least 1".into())),
        Some(k) => cb_reach_bounded(&p, target, k, bounds),
        None => tso_reach_bounded(&p, target, bounds),
    };
    let outcome = match verdict {
        TsoVerdict::Reachable(_) => "reachable",
        TsoVerdict::NotWithinBounds => "not_within_bounds",
        TsoVerdict::BoundExhausted => "bound_exhausted",
    };
    let steps: Vec<SimStep> = verdict
        .run()
        .map(|run| {
            run.steps
                .iter()
                .map(|(l, cfg)| {
                    let th = p.thread(l.thread);
                    let label = match l.action {
                        Action::Update => "update".to_owned(),
                        Action::Op { transition, value } => {
                            let tr = &th.transitions[transition];
                            let mut s = p.op_text(&tr.op);
                            if let Some(v) = value {
                                s.push_str(&format!(" ({v})"));
                            }
                            s
                        }
                    };
                    SimStep {
                        thread: th.name.clone(),
                        label,
                        memory: cfg.mem.clone(),
                    }
                })
                .collect()
        })
        .unwrap_or_default();
    let (tname, sname) = p.target_name(target);
    outln!("{outcome}: {tname}:{sname}");
    for (i, s) in steps.iter().enumerate() {
        outln!("{:>4} {:<8} {}", i + 1, s.thread, s.label);
    }
    if let Some(out) = &args.out {
        let report = SimReport {
            reachable: verdict.is_reachable(),
            outcome: outcome.into(),
            contexts: args.cb,
            target: TargetName {
                thread: tname,
                state: sname,
            },
            run: steps,
        };
        write_json(out, &report)?;
    }
    Ok(match verdict {
        TsoVerdict::Reachable(_) => EXIT_REACHABLE,
        TsoVerdict::NotWithinBounds => EXIT_UNREACHABLE,
        TsoVerdict::BoundExhausted => EXIT_EXHAUSTED,
    })
}

fn cmd_gen(what: &GenCommand, out: Option<&Path>) -> CmdResult {
    let g: GenResult = match what {
        GenCommand::Bakery { n } => gen_bakery(*n)?,
        GenCommand::Intersection { files } => {
            let mut dfas = Vec::new();
            for f in files {
                let text = read(f)?;
                dfas.push(parse_dfa(&text).map_err(|e| UsageError(format!("{}:{e}", f.display())))?);
            }
            gen_intersection(&dfas)?
        }
        GenCommand::Dlcs { file } => {
            let text = read(file)?;
            let m = parse_dlcs(&text).map_err(|e| UsageError(format!("{}:{e}", file.display())))?;
            gen_dlcs_reduction(&m)?
        }
    };
    let text = format!("# suggested k: {}\n{}", g.k_hint, render_program(&g.program));
    match out {
        Some(path) => fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
        None => out!("{text}"),
    }
    Ok(EXIT_UNREACHABLE)
}
