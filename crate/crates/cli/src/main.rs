//! `sqg`: experiments on the dissipative surface quasi-geostrophic equation.
//!
//! Exit status is 0 on success, 1 on bad parameters or I/O trouble and 2
//! when a run fails or a verification check does not hold.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqg_core::uniqueness::Regime;

use config::{CounterexampleKind, RunConfig, Settings, Task};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "sqg", version, about = "Dissipative SQG solver, estimate lab and uniqueness harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// March the equation and record norms per step.
    Solve,
    /// Measure the ratios of one inequality over random trials.
    VerifyLemma {
        /// bernstein, semigroup, embedding, multiplier, paraproduct, bilinear,
        /// bilinear-endpoint, product, commutator, duhamel or divergence-form
        id: String,
    },
    /// Evaluate a bump counterexample (a1 or a3).
    Counterexample { kind: String },
    /// Contraction and twin-run experiments (endpoint, alpha1, mid or super).
    Uniqueness { regime: String },
    /// Linear continuity at t = 0 for several block laws.
    Continuity,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Dissipation exponent in (0, 2].
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Grid points per side.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Box side length.
    #[arg(long = "box", global = true)]
    box_length: Option<String>,
    /// Final time.
    #[arg(long = "T", global = true)]
    horizon: Option<String>,
    /// Time step.
    #[arg(long, global = true)]
    dt: Option<String>,
    /// Picard depth (1 marches directly).
    #[arg(long, global = true)]
    depth: Option<String>,
    /// Regularity index.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    /// Integrability index (a number or `inf`).
    #[arg(long, global = true)]
    p: Option<String>,
    /// Summability index (a number or `inf`).
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Number of terms in a counterexample.
    #[arg(long = "N", global = true)]
    terms: Option<String>,
    #[arg(long, global = true)]
    eps: Option<String>,
    /// Initial datum: random, zero or cosine.
    #[arg(long, global = true)]
    init: Option<String>,
    /// L2 norm of the initial datum.
    #[arg(long, global = true)]
    amplitude: Option<String>,
    /// File of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(self) -> Vec<(&'static str, String)> {
        [
            ("alpha", self.alpha),
            ("n", self.n),
            ("box", self.box_length),
            ("T", self.horizon),
            ("dt", self.dt),
            ("depth", self.depth),
            ("s", self.s),
            ("p", self.p),
            ("q", self.q),
            ("trials", self.trials),
            ("seed", self.seed),
            ("out", self.out),
            ("threads", self.threads),
            ("N", self.terms),
            ("eps", self.eps),
            ("init", self.init),
            ("amplitude", self.amplitude),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

fn task_of(command: Command) -> CliResult<Task> {
    Ok(match command {
        Command::Solve => Task::Solve,
        Command::VerifyLemma { id } => Task::VerifyLemma(id),
        Command::Counterexample { kind } => Task::Counterexample(kind.parse::<CounterexampleKind>()?),
        Command::Uniqueness { regime } => Task::Uniqueness(
            regime
                .parse::<Regime>()
                .map_err(|_| CliError::param(format!("unknown regime `{regime}` (expected endpoint, alpha1, mid or super)")))?,
        ),
        Command::Continuity => Task::Continuity,
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    let task = task_of(cli.command)?;
    let base = match &cli.flags.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = base.overlay(cli.flags.pairs());
    let cfg = RunConfig::from_settings(task, &settings)?;
    if let Some(threads) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::param(format!("cannot set up {threads} threads: {e}")))?;
    }
    let out = commands::run(&cfg)?;
    let text = report::emit(&cfg.out, &out.tables, &out.summary)?;
    print!("{text}");
    if out.summary.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(out.summary.failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
