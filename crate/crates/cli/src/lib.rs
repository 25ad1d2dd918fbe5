//! The `revnets` command line: file formats, commands and a REPL.
//!
//! Every command is a thin wrapper over a library call and writes its report
//! to a caller-supplied writer, so the binary and the tests share one path.

pub mod commands;
pub mod document;
pub mod repl;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use revnets::reversing::{DependenceKind, Semantics};
use revnets::translate::CoGuard;
use thiserror::Error;

pub use document::{CpnDocument, DocError, NetDocument};

/// Process exit codes. A stable contract for scripts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    /// A semantic failure: violation, illegal move, counterexample.
    Fail = 1,
    /// Unreadable or malformed input.
    Input = 2,
    /// The exploration cap was hit.
    Cap = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Cap(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Doc(_) | CliError::Input(_) | CliError::Io(_) => Exit::Input,
            CliError::Failed(_) => Exit::Fail,
            CliError::Cap(_) => Exit::Cap,
        }
    }
}

/// Environment variable overriding the default exploration cap.
pub const MAX_STATES_ENV: &str = "REVNETS_MAX_STATES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Backtracking,
    Causal,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Semantics {
        match s {
            SemanticsArg::Backtracking => Semantics::Backtracking,
            SemanticsArg::Causal => Semantics::Causal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DepArg {
    Structural,
    Marking,
    Co,
}

impl From<DepArg> for DependenceKind {
    fn from(d: DepArg) -> DependenceKind {
        match d {
            DepArg::Structural => DependenceKind::Structural,
            DepArg::Marking => DependenceKind::MarkingOriented,
            DepArg::Co => DependenceKind::CoBackwardConflict,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoGuardArg {
    /// Reverse guards inspect exactly the co-dependent partners.
    Dependence,
    /// The literal rule; can disagree with co-enabledness.
    Published,
}

impl From<CoGuardArg> for CoGuard {
    fn from(c: CoGuardArg) -> CoGuard {
        match c {
            CoGuardArg::Dependence => CoGuard::ByDependence,
            CoGuardArg::Published => CoGuard::Published,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    /// Step-by-step agreement of the net and its translation.
    Lockstep,
    /// Balanced sequences return to the initial state.
    Roundtrip,
    /// Reachable states that cannot be reversed to the initial one.
    Stuck,
}

/// Semantics options shared by several commands.
#[derive(Clone, Copy, Debug, Args)]
pub struct SemanticsOpts {
    #[arg(long, value_enum, default_value_t = SemanticsArg::Backtracking)]
    pub semantics: SemanticsArg,
    #[arg(long, value_enum, default_value_t = DepArg::Structural)]
    pub dep: DepArg,
}

#[derive(Debug, Parser)]
#[command(
    name = "revnets",
    version,
    about = "Reversing Petri nets: simulate, analyse, translate, check"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check well-formedness and the initial marking.
    Validate {
        /// A `.rpn.json` file or a built-in fixture name.
        source: String,
    },
    /// Execute a move sequence, printing every state.
    Run {
        source: String,
        #[command(flatten)]
        opts: SemanticsOpts,
        /// Moves such as "t1,t2,~t2"; `~` marks a reverse move.
        #[arg(
            long,
            allow_hyphen_values = true,
            required_unless_present = "trace",
            conflicts_with = "trace"
        )]
        moves: Option<String>,
        /// Name of a trace stored in the document.
        #[arg(long)]
        trace: Option<String>,
    },
    /// Step through a net interactively.
    Repl {
        source: String,
        #[command(flatten)]
        opts: SemanticsOpts,
    },
    /// Report transition classes, cycles and dependence relations.
    Analyze {
        source: String,
        #[arg(long)]
        json: bool,
    },
    /// Compile to a coloured Petri net.
    Translate {
        source: String,
        #[command(flatten)]
        opts: SemanticsOpts,
        #[arg(long, value_enum, default_value_t = CoGuardArg::Dependence)]
        co_guard: CoGuardArg,
        /// Output file; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a DOT rendering of the coloured net.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Machine-check a theorem on the net's state space.
    Check {
        source: String,
        #[command(flatten)]
        opts: SemanticsOpts,
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, value_enum, default_value_t = CoGuardArg::Dependence)]
        co_guard: CoGuardArg,
        /// Longest exhaustive sequence for `roundtrip`.
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Additional seeded random walks for `roundtrip`.
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State cap; defaults to $REVNETS_MAX_STATES or 1000000.
        #[arg(long)]
        max_states: Option<usize>,
        /// Write the explored state space as DOT.
        #[arg(long)]
        lts_dot: Option<PathBuf>,
    },
    /// Print a built-in fixture as a `.rpn.json` document.
    Export {
        fixture: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in fixtures.
    Fixtures,
}

/// Runs a parsed command line. Reports go to `out`, errors to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Exit {
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        // A closed pipe (`revnets ... | head`) is not worth reporting.
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Exit::Pass,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit()
        }
    }
}
