mod config;
mod reduce;
mod report;
mod solve;
mod stages;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forge_core::amplifier::AmplifierError;
use forge_core::csp::CspError;
use forge_core::formats::FormatError;
use forge_core::oracles::OracleError;
use forge_core::reductions::ReductionError;

use crate::config::FileConfig;
use crate::report::Reporter;

const EXIT_INVARIANT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Reductions from E3-LIN2 to 1-in-3-SAT and TSP, with exact checkers.
#[derive(Parser)]
#[command(name = "forge", version)]
struct Cli {
    /// TOML file with default budgets and seeds; flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write every report line as JSON to this file.
    #[arg(long, global = true)]
    jsonl: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random E3-LIN2 system.
    GenLin2(GenArgs),
    /// Run the reduction from an input stage to a later one.
    Reduce(ReduceArgs),
    /// Check invariants; exits 2 if any fails.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Solve an instance exactly and write a witness.
    #[command(subcommand)]
    Solve(SolveCommand),
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Choose right-hand sides so a hidden assignment satisfies everything,
    /// and write it next to the output as `.asn`.
    #[arg(long)]
    pub planted: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Clouded,
    O3,
    Tsp,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub min_occ: Option<usize>,
    #[arg(long)]
    pub amp_seed: Option<u64>,
    #[arg(long)]
    pub amp_attempts: Option<u64>,
    /// Subset evaluations allowed per amplifier certification.
    #[arg(long)]
    pub amp_budget: Option<u64>,
}

#[derive(Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    pub to: Target,
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; defaults to the input with the target's extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Args)]
pub struct TourArgs {
    /// An `.o3` instance; the micro corpus when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Perturbed tours per instance.
    #[arg(long)]
    pub tours: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
pub enum VerifyCommand {
    /// Certify an amplifier file, or search for a certified one.
    Amplifier {
        #[arg(long, conflicts_with = "size")]
        input: Option<PathBuf>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        attempts: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the graph found or checked, with its certification note.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Format round trips, counting identities and assignment transport.
    Roundtrip {
        /// A `.lin2` system; the built-in toys when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Minimum tour cost equals L plus the minimum number of unsatisfied
    /// clauses.
    Gap {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Normalized perturbed tours have an even number of doubled forced
    /// edges at every variable.
    Parity(TourArgs),
    /// The extraction certificate holds on normalized perturbed tours.
    Credits(TourArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Tsplib,
}

#[derive(Subcommand)]
pub enum SolveCommand {
    /// Exact minimum quasi-tour of a `.tspg` or `.o3` instance.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        /// Candidate subsets the search may examine.
        #[arg(long)]
        budget: Option<u64>,
        /// Witness `.tour` file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact tour of the graph with forced edges subdivided.
    Heldkarp {
        #[arg(long)]
        input: PathBuf,
        /// Segments per forced edge.
        #[arg(long)]
        p: Option<usize>,
        /// Edge-use patterns the search may examine.
        #[arg(long)]
        budget: Option<u64>,
        /// Witness file listing the use of each original edge.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the metric closure as a TSPLIB problem next to `--out`.
        #[arg(long, value_enum, requires = "out")]
        emit: Option<Emit>,
    },
    /// Minimum number of violated constraints of a `.lin2`, `.clouded` or
    /// `.o3` file.
    Csp {
        #[arg(long)]
        input: PathBuf,
        /// Largest number of enumerated variables.
        #[arg(long)]
        budget: Option<usize>,
        /// Witness `.asn` file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let mut rep = Reporter::new(cli.jsonl.as_deref())?;
    match cli.command {
        Command::GenLin2(args) => reduce::gen_lin2(&args, &mut rep)?,
        Command::Reduce(args) => reduce::reduce(&args, &cfg, &mut rep)?,
        Command::Verify(cmd) => verify::run(&cmd, &cfg, &mut rep)?,
        Command::Solve(cmd) => solve::run(&cmd, &cfg, &mut rep)?,
    }
    rep.finish()
}

fn is_budget(e: &(dyn std::error::Error + 'static)) -> bool {
    let amp = |a: &AmplifierError| {
        matches!(a, AmplifierError::BudgetExceeded { .. } | AmplifierError::Exhausted { .. })
    };
    let csp = |c: &CspError| matches!(c, CspError::TooLarge { .. });
    if let Some(a) = e.downcast_ref::<AmplifierError>() {
        return amp(a);
    }
    if let Some(c) = e.downcast_ref::<CspError>() {
        return csp(c);
    }
    if let Some(o) = e.downcast_ref::<OracleError>() {
        return match o {
            OracleError::BudgetExceeded { .. } | OracleError::TooLarge { .. } => true,
            OracleError::Csp(c) => csp(c),
            OracleError::Infeasible => false,
        };
    }
    if let Some(r) = e.downcast_ref::<ReductionError>() {
        return match r {
            ReductionError::Amplifier(a) => amp(a),
            ReductionError::Csp(c) => csp(c),
            _ => false,
        };
    }
    false
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if is_budget(cause) {
            return EXIT_BUDGET;
        }
        if cause.is::<stages::UsageError>()
            || cause.is::<FormatError>()
            || cause.is::<std::io::Error>()
            || cause.is::<toml::de::Error>()
        {
            return EXIT_USAGE;
        }
    }
    EXIT_INVARIANT
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("forge: {n} check(s) failed");
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(e) => {
            eprintln!("forge: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
