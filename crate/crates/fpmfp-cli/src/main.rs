mod commands;
mod output;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use pathflow::fpmfp::OptConfig;
use pathflow::pipeline::{AnalysisKind, Mode};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "fpmfp", version, about = "MFP and feasible-path MFP data-flow analyses for MiniIR programs")]
struct Cli {
    /// Report format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write the report to this file (atomically) instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Leave wall-clock timings out of reports
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// List the minimal infeasible path segments of a program
    DetectMips {
        #[arg(long)]
        program: PathBuf,
    },
    /// Solve one analysis in one mode and print per-node values
    Analyze {
        #[arg(long)]
        program: PathBuf,
        /// rd, uninit or interval
        #[arg(long)]
        analysis: AnalysisKind,
        /// mfp or fpmfp
        #[arg(long, default_value = "fpmfp")]
        mode: Mode,
        /// Optimizations: any of 1,2,3 or none
        #[arg(long, default_value = "1,2,3", value_parser = OptConfig::parse)]
        opts: OptConfig,
    },
    /// Solve both modes, relate them point by point and report client reductions
    Compare {
        #[arg(long)]
        program: PathBuf,
        /// Restrict to one analysis (default: all three)
        #[arg(long)]
        analysis: Option<AnalysisKind>,
        #[arg(long, default_value = "1,2,3", value_parser = OptConfig::parse)]
        opts: OptConfig,
    },
    /// Check every soundness property against the path oracle and concrete execution
    OracleCheck {
        /// Fixture directory (every `.mir` file) or single program files
        #[arg(required_unless_present = "random")]
        inputs: Vec<PathBuf>,
        /// Worker threads for independent programs
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also check this many generated programs
        #[arg(long)]
        random: Option<u64>,
        /// Seed of the first generated program
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Longest path the oracle enumerates (default: twice the edge count)
        #[arg(long)]
        max_len: Option<usize>,
        /// Traversals of a back edge per path (default: 2)
        #[arg(long)]
        loop_budget: Option<u32>,
    },
    /// Emit Graphviz for each procedure, optionally annotated with analysis values
    DumpDot {
        #[arg(long)]
        program: PathBuf,
        /// Only this procedure
        #[arg(long)]
        proc: Option<String>,
        /// Annotate edges with this analysis
        #[arg(long)]
        analysis: Option<AnalysisKind>,
        #[arg(long, default_value = "fpmfp")]
        mode: Mode,
        #[arg(long, default_value = "1,2,3", value_parser = OptConfig::parse)]
        opts: OptConfig,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some program could not be analysed; the report still lists the rest.
    Failed,
    Violated,
}

/// A finished command: the report text and how it ended.
pub struct Outcome {
    pub text: String,
    pub status: Status,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let fmt = cli.format;
    let timing = !cli.no_timing;
    match cli.command {
        Command::DetectMips { program } => commands::detect_mips(&program, fmt),
        Command::Analyze { program, analysis, mode, opts } => commands::analyze(&program, analysis, mode, opts, fmt, timing),
        Command::Compare { program, analysis, opts } => commands::compare(&program, analysis, opts, fmt, timing),
        Command::OracleCheck { inputs, jobs, random, seed, max_len, loop_budget } => {
            let cfg = commands::OracleArgs { inputs, jobs, random: random.unwrap_or(0), seed, max_len, loop_budget };
            commands::oracle_check(&cfg, fmt, timing)
        }
        Command::DumpDot { program, proc, analysis, mode, opts } => commands::dump_dot(&program, proc.as_deref(), analysis, mode, opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FPMFP_LOG", "error")).format_timestamp(None).init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!();
            let _ = Cli::command().write_long_help(&mut std::io::stderr());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let dest = cli.output.clone();
    match run(cli) {
        Ok(out) => {
            if let Err(e) = output::emit(dest.as_deref(), &out.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_FAILURE);
            }
            match out.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Failed => ExitCode::from(EXIT_FAILURE),
                Status::Violated => ExitCode::from(EXIT_VIOLATION),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
