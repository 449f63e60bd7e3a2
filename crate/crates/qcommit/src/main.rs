use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcommit::commands;
use qcommit::CliResult;

#[derive(Parser)]
#[command(
    name = "qcommit",
    version,
    about = "Two-stage unit commitment with hybrid quantum-classical RL"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a case file and print its summary.
    Validate { case: PathBuf },
    /// Train the day-ahead commitment agent.
    TrainDa {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the real-time VPP agent on a frozen day-ahead checkpoint.
    TrainRt {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        da_checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the priority list with the classical and quantum agents.
    Compare {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of seeded scenario days.
        #[arg(long)]
        seeds: Option<usize>,
        /// Agent configuration; the bundled defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Exhaustive day-ahead optimum of a small case.
    Oracle {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, default_value_t = 0)]
        day: usize,
        #[arg(long, default_value = "oracle.json")]
        out: PathBuf,
    },
    /// Write one day-ahead instance as an LP-format MILP.
    ExportLp {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, default_value_t = 0)]
        day: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Validate { case } => commands::validate(&case),
        Command::TrainDa { case, config, out } => commands::train_da_cmd(&case, &config, &out),
        Command::TrainRt {
            case,
            da_checkpoint,
            config,
            out,
        } => commands::train_rt_cmd(&case, &da_checkpoint, &config, &out),
        Command::Compare {
            case,
            out,
            seeds,
            config,
        } => commands::compare_cmd(&case, config.as_ref(), seeds, &out),
        Command::Oracle { case, day, out } => commands::oracle_cmd(&case, day, &out),
        Command::ExportLp { case, day, out } => commands::export_lp_cmd(&case, day, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!(
                "{}",
                if text.ends_with('\n') {
                    text
                } else {
                    text + "\n"
                }
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
