use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddisac::cli::{self, RunOptions, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "ddisac", version, about = "Dual-domain ISAC scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed (overrides allocation.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Monte Carlo trial count (overrides the experiment's).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write one transmit frame as interleaved little-endian f64 I/Q.
    #[arg(long, global = true)]
    dump_iq: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment a scenario names.
    Run { config: PathBuf },
    /// Check a scenario and report errors and warnings.
    Validate { config: PathBuf },
    /// Print the scenario JSON schema.
    Schema,
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG as u8)
    })
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    match args.command {
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&cli::config::schema()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let report = cli::validate_text(&text);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::from(if report.valid { EXIT_OK } else { EXIT_CONFIG } as u8)
        }
        Command::Run { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let opts = RunOptions { seed: args.seed, out_dir: args.out_dir, trials: args.trials, dump_iq: args.dump_iq };
            match cli::execute(&text, &opts) {
                Ok(a) => {
                    println!("{}", a.csv.display());
                    println!("{}", a.sidecar.display());
                    if let Some(m) = &a.message {
                        eprintln!("error: {m}");
                    }
                    ExitCode::from(a.exit_code as u8)
                }
                Err((code, msg)) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(code as u8)
                }
            }
        }
    }
}
