use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use matchsim::circuit::{parse_circuit, Circuit};
use matchsim::cli::{self, BackendChoice, Options, RunReport};
use matchsim::Error;

#[derive(Parser)]
#[command(name = "matchsim", version, about = "Simulate nearest-neighbour matchgate circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 3)]
    max_adaptive: usize,
    #[arg(long, default_value_t = 12)]
    max_block: usize,
    /// Print a machine-readable report.
    #[arg(long)]
    json: bool,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            backend: self.backend,
            seed: self.seed,
            tol: self.tol,
            max_adaptive: self.max_adaptive,
            max_block: self.max_block,
            timing: self.timing,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Probability of an outcome pattern over the records (`0`, `1`, `*`).
    Prob {
        circuit: PathBuf,
        pattern: String,
        #[command(flatten)]
        common: Common,
    },
    /// Draw samples, one record string per line.
    Sample {
        circuit: PathBuf,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare every applicable backend against the oracle.
    Xcheck {
        #[arg(required_unless_present = "random")]
        circuit: Option<PathBuf>,
        /// Random batch instead of a file: N DEPTH COUNT SEED.
        #[arg(long, num_args = 4, value_names = ["N", "DEPTH", "COUNT", "SEED"])]
        random: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0)]
        shots: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Gadget tools.
    Gadget {
        #[command(subcommand)]
        action: GadgetCommand,
    },
}

#[derive(Subcommand)]
enum GadgetCommand {
    /// Lower every macro to primitives.
    Expand {
        circuit: PathBuf,
        /// Write the expanded circuit here; otherwise it goes to stdout and
        /// the report to stderr.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &PathBuf) -> Result<Circuit, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_circuit(&text)
}

fn render(report: &RunReport, json: bool) -> String {
    if json {
        report.to_json()
    } else {
        report.to_text()
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Prob { circuit, pattern, common } => {
            let report = cli::cmd_prob(&load(&circuit)?, &pattern, &common.options())?;
            print!("{}", render(&report, common.json));
        }
        Command::Sample { circuit, shots, common } => {
            let report = cli::cmd_sample(&load(&circuit)?, shots, &common.options())?;
            print!("{}", render(&report, common.json));
        }
        Command::Xcheck { circuit, random, shots, common } => {
            let batch: Vec<(String, Circuit)> = match (random, circuit) {
                (Some(r), _) => cli::random_batch(r[0] as usize, r[1] as usize, r[2] as usize, r[3])
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| (format!("random[{i}]"), c))
                    .collect(),
                (None, Some(path)) => vec![(path.display().to_string(), load(&path)?)],
                (None, None) => unreachable!("clap requires one of them"),
            };
            let report = cli::cmd_xcheck(&batch, shots, &common.options())?;
            print!("{}", render(&report, common.json));
            if report.breached() {
                return Ok(4);
            }
        }
        Command::Gadget { action: GadgetCommand::Expand { circuit, output, json } } => {
            let (expanded, report) = cli::cmd_gadget_expand(&load(&circuit)?)?;
            let text = cli::expanded_text(&expanded);
            match output {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    print!("{}", render(&report, json));
                }
                None => {
                    print!("{text}");
                    eprint!("{}", render(&report, json));
                }
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("MATCHSIM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
