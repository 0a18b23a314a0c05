use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use exqip::Tolerance;
use exqip_cli::commands::{self, Generate};
use exqip_cli::suites::{self, Suite};
use exqip_cli::{Failure, Output};

#[derive(Parser)]
#[command(name = "exqip", version, about = "Extremality tests for quantum combs, testers, channels and instruments")]
struct Cli {
    /// Relative tolerance; every rank, support and normalization threshold scales from it.
    #[arg(long, global = true, env = "EXQIP_TOL", default_value_t = exqip::tolerance::DEFAULT_REL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check positivity and the comb normalization of an operator file.
    Validate { path: PathBuf },
    /// Decide extremality; optionally write or verify a certificate.
    Extremal {
        path: PathBuf,
        #[arg(long, value_name = "OUT")]
        certificate: Option<PathBuf>,
        /// Re-verify a previously written certificate against the input.
        #[arg(long, value_name = "CERT", conflicts_with = "certificate")]
        verify: Option<PathBuf>,
    },
    /// Split a non-extremal object into a binary tree of decomposition steps.
    Decompose {
        path: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a fixture operator file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
        #[arg(long, global = true)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run a seeded property suite and print a JSON summary.
    Suite {
        #[arg(value_enum)]
        name: Suite,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Rank-(1,3) qubit tester with `|φ⟩ = cos θ|00⟩ + sin θ|11⟩`.
    TwoOutcomeQubitTester {
        #[arg(long, allow_negative_numbers = true)]
        schmidt_angle: f64,
    },
    /// Refines one outcome of a tester by a sub-POVM on its support.
    SplitTester {
        #[arg(long)]
        base: PathBuf,
        /// Outcome to split (default: the last one).
        #[arg(long)]
        outcome: Option<usize>,
        /// File whose outcomes sum to the support projector of that
        /// outcome; defaults to a rank-one split.
        #[arg(long)]
        sub_povm: Option<PathBuf>,
    },
    /// Instrument for a row of the instrument/channel/POVM combination table.
    Combination {
        #[arg(long)]
        k: usize,
    },
    /// Random deterministic comb.
    RandomComb {
        #[arg(long, value_delimiter = ',', required = true)]
        signature: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
    },
}

fn run(cli: Cli) -> Result<Output, Failure> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(Failure::input("--tol must be a positive number"));
    }
    let tol = Tolerance::with_rel(cli.tol);
    match cli.command {
        Command::Validate { path } => commands::validate(&path, &tol),
        Command::Extremal { path, certificate, verify } => {
            commands::extremal(&path, &tol, certificate.as_deref(), verify.as_deref())
        }
        Command::Decompose { path, steps, out } => commands::decompose(&path, steps, &out, &tol),
        Command::Generate { kind, seed, out } => {
            let what = match kind {
                GenerateKind::TwoOutcomeQubitTester { schmidt_angle } => Generate::TwoOutcomeQubitTester { schmidt_angle },
                GenerateKind::SplitTester { base, outcome, sub_povm } => Generate::SplitTester { base, outcome, sub_povm },
                GenerateKind::Combination { k } => Generate::Combination { k },
                GenerateKind::RandomComb { signature, spread } => Generate::RandomComb { signature, spread },
            };
            let file = commands::generate(&what, seed, &tol)?;
            match out {
                Some(p) => {
                    file.write(&p)?;
                    Ok(Output::ok(format!("wrote {}\n", p.display())))
                }
                None => Ok(Output::ok(file.to_json())),
            }
        }
        Command::Suite { name, seeds, jobs } => {
            let summary = suites::run(name, seeds, jobs, &tol)?;
            let text = exqip_cli::format::canonical_json(&summary);
            Ok(Output { success: summary.passed, text })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
