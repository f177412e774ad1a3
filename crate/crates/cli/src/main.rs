//! `bayeslens`: pushforward, inversion, supports, filtering and the law
//! harness on JSON model files.

mod commands;
mod emit;
mod error;
mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::model::Model;

#[derive(Parser, Debug)]
#[command(name = "bayeslens", version, about = "Dependent Bayesian lenses over finite and Gaussian models")]
struct Cli {
    /// JSON model file.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Support cutoff for model commands; overrides the per-instance law
    /// tolerances when given to `laws`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InstanceArg {
    Finite,
    Gaussian,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    SkipSymmetrization,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Push a state forward along a morphism.
    Push { state: String, morphism: String },
    /// Bayesian inverse of a morphism at a state.
    Invert {
        state: String,
        morphism: String,
        /// Return the inverse between supports, with their sections.
        #[arg(long)]
        supported: bool,
    },
    /// Support of a state: carrier, section and retraction.
    Support { state: String },
    /// Run the law harness and print one report per law.
    Laws {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, value_enum, default_value_t = InstanceArg::Both)]
        instance: InstanceArg,
        /// Restrict to these laws (repeatable).
        #[arg(long)]
        law: Vec<String>,
        #[arg(long, default_value_t = 0.3)]
        sparsity: f64,
        /// Priors sampled per case by the family-level laws.
        #[arg(long, default_value_t = 50)]
        priors: usize,
        /// Inject a known defect to check the harness notices it.
        #[arg(long, value_enum)]
        mutation: Option<MutationArg>,
    },
    /// Filter a sequence of observations.
    Filter {
        #[arg(long)]
        dynamics: String,
        #[arg(long)]
        observe: String,
        #[arg(long)]
        init: String,
        #[arg(long)]
        obs_file: PathBuf,
    },
}

pub const DEFAULT_TOL: f64 = 1e-9;

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let load = || match &cli.model {
        Some(path) => Model::load(path),
        None => Err(CliError::Validation("--model is required for this command".into())),
    };
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Validation(format!("--tol must be a nonnegative number, got {tol}")));
    }
    match &cli.command {
        Command::Push { state, morphism } => commands::push(&load()?, state, morphism),
        Command::Invert {
            state,
            morphism,
            supported,
        } => commands::invert(&load()?, state, morphism, *supported, tol),
        Command::Support { state } => commands::support(&load()?, state, tol),
        Command::Laws {
            seed,
            cases,
            max_dim,
            instance,
            law,
            sparsity,
            priors,
            mutation,
        } => {
            let gen = bayeslens::laws::CaseGen {
                seed: *seed,
                max_dim: *max_dim,
                sparsity: *sparsity,
                instance_mix: match instance {
                    InstanceArg::Finite => bayeslens::laws::InstanceMix::Finite,
                    InstanceArg::Gaussian => bayeslens::laws::InstanceMix::Gaussian,
                    InstanceArg::Both => bayeslens::laws::InstanceMix::Both,
                },
                cases: *cases,
                priors_per_case: *priors,
                mutation: mutation.map(|MutationArg::SkipSymmetrization| {
                    bayeslens::laws::Mutation::SkipSymmetrization
                }),
            };
            commands::laws(&gen, law, cli.tol)
        }
        Command::Filter {
            dynamics,
            observe,
            init,
            obs_file,
        } => commands::filter(&load()?, dynamics, observe, init, obs_file, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.output == Output::Pretty;
    match run(cli) {
        Ok(value) => {
            println!("{}", emit::render(&value, pretty));
            ExitCode::SUCCESS
        }
        Err(CliError::LawsFailed { count, reports }) => {
            println!("{}", emit::render(&reports, pretty));
            eprintln!("bayeslens: {count} law(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("bayeslens: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
