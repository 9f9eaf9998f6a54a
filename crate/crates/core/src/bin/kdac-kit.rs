use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kdac::commands::{execute, Command, Overrides};

/// Gradient checks, curve dumps, activation benchmarks and timings for KDAC.
#[derive(Parser)]
#[command(name = "kdac-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Finite-difference and oracle checks of every derivative.
    Gradcheck(Flags),
    /// x,y,dy_dx samples of the selected activations.
    Curves(Flags),
    /// Train each activation on a synthetic task over several seeds.
    Bench(Flags),
    /// Per-call forward timings.
    Timing(Flags),
}

#[derive(Args)]
struct Flags {
    /// Config file (`[section]` headers, `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `;`-separated selectors, e.g. `relu; kdac:beta1=1.2,beta2=0.8,mu=0.01`.
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    /// One value or a comma-separated list.
    #[arg(long)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// regression or tagging.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated training seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    calls: Option<u64>,
}

impl Flags {
    fn split(self) -> (Option<PathBuf>, Overrides) {
        let o = Overrides {
            activation: self.activation,
            task: self.task,
            seeds: self.seeds,
            repeats: self.repeats,
            out: self.out,
            beta1: self.beta1,
            beta2: self.beta2,
            mu: self.mu,
            lr: self.lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            samples: self.samples,
            hidden: self.hidden,
            min: self.min,
            max: self.max,
            steps: self.steps,
            calls: self.calls,
        };
        (self.config, o)
    }
}

fn main() -> ExitCode {
    let (command, flags) = match Cli::parse().command {
        Sub::Gradcheck(f) => (Command::Gradcheck, f),
        Sub::Curves(f) => (Command::Curves, f),
        Sub::Bench(f) => (Command::Bench, f),
        Sub::Timing(f) => (Command::Timing, f),
    };
    let (config, overrides) = flags.split();
    let result = execute(
        command,
        config.as_deref(),
        &overrides,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("kdac-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
