use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use bellsim_cli::commands::{
    cmd_ideal, cmd_pairwise, cmd_pvalue, cmd_resources, cmd_run, cmd_tilt_scan,
};
use bellsim_cli::config::ExperimentConfig;
use bellsim_cli::CliError;

#[derive(Parser)]
#[command(
    name = "bellsim",
    version,
    about = "Two-party high-dimensional Bell-test simulator"
)]
struct Cli {
    /// JSON experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Evaluate exact output distributions instead of sampling shots
    /// (noiseless configurations only).
    #[arg(long, global = true)]
    exact: bool,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Exact noiseless functional values per register size.
    Ideal,
    /// Sample every configured combination and write a run report.
    Run,
    /// Sweep a coherent tilt across qubits and record the functional.
    TiltScan,
    /// CHSH value of every qubit pair of the entangled register.
    Pairwise,
    /// Significance projections over trial budgets.
    Pvalue,
    /// Gate, measurement, depth, and runtime estimates per circuit.
    Resources,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ideal => "ideal",
            Command::Run => "run",
            Command::TiltScan => "tilt-scan",
            Command::Pairwise => "pairwise",
            Command::Pvalue => "pvalue",
            Command::Resources => "resources",
        }
    }

    /// `ideal` and `resources` have sensible built-in defaults; the rest
    /// describe an experiment and need an explicit configuration.
    fn runs_without_config(self) -> bool {
        matches!(self, Command::Ideal | Command::Resources)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }

    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if cli.command.runs_without_config() => ExperimentConfig::default(),
        None => {
            return Err(CliError::Config(format!(
                "{} needs --config <file>",
                cli.command.name()
            )))
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }

    match cli.command {
        Command::Ideal => cmd_ideal(&config),
        Command::Run => cmd_run(&config, cli.exact),
        Command::TiltScan => cmd_tilt_scan(&config),
        Command::Pairwise => cmd_pairwise(&config),
        Command::Pvalue => cmd_pvalue(&config),
        Command::Resources => cmd_resources(&config),
    }
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = run(&cli);
    // Timing goes to stderr so files and stdout stay reproducible.
    eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
