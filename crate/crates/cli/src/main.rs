use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hermite_nn_cli::config::{ExperimentConfig, Method};
use hermite_nn_cli::experiment::solve_run;
use hermite_nn_cli::{parse_config, run_basis, run_compare, run_experiment, CliError, ComparisonReport};

/// Hermite-function networks and collocation for the 2D Schrödinger equation
#[derive(Parser, Debug)]
#[command(name = "hermite-nn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output`)
    #[arg(long)]
    out: Option<PathBuf>,

    /// RNG seed (overrides `seed`; for `compare`, replaces the seed list)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump basis values, derivatives, roots and weights as CSV
    Basis {
        #[command(flatten)]
        common: Common,
        /// Highest degree
        #[arg(long, default_value_t = 5)]
        degree: usize,
        /// Evaluation point
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        at: f64,
    },
    /// Collocation solve
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Train the configured method
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Hermite network against the sigmoid baseline over a seed sweep
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn print_report(report: &ComparisonReport) {
    for run in &report.runs {
        let loss = run.final_loss.map(|l| format!("{l:.6e}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<12} seed {:<4} final_loss {:<14} eval_mse {:.6e}  {:.2}s  -> {}",
            run.method.name(),
            run.seed,
            loss,
            run.eval_mse,
            run.wall_time,
            run.dir.display()
        );
    }
    if report.runs.len() > 1 {
        for (m, v) in &report.median_eval_mse {
            println!("median eval_mse {:<12} {v:.6e}", m.name());
        }
    }
    if let Some(holds) = report.claim_holds {
        println!("hermite_nn median <= pinn median: {}", if holds { "holds" } else { "does not hold" });
    }
    println!("report: {}", report.report_path.display());
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Basis { common, degree, at } => {
            let cfg = load(&common)?;
            for f in run_basis(degree, at, &cfg.output)? {
                println!("{}", f.display());
            }
        }
        Command::Solve { common } => {
            let cfg = load(&common)?;
            let summary = solve_run(&cfg, &cfg.output)?;
            println!(
                "collocation eval_mse {:.6e}  {:.2}s  -> {}",
                summary.eval_mse,
                summary.wall_time,
                summary.dir.display()
            );
        }
        Command::Train { common } => {
            let mut cfg = load(&common)?;
            if cfg.method == Method::Collocation {
                cfg.method = Method::HermiteNn;
            }
            print_report(&run_experiment(&cfg)?);
        }
        Command::Compare { common } => {
            let cfg = load(&common)?;
            print_report(&run_compare(&cfg)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
