use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use urysohn_cli::{halved_configs, run_experiment, sweep, with_threads, RunConfig};
use urysohn_core::kernel::parameter_budget;

#[derive(Parser)]
#[command(name = "urysohn", version, about = "Internal approximations of Urysohn image sets and funnels")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "URYSOHN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the family and ensemble, write funnel.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run with (Delta, delta, sigma) halved `halvings` times; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        halvings: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the parameter budget for `epsilon` as JSON.
    Budget {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &std::path::Path, out: Option<PathBuf>) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(out) = out {
        config.output_dir = out;
    }
    Ok(config)
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let config = load(&config, out)?;
            let s = with_threads(cli.threads, || run_experiment(&config))??;
            println!(
                "{} inputs, {} funnel points, M = {}, q = {}, g = {} -> {}",
                s.input_count,
                s.funnel_size,
                s.realized.omega_cells,
                s.realized.q,
                s.realized.g,
                config.output_dir.display()
            );
            if let Some(mc) = &s.report.monte_carlo {
                println!(
                    "sampled gaps: image {}, section {}, funnel {}",
                    mc.image_gap, mc.section_gap, mc.funnel_gap
                );
            }
        }
        Command::Sweep { config, halvings, out } => {
            let config = load(&config, out)?;
            let configs = halved_configs(&config, halvings)?;
            let table = with_threads(cli.threads, || sweep(&configs))??;
            let path = config.output_dir.join("sweep.csv");
            table.write_csv(&path)?;
            print!("{}", table.to_csv());
            println!("monotone: {} -> {}", table.is_monotone(), path.display());
        }
        Command::Budget { epsilon, config } => {
            let config = RunConfig::load(&config)?;
            let omega = config.omega_box()?;
            let e = config.e_box()?;
            let b = parameter_budget(
                epsilon,
                &config.kernel()?,
                &config.ball()?,
                omega.measure(),
                e.diameter(),
                config.r_star,
            )
            .context("epsilon")?;
            println!("{}", serde_json::to_string_pretty(&b)?);
        }
    }
    Ok(())
}
