use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use netguard_core::harness::{
    emit_reports, experiment::run_experiment_with, load_scenario, ExperimentSpec, RunOptions, SuccessUnit, Sweep,
};
use netguard_core::MechanismVariant;

#[derive(Parser)]
#[command(name = "netguard", version, about = "Delay-aware SDN resilience simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario for each variant and seed and write report files.
    Run(RunArgs),
    /// Parse and validate a scenario, then print what it contains.
    Check {
        scenario: PathBuf,
        /// Also print the injection schedule for this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Comma-separated variants (woRM, sRM, pRM, RM); defaults to the scenario's list.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<MechanismVariant>>,
    /// Number of seeds, counted up from the scenario's base seed.
    #[arg(long)]
    seeds: Option<u32>,
    /// Sweep a parameter, e.g. `flows=2..10` or `events=1..5`.
    #[arg(long)]
    sweep: Option<Sweep>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the undivided round-trip residual as link delay.
    #[arg(long)]
    raw_delay: bool,
    #[arg(long, default_value = "packet")]
    success_unit: SuccessUnit,
}

fn run(args: RunArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario).with_context(|| format!("loading {}", args.scenario.display()))?;
    let mut spec = ExperimentSpec::from_scenario(&scenario);
    if let Some(v) = args.variants {
        if v.is_empty() {
            bail!("--variants: no variants given");
        }
        spec.variants = v;
    }
    if let Some(n) = args.seeds {
        if n == 0 {
            bail!("--seeds must be positive");
        }
        spec.seeds = (0..n as u64).map(|i| scenario.run.base_seed + i).collect();
    }
    spec.sweep = args.sweep;
    spec.options = RunOptions {
        raw_delay: args.raw_delay,
        success_unit: args.success_unit,
    };
    let result = run_experiment_with(&scenario, &spec, |done, total| log::info!("run {done}/{total}"))?;
    let files = emit_reports(&result, &scenario, &args.out)?;
    for r in &result.reports {
        let col = r.param.map_or_else(String::new, |p| format!(" {}", p));
        let restore = r
            .restoration
            .mean
            .map_or_else(|| "-".into(), |t| format!("{:.3} ms", t.as_millis_f64()));
        println!(
            "{:<9}{col:>4}  success {:.4}  strong {:.4}  throughput {:>9.3} Mbps  restoration {restore}  warnings {:.1}",
            r.variant.to_string(),
            r.success_rate,
            r.strong_success_rate,
            r.throughput / 1e6,
            r.warnings,
        );
    }
    println!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

fn check(path: PathBuf, seed: Option<u64>) -> Result<()> {
    let s = load_scenario(&path).with_context(|| format!("loading {}", path.display()))?;
    let t = &s.topology;
    println!(
        "{}: {} switches, {} hosts, {} links, {} flows, {} contract pairs, {} s",
        s.run.name,
        t.switch_count(),
        t.hosts().len(),
        t.links().len(),
        s.flows.len(),
        s.contracts.len(),
        s.run.emulation_time.as_secs_f64()
    );
    if let Some(seed) = seed {
        for (at, inj) in s.schedule(seed) {
            println!("{at} {inj:?}");
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(args) => run(args),
        Command::Check { scenario, seed } => check(scenario, seed),
    };
    if let Err(e) = res {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
