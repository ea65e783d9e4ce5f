use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ris_core::config::{ExperimentSpec, KEYS};
use ris_core::{emit_results, load_config, run_experiment, Error};

/// Sum-rate sweeps for reflective and transmissive RISs with mutual coupling.
#[derive(Debug, Parser)]
#[command(name = "ris-sim", version)]
struct Cli {
    /// Config file (`key = value` lines). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["reflective", "transmissive"])]
    mode: Option<String>,
    #[arg(long, value_parser = ["power", "elements", "users"])]
    sweep: Option<String>,
    /// Comma-separated sweep values (dBm for power).
    #[arg(long)]
    values: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of proposed,fixed_mc,conventional.
    #[arg(long)]
    baselines: Option<String>,
    #[arg(long, value_parser = ["parametric", "geometric"])]
    channel: Option<String>,
    #[arg(long = "num-bs")]
    num_bs: Option<usize>,
    /// Extra `key=value` overrides for any config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the recognized config keys and exit.
    #[arg(long)]
    list_keys: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentSpec, Error> {
    let mut spec = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentSpec::default(),
    };
    let flags: [(&str, Option<String>); 9] = [
        ("mode", cli.mode.clone()),
        ("sweep", cli.sweep.clone()),
        ("values", cli.values.clone()),
        ("trials", cli.trials.map(|v| v.to_string())),
        ("seed", cli.seed.map(|v| v.to_string())),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
        ("baselines", cli.baselines.clone()),
        ("channel", cli.channel.clone()),
        ("num_bs", cli.num_bs.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            spec.set(key, &v)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        spec.set(k.trim(), v.trim())?;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let spec = resolve(cli)?;
    let table = run_experiment(&spec)?;
    let files = emit_results(&table, &spec.out)?;
    for (record, err) in table.failures() {
        eprintln!(
            "warning: {}={} baseline={} trial={} failed: {err}",
            spec.sweep.name(),
            record.value,
            record.baseline.name(),
            record.trial
        );
    }
    println!(
        "{:>12}  {:<13} {:>6}  {:>14}  {:>12}  {:>12}",
        spec.sweep.name(),
        "baseline",
        "trials",
        "sum rate",
        "std",
        "mse"
    );
    for c in &table.cells {
        println!(
            "{:>12}  {:<13} {:>6}  {:>14.4}  {:>12.4}  {:>12.4e}",
            c.value,
            c.baseline.name(),
            c.trials,
            c.mean_sum_rate,
            c.std_sum_rate,
            c.mean_mse
        );
    }
    println!("results: {}", files.results.display());
    println!("manifest: {}", files.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_keys {
        for k in KEYS {
            println!("{k}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
