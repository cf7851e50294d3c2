//! Command-line surface: `run`, `experiment` and `oracle`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentKind, ExperimentOptions, Parallelism};
use crate::oracle::{class_mean_breath_rates, GnParameters};
use crate::output::{self, fmt_sig6};
use crate::scenario::{parse_config, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(
    name = "quanta-abm",
    version,
    about = "Airborne quanta transmission in a ventilated waiting room"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write agents.csv (and timeseries.csv with --trace).
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u32>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        trace: bool,
    },
    /// Run a replicated sweep and write report.csv.
    Experiment {
        kind: ExperimentKind,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base seed; replication r uses seed + r.
        #[arg(long)]
        seed: Option<u32>,
        /// Replications per cell (placement: minimum samples per cell).
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the closed-form single-zone reference as one CSV row.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Elapsed time in seconds; defaults to the configured duration.
        #[arg(long)]
        t: Option<f64>,
    },
}

pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => parse_config(&fs::read_to_string(p)?),
        None => Ok(ScenarioConfig::default()),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn cmd_run(
    config_path: Option<&Path>,
    seed: Option<u32>,
    out_dir: &Path,
    trace: bool,
) -> Result<()> {
    let config = load_config(config_path)?;
    let seed = seed.unwrap_or(config.seed);
    let result = engine::run(&config, seed)?;
    fs::create_dir_all(out_dir)?;

    let mut agents = create(out_dir, "agents.csv")?;
    output::write_agents(&mut agents, &result.agents)?;
    agents.flush()?;
    if trace {
        let mut ts = create(out_dir, "timeseries.csv")?;
        output::write_timeseries(&mut ts, &result.steps)?;
        ts.flush()?;
    }
    Ok(())
}

pub fn cmd_experiment(
    kind: ExperimentKind,
    config_path: Option<&Path>,
    base_seed: Option<u32>,
    replications: Option<usize>,
    out_dir: &Path,
    parallelism: Parallelism,
) -> Result<()> {
    let config = load_config(config_path)?;
    let base_seed = base_seed.unwrap_or(config.seed);
    if replications == Some(0) {
        return Err(Error::InvalidArgument("--replications must be >= 1".into()));
    }
    let options = ExperimentOptions {
        parallelism,
        replications,
    };
    let report = experiments::run_experiment(kind, &config, base_seed, &options)?;
    fs::create_dir_all(out_dir)?;

    let mut w = create(out_dir, "report.csv")?;
    output::write_report(&mut w, &report)?;
    w.flush()?;
    if let Some(conc) = report.concentration() {
        let mut w = create(out_dir, "concentration.csv")?;
        output::write_report(&mut w, &conc)?;
        w.flush()?;
    }
    Ok(())
}

pub fn cmd_oracle<W: Write>(config_path: Option<&Path>, t: Option<f64>, mut out: W) -> Result<()> {
    let config = load_config(config_path)?;
    let t = t.unwrap_or(config.duration_s as f64);
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "--t must be a finite value >= 0, got {t}"
        )));
    }
    let params = GnParameters::from_config(&config);
    let doses =
        class_mean_breath_rates(&config).map(|rate| fmt_sig6(params.expected_dose(rate, t)));
    writeln!(out, "{}", output::ORACLE_HEADER)?;
    writeln!(
        out,
        "{},{},{},{}",
        fmt_sig6(t),
        fmt_sig6(params.quanta_at(t) * 1000.0),
        fmt_sig6(params.integrated_concentration(t)),
        doses.join(",")
    )?;
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            trace,
        } => cmd_run(config.as_deref(), seed, &out, trace),
        Command::Experiment {
            kind,
            config,
            seed,
            replications,
            out,
        } => cmd_experiment(
            kind,
            config.as_deref(),
            seed,
            replications,
            &out,
            Parallelism::Parallel,
        ),
        Command::Oracle { config, t } => cmd_oracle(config.as_deref(), t, std::io::stdout().lock()),
    }
}
