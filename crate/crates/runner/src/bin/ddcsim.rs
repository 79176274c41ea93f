use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ddc_core::{run, ScenarioConfig};
use ddc_runner::config::parse_config;
use ddc_runner::output::{write_bundle, BundleOptions};
use ddc_runner::presets::{run_preset, Preset};
use ddc_runner::sweep::run_sweep;
use ddc_runner::{Result, RunnerError};

/// Grid frequency simulator with delayed and communicating loads.
#[derive(Debug, Parser)]
#[command(name = "ddcsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, env = "DDCSIM_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Keep every n-th time series sample.
    #[arg(long, default_value_t = 100)]
    stride: usize,
    /// Skip the gnuplot script.
    #[arg(long)]
    no_plot: bool,
}

impl OutputArgs {
    fn options(&self) -> BundleOptions {
        BundleOptions {
            stride: self.stride.max(1),
            plot_script: !self.no_plot,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a named figure preset (fig1..fig8).
    Preset {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base config the preset is applied to.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Vary one parameter over a list of values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut c = match config {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        c.seed = seed;
    }
    Ok(c)
}

fn execute(command: Command) -> Result<PathBuf> {
    match command {
        Command::Run { config, seed, output } => {
            let c = load(Some(&config), seed)?;
            let name = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
            let result = run::<f64>(&c)?;
            write_bundle(&output.out, &name, &result, &output.options(), None)?;
            Ok(output.out)
        }
        Command::Preset { name, seed, config, output } => {
            let preset = Preset::from_name(&name)?;
            let base = load(config.as_deref(), Some(seed))?;
            run_preset(preset, &base, &output.out, &output.options())?;
            Ok(output.out)
        }
        Command::Sweep { config, param, values, seed, output } => {
            let base = load(Some(&config), seed)?;
            run_sweep(&base, &param, &values, &output.out, &output.options())?;
            Ok(output.out)
        }
    }
}

fn error_line(err: &RunnerError) -> String {
    let message = serde_json::to_string(&err.to_string()).expect("string serializes");
    match err.field() {
        Some(field) => format!("error kind={} field={} message={}", err.kind(), field, message),
        None => format!("error kind={} message={}", err.kind(), message),
    }
}

fn exit_code(err: &RunnerError) -> u8 {
    match err.kind() {
        "usage" => 2,
        "validation" => 3,
        "integration" => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            let message = serde_json::to_string(first).expect("string serializes");
            eprintln!("error kind=usage message={message}");
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match execute(cli.command) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", error_line(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
