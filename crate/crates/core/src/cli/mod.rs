//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numerical error.

pub mod commands;
pub mod config;
pub mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use commands::{SynthFormat, SynthKind, SynthSpec};
use config::{RawConfig, RunConfig};
use report::Report;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dcadl", version, about = "Convolutional analysis dictionary learning for classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and save it.
    Train(RunArgs),
    /// Report accuracy and timing of a saved model on a dataset.
    Eval(RunArgs),
    /// Classify a single image or feature record.
    Predict(PredictArgs),
    /// Cross-validate every combination of the listed hyperparameter values.
    Gridsearch(RunArgs),
    /// Time repeated training and testing runs.
    Bench(RunArgs),
    /// Write a synthetic dataset.
    GenSynth(SynthArgs),
}

/// Flags shared by the configuration-driven commands. Every value flag
/// overrides the key of the same name in the config file.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Emit key=value lines instead of tables.
    #[arg(long)]
    pub machine_readable: bool,
    /// Soft-threshold test codes by the model's lambda1.
    #[arg(long)]
    pub threshold_at_test: bool,
    #[arg(long)]
    pub seed: Option<String>,
    /// Model path for train, report copy for the other commands.
    #[arg(long, value_name = "PATH")]
    pub out: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub dataset: Option<String>,
    /// image or feature.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub model: Option<String>,
    /// per-class:N or fraction:F.
    #[arg(long)]
    pub split: Option<String>,
    /// Number of atoms.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub lambda1: Option<String>,
    #[arg(long)]
    pub lambda2: Option<String>,
    #[arg(long)]
    pub lambda3: Option<String>,
    #[arg(long)]
    pub lambda4: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub max_iter: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub stride: Option<String>,
    #[arg(long)]
    pub atom_rows: Option<String>,
    #[arg(long)]
    pub atom_cols: Option<String>,
    #[arg(long)]
    pub input_rows: Option<String>,
    #[arg(long)]
    pub input_cols: Option<String>,
    /// Objective trace CSV written by train.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    #[arg(long)]
    pub repetitions: Option<String>,
    #[arg(long)]
    pub grid_cap: Option<String>,
    /// Part of the split to evaluate: test, train or all.
    #[arg(long)]
    pub on: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Image file, or feature file for feature-mode models.
    pub input: PathBuf,
    /// Record to classify when the input is a feature file.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Stripes,
    Templates,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Pgm,
    Feature,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "stripes")]
    pub kind: KindArg,
    /// pgm writes one directory per class, feature writes a feature file.
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: FormatArg,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub rows: usize,
    #[arg(long, default_value_t = 16)]
    pub cols: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Stripe period in pixels.
    #[arg(long, default_value_t = 4)]
    pub period: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub machine_readable: bool,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("preset", &self.preset),
            ("dataset", &self.dataset),
            ("mode", &self.mode),
            ("model", &self.model),
            ("split", &self.split),
            ("m", &self.m),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("lambda3", &self.lambda3),
            ("lambda4", &self.lambda4),
            ("rho", &self.rho),
            ("max_iter", &self.max_iter),
            ("tol", &self.tol),
            ("stride", &self.stride),
            ("atom_rows", &self.atom_rows),
            ("atom_cols", &self.atom_cols),
            ("input_rows", &self.input_rows),
            ("input_cols", &self.input_cols),
            ("trace", &self.trace),
            ("folds", &self.folds),
            ("repetitions", &self.repetitions),
            ("grid_cap", &self.grid_cap),
            ("on", &self.on),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }

    /// Config file contents with command-line overrides applied.
    pub fn raw_config(&self) -> crate::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                RawConfig::parse(&text).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })?
            }
            None => RawConfig::default(),
        };
        for (k, v) in self.overrides() {
            raw.set(k, v.clone());
        }
        if self.threshold_at_test {
            raw.set("threshold_at_test", "true");
        }
        Ok(raw)
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config(_) => EXIT_CONFIG,
        Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

fn emit(report: &Report, machine: bool, copy_to: Option<&PathBuf>) -> crate::Result<()> {
    let text = report.render(machine);
    print!("{text}");
    if let Some(path) = copy_to {
        fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Train(a) => {
            let cfg = RunConfig::from_raw(&a.raw_config()?)?;
            emit(&commands::cmd_train(&cfg)?, a.machine_readable, None)
        }
        Command::Eval(a) => {
            let cfg = RunConfig::from_raw(&a.raw_config()?)?;
            emit(&commands::cmd_eval(&cfg)?, a.machine_readable, cfg.out.as_ref())
        }
        Command::Predict(p) => {
            let cfg = RunConfig::from_raw(&p.run.raw_config()?)?;
            let report = commands::cmd_predict(&cfg, &p.input, p.index)?;
            if p.run.machine_readable {
                emit(&report, true, cfg.out.as_ref())
            } else {
                println!("{}", report.get("class").unwrap_or_default());
                Ok(())
            }
        }
        Command::Gridsearch(a) => {
            let (cfg, grid) = RunConfig::with_grid(&a.raw_config()?)?;
            emit(&commands::cmd_gridsearch(&cfg, &grid)?, a.machine_readable, cfg.out.as_ref())
        }
        Command::Bench(a) => {
            let cfg = RunConfig::from_raw(&a.raw_config()?)?;
            emit(&commands::cmd_bench(&cfg)?, a.machine_readable, cfg.out.as_ref())
        }
        Command::GenSynth(s) => {
            let spec = SynthSpec {
                kind: match s.kind {
                    KindArg::Stripes => SynthKind::Stripes,
                    KindArg::Templates => SynthKind::Templates,
                },
                format: match s.format {
                    FormatArg::Pgm => SynthFormat::Pgm,
                    FormatArg::Feature => SynthFormat::Feature,
                },
                rows: s.rows,
                cols: s.cols,
                classes: s.classes,
                per_class: s.per_class,
                noise: s.noise,
                period: s.period,
                seed: s.seed,
            };
            emit(&commands::cmd_gen_synth(&spec, &s.out)?, s.machine_readable, None)
        }
    }
}

/// Runs a parsed command line, printing errors to stderr. Returns the exit
/// code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
