use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use txml_core::mlp::{Activation, Optimizer};
use txml_core::plot::PlotKind;
use txml_core::{LineKind, Unit};

#[derive(Debug, Parser)]
#[command(
    name = "txml",
    version,
    about = "Sweep, fit and evaluate surrogate models of planar transmission lines"
)]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for network initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an analytic model over a w/h range and write a dataset CSV.
    Sweep(SweepArgs),
    /// Fit a least-squares line or a neural network to a dataset CSV.
    Train(TrainArgs),
    /// Score a model file (or the analytic model) on a dataset CSV.
    Eval(EvalArgs),
    /// Render an SVG chart from a report CSV.
    Plot(PlotArgs),
    /// Regenerate the reference tables, fit both surrogates and check them.
    Reproduce(ReproduceArgs),
}

fn parse_line(s: &str) -> Result<LineKind, String> {
    s.parse().map_err(|e: txml_core::Error| e.to_string())
}

fn parse_activation(s: &str) -> Result<Activation, String> {
    Activation::parse(s).map_err(|e| e.to_string())
}

fn parse_optimizer(s: &str) -> Result<Optimizer, String> {
    Optimizer::parse(s).map_err(|e| e.to_string())
}

fn parse_unit(s: &str) -> Result<Unit, String> {
    s.parse().map_err(|e: txml_core::Error| e.to_string())
}

fn parse_plot_kind(s: &str) -> Result<PlotKind, String> {
    s.parse().map_err(|e: txml_core::Error| e.to_string())
}

/// Table ids selected by `--table`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables(pub Vec<u8>);

fn parse_tables(s: &str) -> Result<Tables, String> {
    match s {
        "1" => Ok(Tables(vec![1])),
        "2" => Ok(Tables(vec![2])),
        "all" => Ok(Tables(vec![1, 2])),
        other => Err(format!("unknown table `{other}` (expected 1, 2 or all)")),
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    /// microstrip (impedance) or patch (resonant frequency).
    #[arg(long, value_parser = parse_line, default_value = "microstrip")]
    pub line: LineKind,

    #[arg(long, default_value_t = 2.0)]
    pub eps_r: f64,

    #[arg(long, default_value_t = 1.0)]
    pub min: f64,

    #[arg(long, default_value_t = 8.5)]
    pub max: f64,

    #[arg(long, default_value_t = 0.5)]
    pub step: f64,

    /// Calibrated effective patch length L + 2ΔL, in millimetres.
    #[arg(long, value_name = "MM")]
    pub l_eff_mm: Option<f64>,

    /// Substrate height in millimetres (with --l-mm).
    #[arg(long, value_name = "MM")]
    pub h_mm: Option<f64>,

    /// Physical patch length in millimetres (with --h-mm).
    #[arg(long, value_name = "MM")]
    pub l_mm: Option<f64>,

    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelChoice {
    Ols,
    Mlp,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub hidden: Vec<usize>,

    #[arg(long, value_parser = parse_activation, default_value = "tanh")]
    pub activation: Activation,

    #[arg(long, default_value_t = 20_000)]
    pub epochs: usize,

    /// Step size for gd and adam.
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,

    /// lm (Levenberg-Marquardt), adam or gd.
    #[arg(long, value_parser = parse_optimizer, default_value = "lm")]
    pub optimizer: Optimizer,

    /// Early-stop threshold on normalized MSE; 0 disables early stopping.
    #[arg(long, default_value_t = 1e-8)]
    pub target_mse: f64,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "mlp")]
    pub model: ModelChoice,

    /// Dataset CSV produced by `sweep`.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value = "model.txt")]
    pub out: PathBuf,

    #[command(flatten)]
    pub net: NetworkArgs,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    /// Model file, or `analytic` to score the closed-form model itself.
    #[arg(long)]
    pub model: String,

    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,

    /// Also write prediction and error SVGs next to the report.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,

    /// prediction or error.
    #[arg(long, value_parser = parse_plot_kind, default_value = "prediction")]
    pub kind: PlotKind,

    /// ohm or hertz.
    #[arg(long, value_parser = parse_unit, default_value = "ohm")]
    pub unit: Unit,

    /// Defaults to the report path with the kind and an .svg extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ReproduceArgs {
    /// 1, 2 or all.
    #[arg(long, value_parser = parse_tables, default_value = "all")]
    pub table: Tables,

    /// Override the table's dielectric constant (single table only).
    #[arg(long)]
    pub eps_r: Option<f64>,

    /// Override the effective patch length of table 2, in millimetres.
    #[arg(long, value_name = "MM")]
    pub l_eff_mm: Option<f64>,

    #[command(flatten)]
    pub net: NetworkArgs,
}
