use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{anyhow, Context};
use txml_core::analytic::{
    FixedParams, LineKind, PARAM_EFFECTIVE_LENGTH, PARAM_PATCH_LENGTH, PARAM_SUBSTRATE_HEIGHT,
};
use txml_core::eval::{evaluate, read_report_csv, write_report_csv, AnalyticPredictor, Predictor};
use txml_core::mlp::{fit_mlp, MlpLayout, TrainConfig};
use txml_core::model_file::{load_model, save_model, Model};
use txml_core::plot::{emit_plot_svg, PlotKind};
use txml_core::reproduce::{reproduce_table, ReproduceOptions, TableOutcome, TableSetup};
use txml_core::{fit_ols, generate_sweep, read_csv, write_csv};

use crate::args::{
    EvalArgs, ModelChoice, NetworkArgs, PlotArgs, ReproduceArgs, SweepArgs, TrainArgs,
};

/// A command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations (exit 2).
    Usage(String),
    /// Anything that goes wrong while doing the work (exit 1).
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Global settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunContext {
    fn output(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }

    fn ensure_parent(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
        Ok(())
    }
}

fn require_finite(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be a finite number, got {v}")))
    }
}

fn sweep_params(args: &SweepArgs) -> Result<FixedParams, Failure> {
    let mm = |v: f64| v * 1e-3;
    let mut params = FixedParams::new();
    match args.line {
        LineKind::MicrostripImpedance => {
            if args.l_eff_mm.is_some() || args.h_mm.is_some() || args.l_mm.is_some() {
                return Err(usage(
                    "--l-eff-mm, --h-mm and --l-mm apply only to --line patch",
                ));
            }
        }
        LineKind::PatchFrequency => match (args.l_eff_mm, args.h_mm, args.l_mm) {
            (Some(l_eff), None, None) => {
                params.insert(PARAM_EFFECTIVE_LENGTH.into(), mm(l_eff));
            }
            (None, Some(h), Some(l)) => {
                params.insert(PARAM_SUBSTRATE_HEIGHT.into(), mm(h));
                params.insert(PARAM_PATCH_LENGTH.into(), mm(l));
            }
            _ => {
                return Err(usage(
                    "--line patch needs either --l-eff-mm or both --h-mm and --l-mm",
                ))
            }
        },
    }
    Ok(params)
}

pub fn sweep(ctx: &RunContext, args: &SweepArgs) -> Outcome {
    for (name, v) in [
        ("eps-r", args.eps_r),
        ("min", args.min),
        ("max", args.max),
        ("step", args.step),
    ] {
        require_finite(name, v)?;
    }
    if args.min > args.max {
        return Err(usage(format!(
            "empty range: --min {} is greater than --max {}",
            args.min, args.max
        )));
    }
    if args.step <= 0.0 {
        return Err(usage(format!("--step must be positive, got {}", args.step)));
    }
    let params = sweep_params(args)?;
    let dataset = generate_sweep(
        args.line, args.eps_r, &params, args.min, args.max, args.step,
    )?;
    let out = ctx.output(&args.out);
    ctx.ensure_parent(&out)?;
    write_csv(&dataset, &out)?;
    let ys: Vec<f64> = dataset.ys().collect();
    let (lo, hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| {
            (l.min(y), h.max(y))
        });
    println!(
        "wrote {} rows of {} (eps_r = {}) to {}",
        dataset.len(),
        args.line,
        args.eps_r,
        out.display()
    );
    println!(
        "w/h {} .. {}, {} {} .. {}",
        args.min,
        dataset.xs().last().unwrap_or(args.min),
        dataset.unit(),
        lo,
        hi
    );
    Ok(())
}

fn train_config(ctx: &RunContext, net: &NetworkArgs) -> Result<(MlpLayout, TrainConfig), Failure> {
    let layout =
        MlpLayout::new(net.hidden.clone(), net.activation).map_err(|e| usage(e.to_string()))?;
    let config = TrainConfig {
        epochs: net.epochs,
        learning_rate: net.lr,
        optimizer: net.optimizer,
        seed: ctx.seed,
        target_mse: (net.target_mse > 0.0).then_some(net.target_mse),
        ..TrainConfig::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok((layout, config))
}

pub fn train(ctx: &RunContext, args: &TrainArgs) -> Outcome {
    let (layout, config) = train_config(ctx, &args.net)?;
    let dataset = read_csv(&args.data)?;
    let out = ctx.output(&args.out);
    ctx.ensure_parent(&out)?;
    let model = match args.model {
        ModelChoice::Ols => {
            let m = fit_ols(&dataset)?;
            let mse = dataset
                .samples()
                .iter()
                .map(|s| (s.y - m.predict(s.x)).powi(2))
                .sum::<f64>()
                / dataset.len() as f64;
            println!("ols: slope {} intercept {}", m.slope, m.intercept);
            println!("final training mse {mse:e} {}^2", dataset.unit());
            Model::Ols(m)
        }
        ModelChoice::Mlp => {
            let m = fit_mlp(&layout, &dataset, &config)?;
            let mse = m.loss(&dataset)?;
            println!(
                "{}: {} epochs with {}",
                m.describe(),
                m.training_log.len(),
                config.optimizer.as_str()
            );
            println!("final training mse {mse:e} (normalized)");
            Model::Mlp(m)
        }
    };
    save_model(&model, &out)?;
    println!("saved {} model to {}", model.kind_tag(), out.display());
    Ok(())
}

fn plot_path(report: &Path, kind: PlotKind) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}_{}.svg", kind.as_str()))
}

pub fn eval(ctx: &RunContext, args: &EvalArgs) -> Outcome {
    let dataset = read_csv(&args.data)?;
    let predictor: Box<dyn Predictor> = if args.model == "analytic" {
        Box::new(AnalyticPredictor::for_dataset(&dataset))
    } else {
        let path = Path::new(&args.model);
        Box::new(load_model(path).with_context(|| format!("loading {}", path.display()))?)
    };
    let report = evaluate(predictor.as_ref(), &dataset)?;
    let out = ctx.output(&args.out);
    ctx.ensure_parent(&out)?;
    write_report_csv(&report, &out)?;
    let worst = report.worst_row();
    println!("model: {}", report.model_descriptor);
    println!(
        "max error {:.3}% at w/h = {}, mean error {:.3}%",
        report.max_pct_error, worst.x, report.mean_pct_error
    );
    println!(
        "max abs error {:.6} {unit}, mean abs error {:.6} {unit}",
        report.max_abs_error,
        report.mean_abs_error,
        unit = report.unit
    );
    println!("wrote {}", out.display());
    if args.plot {
        for kind in [PlotKind::Prediction, PlotKind::Error] {
            let path = plot_path(&out, kind);
            emit_plot_svg(&report, kind, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

pub fn plot(ctx: &RunContext, args: &PlotArgs) -> Outcome {
    let report = read_report_csv(&args.report, args.unit)?;
    let out = match &args.out {
        Some(p) => ctx.output(p),
        None => ctx.output(&plot_path(&args.report, args.kind)),
    };
    ctx.ensure_parent(&out)?;
    emit_plot_svg(&report, args.kind, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn setups(args: &ReproduceArgs) -> Result<Vec<TableSetup>, Failure> {
    let tables = &args.table.0;
    if tables.len() > 1 && (args.eps_r.is_some() || args.l_eff_mm.is_some()) {
        return Err(usage("--eps-r and --l-eff-mm need a single --table"));
    }
    tables
        .iter()
        .map(|&id| {
            let mut setup = TableSetup::for_table(id).map_err(|e| usage(e.to_string()))?;
            if let Some(eps_r) = args.eps_r {
                setup.eps_r = eps_r;
            }
            if let Some(l) = args.l_eff_mm {
                if setup.kind != LineKind::PatchFrequency {
                    return Err(usage("--l-eff-mm applies only to table 2"));
                }
                setup.params.insert(PARAM_EFFECTIVE_LENGTH.into(), l * 1e-3);
            }
            Ok(setup)
        })
        .collect()
}

fn print_outcome(o: &TableOutcome) {
    println!("== table {} ==", o.table);
    for c in &o.checks {
        println!("{c}");
    }
    for (name, r) in [("nn", &o.nn_report), ("lr", &o.lr_report)] {
        println!(
            "{name}: max error {:.3}% at w/h = {}, mean {:.3}%",
            r.max_pct_error,
            r.worst_row().x,
            r.mean_pct_error
        );
    }
    for f in &o.files {
        println!("wrote {}", f.display());
    }
}

pub fn reproduce(ctx: &RunContext, args: &ReproduceArgs) -> Outcome {
    let setups = setups(args)?;
    let (layout, train) = train_config(ctx, &args.net)?;
    let opts = ReproduceOptions {
        layout,
        train,
        out_dir: ctx.out_dir.clone(),
    };
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = setups
            .iter()
            .map(|setup| s.spawn(|| reproduce_table(setup, &opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().map_err(|_| anyhow!("table worker panicked")))
            .collect()
    });

    let mut first_failure = None;
    for result in results {
        let outcome = result??;
        print_outcome(&outcome);
        if first_failure.is_none() {
            first_failure = outcome
                .checks
                .iter()
                .find(|c| !c.passed)
                .map(|c| c.name.clone());
        }
    }
    match first_failure {
        None => {
            println!("all checks passed");
            Ok(())
        }
        Some(name) => Err(Failure::Runtime(anyhow!("check failed: {name}"))),
    }
}
