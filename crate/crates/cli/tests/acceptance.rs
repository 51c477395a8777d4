//! End-to-end acceptance checks. Each test prints one PASS/FAIL line for its
//! criterion before asserting, so `cargo test --test acceptance -- --nocapture`
//! doubles as a report.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use txml_core::eval::{evaluate, percent_error, report_from_csv, report_to_csv, EvalReport};
use txml_core::mlp::{fit_mlp, gradient_of_loss, init_mlp, MlpLayout, MlpModel, TrainConfig};
use txml_core::model_file::{model_from_str, model_to_string, Model};
use txml_core::plot::{DASHED, DOTTED};
use txml_core::published::{TABLE1, TABLE2};
use txml_core::reproduce::{solve_normal_equations, TableSetup};
use txml_core::sweep::{dataset_from_csv, dataset_to_csv, fit_scaler, Dataset, Sample};
use txml_core::{fit_ols, LineKind, Predictor};

fn report(criterion: u8, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {criterion}: {detail}");
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn datasets(setup: &TableSetup) -> (Dataset, Dataset) {
    let train = setup
        .train_grid
        .sweep(setup.kind, setup.eps_r, &setup.params)
        .unwrap();
    let eval = setup
        .eval_grid
        .sweep(setup.kind, setup.eps_r, &setup.params)
        .unwrap();
    (train, eval)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn criterion_1_table1_actual_column() {
    let setup = TableSetup::table1();
    let (_, eval) = datasets(&setup);
    assert_eq!(eval.len(), 16);
    let worst = eval
        .samples()
        .iter()
        .zip(TABLE1.actual)
        .map(|(s, a)| (s.y - a).abs())
        .fold(0.0, f64::max);
    report(
        1,
        worst <= 0.02,
        &format!("16 impedance rows, max deviation {worst:.4} ohm (tolerance 0.02)"),
    );
}

#[test]
fn criterion_2_table2_actual_column() {
    let setup = TableSetup::table2();
    let (_, eval) = datasets(&setup);
    assert_eq!(eval.len(), 18);
    let worst = eval
        .samples()
        .iter()
        .zip(TABLE2.actual)
        .map(|(s, a)| (s.y * 1e-6 - a).abs())
        .fold(0.0, f64::max);
    report(
        2,
        worst <= 0.1,
        &format!("18 frequency rows, max deviation {worst:.5} MHz (tolerance 0.1)"),
    );
}

#[test]
fn criterion_3_error_columns() {
    let mut cells = 0;
    let mut worst: f64 = 0.0;
    for t in [TABLE1, TABLE2] {
        for i in 0..t.len() {
            for (pred, printed) in [(t.nn[i], t.nn_pct[i]), (t.lr[i], t.lr_pct[i])] {
                worst = worst.max((percent_error(t.actual[i], pred).unwrap() - printed).abs());
                cells += 1;
            }
        }
    }
    let first = percent_error(98.525, 97.323).unwrap();
    let second = percent_error(7710.557, 7529.473).unwrap();
    let examples = (first - 1.220).abs() <= 0.01 && (second - 2.349).abs() <= 0.01;
    report(
        3,
        cells == 68 && worst <= 0.01 && examples,
        &format!("{cells} cells, max deviation {worst:.4} pp (tolerance 0.01)"),
    );
}

#[test]
fn criterion_4_network_quality() {
    let cases = [(TableSetup::table1(), 2.0), (TableSetup::table2(), 0.3)];
    let mut lines = Vec::new();
    let mut passed_tables = 0;
    for (setup, bound) in &cases {
        let (train, eval) = datasets(setup);
        let mut good = 0;
        let mut slowest = Duration::ZERO;
        let mut errors = Vec::new();
        for seed in 41..=45 {
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            let start = Instant::now();
            let model = fit_mlp(&MlpLayout::default(), &train, &cfg).unwrap();
            let took = start.elapsed();
            slowest = slowest.max(took);
            let max = evaluate(&model, &eval).unwrap().max_pct_error;
            errors.push(format!("{max:.4}"));
            if max <= *bound && took <= Duration::from_secs(10) {
                good += 1;
            }
        }
        if good >= 3 {
            passed_tables += 1;
        }
        lines.push(format!(
            "table {}: {good}/5 seeds within {bound}% (max errors {}), slowest run {slowest:.2?}",
            setup.published.id,
            errors.join(", ")
        ));
    }
    report(4, passed_tables == 2, &lines.join("; "));
}

fn exact_line_check() -> f64 {
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|i| {
            let x = 1.0 + 0.37 * i as f64;
            (x, 3.25 * x + 17.5)
        })
        .collect();
    let d = dataset(LineKind::MicrostripImpedance, &pts);
    let m = fit_ols(&d).unwrap();
    let (s, c) = solve_normal_equations(&pts);
    rel(m.slope, s).max(rel(m.intercept, c))
}

fn dataset(kind: LineKind, pts: &[(f64, f64)]) -> Dataset {
    let samples = pts.iter().map(|&(x, y)| Sample { x, y }).collect();
    Dataset::new(kind, 2.0, Default::default(), samples).unwrap()
}

#[test]
fn criterion_5_least_squares() {
    let exact = exact_line_check();
    let mut table_worst: f64 = 0.0;
    let mut resid_worst: f64 = 0.0;
    let mut sets: Vec<Dataset> = Vec::new();
    for setup in [TableSetup::table1(), TableSetup::table2()] {
        let (train, eval) = datasets(&setup);
        sets.push(train);
        sets.push(eval);
    }
    for t in [TABLE1, TABLE2] {
        let pts: Vec<(f64, f64)> = t.x.iter().copied().zip(t.actual.iter().copied()).collect();
        sets.push(dataset(LineKind::MicrostripImpedance, &pts));
    }
    for d in &sets {
        let m = fit_ols(d).unwrap();
        let pts: Vec<(f64, f64)> = d.samples().iter().map(|s| (s.x, s.y)).collect();
        let (s, c) = solve_normal_equations(&pts);
        table_worst = table_worst.max(rel(m.slope, s)).max(rel(m.intercept, c));
        let resid: f64 = d.samples().iter().map(|p| p.y - m.predict(p.x)).sum();
        let scale: f64 = d.ys().map(f64::abs).sum();
        resid_worst = resid_worst.max(resid.abs() / scale);
    }
    report(
        5,
        exact <= 1e-12 && table_worst <= 1e-9 && resid_worst <= 1e-9,
        &format!(
            "exact line rel {exact:.1e} (1e-12), {} table datasets rel {table_worst:.1e} (1e-9), residual sum rel {resid_worst:.1e} (1e-9)",
            sets.len()
        ),
    );
}

fn perturbed_loss(model: &MlpModel, data: &Dataset, mut k: usize, delta: f64) -> f64 {
    let mut m = model.clone();
    for layer in &mut m.layers {
        if k < layer.weights.len() {
            layer.weights[k] += delta;
            break;
        }
        k -= layer.weights.len();
        if k < layer.biases.len() {
            layer.biases[k] += delta;
            break;
        }
        k -= layer.biases.len();
    }
    m.loss(data).unwrap()
}

#[test]
fn criterion_6_gradient_check() {
    const H: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut params = 0;
    let seeds: Vec<u64> = (0..3).map(|_| rng.gen()).collect();
    for &seed in &seeds {
        let mut x = 1.0;
        let samples = (0..6)
            .map(|_| {
                x += rng.gen_range(0.2..1.5);
                Sample {
                    x,
                    y: rng.gen_range(20.0..100.0),
                }
            })
            .collect();
        let data = Dataset::new(
            LineKind::MicrostripImpedance,
            2.0,
            Default::default(),
            samples,
        )
        .unwrap();
        let model = init_mlp(&MlpLayout::default(), seed)
            .unwrap()
            .with_scaler(fit_scaler(&data).unwrap());
        let grads: Vec<f64> = gradient_of_loss(&model, &data).unwrap().iter().collect();
        for (i, g) in grads.iter().enumerate() {
            let numeric = (perturbed_loss(&model, &data, i, H)
                - perturbed_loss(&model, &data, i, -H))
                / (2.0 * H);
            worst = worst.max((g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-7));
            params += 1;
        }
    }
    report(
        6,
        worst <= 1e-4,
        &format!("{params} parameters over 3 initializations, worst relative error {worst:.2e} (tolerance 1e-4)"),
    );
}

fn bit_identical(a: &dyn Predictor, b: &dyn Predictor, xs: &[f64]) -> bool {
    xs.iter()
        .all(|&x| a.predict(x).unwrap().to_bits() == b.predict(x).unwrap().to_bits())
}

#[test]
fn criterion_7_persistence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<f64> = (0..100).map(|_| rng.gen_range(1.0..9.5)).collect();
    let setup = TableSetup::table1();
    let (train, eval) = datasets(&setup);

    let ols = Model::Ols(fit_ols(&train).unwrap());
    let cfg = TrainConfig {
        epochs: 100,
        ..TrainConfig::default()
    };
    let mut net = fit_mlp(&MlpLayout::default(), &train, &cfg).unwrap();
    net.training_log.clear();
    let mlp = Model::Mlp(net);
    let models_ok = [&ols, &mlp].iter().all(|m| {
        let back = model_from_str(&model_to_string(m).unwrap()).unwrap();
        bit_identical(*m, &back, &xs)
    });

    let mut datasets_ok = true;
    for setup in [TableSetup::table1(), TableSetup::table2()] {
        let (t, e) = datasets(&setup);
        for d in [t, e] {
            datasets_ok &= dataset_from_csv(&dataset_to_csv(&d).unwrap()).unwrap() == d;
        }
    }

    let r: EvalReport = evaluate(&mlp, &eval).unwrap();
    let text = report_to_csv(&r).unwrap();
    let back = report_from_csv(&text, r.unit, r.model_descriptor.clone()).unwrap();
    let report_ok = back == r && report_to_csv(&back).unwrap() == text;

    report(
        7,
        models_ok && datasets_ok && report_ok,
        &format!(
            "model files (ols, mlp) at 100 inputs: {models_ok}; dataset CSVs: {datasets_ok}; report CSV: {report_ok}"
        ),
    );
}

fn polyline_with_class<'a>(svg: &'a str, class: &str) -> Option<&'a str> {
    let needle = format!("<polyline class=\"{class}\"");
    svg.lines().find(|l| l.trim_start().starts_with(&needle))
}

fn count_ext(dir: &Path, ext: &str) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == ext)
        })
        .count()
}

#[test]
fn criterion_8_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_txml"))
        .arg("--out-dir")
        .arg(dir.path())
        .args(["reproduce", "--table", "all"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let csvs = count_ext(dir.path(), "csv");
    let svgs = count_ext(dir.path(), "svg");

    let mut styled = true;
    for table in [1, 2] {
        for model in ["nn", "lr"] {
            let svg = std::fs::read_to_string(
                dir.path()
                    .join(format!("table{table}_{model}_prediction.svg")),
            )
            .unwrap();
            let dotted = polyline_with_class(&svg, "actual")
                .is_some_and(|l| l.contains(&format!("stroke-dasharray=\"{DOTTED}\"")));
            let dashed = polyline_with_class(&svg, "predicted")
                .is_some_and(|l| l.contains(&format!("stroke-dasharray=\"{DASHED}\"")));
            styled &= dotted && dashed && svg.matches("<polyline").count() == 2;
        }
    }
    let fails = stdout.matches("[FAIL]").count();
    report(
        8,
        out.status.code() == Some(0) && csvs == 2 && svgs == 8 && styled && fails == 0,
        &format!(
            "exit {:?}, {csvs} report CSVs, {svgs} SVGs, dotted actual / dashed predicted: {styled}, {} checks passed",
            out.status.code(),
            stdout.matches("[PASS]").count()
        ),
    );
}
