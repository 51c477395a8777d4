//! Training behaviour of the MLP surrogate on the two reference sweeps.

use std::time::Instant;

use txml_core::eval::evaluate;
use txml_core::mlp::{fit_mlp, MlpLayout, MlpModel, TrainConfig};
use txml_core::reproduce::{TableSetup, TRAIN_GRID};
use txml_core::sweep::{Dataset, Sample};

fn datasets(setup: &TableSetup) -> (Dataset, Dataset) {
    let train = TRAIN_GRID
        .sweep(setup.kind, setup.eps_r, &setup.params)
        .unwrap();
    let eval = setup
        .eval_grid
        .sweep(setup.kind, setup.eps_r, &setup.params)
        .unwrap();
    (train, eval)
}

fn trained(setup: &TableSetup, seed: u64) -> (MlpModel, Dataset, Dataset) {
    let (train, eval) = datasets(setup);
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let m = fit_mlp(&MlpLayout::default(), &train, &cfg).unwrap();
    (m, train, eval)
}

#[test]
fn impedance_surrogate_quality() {
    let start = Instant::now();
    let (m, train, eval) = trained(&TableSetup::table1(), 42);
    let elapsed = start.elapsed();
    let report = evaluate(&m, &eval).unwrap();
    println!(
        "table 1 seed 42: max {:.4}% in {elapsed:?}",
        report.max_pct_error
    );
    assert!(report.max_pct_error <= 2.0, "{}", report.max_pct_error);

    // w/h = 3.0 within 2% of 53.296 ohm
    let z = m.forward(3.0).unwrap();
    assert!((z - 53.296).abs() / 53.296 < 0.02, "{z}");

    // monotone decreasing on the evaluation grid, like the target
    let preds: Vec<f64> = report.rows.iter().map(|r| r.predicted).collect();
    assert!(preds.windows(2).all(|w| w[1] < w[0]), "{preds:?}");

    envelope(&m, &train);
    soak(&m);
}

#[test]
fn frequency_surrogate_quality() {
    let (m, train, eval) = trained(&TableSetup::table2(), 42);
    let report = evaluate(&m, &eval).unwrap();
    println!("table 2 seed 42: max {:.4}%", report.max_pct_error);
    assert!(report.max_pct_error <= 0.3, "{}", report.max_pct_error);
    let preds: Vec<f64> = report.rows.iter().map(|r| r.predicted).collect();
    assert!(preds.windows(2).all(|w| w[1] < w[0]), "{preds:?}");
    envelope(&m, &train);
    soak(&m);
}

/// Predictions at training inputs stay inside the target range padded by 25%.
fn envelope(m: &MlpModel, train: &Dataset) {
    let lo = train.ys().fold(f64::INFINITY, f64::min);
    let hi = train.ys().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.25 * (hi - lo);
    for x in train.xs() {
        let y = m.forward(x).unwrap();
        assert!(y >= lo - pad && y <= hi + pad, "x={x} y={y}");
    }
}

/// The loss never rises across any 50-epoch window.
fn soak(m: &MlpModel) {
    let log = &m.training_log;
    assert!(log.len() > 50);
    for i in 0..log.len() - 50 {
        assert!(
            log[i + 50] <= log[i],
            "epoch {i}: {} -> {}",
            log[i],
            log[i + 50]
        );
    }
}

#[test]
fn training_is_bit_deterministic() {
    let setup = TableSetup::table2();
    let (train, _) = datasets(&setup);
    let cfg = TrainConfig {
        epochs: 2000,
        seed: 7,
        ..TrainConfig::default()
    };
    let a = fit_mlp(&MlpLayout::default(), &train, &cfg).unwrap();
    let b = fit_mlp(&MlpLayout::default(), &train, &cfg).unwrap();
    assert_eq!(a, b);
    let bits = |m: &MlpModel| m.parameters().map(f64::to_bits).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn constant_target_reaches_bias_solution() {
    let d = Dataset::new(
        txml_core::LineKind::MicrostripImpedance,
        2.0,
        Default::default(),
        (0..12)
            .map(|i| Sample {
                x: 1.0 + 0.5 * i as f64,
                y: 75.0,
            })
            .collect(),
    )
    .unwrap();
    let scaler = txml_core::Scaler::new(1.0, 6.5, 50.0, 100.0).unwrap();
    let m = txml_core::init_mlp(&MlpLayout::default(), 3)
        .unwrap()
        .with_scaler(scaler);
    let m = txml_core::train(m, &d, &TrainConfig::default()).unwrap();
    let worst = d
        .samples()
        .iter()
        .map(|s| (scaler.scale_y(m.forward(s.x).unwrap()) - scaler.scale_y(s.y)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}
