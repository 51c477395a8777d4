use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use txml_core::mlp::{gradient_of_loss, init_mlp, Activation, MlpLayout, MlpModel};
use txml_core::sweep::{fit_scaler, Dataset, Sample};
use txml_core::LineKind;

const STEP: f64 = 1e-6;
const TOLERANCE: f64 = 1e-4;
/// Keeps the relative error meaningful for parameters whose gradient is ~0.
const FLOOR: f64 = 1e-7;

fn random_dataset(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut x = 1.0;
    let samples = (0..n)
        .map(|_| {
            x += rng.gen_range(0.1..1.5);
            Sample {
                x,
                y: rng.gen_range(10.0..120.0),
            }
        })
        .collect();
    Dataset::new(
        LineKind::MicrostripImpedance,
        2.0,
        Default::default(),
        samples,
    )
    .unwrap()
}

fn perturbed_loss(model: &MlpModel, data: &Dataset, index: usize, delta: f64) -> f64 {
    let mut m = model.clone();
    let mut k = index;
    for layer in &mut m.layers {
        let (w, b) = (layer.weights.len(), layer.biases.len());
        if k < w {
            layer.weights[k] += delta;
            break;
        }
        k -= w;
        if k < b {
            layer.biases[k] += delta;
            break;
        }
        k -= b;
    }
    m.loss(data).unwrap()
}

/// Returns the worst relative error over all parameters.
fn worst_relative_error(layout: &MlpLayout, seed: u64, n: usize) -> f64 {
    let data = random_dataset(seed, n);
    let model = init_mlp(layout, seed)
        .unwrap()
        .with_scaler(fit_scaler(&data).unwrap());
    let analytic: Vec<f64> = gradient_of_loss(&model, &data).unwrap().iter().collect();
    assert_eq!(analytic.len(), model.parameter_count());
    analytic
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let plus = perturbed_loss(&model, &data, i, STEP);
            let minus = perturbed_loss(&model, &data, i, -STEP);
            let numeric = (plus - minus) / (2.0 * STEP);
            (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR)
        })
        .fold(0.0, f64::max)
}

#[test]
fn default_layout_matches_central_differences_at_three_seeds() {
    for seed in [1, 2, 3] {
        let worst = worst_relative_error(&MlpLayout::default(), seed, 5);
        assert!(worst <= TOLERANCE, "seed {seed}: {worst:e}");
    }
}

#[test]
fn deeper_sigmoid_layout_matches_central_differences() {
    let layout = MlpLayout::new(vec![5, 3], Activation::Sigmoid).unwrap();
    for seed in [11, 12, 13] {
        let worst = worst_relative_error(&layout, seed, 7);
        assert!(worst <= TOLERANCE, "seed {seed}: {worst:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn backprop_agrees_with_finite_differences(seed in any::<u64>(), n in 2usize..12) {
        let worst = worst_relative_error(&MlpLayout::default(), seed, n);
        prop_assert!(worst <= TOLERANCE, "{worst:e}");
    }
}
