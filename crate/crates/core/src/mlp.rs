//! One-input, one-output feed-forward network trained full-batch on
//! min/max-normalized data. Backpropagation supplies both the loss gradient
//! and the per-sample Jacobian; the default update is Levenberg-Marquardt,
//! with gradient descent and Adam selectable through [`Optimizer`].
//!
//! Weights are stored row-major per layer with shape `(outputs, inputs)`.
//! Hidden layers use the configured activation; the output layer is linear.
//! All training arithmetic happens in normalized space; [`MlpModel::forward`]
//! takes and returns raw units.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sweep::{fit_scaler, Dataset, Scaler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::InvalidLayout(format!(
                "unknown activation `{other}`"
            ))),
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation's own output.
    fn slope_at_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpLayout {
    hidden_sizes: Vec<usize>,
    activation: Activation,
}

impl MlpLayout {
    pub fn new(hidden_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if hidden_sizes.is_empty() {
            return Err(Error::InvalidLayout(
                "at least one hidden layer is required".into(),
            ));
        }
        if let Some(i) = hidden_sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidLayout(format!("hidden layer {i} has size 0")));
        }
        Ok(Self {
            hidden_sizes,
            activation,
        })
    }

    pub fn hidden_sizes(&self) -> &[usize] {
        &self.hidden_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Full size list including the scalar input and output.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_sizes.len() + 2);
        sizes.push(1);
        sizes.extend_from_slice(&self.hidden_sizes);
        sizes.push(1);
        sizes
    }
}

impl Default for MlpLayout {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![8],
            activation: Activation::Tanh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.inputs..(r + 1) * self.inputs]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layout: MlpLayout,
    pub layers: Vec<Layer>,
    pub scaler: Option<Scaler>,
    pub seed: u64,
    /// Normalized training MSE recorded at the start of each epoch.
    pub training_log: Vec<f64>,
}

/// Glorot-uniform weights, zero biases, drawn from ChaCha8 seeded by `seed`.
pub fn init_mlp(layout: &MlpLayout, seed: u64) -> Result<MlpModel> {
    let layout = MlpLayout::new(layout.hidden_sizes.clone(), layout.activation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = layout.sizes();
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-r, r);
            let mut layer = Layer::zeros(fan_in, fan_out);
            for v in layer.weights.iter_mut() {
                *v = dist.sample(&mut rng);
            }
            layer
        })
        .collect();
    Ok(MlpModel {
        layout,
        layers,
        scaler: None,
        seed,
        training_log: Vec::new(),
    })
}

/// Reusable buffers for one forward/backward pass.
struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next: Vec<f64>,
}

/// Per-parameter gradient, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    fn from_flat(model: &MlpModel, flat: &[f64]) -> Self {
        let mut rest = flat;
        let layers = model
            .layers
            .iter()
            .map(|l| {
                let (w, tail) = rest.split_at(l.weights.len());
                let (b, tail) = tail.split_at(l.biases.len());
                rest = tail;
                Layer {
                    inputs: l.inputs,
                    outputs: l.outputs,
                    weights: w.to_vec(),
                    biases: b.to_vec(),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }
}

impl MlpModel {
    pub fn with_scaler(mut self, scaler: Scaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    fn scratch(&self) -> Scratch {
        let mut acts = vec![vec![0.0; 1]];
        acts.extend(self.layers.iter().map(|l| vec![0.0; l.outputs]));
        let widest = acts.iter().map(Vec::len).max().unwrap_or(1);
        Scratch {
            acts,
            delta: Vec::with_capacity(widest),
            next: Vec::with_capacity(widest),
        }
    }

    /// Fills `s.acts` for one normalized input and returns the output.
    fn forward_into(&self, x: f64, s: &mut Scratch) -> f64 {
        let last = self.layers.len() - 1;
        let act = self.layout.activation;
        s.acts[0][0] = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let (head, tail) = s.acts.split_at_mut(i + 1);
            let input = &head[i];
            for (r, out) in tail[0].iter_mut().enumerate() {
                let z = layer
                    .row(r)
                    .iter()
                    .zip(input)
                    .fold(layer.biases[r], |acc, (w, a)| acc + w * a);
                *out = if i == last { z } else { act.apply(z) };
            }
        }
        s.acts[last + 1][0]
    }

    /// Adds `seed · ∂output/∂θ` into `out` (ordered like [`Self::parameters`])
    /// using the activations left in `s` by the last forward pass.
    fn backprop_into(&self, s: &mut Scratch, seed: f64, out: &mut [f64]) {
        let act = self.layout.activation;
        s.delta.clear();
        s.delta.push(seed);
        let mut end = out.len();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &s.acts[l];
            let start = end - layer.weights.len() - layer.biases.len();
            let (w_grad, b_grad) = out[start..end].split_at_mut(layer.weights.len());
            for (r, d) in s.delta.iter().enumerate() {
                b_grad[r] += d;
                for (c, a) in input.iter().enumerate() {
                    w_grad[r * layer.inputs + c] += d * a;
                }
            }
            if l > 0 {
                s.next.clear();
                s.next.extend((0..layer.inputs).map(|c| {
                    let back: f64 = s
                        .delta
                        .iter()
                        .enumerate()
                        .map(|(r, d)| layer.weights[r * layer.inputs + c] * d)
                        .sum();
                    back * act.slope_at_output(input[c])
                }));
                std::mem::swap(&mut s.delta, &mut s.next);
            }
            end = start;
        }
    }

    /// Network output for an already-normalized input.
    pub fn forward_normalized(&self, x: f64) -> f64 {
        self.forward_into(x, &mut self.scratch())
    }

    pub fn forward(&self, x_raw: f64) -> Result<f64> {
        let scaler = self.scaler.as_ref().ok_or(Error::UnfittedScaler)?;
        let y = scaler.unscale_y(self.forward_normalized(scaler.scale_x(x_raw)));
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Domain(format!(
                "non-finite network output at x = {x_raw}"
            )))
        }
    }

    /// Mean squared error on `dataset`, in normalized units.
    pub fn loss(&self, dataset: &Dataset) -> Result<f64> {
        let scaler = self.scaler.ok_or(Error::UnfittedScaler)?;
        Ok(self.normalized_loss(&scaler, dataset))
    }

    fn normalized_loss(&self, scaler: &Scaler, dataset: &Dataset) -> f64 {
        let mut s = self.scratch();
        let sum: f64 = dataset
            .samples()
            .iter()
            .map(|p| {
                let r = self.forward_into(scaler.scale_x(p.x), &mut s) - scaler.scale_y(p.y);
                r * r
            })
            .sum();
        sum / dataset.len() as f64
    }

    /// Loss and its flat gradient.
    fn loss_and_gradient(&self, scaler: &Scaler, dataset: &Dataset) -> (f64, Vec<f64>) {
        let n = dataset.len() as f64;
        let mut s = self.scratch();
        let mut grad = vec![0.0; self.parameter_count()];
        let mut loss = 0.0;
        for p in dataset.samples() {
            let residual = self.forward_into(scaler.scale_x(p.x), &mut s) - scaler.scale_y(p.y);
            loss += residual * residual;
            self.backprop_into(&mut s, 2.0 * residual / n, &mut grad);
        }
        (loss / n, grad)
    }

    /// Residuals and the Jacobian of the outputs (one row per sample).
    fn residuals_and_jacobian(
        &self,
        scaler: &Scaler,
        dataset: &Dataset,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let n = dataset.len();
        let count = self.parameter_count();
        let mut s = self.scratch();
        let mut residuals = DVector::zeros(n);
        let mut jacobian = DMatrix::zeros(n, count);
        let mut row = vec![0.0; count];
        for (i, p) in dataset.samples().iter().enumerate() {
            residuals[i] = self.forward_into(scaler.scale_x(p.x), &mut s) - scaler.scale_y(p.y);
            row.iter_mut().for_each(|v| *v = 0.0);
            self.backprop_into(&mut s, 1.0, &mut row);
            for (j, v) in row.iter().enumerate() {
                jacobian[(i, j)] = *v;
            }
        }
        (residuals, jacobian)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }
}

/// Analytic gradient of the normalized MSE with respect to every weight and
/// bias. The model's scaler defines the normalization.
pub fn gradient_of_loss(model: &MlpModel, dataset: &Dataset) -> Result<Gradients> {
    let scaler = model.scaler.ok_or(Error::UnfittedScaler)?;
    let (_, flat) = model.loss_and_gradient(&scaler, dataset);
    Ok(Gradients::from_flat(model, &flat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchMode {
    #[default]
    FullBatch,
}

/// Full-batch update rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Plain gradient descent with the configured learning rate.
    GradientDescent,
    /// Adam with bias correction, using the configured learning rate.
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
    /// Damped Gauss-Newton on the residuals. A step is taken only if it
    /// lowers the loss; the damping shrinks by `factor` after an accepted step
    /// and grows by it after a rejected one. Training stops once the damping
    /// exceeds `max_damping`. The learning rate is not used.
    LevenbergMarquardt {
        initial_damping: f64,
        factor: f64,
        max_damping: f64,
    },
}

impl Optimizer {
    pub const fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub const fn levenberg_marquardt() -> Self {
        Optimizer::LevenbergMarquardt {
            initial_damping: 1e-3,
            factor: 10.0,
            max_damping: 1e10,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Optimizer::GradientDescent => "gd",
            Optimizer::Adam { .. } => "adam",
            Optimizer::LevenbergMarquardt { .. } => "lm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Optimizer::GradientDescent),
            "adam" => Ok(Self::adam()),
            "lm" => Ok(Self::levenberg_marquardt()),
            other => Err(Error::Config(format!(
                "unknown optimizer `{other}` (expected lm, adam or gd)"
            ))),
        }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Self::levenberg_marquardt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Step size for gradient descent and Adam.
    pub learning_rate: f64,
    pub batch_mode: BatchMode,
    pub optimizer: Optimizer,
    /// Initialization seed used by [`fit_mlp`].
    pub seed: u64,
    /// Stop once the normalized MSE falls to or below this value.
    pub target_mse: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            learning_rate: 0.05,
            batch_mode: BatchMode::FullBatch,
            optimizer: Optimizer::default(),
            seed: 42,
            target_mse: Some(1e-8),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if let Optimizer::LevenbergMarquardt {
            initial_damping,
            factor,
            max_damping,
        } = self.optimizer
        {
            if !(initial_damping > 0.0 && factor > 1.0 && max_damping >= initial_damping) {
                return Err(Error::Config("invalid damping schedule".into()));
            }
        }
        Ok(())
    }
}

/// Trains `model` on `dataset`. A scaler already set on the model is kept;
/// otherwise one is fitted to the dataset and stored on the returned model.
///
/// `training_log` receives the loss at the start of every epoch.
pub fn train(mut model: MlpModel, dataset: &Dataset, config: &TrainConfig) -> Result<MlpModel> {
    config.validate()?;
    let scaler = match model.scaler {
        Some(s) => s,
        None => fit_scaler(dataset)?,
    };
    model.scaler = Some(scaler);
    model.training_log.clear();

    match config.optimizer {
        Optimizer::LevenbergMarquardt {
            initial_damping,
            factor,
            max_damping,
        } => train_lm(
            &mut model,
            &scaler,
            dataset,
            config,
            initial_damping,
            factor,
            max_damping,
        )?,
        _ => train_first_order(&mut model, &scaler, dataset, config)?,
    }
    Ok(model)
}

fn train_first_order(
    model: &mut MlpModel,
    scaler: &Scaler,
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<()> {
    let count = model.parameter_count();
    let mut m = vec![0.0; count];
    let mut v = vec![0.0; count];
    let lr = config.learning_rate;

    for epoch in 1..=config.epochs {
        let (loss, grads) = model.loss_and_gradient(scaler, dataset);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        model.training_log.push(loss);
        if config.target_mse.is_some_and(|t| loss <= t) {
            break;
        }
        match config.optimizer {
            Optimizer::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                let bias1 = 1.0 - beta1.powi(epoch as i32);
                let bias2 = 1.0 - beta2.powi(epoch as i32);
                for (((p, g), m), v) in model
                    .params_mut()
                    .zip(&grads)
                    .zip(m.iter_mut())
                    .zip(v.iter_mut())
                {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    *p -= lr * (*m / bias1) / ((*v / bias2).sqrt() + epsilon);
                }
            }
            _ => {
                for (p, g) in model.params_mut().zip(&grads) {
                    *p -= lr * g;
                }
            }
        }
    }
    Ok(())
}

fn train_lm(
    model: &mut MlpModel,
    scaler: &Scaler,
    dataset: &Dataset,
    config: &TrainConfig,
    initial_damping: f64,
    factor: f64,
    max_damping: f64,
) -> Result<()> {
    let n = dataset.len() as f64;
    let count = model.parameter_count();
    let mut damping = initial_damping;

    'epochs: for epoch in 1..=config.epochs {
        let (residuals, jacobian) = model.residuals_and_jacobian(scaler, dataset);
        let loss = residuals.norm_squared() / n;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch, loss });
        }
        model.training_log.push(loss);
        if config.target_mse.is_some_and(|t| loss <= t) {
            break;
        }
        let normal = jacobian.tr_mul(&jacobian);
        let rhs = -jacobian.tr_mul(&residuals);
        let current: Vec<f64> = model.parameters().collect();
        loop {
            let damped = &normal + DMatrix::identity(count, count) * damping;
            if let Some(step) = damped.cholesky().map(|c| c.solve(&rhs)) {
                for ((p, p0), d) in model.params_mut().zip(&current).zip(step.iter()) {
                    *p = p0 + d;
                }
                let trial = model.normalized_loss(scaler, dataset);
                if trial < loss {
                    damping = (damping / factor).max(f64::MIN_POSITIVE);
                    continue 'epochs;
                }
            }
            damping *= factor;
            if damping > max_damping {
                for (p, p0) in model.params_mut().zip(&current) {
                    *p = *p0;
                }
                break 'epochs;
            }
        }
    }
    Ok(())
}

/// Initializes from `config.seed` and trains.
pub fn fit_mlp(layout: &MlpLayout, dataset: &Dataset, config: &TrainConfig) -> Result<MlpModel> {
    train(init_mlp(layout, config.seed)?, dataset, config)
}
