//! Surrogate models for planar transmission lines.
//!
//! The closed-form microstrip impedance and patch resonant-frequency models in
//! [`analytic`] generate sweeps ([`sweep`]) that train a least-squares line
//! ([`ols`]) and a small feed-forward network ([`mlp`]). [`eval`] scores either
//! surrogate against the closed form, [`plot`] renders SVG charts, and
//! [`reproduce`] runs the whole pipeline for the two reference tables in
//! [`published`].

pub mod analytic;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod mlp;
pub mod model_file;
pub mod ols;
pub mod plot;
pub mod published;
pub mod reproduce;
pub mod sweep;

pub use analytic::{
    effective_permittivity, line_model, microstrip_impedance, patch_length_extension,
    patch_resonant_frequency, FixedParams, LengthExtension, LineKind, MicrostripGeometry,
    PatchGeometry, PatchLength, Unit, SPEED_OF_LIGHT,
};
pub use error::{Error, Result};
pub use eval::{evaluate, percent_error, EvalReport, EvalRow, Predictor};
pub use mlp::{
    fit_mlp, gradient_of_loss, init_mlp, train, Activation, MlpLayout, MlpModel, Optimizer,
    TrainConfig,
};
pub use model_file::{load_model, save_model, Model};
pub use ols::{fit_ols, predict_linear, LinearModel};
pub use sweep::{fit_scaler, generate_sweep, read_csv, write_csv, Dataset, Sample, Scaler};
