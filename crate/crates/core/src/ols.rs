//! Single-feature ordinary least squares in raw units.

use crate::analytic::LineKind;
use crate::error::{Error, Result};
use crate::sweep::{Dataset, Scaler};

/// What a model was fitted on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainedOn {
    pub kind: LineKind,
    pub eps_r: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Mean grid spacing.
    pub step: f64,
}

impl TrainedOn {
    pub fn of(dataset: &Dataset) -> Self {
        let samples = dataset.samples();
        let x_min = samples[0].x;
        let x_max = samples[samples.len() - 1].x;
        let step = if samples.len() > 1 {
            (x_max - x_min) / (samples.len() - 1) as f64
        } else {
            0.0
        };
        Self {
            kind: dataset.kind(),
            eps_r: dataset.eps_r(),
            x_min,
            x_max,
            step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
    /// Bounds of the training data. Not used for prediction.
    pub scaler: Scaler,
    pub trained_on: Option<TrainedOn>,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        predict_linear(self, x)
    }
}

/// Fits `y = slope·x + intercept` by minimizing the sum of squared residuals.
pub fn fit_ols(dataset: &Dataset) -> Result<LinearModel> {
    let n = dataset.len() as f64;
    let x_mean = dataset.xs().sum::<f64>() / n;
    let y_mean = dataset.ys().sum::<f64>() / n;
    let (sxy, sxx) = dataset.samples().iter().fold((0.0, 0.0), |(sxy, sxx), s| {
        let dx = s.x - x_mean;
        (sxy + dx * (s.y - y_mean), sxx + dx * dx)
    });
    // Dataset x values are strictly increasing, so any two samples are distinct.
    if dataset.len() < 2 || sxx == 0.0 {
        return Err(Error::InsufficientData {
            distinct: dataset.len().min(1),
        });
    }
    let slope = sxy / sxx;
    Ok(LinearModel {
        slope,
        intercept: y_mean - slope * x_mean,
        scaler: Scaler::bounds_of(dataset),
        trained_on: Some(TrainedOn::of(dataset)),
    })
}

/// Fits a line to raw `(x, y)` pairs, bypassing dataset validation. Used to
/// recover the line implied by a published prediction column.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(x, y) in points {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    if points.len() < 2 || sxx == 0.0 {
        let distinct = if points.is_empty() { 0 } else { 1 };
        return Err(Error::InsufficientData { distinct });
    }
    let slope = sxy / sxx;
    Ok((slope, y_mean - slope * x_mean))
}

pub fn predict_linear(model: &LinearModel, x: f64) -> f64 {
    model.slope * x + model.intercept
}
