//! Error metrics and per-point evaluation reports.

use std::path::Path;

use crate::analytic::{FixedParams, LineKind, Unit};
use crate::error::{Error, Result};
use crate::fsutil::{fmt_f64, write_atomic};
use crate::mlp::MlpModel;
use crate::model_file::Model;
use crate::ols::LinearModel;
use crate::sweep::Dataset;

/// Anything that maps w/h to a predicted target value.
pub trait Predictor {
    fn predict(&self, x: f64) -> Result<f64>;

    fn describe(&self) -> String;
}

impl Predictor for LinearModel {
    fn predict(&self, x: f64) -> Result<f64> {
        Ok(LinearModel::predict(self, x))
    }

    fn describe(&self) -> String {
        format!("ols slope={} intercept={}", self.slope, self.intercept)
    }
}

impl Predictor for MlpModel {
    fn predict(&self, x: f64) -> Result<f64> {
        self.forward(x)
    }

    fn describe(&self) -> String {
        let sizes: Vec<String> = self.layout.sizes().iter().map(usize::to_string).collect();
        format!(
            "mlp [{}] {} seed={}",
            sizes.join(","),
            self.layout.activation().as_str(),
            self.seed
        )
    }
}

impl Predictor for Model {
    fn predict(&self, x: f64) -> Result<f64> {
        match self {
            Model::Ols(m) => Predictor::predict(m, x),
            Model::Mlp(m) => Predictor::predict(m, x),
        }
    }

    fn describe(&self) -> String {
        match self {
            Model::Ols(m) => m.describe(),
            Model::Mlp(m) => m.describe(),
        }
    }
}

/// The closed-form model itself, used as a reference predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPredictor {
    pub kind: LineKind,
    pub eps_r: f64,
    pub params: FixedParams,
}

impl AnalyticPredictor {
    pub fn for_dataset(dataset: &Dataset) -> Self {
        Self {
            kind: dataset.kind(),
            eps_r: dataset.eps_r(),
            params: dataset.fixed_params().clone(),
        }
    }
}

impl Predictor for AnalyticPredictor {
    fn predict(&self, x: f64) -> Result<f64> {
        self.kind.evaluate(self.eps_r, x, &self.params)
    }

    fn describe(&self) -> String {
        format!("analytic {} eps_r={}", self.kind, self.eps_r)
    }
}

/// Wraps a closure, e.g. a lookup into a published prediction column.
pub struct FnPredictor<F> {
    pub f: F,
    pub descriptor: String,
}

impl<F: Fn(f64) -> Result<f64>> Predictor for FnPredictor<F> {
    fn predict(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }

    fn describe(&self) -> String {
        self.descriptor.clone()
    }
}

pub fn percent_error(actual: f64, predicted: f64) -> Result<f64> {
    if actual == 0.0 {
        return Err(Error::ZeroActual);
    }
    Ok(100.0 * (actual - predicted).abs() / actual.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub x: f64,
    pub actual: f64,
    pub predicted: f64,
    pub abs_error: f64,
    pub pct_error: f64,
}

impl EvalRow {
    pub fn new(x: f64, actual: f64, predicted: f64) -> Result<Self> {
        Ok(Self {
            x,
            actual,
            predicted,
            abs_error: (actual - predicted).abs(),
            pct_error: percent_error(actual, predicted)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub max_pct_error: f64,
    pub mean_pct_error: f64,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub model_descriptor: String,
    pub unit: Unit,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<EvalRow>, model_descriptor: String, unit: Unit) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyReport);
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].x <= w[0].x) {
            return Err(Error::InvalidDataset(format!(
                "report rows must ascend in x: {} follows {}",
                w[1].x, w[0].x
            )));
        }
        let n = rows.len() as f64;
        let max_pct_error = rows.iter().map(|r| r.pct_error).fold(0.0, f64::max);
        let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        let mean_pct_error = rows.iter().map(|r| r.pct_error).sum::<f64>() / n;
        let mean_abs_error = rows.iter().map(|r| r.abs_error).sum::<f64>() / n;
        Ok(Self {
            rows,
            max_pct_error,
            mean_pct_error,
            max_abs_error,
            mean_abs_error,
            model_descriptor,
            unit,
        })
    }

    /// Row holding the largest percent error (first one on ties).
    pub fn worst_row(&self) -> &EvalRow {
        self.rows
            .iter()
            .find(|r| r.pct_error == self.max_pct_error)
            .expect("non-empty report")
    }
}

/// Scores `predictor` against every point of `eval`.
pub fn evaluate<P: Predictor + ?Sized>(predictor: &P, eval: &Dataset) -> Result<EvalReport> {
    let rows = eval
        .samples()
        .iter()
        .map(|s| {
            let predicted = predictor.predict(s.x).map_err(|e| Error::Predictor {
                x: s.x,
                source: Box::new(e),
            })?;
            EvalRow::new(s.x, s.y, predicted)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_rows(rows, predictor.describe(), eval.unit())
}

pub const REPORT_HEADER: [&str; 7] = [
    "x_w_over_h",
    "actual",
    "predicted",
    "abs_error",
    "pct_error",
    "actual_full",
    "predicted_full",
];

pub fn report_to_csv(report: &EvalReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = REPORT_HEADER.join(",");
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{},{}\n",
            fmt_f64(r.x),
            r.actual,
            r.predicted,
            r.abs_error,
            r.pct_error,
            fmt_f64(r.actual),
            fmt_f64(r.predicted)
        ));
    }
    Ok(out)
}

pub fn write_report_csv(report: &EvalReport, path: &Path) -> Result<()> {
    write_atomic(path, report_to_csv(report)?.as_bytes())
}

/// Rebuilds a report from its full-precision columns; the display columns
/// are recomputed, not trusted.
pub fn report_from_csv(text: &str, unit: Unit, model_descriptor: String) -> Result<EvalReport> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: "<memory>".into(),
        source,
    };
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(REPORT_HEADER.iter().copied()) {
        let column = header
            .iter()
            .zip(REPORT_HEADER)
            .find(|(got, want)| got != want)
            .map_or_else(|| "<count>".to_string(), |(got, _)| got.to_string());
        return Err(Error::Schema {
            line: 1,
            column,
            message: format!("expected header `{}`", REPORT_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| {
            record[i].parse::<f64>().map_err(|_| Error::NonNumeric {
                line,
                column: REPORT_HEADER[i].to_string(),
                value: record[i].to_string(),
            })
        };
        rows.push(EvalRow::new(cell(0)?, cell(5)?, cell(6)?)?);
    }
    EvalReport::from_rows(rows, model_descriptor, unit)
}

pub fn read_report_csv(path: &Path, unit: Unit) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    report_from_csv(&text, unit, path.display().to_string())
}
