//! Synthetic datasets generated by sweeping w/h through a line model.

use std::cmp::Ordering;
use std::path::Path;

use crate::analytic::{FixedParams, LineKind, Unit};
use crate::error::{Error, Result};
use crate::fsutil::{fmt_f64, write_atomic};

/// One (w/h, target) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
}

/// An ordered sweep of samples sharing one line kind, dielectric constant and
/// set of fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    kind: LineKind,
    eps_r: f64,
    fixed_params: FixedParams,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Validates that samples are non-empty, strictly increasing in x and have
    /// finite positive targets.
    pub fn new(
        kind: LineKind,
        eps_r: f64,
        fixed_params: FixedParams,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.x.is_finite() {
                return Err(Error::InvalidDataset(format!(
                    "sample {i}: x = {} is not finite",
                    s.x
                )));
            }
            if !(s.y.is_finite() && s.y > 0.0) {
                return Err(Error::InvalidDataset(format!(
                    "sample {i}: y = {} must be finite and positive",
                    s.y
                )));
            }
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].x <= w[0].x) {
            return Err(Error::InvalidDataset(format!(
                "x must be strictly increasing: {} follows {}",
                w[1].x, w[0].x
            )));
        }
        Ok(Self {
            kind,
            eps_r,
            fixed_params,
            samples,
        })
    }

    pub fn kind(&self) -> LineKind {
        self.kind
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r
    }

    pub fn fixed_params(&self) -> &FixedParams {
        &self.fixed_params
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn unit(&self) -> Unit {
        self.kind.unit()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.x)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.y)
    }

    /// Same descriptor, different samples. Used to build target variants of a
    /// sweep (e.g. model outputs on the same grid).
    pub fn with_samples(&self, samples: Vec<Sample>) -> Result<Self> {
        Self::new(self.kind, self.eps_r, self.fixed_params.clone(), samples)
    }
}

/// Number of grid points for a sweep from `x_min` to `x_max` in steps of `step`.
/// The final point may overshoot `x_max` by less than half a step.
pub fn sweep_len(x_min: f64, x_max: f64, step: f64) -> usize {
    ((x_max - x_min) / step + 0.5).floor() as usize + 1
}

/// Evaluates `kind` at `x_min, x_min + step, …` and collects the samples.
pub fn generate_sweep(
    kind: LineKind,
    eps_r: f64,
    fixed_params: &FixedParams,
    x_min: f64,
    x_max: f64,
    step: f64,
) -> Result<Dataset> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::Domain(format!("step = {step} must be > 0")));
    }
    if !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::Domain("sweep bounds must be finite".into()));
    }
    if x_max < x_min {
        return Err(Error::EmptyRange(format!(
            "x_max = {x_max} is below x_min = {x_min}"
        )));
    }
    let samples = (0..sweep_len(x_min, x_max, step))
        .map(|i| {
            let x = x_min + i as f64 * step;
            kind.evaluate(eps_r, x, fixed_params)
                .map(|y| Sample { x, y })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(kind, eps_r, fixed_params.clone(), samples)
}

/// Min/max normalization of inputs and targets onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Scaler {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if x_min.partial_cmp(&x_max) != Some(Ordering::Less) {
            return Err(Error::DegenerateRange {
                axis: "x",
                value: x_min,
            });
        }
        if y_min.partial_cmp(&y_max) != Some(Ordering::Less) {
            return Err(Error::DegenerateRange {
                axis: "y",
                value: y_min,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Data bounds without the degeneracy check. Linear fits record these even
    /// when the targets are constant.
    pub(crate) fn bounds_of(dataset: &Dataset) -> Self {
        let (x_min, x_max) = min_max(dataset.xs());
        let (y_min, y_max) = min_max(dataset.ys());
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn scale_x(&self, x: f64) -> f64 {
        (x - self.x_min) / (self.x_max - self.x_min)
    }

    pub fn unscale_x(&self, x: f64) -> f64 {
        x * (self.x_max - self.x_min) + self.x_min
    }

    pub fn scale_y(&self, y: f64) -> f64 {
        (y - self.y_min) / (self.y_max - self.y_min)
    }

    pub fn unscale_y(&self, y: f64) -> f64 {
        y * (self.y_max - self.y_min) + self.y_min
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

pub fn fit_scaler(dataset: &Dataset) -> Result<Scaler> {
    let b = Scaler::bounds_of(dataset);
    Scaler::new(b.x_min, b.x_max, b.y_min, b.y_max)
}

pub const DATASET_HEADER: [&str; 7] = [
    "kind",
    "eps_r",
    "param_name",
    "param_value",
    "x_w_over_h",
    "y_value",
    "y_unit",
];

/// Multiple fixed parameters share the single name/value column pair, joined
/// with `;` in key order.
fn encode_params(params: &FixedParams) -> (String, String) {
    let names: Vec<&str> = params.keys().map(String::as_str).collect();
    let values: Vec<String> = params.values().map(|v| fmt_f64(*v)).collect();
    (names.join(";"), values.join(";"))
}

fn decode_params(line: u64, names: &str, values: &str) -> Result<FixedParams> {
    if names.is_empty() && values.is_empty() {
        return Ok(FixedParams::new());
    }
    let names: Vec<&str> = names.split(';').collect();
    let values: Vec<&str> = values.split(';').collect();
    if names.len() != values.len() {
        return Err(Error::Schema {
            line,
            column: "param_value".into(),
            message: format!("{} names but {} values", names.len(), values.len()),
        });
    }
    names
        .into_iter()
        .zip(values)
        .map(|(n, v)| Ok((n.to_string(), parse_cell(line, "param_value", v)?)))
        .collect()
}

fn parse_cell(line: u64, column: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::NonNumeric {
        line,
        column: column.to_string(),
        value: value.to_string(),
    })
}

pub fn dataset_to_csv(dataset: &Dataset) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |source| Error::Csv {
        path: "<memory>".into(),
        source,
    };
    w.write_record(DATASET_HEADER).map_err(csv_err)?;
    let (names, values) = encode_params(&dataset.fixed_params);
    let eps = fmt_f64(dataset.eps_r);
    for s in &dataset.samples {
        w.write_record([
            dataset.kind.as_str(),
            &eps,
            &names,
            &values,
            &fmt_f64(s.x),
            &fmt_f64(s.y),
            dataset.unit().as_str(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(dataset)?.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    dataset_from_csv(&text).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: "<memory>".into(),
        source,
    };
    let header = r.headers().map_err(csv_err)?.clone();
    for (i, expected) in DATASET_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *expected => {}
            Some(got) => {
                return Err(Error::Schema {
                    line: 1,
                    column: got.to_string(),
                    message: format!("expected `{expected}`"),
                })
            }
            None => {
                return Err(Error::Schema {
                    line: 1,
                    column: expected.to_string(),
                    message: "missing column".into(),
                })
            }
        }
    }
    if let Some(extra) = header.get(DATASET_HEADER.len()) {
        return Err(Error::Schema {
            line: 1,
            column: extra.to_string(),
            message: "unexpected column".into(),
        });
    }

    let mut descriptor: Option<(LineKind, f64, FixedParams)> = None;
    let mut samples: Vec<Sample> = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let kind: LineKind = record[0].parse().map_err(|_| Error::Schema {
            line,
            column: "kind".into(),
            message: format!("unknown kind `{}`", &record[0]),
        })?;
        let eps_r = parse_cell(line, "eps_r", &record[1])?;
        let params = decode_params(line, &record[2], &record[3])?;
        let x = parse_cell(line, "x_w_over_h", &record[4])?;
        let y = parse_cell(line, "y_value", &record[5])?;
        if record[6] != *kind.unit().as_str() {
            return Err(Error::Schema {
                line,
                column: "y_unit".into(),
                message: format!("`{}` does not match kind {kind}", &record[6]),
            });
        }
        match &descriptor {
            None => descriptor = Some((kind, eps_r, params)),
            Some((k, e, p)) => {
                if *k != kind || e.to_bits() != eps_r.to_bits() || *p != params {
                    return Err(Error::Schema {
                        line,
                        column: "kind".into(),
                        message: "row descriptor differs from the first row".into(),
                    });
                }
            }
        }
        if let Some(prev) = samples.last() {
            if x <= prev.x {
                return Err(Error::NonMonotone {
                    line,
                    x,
                    previous: prev.x,
                });
            }
        }
        samples.push(Sample { x, y });
    }
    let (kind, eps_r, params) =
        descriptor.ok_or_else(|| Error::InvalidDataset("file has no data rows".into()))?;
    Dataset::new(kind, eps_r, params, samples)
}
