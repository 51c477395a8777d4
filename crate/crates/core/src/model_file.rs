//! Line-oriented text format shared by linear and MLP models.
//!
//! ```text
//! txml-model v1
//! kind mlp
//! scaler <x_min> <x_max> <y_min> <y_max>
//! layout 1 8 1 tanh
//! seed 42
//! w <layer> <row> <values…>
//! b <layer> <values…>
//! ```
//!
//! Linear models carry `coef <slope> <intercept>` instead of the layout,
//! seed and weight lines, plus an optional
//! `trained_on <kind> <eps_r> <x_min> <x_max> <step>` provenance line.

use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::LineKind;
use crate::error::{Error, Result};
use crate::fsutil::{fmt_f64, write_atomic};
use crate::mlp::{Activation, Layer, MlpLayout, MlpModel};
use crate::ols::{LinearModel, TrainedOn};
use crate::sweep::Scaler;

pub const MODEL_MAGIC: &str = "txml-model";
pub const MODEL_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ols(LinearModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn kind_tag(&self) -> &'static str {
        match self {
            Model::Ols(_) => "ols",
            Model::Mlp(_) => "mlp",
        }
    }
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(fmt_f64)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn model_to_string(model: &Model) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
    let _ = writeln!(out, "kind {}", model.kind_tag());
    match model {
        Model::Ols(m) => {
            let s = m.scaler;
            let _ = writeln!(out, "scaler {}", join([s.x_min, s.x_max, s.y_min, s.y_max]));
            if let Some(t) = m.trained_on {
                let _ = writeln!(
                    out,
                    "trained_on {} {}",
                    t.kind,
                    join([t.eps_r, t.x_min, t.x_max, t.step])
                );
            }
            let _ = writeln!(out, "coef {}", join([m.slope, m.intercept]));
        }
        Model::Mlp(m) => {
            let s = m.scaler.ok_or(Error::UnfittedScaler)?;
            let _ = writeln!(out, "scaler {}", join([s.x_min, s.x_max, s.y_min, s.y_max]));
            let sizes: Vec<String> = m.layout.sizes().iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "layout {} {}",
                sizes.join(" "),
                m.layout.activation().as_str()
            );
            let _ = writeln!(out, "seed {}", m.seed);
            for (l, layer) in m.layers.iter().enumerate() {
                for r in 0..layer.outputs {
                    let _ = writeln!(out, "w {l} {r} {}", join(layer.row(r).iter().copied()));
                }
                let _ = writeln!(out, "b {l} {}", join(layer.biases.iter().copied()));
            }
        }
    }
    Ok(out)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(model)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, whitespace-split tokens).
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, tokens) = self
            .next()
            .ok_or_else(|| Error::Truncated(format!("missing `{key}` line")))?;
        if tokens[0] != key {
            return Err(Error::MalformedModel {
                line,
                message: format!("expected `{key}`, found `{}`", tokens[0]),
            });
        }
        Ok((line, tokens[1..].to_vec()))
    }
}

fn numbers(line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::MalformedModel {
                line,
                message: format!("`{t}` is not a number"),
            })
        })
        .collect()
}

fn exactly<const N: usize>(line: usize, what: &str, values: Vec<f64>) -> Result<[f64; N]> {
    let len = values.len();
    values.try_into().map_err(|_| Error::MalformedModel {
        line,
        message: format!("`{what}` takes {N} values, found {len}"),
    })
}

fn index(line: usize, token: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::MalformedModel {
        line,
        message: format!("`{token}` is not an index"),
    })
}

pub fn model_from_str(text: &str) -> Result<Model> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (line, header) = lines
        .next()
        .ok_or_else(|| Error::Truncated("empty model file".into()))?;
    if header.len() != 2 || header[0] != MODEL_MAGIC {
        return Err(Error::MalformedModel {
            line,
            message: format!("expected `{MODEL_MAGIC} {MODEL_VERSION}` header"),
        });
    }
    if header[1] != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION.into(),
            found: header[1].into(),
        });
    }

    let (line, kind) = lines.expect("kind")?;
    let kind = match kind.as_slice() {
        ["ols"] => "ols",
        ["mlp"] => "mlp",
        other => {
            return Err(Error::MalformedModel {
                line,
                message: format!("unknown model kind `{}`", other.join(" ")),
            })
        }
    };
    let (line, s) = lines.expect("scaler")?;
    let [x_min, x_max, y_min, y_max] = exactly(line, "scaler", numbers(line, &s)?)?;
    let bounds = Scaler {
        x_min,
        x_max,
        y_min,
        y_max,
    };

    let model = if kind == "ols" {
        parse_ols(&mut lines, bounds)?
    } else {
        let scaler = Scaler::new(x_min, x_max, y_min, y_max)?;
        parse_mlp(&mut lines, scaler)?
    };
    if let Some((line, tokens)) = lines.next() {
        return Err(Error::MalformedModel {
            line,
            message: format!("unexpected trailing `{}`", tokens[0]),
        });
    }
    Ok(model)
}

fn parse_ols(lines: &mut Lines<'_>, scaler: Scaler) -> Result<Model> {
    let (mut line, mut tokens) = lines
        .next()
        .ok_or_else(|| Error::Truncated("missing `coef` line".into()))?;
    let mut trained_on = None;
    if tokens[0] == "trained_on" {
        if tokens.len() != 6 {
            return Err(Error::MalformedModel {
                line,
                message: "`trained_on` takes a kind and 4 values".into(),
            });
        }
        let kind: LineKind = tokens[1].parse()?;
        let [eps_r, x_min, x_max, step] =
            exactly(line, "trained_on", numbers(line, &tokens[2..])?)?;
        trained_on = Some(TrainedOn {
            kind,
            eps_r,
            x_min,
            x_max,
            step,
        });
        (line, tokens) = lines
            .next()
            .ok_or_else(|| Error::Truncated("missing `coef` line".into()))?;
    }
    if tokens[0] != "coef" {
        return Err(Error::MalformedModel {
            line,
            message: format!("expected `coef`, found `{}`", tokens[0]),
        });
    }
    let [slope, intercept] = exactly(line, "coef", numbers(line, &tokens[1..])?)?;
    Ok(Model::Ols(LinearModel {
        slope,
        intercept,
        scaler,
        trained_on,
    }))
}

fn parse_mlp(lines: &mut Lines<'_>, scaler: Scaler) -> Result<Model> {
    let (line, layout_tokens) = lines.expect("layout")?;
    let (activation, size_tokens) = layout_tokens.split_last().ok_or(Error::MalformedModel {
        line,
        message: "empty layout".into(),
    })?;
    let activation = Activation::parse(activation)?;
    let sizes = size_tokens
        .iter()
        .map(|t| index(line, t))
        .collect::<Result<Vec<_>>>()?;
    if sizes.len() < 3 || sizes[0] != 1 || sizes[sizes.len() - 1] != 1 {
        return Err(Error::InvalidLayout(format!(
            "layout must be `1 <hidden…> 1`, found {sizes:?}"
        )));
    }
    let layout = MlpLayout::new(sizes[1..sizes.len() - 1].to_vec(), activation)?;

    let (line, seed) = lines.expect("seed")?;
    let seed: u64 = match seed.as_slice() {
        [s] => s.parse().map_err(|_| Error::MalformedModel {
            line,
            message: format!("`{s}` is not a seed"),
        })?,
        _ => {
            return Err(Error::MalformedModel {
                line,
                message: "`seed` takes one value".into(),
            })
        }
    };

    let mut layers: Vec<Layer> = sizes
        .windows(2)
        .map(|w| Layer {
            inputs: w[0],
            outputs: w[1],
            weights: vec![f64::NAN; w[0] * w[1]],
            biases: vec![f64::NAN; w[1]],
        })
        .collect();
    let mut seen_rows = vec![vec![false; 0]; layers.len()];
    for (l, layer) in layers.iter().enumerate() {
        seen_rows[l] = vec![false; layer.outputs];
    }
    let mut seen_bias = vec![false; layers.len()];
    let expected_lines: usize = layers.iter().map(|l| l.outputs + 1).sum();

    for _ in 0..expected_lines {
        let (line, tokens) = lines.next().ok_or_else(|| {
            Error::Truncated(format!(
                "expected {expected_lines} weight/bias lines for layout {sizes:?}"
            ))
        })?;
        match tokens[0] {
            "w" if tokens.len() >= 3 => {
                let l = index(line, tokens[1])?;
                let r = index(line, tokens[2])?;
                let layer = layers.get_mut(l).ok_or_else(|| {
                    Error::Dimension(format!("line {line}: no layer {l} in layout {sizes:?}"))
                })?;
                if r >= layer.outputs {
                    return Err(Error::Dimension(format!(
                        "line {line}: layer {l} has {} rows, got row {r}",
                        layer.outputs
                    )));
                }
                let values = numbers(line, &tokens[3..])?;
                if values.len() != layer.inputs {
                    return Err(Error::Dimension(format!(
                        "line {line}: layer {l} row {r} needs {} weights, found {}",
                        layer.inputs,
                        values.len()
                    )));
                }
                if std::mem::replace(&mut seen_rows[l][r], true) {
                    return Err(Error::MalformedModel {
                        line,
                        message: format!("duplicate weight row {l} {r}"),
                    });
                }
                layer.weights[r * layer.inputs..(r + 1) * layer.inputs].copy_from_slice(&values);
            }
            "b" if tokens.len() >= 2 => {
                let l = index(line, tokens[1])?;
                let layer = layers.get_mut(l).ok_or_else(|| {
                    Error::Dimension(format!("line {line}: no layer {l} in layout {sizes:?}"))
                })?;
                let values = numbers(line, &tokens[2..])?;
                if values.len() != layer.outputs {
                    return Err(Error::Dimension(format!(
                        "line {line}: layer {l} needs {} biases, found {}",
                        layer.outputs,
                        values.len()
                    )));
                }
                if std::mem::replace(&mut seen_bias[l], true) {
                    return Err(Error::MalformedModel {
                        line,
                        message: format!("duplicate bias line for layer {l}"),
                    });
                }
                layer.biases.copy_from_slice(&values);
            }
            other => {
                return Err(Error::MalformedModel {
                    line,
                    message: format!("expected `w` or `b` line, found `{other}`"),
                })
            }
        }
    }
    if layers
        .iter()
        .any(|l| l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()))
    {
        return Err(Error::Dimension("missing or non-finite parameters".into()));
    }
    Ok(Model::Mlp(MlpModel {
        layout,
        layers,
        scaler: Some(scaler),
        seed,
        training_log: Vec::new(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::init_mlp;

    fn mlp() -> Model {
        let layout = MlpLayout::new(vec![3, 2], Activation::Sigmoid).unwrap();
        let m = init_mlp(&layout, 11)
            .unwrap()
            .with_scaler(Scaler::new(1.0, 9.5, 20.0, 100.0).unwrap());
        Model::Mlp(m)
    }

    #[test]
    fn mlp_text_layout() {
        let text = model_to_string(&mlp()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "txml-model v1");
        assert_eq!(lines[1], "kind mlp");
        assert_eq!(lines[2], "scaler 1 9.5 20 100");
        assert_eq!(lines[3], "layout 1 3 2 1 sigmoid");
        assert_eq!(lines[4], "seed 11");
        assert!(lines[5].starts_with("w 0 0 "));
        assert_eq!(lines.len(), 5 + 3 + 1 + 2 + 1 + 1 + 1);
        assert_eq!(model_from_str(&text).unwrap(), mlp());
    }

    #[test]
    fn ols_round_trip() {
        let m = Model::Ols(LinearModel {
            slope: -8.350802941176472,
            intercept: 85.49225147058824,
            scaler: Scaler::new(1.0, 8.5, 24.445, 98.525).unwrap(),
            trained_on: Some(TrainedOn {
                kind: LineKind::MicrostripImpedance,
                eps_r: 2.0,
                x_min: 1.0,
                x_max: 8.5,
                step: 0.5,
            }),
        });
        let text = model_to_string(&m).unwrap();
        assert!(
            text.contains("\ncoef -8.350802941176472 85.49225147058824\n"),
            "{text}"
        );
        assert_eq!(model_from_str(&text).unwrap(), m);
    }

    #[test]
    fn version_mismatch() {
        let text = model_to_string(&mlp()).unwrap().replacen("v1", "v2", 1);
        match model_from_str(&text) {
            Err(Error::VersionMismatch { expected, found }) => {
                assert_eq!(expected, "v1");
                assert_eq!(found, "v2");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_file() {
        let text = model_to_string(&mlp()).unwrap();
        let cut: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
        assert!(matches!(model_from_str(&cut), Err(Error::Truncated(_))));
        assert!(matches!(model_from_str(""), Err(Error::Truncated(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let text = model_to_string(&mlp()).unwrap();
        let bad: String = text
            .lines()
            .map(|l| {
                if l.starts_with("w 1 0 ") {
                    format!("{l} 0.5\n")
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        assert!(matches!(model_from_str(&bad), Err(Error::Dimension(_))));

        let bad = text.replacen("w 0 2 ", "w 0 7 ", 1);
        assert!(matches!(model_from_str(&bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn unfitted_mlp_cannot_be_saved() {
        let m = init_mlp(&MlpLayout::default(), 1).unwrap();
        assert!(matches!(
            model_to_string(&Model::Mlp(m)),
            Err(Error::UnfittedScaler)
        ));
    }
}
