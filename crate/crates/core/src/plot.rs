//! Static SVG line charts for evaluation reports.
//!
//! Prediction charts draw the actual curve dotted and the predicted curve
//! dashed. Error charts draw absolute error as a single solid line. Output is
//! a fixed 800×600 canvas with no scripting, and identical reports render to
//! identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::Unit;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::fsutil::write_atomic;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 70.0;

pub const DOTTED: &str = "2 5";
pub const DASHED: &str = "10 6";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Prediction,
    Error,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::Prediction => "prediction",
            PlotKind::Error => "error",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prediction" => Ok(PlotKind::Prediction),
            "error" => Ok(PlotKind::Error),
            other => Err(Error::Config(format!("unknown plot kind `{other}`"))),
        }
    }
}

/// Quantity name, display unit and the factor converting raw values to it.
fn quantity(unit: Unit) -> (&'static str, &'static str, f64) {
    match unit {
        Unit::Ohm => ("Impedance", "Ω", 1.0),
        Unit::Hertz => ("Resonant Frequency", "MHz", 1e-6),
    }
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn spanning(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if lo < hi {
            Self { lo, hi }
        } else {
            // Single value: pad by 5% of its magnitude.
            let pad = if lo == 0.0 { 0.05 } else { 0.05 * lo.abs() };
            Self {
                lo: lo - pad,
                hi: hi + pad,
            }
        }
    }

    fn ticks(&self) -> (Vec<f64>, usize) {
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .into_iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        ((first..=last).map(|k| k as f64 * step).collect(), decimals)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.lo) / (self.y.hi - self.y.lo) * (HEIGHT - TOP - BOTTOM)
    }

    fn polyline(&self, out: &mut String, class: &str, dash: Option<&str>, pts: &[(f64, f64)]) {
        let points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = dash.map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        let _ = writeln!(
            out,
            "<polyline class=\"{class}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" stroke-linecap=\"round\"{dash} points=\"{}\"/>",
            stroke(class),
            points.join(" ")
        );
    }
}

fn stroke(class: &str) -> &'static str {
    match class {
        "actual" => "#1f3b73",
        "predicted" => "#c0392b",
        _ => "#2e7d32",
    }
}

/// Renders `report` as an SVG document.
struct Series {
    class: &'static str,
    dash: Option<&'static str>,
    label: &'static str,
    points: Vec<(f64, f64)>,
}

pub fn render_svg(report: &EvalReport, kind: PlotKind) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let (name, unit, scale) = quantity(report.unit);
    let xs = || report.rows.iter().map(|r| r.x);
    let series: Vec<Series> = match kind {
        PlotKind::Prediction => vec![
            Series {
                class: "actual",
                dash: Some(DOTTED),
                label: "Actual",
                points: report
                    .rows
                    .iter()
                    .map(|r| (r.x, r.actual * scale))
                    .collect(),
            },
            Series {
                class: "predicted",
                dash: Some(DASHED),
                label: "Predicted",
                points: report
                    .rows
                    .iter()
                    .map(|r| (r.x, r.predicted * scale))
                    .collect(),
            },
        ],
        PlotKind::Error => vec![Series {
            class: "abs-error",
            dash: None,
            label: "Absolute error",
            points: report
                .rows
                .iter()
                .map(|r| (r.x, r.abs_error * scale))
                .collect(),
        }],
    };
    let frame = Frame {
        x: Axis::spanning(xs()),
        y: Axis::spanning(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let (title, y_label) = match kind {
        PlotKind::Prediction => (format!("{name} vs. w/h"), format!("{name} ({unit})")),
        PlotKind::Error => (
            "Absolute Error vs. w/h".to_string(),
            format!("Absolute Error ({unit})"),
        ),
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"28\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(&title)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"46\" font-size=\"12\" text-anchor=\"middle\" fill=\"#555\">{}</text>",
        WIDTH / 2.0,
        escape(&report.model_descriptor)
    );

    // axes
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    let (xt, xd) = frame.x.ticks();
    for t in xt {
        let px = frame.px(t);
        let _ = writeln!(
            out,
            "<line class=\"tick\" x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.2}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{t:.xd$}</text>",
            y0 + 20.0
        );
    }
    let (yt, yd) = frame.y.ticks();
    for t in yt {
        let py = frame.py(t);
        let _ = writeln!(
            out,
            "<line class=\"tick\" x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{t:.yd$}</text>",
            x0 - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">w/h</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 25.0
    );
    let _ = writeln!(
        out,
        "<text x=\"22\" y=\"{0}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 22 {0})\">{1}</text>",
        (y0 + y1) / 2.0,
        escape(&y_label)
    );

    for s in &series {
        frame.polyline(&mut out, s.class, s.dash, &s.points);
    }

    // legend
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 15.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT - 170.0;
        let dash = s
            .dash
            .map_or(String::new(), |d| format!(" stroke-dasharray=\"{d}\""));
        let _ = writeln!(
            out,
            "<line class=\"legend\" x1=\"{lx}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" stroke-width=\"2\" stroke-linecap=\"round\"{dash}/>",
            lx + 40.0,
            stroke(s.class)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            lx + 50.0,
            y + 4.0,
            s.label
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_plot_svg(report: &EvalReport, kind: PlotKind, path: &Path) -> Result<()> {
    write_atomic(path, render_svg(report, kind)?.as_bytes())
}
