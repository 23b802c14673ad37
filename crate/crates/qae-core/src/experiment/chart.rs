//! Deterministic SVG line charts for sweep output. Byte-identical output for
//! identical input: fixed canvas, fixed precision, stable series ordering.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::Result;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// A named line; `dashed` is used for bound overlays.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

impl Chart {
    pub fn to_svg(&self) -> Result<String> {
        let points: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        // No data: render axes only over a default [0, 1] range.
        let (mut x0, mut x1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
                (lo.min(x), hi.max(x))
            });
        let (mut y0, mut y1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
                (lo.min(y), hi.max(y))
            });
        if points.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"15\">{}</text>\n",
            fmt(WIDTH / 2.0),
            escape(&self.title)
        ));

        // Axes and tick labels.
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(MARGIN_LEFT),
            fmt(MARGIN_TOP),
            fmt(MARGIN_LEFT),
            fmt(HEIGHT - MARGIN_BOTTOM)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(MARGIN_LEFT),
            fmt(HEIGHT - MARGIN_BOTTOM),
            fmt(WIDTH - MARGIN_RIGHT),
            fmt(HEIGHT - MARGIN_BOTTOM)
        ));
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x0 + t * (x1 - x0);
            let yv = y0 + t * (y1 - y0);
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
                 font-size=\"11\">{}</text>\n",
                fmt(sx(xv)),
                fmt(HEIGHT - MARGIN_BOTTOM + 18.0),
                fmt(xv)
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" \
                 font-size=\"11\">{}</text>\n",
                fmt(MARGIN_LEFT - 6.0),
                fmt(sy(yv) + 4.0),
                fmt(yv)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">{}</text>\n",
            fmt(MARGIN_LEFT + plot_w / 2.0),
            fmt(HEIGHT - 12.0),
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            fmt(MARGIN_TOP + plot_h / 2.0),
            fmt(MARGIN_TOP + plot_h / 2.0),
            escape(&self.y_label)
        ));

        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let dash = if series.dashed {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            let mut sorted: Vec<(f64, f64)> = series
                .points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            if sorted.len() > 1 {
                let path: Vec<String> = sorted
                    .iter()
                    .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
                    .collect();
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} \
                     points=\"{}\"/>\n",
                    path.join(" ")
                ));
            }
            for &(x, y) in &sorted {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n",
                    fmt(sx(x)),
                    fmt(sy(y))
                ));
            }
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
                 fill=\"{color}\">{}{}</text>\n",
                fmt(WIDTH - MARGIN_RIGHT - 150.0),
                fmt(MARGIN_TOP + 16.0 * (idx as f64 + 1.0)),
                escape(&series.name),
                if series.dashed { " (dashed)" } else { "" }
            ));
        }
        out.push_str("</svg>\n");
        Ok(out)
    }

    pub fn write_svg(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, self.to_svg()?)?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Builds a J_d-vs-parameter chart from a sweep CSV: one solid series per
/// strategy (mean rows preferred, else replicate 0), plus a dashed bound
/// overlay.
pub fn chart_from_sweep_csv(path: &Path) -> Result<Chart> {
    let text = fs::read_to_string(path)?;
    let data: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut bound_points: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut family = String::new();
    let mut has_mean = false;
    let mut rows: Vec<crate::experiment::ResultRecord> = Vec::new();
    for row in reader.deserialize() {
        let record: crate::experiment::ResultRecord = row?;
        if record.replicate == "mean" {
            has_mean = true;
        }
        rows.push(record);
    }
    let wanted = if has_mean { "mean" } else { "0" };
    for record in rows {
        if record.status.starts_with("failed") && record.replicate == wanted {
            continue;
        }
        if record.replicate != wanted || !record.j_d.is_finite() {
            continue;
        }
        let x = record.parameter.unwrap_or(0.0);
        family = record.family.clone();
        series
            .entry(record.strategy.clone())
            .or_default()
            .push((x, record.j_d));
        if record.bound.is_finite() {
            bound_points.insert(x.to_bits(), (x, record.bound));
        }
    }
    let mut out: Vec<Series> = series
        .into_iter()
        .map(|(name, points)| Series {
            name,
            points,
            dashed: false,
        })
        .collect();
    out.push(Series {
        name: "bound".into(),
        points: bound_points.into_values().collect(),
        dashed: true,
    });
    Ok(Chart {
        title: format!("decoding fidelity vs parameter ({family})"),
        x_label: "parameter".into(),
        y_label: "J_d".into(),
        series: out,
    })
}
