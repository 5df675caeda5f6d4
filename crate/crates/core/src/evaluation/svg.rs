//! Minimal standalone SVG 1.1 line charts, 800x600, no dependencies.
//!
//! Output is deterministic: coordinates are rendered with fixed precision
//! and every structural element is emitted in a fixed order, so re-emission
//! from the same inputs is byte-identical.

use std::fmt::Write as _;

use crate::neuralnet::LossCurve;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One polyline with a legend label.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if !(0.001..10_000.0).contains(&magnitude) {
        format!("{v:.2e}")
    } else if magnitude >= 100.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.4}")
    }
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Degenerate span: widen symmetrically so the polyline sits mid-plot.
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Render a titled line chart with axes, ticks, and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x_min, x_max) = data_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y_min, y_max) = data_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let y_of = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut out = String::with_capacity(4096);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        escape(title)
    ));

    // Axes.
    let x_axis_y = MARGIN_TOP + plot_h;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(x_axis_y),
        fmt_coord(MARGIN_LEFT + plot_w),
        fmt_coord(x_axis_y)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(MARGIN_LEFT),
        fmt_coord(x_axis_y)
    ));

    // Ticks and grid.
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x_min + f * (x_max - x_min);
        let xp = x_of(xv);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            fmt_coord(xp),
            fmt_coord(x_axis_y),
            fmt_coord(x_axis_y + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(xp),
            fmt_coord(x_axis_y + 20.0),
            fmt_tick(xv)
        ));

        let yv = y_min + f * (y_max - y_min);
        let yp = y_of(yv);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            fmt_coord(MARGIN_LEFT),
            fmt_coord(MARGIN_LEFT + plot_w),
            fmt_coord(yp)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(MARGIN_LEFT - 8.0),
            fmt_coord(yp + 4.0),
            fmt_tick(yv)
        ));
    }

    // Axis labels.
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 15.0),
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        escape(y_label)
    ));

    // Series polylines.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for &(x, y) in &s.points {
            let _ = write!(points, "{},{} ", fmt_coord(x_of(x)), fmt_coord(y_of(y)));
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.trim_end()
        ));
    }

    // Legend.
    let legend_x = MARGIN_LEFT + plot_w + 15.0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 14.0 + i as f64 * 20.0;
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            fmt_coord(legend_x),
            fmt_coord(y - 4.0),
            fmt_coord(legend_x + 22.0),
            fmt_coord(y - 4.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt_coord(legend_x + 28.0),
            fmt_coord(y),
            escape(&s.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

/// Chart of training and validation loss per epoch (1-based x axis).
pub fn loss_curve_svg(curve: &LossCurve, title: &str) -> String {
    let series = [
        Series {
            label: "training".to_string(),
            points: curve
                .training
                .iter()
                .enumerate()
                .map(|(i, &l)| ((i + 1) as f64, l))
                .collect(),
        },
        Series {
            label: "validation".to_string(),
            points: curve
                .validation
                .iter()
                .enumerate()
                .map(|(i, &l)| ((i + 1) as f64, l))
                .collect(),
        },
    ];
    line_chart(title, "epoch", "mean squared error", &series)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
