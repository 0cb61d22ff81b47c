//! Self-contained SVG line charts: axes with tick labels, one polyline per
//! multi-point series, a marker for single-point series and a legend.
//!
//! The first series is scaled against the left axis, the second against the
//! right axis, so traces with disparate magnitudes (a stroke in metres next
//! to a bore scale near one) stay readable. Output is deterministic text.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// x_max and λ against the iteration index.
    Trace,
    /// Position and velocity against time.
    Trajectory,
    /// x_max against λ.
    Sweep,
}

impl PlotKind {
    fn x_label(&self) -> &'static str {
        match self {
            PlotKind::Trace => "iteration",
            PlotKind::Trajectory => "t [s]",
            PlotKind::Sweep => "lambda",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("nothing to plot: no series given")]
    NoSeries,
    #[error("series `{0}` has no points")]
    EmptySeries(String),
    #[error("series `{0}` contains a non-finite value")]
    NonFinite(String),
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 90.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 64.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Pads a degenerate range and widens it slightly so extremes do not sit on
/// the frame.
fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.5;
        (lo - pad, hi + pad)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

/// Tick positions on a 1-2-5 decade ladder, about five per axis.
fn nice_ticks(lo: f64, hi: f64) -> (Vec<f64>, i32) {
    let span = hi - lo;
    let raw_step = span / 5.0;
    let mag = raw_step.abs().log10().floor();
    let base = 10.0_f64.powi(mag as i32);
    let norm = raw_step / base;
    let step = if norm <= 1.5 {
        base
    } else if norm <= 3.5 {
        2.0 * base
    } else if norm <= 7.5 {
        5.0 * base
    } else {
        10.0 * base
    };
    let mut ticks = Vec::new();
    let mut k = (lo / step).ceil() as i64;
    while (k as f64) * step <= hi + step * 1e-9 {
        ticks.push(k as f64 * step);
        k += 1;
    }
    let decimals = (-(step.log10().floor() as i32)).max(0);
    (ticks, decimals)
}

fn tick_label(v: f64, decimals: i32) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e6) {
        format!("{v:e}")
    } else {
        format!("{:.*}", decimals as usize, v)
    }
}

struct AxisScale {
    lo: f64,
    hi: f64,
}

impl AxisScale {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let (lo, hi) = padded_range(lo, hi);
        Self { lo, hi }
    }

    fn map(&self, v: f64, out_lo: f64, out_hi: f64) -> f64 {
        out_lo + (v - self.lo) / (self.hi - self.lo) * (out_hi - out_lo)
    }
}

/// Renders the series as a standalone SVG document.
pub fn render_plot(series: &[Series], kind: PlotKind) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::NoSeries);
    }
    for s in series {
        if s.points.is_empty() {
            return Err(PlotError::EmptySeries(s.label.clone()));
        }
        if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(PlotError::NonFinite(s.label.clone()));
        }
    }

    let plot_left = MARGIN_LEFT;
    let plot_right = WIDTH - MARGIN_RIGHT;
    let plot_top = MARGIN_TOP;
    let plot_bottom = HEIGHT - MARGIN_BOTTOM;

    let x_scale = AxisScale::from_values(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    // Per-series vertical scales: series 0 labels the left axis, series 1
    // the right axis, later series reuse the left scale.
    let y_scales: Vec<AxisScale> = series
        .iter()
        .map(|s| AxisScale::from_values(s.points.iter().map(|p| p.1)))
        .collect();

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{plot_left}\" y=\"{plot_top}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        plot_right - plot_left,
        plot_bottom - plot_top
    ));

    // x axis ticks and labels.
    let (x_ticks, x_dec) = nice_ticks(x_scale.lo, x_scale.hi);
    for t in &x_ticks {
        let px = x_scale.map(*t, plot_left, plot_right);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{plot_bottom:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
            plot_bottom + 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            plot_bottom + 20.0,
            escape_xml(&tick_label(*t, x_dec))
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        0.5 * (plot_left + plot_right),
        HEIGHT - 18.0,
        escape_xml(kind.x_label())
    ));

    // Left axis for series 0, right axis for series 1.
    for (axis_idx, side) in [(0usize, "left"), (1usize, "right")] {
        if axis_idx >= series.len() {
            break;
        }
        let scale = &y_scales[axis_idx];
        let color = COLORS[axis_idx % COLORS.len()];
        let (ticks, dec) = nice_ticks(scale.lo, scale.hi);
        for t in &ticks {
            let py = scale.map(*t, plot_bottom, plot_top);
            let (x1, x2, tx, anchor) = if side == "left" {
                (plot_left - 6.0, plot_left, plot_left - 10.0, "end")
            } else {
                (plot_right, plot_right + 6.0, plot_right + 10.0, "start")
            };
            svg.push_str(&format!(
                "<line x1=\"{x1:.2}\" y1=\"{py:.2}\" x2=\"{x2:.2}\" y2=\"{py:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
            ));
            svg.push_str(&format!(
                "<text x=\"{tx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"{anchor}\" fill=\"{color}\">{}</text>\n",
                py + 4.0,
                escape_xml(&tick_label(*t, dec))
            ));
        }
        let title_x = if side == "left" { 22.0 } else { WIDTH - 16.0 };
        let mid_y = 0.5 * (plot_top + plot_bottom);
        svg.push_str(&format!(
            "<text x=\"{title_x:.2}\" y=\"{mid_y:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" fill=\"{color}\" transform=\"rotate(-90 {title_x:.2} {mid_y:.2})\">{}</text>\n",
            escape_xml(&series[axis_idx].label)
        ));
    }

    // Data: polylines for multi-point series, a marker for single points.
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let scale = &y_scales[i];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>\n",
                x_scale.map(x, plot_left, plot_right),
                scale.map(y, plot_bottom, plot_top)
            ));
        } else {
            let points: Vec<String> = s
                .points
                .iter()
                .map(|(x, y)| {
                    format!(
                        "{:.2},{:.2}",
                        x_scale.map(*x, plot_left, plot_right),
                        scale.map(*y, plot_bottom, plot_top)
                    )
                })
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
    }

    // Legend, top-right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let y = plot_top + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"18\" height=\"4\" fill=\"{color}\"/>\n",
            plot_right - 150.0,
            y - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            plot_right - 126.0,
            escape_xml(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
