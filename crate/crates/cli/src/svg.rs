//! Static SVG line charts: linear axes, one polyline plus markers per series.

use std::fmt::Write;

use thiserror::Error;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("chart has no series or a series has no points")]
    EmptySeries,
    #[error("non-finite value in series `{0}`")]
    NonFiniteValue(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Square,
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub marker: Marker,
    /// Per-point hollow markers; empty means all filled.
    pub hollow: Vec<bool>,
}

impl Series {
    pub fn new(label: &str, points: Vec<(f64, f64)>, marker: Marker) -> Self {
        Self {
            label: label.to_string(),
            points,
            marker,
            hollow: Vec::new(),
        }
    }

    /// Hollow markers at odd abscissae.
    pub fn with_parity_markers(mut self) -> Self {
        self.hollow = self
            .points
            .iter()
            .map(|&(x, _)| (x.round() as i64).rem_euclid(2) == 1)
            .collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AxesSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

fn nice_number(x: f64, round: bool) -> f64 {
    let exp = x.log10().floor();
    let f = x / 10f64.powf(exp);
    let nf = if round {
        match f {
            f if f < 1.5 => 1.0,
            f if f < 3.0 => 2.0,
            f if f < 7.0 => 5.0,
            _ => 10.0,
        }
    } else {
        match f {
            f if f <= 1.0 => 1.0,
            f if f <= 2.0 => 2.0,
            f if f <= 5.0 => 5.0,
            _ => 10.0,
        }
    };
    nf * 10f64.powf(exp)
}

/// Tick positions covering `[lo, hi]` with about `target` intervals.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        (lo - pad, hi + pad)
    };
    let range = nice_number(hi - lo, false);
    let step = nice_number(range / target.max(1) as f64, true);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    (0..=count)
        .map(|i| {
            let t = start + i as f64 * step;
            // snap to the step grid to avoid -0 and 0.30000000000000004
            let t = (t / step).round() * step;
            if t == 0.0 {
                0.0
            } else {
                t
            }
        })
        .collect()
}

fn tick_label(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().max(step.abs());
    if !(1e-3..1e5).contains(&mag) {
        return format!("{v:.1e}");
    }
    let decimals = (-step.abs().log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn marker_svg(out: &mut String, m: Marker, x: f64, y: f64, color: &str, hollow: bool) {
    let fill = if hollow { "white" } else { color };
    let style = format!("fill=\"{fill}\" stroke=\"{color}\" stroke-width=\"1.5\"");
    match m {
        Marker::Circle => {
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" {style}/>");
        }
        Marker::Square => {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"7\" height=\"7\" {style}/>",
                x - 3.5,
                y - 3.5
            );
        }
        Marker::Triangle => {
            let _ = writeln!(
                out,
                "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" {style}/>",
                x,
                y - 4.5,
                x - 4.5,
                y + 3.5,
                x + 4.5,
                y + 3.5
            );
        }
    }
}

/// Renders the chart; `comment` is embedded verbatim (escaped) near the top.
pub fn render_chart(series: &[Series], axes: &AxesSpec, comment: &str) -> Result<String, SvgError> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(SvgError::EmptySeries);
    }
    for s in series {
        if s.points
            .iter()
            .any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(SvgError::NonFiniteValue(s.label.clone()));
        }
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let xt = nice_ticks(x0, x1, 8);
    let yt = nice_ticks(y0, y1, 6);
    let (xa, xb) = (xt[0], *xt.last().unwrap());
    let (ya, yb) = (yt[0], *yt.last().unwrap());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - xa) / (xb - xa) * pw;
    let py = |y: f64| TOP + ph - (y - ya) / (yb - ya) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">"
    );
    if !comment.is_empty() {
        let _ = writeln!(out, "<desc>{}</desc>", escape(comment));
    }
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        LEFT + pw / 2.0,
        escape(&axes.title)
    );

    let xstep = if xt.len() > 1 { xt[1] - xt[0] } else { 1.0 };
    let ystep = if yt.len() > 1 { yt[1] - yt[0] } else { 1.0 };
    for &t in &xt {
        let x = px(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#e0e0e0\"/>",
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            TOP + ph + 20.0,
            tick_label(t, xstep)
        );
    }
    for &t in &yt {
        let y = py(t);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\"/>",
            LEFT,
            LEFT + pw
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, ystep)
        );
    }
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        LEFT + pw / 2.0,
        HEIGHT - 20.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {:.2})\">{}</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&axes.y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        for (k, &(x, y)) in s.points.iter().enumerate() {
            let hollow = s.hollow.get(k).copied().unwrap_or(false);
            marker_svg(&mut out, s.marker, px(x), py(y), color, hollow);
        }
        let ly = TOP + 10.0 + 22.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 30.0
        );
        marker_svg(&mut out, s.marker, lx + 15.0, ly, color, false);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 38.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
