//! Hand-emitted SVG: line overlays and grouped bar charts. Coordinates are
//! quantized to 0.01 px so output is byte-stable.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    /// Reference data: dashed, thicker.
    Reference,
    /// Fitted model: solid.
    Model,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: LineStyle,
    /// Colour slot; reference and model of the same curve share it.
    pub color: usize,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub svg: String,
    /// Samples dropped from a log axis because they were not positive.
    pub suppressed: usize,
}

fn q(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Axis { lo, hi }
        } else {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
            Axis { lo: lo - pad, hi: hi + pad }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        q(LEFT + (WIDTH - LEFT - RIGHT) / 2.0),
        escape(title)
    );
}

fn frame(out: &mut String, x_label: &str, y_label: &str) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        q(pw),
        q(ph)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        q(LEFT + pw / 2.0),
        q(HEIGHT - 12.0),
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        q(TOP + ph / 2.0),
        q(TOP + ph / 2.0),
        escape(y_label)
    );
}

fn y_ticks(out: &mut String, axis: &Axis, log: bool) {
    let ph = HEIGHT - TOP - BOTTOM;
    let ticks: Vec<f64> = if log {
        let (a, b) = (axis.lo.ceil() as i32, axis.hi.floor() as i32);
        let step = ((b - a) / 6 + 1).max(1);
        (a..=b).step_by(step as usize).map(f64::from).collect()
    } else {
        (0..=4).map(|k| axis.lo + (axis.hi - axis.lo) * k as f64 / 4.0).collect()
    };
    for t in ticks {
        let y = TOP + ph * (1.0 - axis.frac(t));
        let label = if log { format!("1e{}", t as i32) } else { tick_label(t) };
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{LEFT}\" y2=\"{y}\" stroke=\"black\"/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>",
            q(LEFT - 4.0),
            q(LEFT - 6.0),
            q(t_y(y)),
            escape(&label),
            y = q(y)
        );
    }
}

fn t_y(y: f64) -> f64 {
    y + 3.5
}

fn legend(out: &mut String, entries: &[(String, usize, bool)]) {
    let x = WIDTH - RIGHT + 10.0;
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * i as f64;
        let dash = if *dashed { " stroke-dasharray=\"5,3\"" } else { "" };
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"{dash}/><text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            q(x),
            q(y),
            q(x + 18.0),
            q(y),
            PALETTE[color % PALETTE.len()],
            q(x + 22.0),
            q(y + 3.5),
            escape(label)
        );
    }
}

/// Path data for one series; returns `(d, suppressed)`.
fn path_data(points: &[(f64, f64)], xa: &Axis, ya: &Axis, log: bool) -> (String, usize) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let mut d = String::new();
    let mut suppressed = 0;
    let mut pen_down = false;
    for &(x, y) in points {
        let yv = if log {
            if !(y > 0.0 && y.is_finite()) {
                suppressed += 1;
                pen_down = false;
                continue;
            }
            y.log10()
        } else {
            y
        };
        if !(x.is_finite() && yv.is_finite()) {
            suppressed += 1;
            pen_down = false;
            continue;
        }
        let px = LEFT + pw * xa.frac(x);
        let py = TOP + ph * (1.0 - ya.frac(yv));
        if !d.is_empty() {
            d.push(' ');
        }
        d.push(if pen_down { 'L' } else { 'M' });
        let _ = write!(d, "{},{}", q(px), q(py));
        pen_down = true;
    }
    (d, suppressed)
}

/// Overlay of reference and model series on linear x and linear or log y.
pub fn render_lines(plot: &LinePlot) -> CliResult<Rendered> {
    let usable = |y: f64| if plot.log_y { y > 0.0 && y.is_finite() } else { y.is_finite() };
    let pts: Vec<(f64, f64)> = plot
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| x.is_finite() && usable(y))
        .collect();
    if pts.is_empty() {
        return Err(CliError::input(format!("plot `{}` has no data", plot.title)));
    }
    let fold = |f: &dyn Fn(&(f64, f64)) -> f64| {
        pts.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = fold(&|p| p.0);
    let (y0, y1) = fold(&|p| if plot.log_y { p.1.log10() } else { p.1 });
    let xa = Axis::new(x0, x1);
    let ya = if plot.log_y {
        Axis::new(y0.floor(), y1.ceil())
    } else {
        let pad = 0.05 * (y1 - y0);
        Axis::new(y0 - pad, y1 + pad)
    };

    let mut out = String::new();
    header(&mut out, &plot.title);
    frame(&mut out, &plot.x_label, &plot.y_label);
    y_ticks(&mut out, &ya, plot.log_y);
    let pw = WIDTH - LEFT - RIGHT;
    for k in 0..=4 {
        let v = xa.lo + (xa.hi - xa.lo) * k as f64 / 4.0;
        let x = LEFT + pw * k as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            q(x),
            q(HEIGHT - BOTTOM + 14.0),
            escape(&tick_label(v))
        );
    }

    let mut suppressed = 0;
    for s in &plot.series {
        let (d, n) = path_data(&s.points, &xa, &ya, plot.log_y);
        suppressed += n;
        let color = PALETTE[s.color % PALETTE.len()];
        let (class, extra) = match s.style {
            LineStyle::Reference => ("reference", " stroke-width=\"3\" stroke-dasharray=\"5,3\" stroke-opacity=\"0.6\""),
            LineStyle::Model => ("model", " stroke-width=\"1.5\""),
        };
        let _ = writeln!(
            out,
            "<path class=\"{class}\" data-label=\"{}\" d=\"{d}\" fill=\"none\" stroke=\"{color}\"{extra}/>",
            escape(&s.label)
        );
    }
    let entries: Vec<(String, usize, bool)> = plot
        .series
        .iter()
        .map(|s| (s.label.clone(), s.color, s.style == LineStyle::Reference))
        .collect();
    legend(&mut out, &entries);
    if suppressed > 0 {
        let _ = writeln!(out, "<!-- {suppressed} non-positive samples omitted from the log axis -->");
    }
    out.push_str("</svg>\n");
    Ok(Rendered { svg: out, suppressed })
}

#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub groups: Vec<String>,
    pub series: Vec<String>,
    /// `values[group][series]`; non-finite values draw no bar.
    pub values: Vec<Vec<f64>>,
}

/// Grouped bars with a zero baseline.
pub fn render_bars(chart: &BarChart) -> CliResult<String> {
    let finite: Vec<f64> = chart.values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    if chart.groups.is_empty() || chart.series.is_empty() || finite.is_empty() {
        return Err(CliError::input(format!("chart `{}` has no data", chart.title)));
    }
    let hi = finite.iter().copied().fold(0.0, f64::max);
    let lo = finite.iter().copied().fold(0.0, f64::min);
    let ya = Axis::new(lo, hi * 1.05);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let gw = pw / chart.groups.len() as f64;
    let bw = gw * 0.8 / chart.series.len() as f64;

    let mut out = String::new();
    header(&mut out, &chart.title);
    frame(&mut out, "", &chart.y_label);
    y_ticks(&mut out, &ya, false);
    let base = TOP + ph * (1.0 - ya.frac(0.0));
    for (g, name) in chart.groups.iter().enumerate() {
        let gx = LEFT + gw * g as f64;
        for (s, v) in chart.values[g].iter().enumerate().take(chart.series.len()) {
            if !v.is_finite() {
                continue;
            }
            let top = TOP + ph * (1.0 - ya.frac(*v));
            let _ = writeln!(
                out,
                "<rect class=\"bar\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{} {}: {}</title></rect>",
                q(gx + gw * 0.1 + bw * s as f64),
                q(top.min(base)),
                q(bw),
                q((base - top).abs()),
                PALETTE[s % PALETTE.len()],
                escape(name),
                escape(&chart.series[s]),
                tick_label(*v)
            );
        }
        let cx = gx + gw / 2.0;
        let cy = HEIGHT - BOTTOM + 10.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-45 {} {})\">{}</text>",
            q(cx),
            q(cy),
            q(cx),
            q(cy),
            escape(name)
        );
    }
    let entries: Vec<(String, usize, bool)> = chart.series.iter().enumerate().map(|(i, s)| (s.clone(), i, false)).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}
