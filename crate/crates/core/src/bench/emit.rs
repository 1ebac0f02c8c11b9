//! CSV and SVG output. Both are byte-for-byte deterministic for identical
//! input.

use std::fmt::Write as _;

use crate::bench::gap::GapReport;
use crate::bench::units::{to_bits_per_image, SotaSeries};
use crate::dms::{RaCurve, RaPoint};
use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "rate_bits,distortion,accuracy";
pub const REPORT_HEADER: &str = "accuracy,sota_rate_bits,bound_rate_bits,gap_factor";

/// Shortest decimal text for `v` rounded to 12 significant digits. Plain
/// notation for exponents in `[-5, 15)`, scientific otherwise.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if !(-5..15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    format!("{sign}{body}")
}

fn push_curve_row(out: &mut String, rate: f64, distortion: f64, accuracy: f64) {
    let _ = writeln!(
        out,
        "{},{},{}",
        format_sig12(rate),
        format_sig12(distortion),
        format_sig12(accuracy)
    );
}

pub fn curve_csv(curve: &RaCurve) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for p in curve.points() {
        push_curve_row(&mut out, p.rate, p.distortion, p.accuracy);
    }
    out
}

/// Series rows in bits per image, with distortion `1 - accuracy`.
pub fn series_csv(series: &SotaSeries) -> Result<String> {
    let series = to_bits_per_image(series)?;
    let mut out = format!("{CURVE_HEADER}\n");
    for p in &series.points {
        push_curve_row(&mut out, p.rate, 1.0 - p.accuracy, p.accuracy);
    }
    Ok(out)
}

/// Gap rows; an undefined bound rate or factor is an empty field.
pub fn report_csv(report: &GapReport) -> String {
    let opt = |v: Option<f64>| v.map(format_sig12).unwrap_or_default();
    let mut out = format!("{REPORT_HEADER}\n");
    for e in &report.entries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_sig12(e.accuracy),
            format_sig12(e.sota_rate_bits),
            opt(e.bound_rate_bits),
            opt(e.gap_factor)
        );
    }
    out
}

/// Reads rows written by [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<RaPoint>> {
    let bad = |line: usize, msg: String| Error::Load {
        path: "<csv>".into(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CURVE_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CURVE_HEADER}`"))),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 3 {
                return Err(bad(
                    i + 1,
                    format!("expected 3 fields, got {}", fields.len()),
                ));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(i + 1, format!("bad number `{s}`")))
            };
            Ok(RaPoint {
                rate: num(fields[0])?,
                distortion: num(fields[1])?,
                accuracy: num(fields[2])?,
            })
        })
        .collect()
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
struct Layer {
    name: String,
    points: Vec<(f64, f64)>,
}

/// Rate (x) against accuracy (y). Curves are polylines, series are markers.
#[derive(Debug, Clone, Default)]
pub struct Plot {
    title: String,
    log_x: bool,
    curves: Vec<Layer>,
    markers: Vec<Layer>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn log_x(mut self, on: bool) -> Self {
        self.log_x = on;
        self
    }

    pub fn curve(mut self, name: impl Into<String>, curve: &RaCurve) -> Self {
        self.curves.push(Layer {
            name: name.into(),
            points: curve
                .points()
                .iter()
                .map(|p| (p.rate, p.accuracy))
                .collect(),
        });
        self
    }

    /// Markers at `(rate bits/image, accuracy)`.
    pub fn markers(mut self, name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        self.markers.push(Layer {
            name: name.into(),
            points,
        });
        self
    }

    pub fn series(self, series: &SotaSeries) -> Result<Self> {
        let s = to_bits_per_image(series)?;
        let pts = s.points.iter().map(|p| (p.rate, p.accuracy)).collect();
        Ok(self.markers(format!("{} ({})", s.method, s.dataset), pts))
    }

    fn visible(&self, layer: &Layer) -> Vec<(f64, f64)> {
        layer
            .points
            .iter()
            .copied()
            .filter(|(x, _)| !self.log_x || *x > 0.0)
            .collect()
    }

    pub fn render(&self) -> Result<String> {
        let all: Vec<(f64, f64)> = self
            .curves
            .iter()
            .chain(&self.markers)
            .flat_map(|l| self.visible(l))
            .collect();
        if all.is_empty() {
            return Err(Error::Domain("nothing to plot".into()));
        }
        let x_max = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let y_min = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let (x_lo, x_hi) = if self.log_x {
            let lo = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            (
                lo.log10().floor(),
                x_max.log10().ceil().max(lo.log10().floor() + 1.0),
            )
        } else {
            (0.0, nice_ceiling(x_max.max(1e-12)))
        };
        let y_lo = ((y_min * 10.0).floor() / 10.0).clamp(0.0, 0.9);
        let y_hi = 1.0;
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| {
            let v = if self.log_x { x.log10() } else { x };
            LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w
        };
        let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">"#
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );

        // x ticks
        let x_ticks: Vec<(f64, String)> = if self.log_x {
            (x_lo as i32..=x_hi as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            let step = nice_step(x_hi / 5.0);
            (0..)
                .map(|i| i as f64 * step)
                .take_while(|v| *v <= x_hi * (1.0 + 1e-9))
                .map(|v| (v, tick_label(v)))
                .collect()
        };
        for (v, label) in &x_ticks {
            let x = sx(*v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#dddddd"/>"##,
                TOP + plot_h
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{label}</text>"#,
                TOP + plot_h + 18.0
            );
        }
        let y_step = nice_step((y_hi - y_lo) / 5.0);
        let mut v = y_lo;
        while v <= y_hi + 1e-9 {
            let y = sy(v);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
                LEFT - 8.0,
                y + 4.0,
                tick_label(v)
            );
            v += y_step;
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">rate (bits per image)</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">accuracy</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0
        );

        let mut legend = Vec::new();
        for (i, layer) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = self
                .visible(layer)
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
            legend.push((layer.name.clone(), color, false));
        }
        for (i, layer) in self.markers.iter().enumerate() {
            let color = PALETTE[(self.curves.len() + i) % PALETTE.len()];
            for (x, y) in self.visible(layer) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            legend.push((layer.name.clone(), color, true));
        }
        for (i, (name, color, marker)) in legend.iter().enumerate() {
            let y = TOP + 20.0 + 20.0 * i as f64;
            let x = LEFT + plot_w - 230.0;
            if *marker {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"/>"#,
                    x + 10.0,
                    y - 4.0
                );
            } else {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                    y - 4.0,
                    x + 20.0,
                    y - 4.0
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{y:.2}" font-size="12">{}</text>"#,
                x + 28.0,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn nice_ceiling(v: f64) -> f64 {
    let step = nice_step(v / 5.0);
    (v / step).ceil() * step
}

fn tick_label(v: f64) -> String {
    // strip float noise from accumulated steps
    let r = (v * 1e9).round() / 1e9;
    let s = format!("{r}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
