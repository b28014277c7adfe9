use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Trace, TraceRow};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum YAxis {
    Dist,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum XAxis {
    /// Goldstein or approximate-Goldstein oracle calls.
    Calls,
    /// Raw subgradient evaluations.
    Evals,
}

impl YAxis {
    fn pick(self, r: &TraceRow) -> f64 {
        match self {
            YAxis::Dist => r.dist,
            YAxis::Gap => r.gap,
        }
    }

    fn label(self) -> &'static str {
        match self {
            YAxis::Dist => "distance to minimizer",
            YAxis::Gap => "f(x) - f*",
        }
    }
}

impl XAxis {
    fn pick(self, r: &TraceRow) -> f64 {
        match self {
            XAxis::Calls => r.calls() as f64,
            XAxis::Evals => r.s_subgrad as f64,
        }
    }

    fn label(self) -> &'static str {
        match self {
            XAxis::Calls => "oracle calls",
            XAxis::Evals => "subgradient evaluations",
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-y line chart, one series per labelled trace. Points with a
/// non-positive or non-finite ordinate are left out.
pub fn plot_convergence(traces: &[(String, Trace)], y: YAxis, x: XAxis) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::invalid("no traces to plot"));
    }
    let mut series = Vec::with_capacity(traces.len());
    for (label, t) in traces {
        if t.rows.is_empty() {
            return Err(Error::invalid(format!("trace `{label}` is empty")));
        }
        let pts: Vec<(f64, f64)> = t
            .rows
            .iter()
            .map(|r| (x.pick(r), y.pick(r)))
            .filter(|&(_, v)| v > 0.0 && v.is_finite())
            .collect();
        series.push((label, pts));
    }
    let all = || series.iter().flat_map(|(_, p)| p.iter().copied());
    if all().next().is_none() {
        return Err(Error::invalid("no positive values to plot on a log axis"));
    }
    let x_min = all().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x_max = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let d_lo = all().map(|p| p.1.log10()).fold(f64::INFINITY, f64::min).floor();
    let mut d_hi = all().map(|p| p.1.log10()).fold(f64::NEG_INFINITY, f64::max).ceil();
    if d_hi <= d_lo {
        d_hi = d_lo + 1.0;
    }

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x_min) / (x_max - x_min) * pw;
    let sy = |v: f64| TOP + (d_hi - v.log10()) / (d_hi - d_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let decades = (d_hi - d_lo) as i64;
    let label_every = (decades / 12 + 1).max(1);
    for i in 0..=decades {
        let d = d_lo + i as f64;
        let py = TOP + (d_hi - d) / (d_hi - d_lo) * ph;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        if i % label_every == 0 {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#,
                LEFT - 6.0,
                py + 4.0,
                d as i64
            );
        }
    }
    for i in 0..=4 {
        let v = x_min + (x_max - x_min) * i as f64 / 4.0;
        let px = sx(v);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            v.round()
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        x.label()
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        y.label()
    );

    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn save_plot(traces: &[(String, Trace)], y: YAxis, x: XAxis, out: &Path) -> Result<()> {
    let svg = plot_convergence(traces, y, x)?;
    std::fs::write(out, svg)?;
    Ok(())
}
