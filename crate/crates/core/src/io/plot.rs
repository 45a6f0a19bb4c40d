//! Standalone SVG line charts of error against intersection angle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{io_err, IoError, IoResult};
use crate::pipeline::Algorithm;
use crate::sim::TrialStatistics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    MedianVsGamma,
    RmsVsGamma,
}

impl PlotKind {
    pub fn file_name(&self) -> &'static str {
        match self {
            PlotKind::MedianVsGamma => "median_vs_gamma.svg",
            PlotKind::RmsVsGamma => "rms_vs_gamma.svg",
        }
    }

    fn value(&self, s: &TrialStatistics) -> f64 {
        match self {
            PlotKind::MedianVsGamma => s.median_error,
            PlotKind::RmsVsGamma => s.rms_error,
        }
    }

    fn y_label(&self) -> &'static str {
        match self {
            PlotKind::MedianVsGamma => "median error (m)",
            PlotKind::RmsVsGamma => "RMS error (m)",
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn color(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Fused => "#d62728",
        Algorithm::FusedRaw => "#9467bd",
        Algorithm::FusedRidge => "#2ca02c",
        Algorithm::Los => "#8c564b",
        Algorithm::Range => "#ff7f0e",
        Algorithm::Vision => "#1f77b4",
    }
}

/// Points that cannot sit on a log axis (zero, negative, NaN) are dropped.
pub fn render_svg(stats: &[TrialStatistics], kind: PlotKind) -> IoResult<String> {
    let mut gammas: Vec<f64> = stats.iter().map(|s| s.gamma).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    if gammas.len() < 2 {
        return Err(IoError::InsufficientData(format!(
            "a plot needs at least 2 gamma values, got {}",
            gammas.len()
        )));
    }
    let mut series: BTreeMap<Algorithm, Vec<(f64, f64)>> = BTreeMap::new();
    for s in stats {
        let entry = series.entry(s.algorithm).or_default();
        let v = kind.value(s);
        if v.is_finite() && v > 0.0 {
            entry.push((s.gamma, v));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let logs: Vec<f64> = series.values().flatten().map(|p| p.1.log10()).collect();
    if logs.is_empty() {
        return Err(IoError::InsufficientData(
            "no positive values to plot on a log axis".into(),
        ));
    }
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if hi <= lo {
        hi = lo + 1.0;
    }
    let (g0, g1) = (gammas[0], gammas[gammas.len() - 1]);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |g: f64| LEFT + (g - g0) / (g1 - g0) * plot_w;
    let sy = |v: f64| TOP + (hi - v.log10()) / (hi - lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for decade in (lo as i32)..=(hi as i32) {
        let y = sy(10f64.powi(decade));
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for &g in &gammas {
        let x = sx(g);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{g}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">intersection angle (deg)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        kind.y_label()
    );

    for (i, (algo, pts)) in series.iter().enumerate() {
        let points: Vec<String> = pts.iter().map(|&(g, v)| format!("{:.2},{:.2}", sx(g), sy(v))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            color(*algo),
            points.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"#,
            lx + 25.0,
            color(*algo)
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{algo}</text>"#, lx + 32.0, ly + 4.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_plot(stats: &[TrialStatistics], path: &Path, kind: PlotKind) -> IoResult<()> {
    let svg = render_svg(stats, kind)?;
    std::fs::write(path, svg).map_err(io_err(path))
}
