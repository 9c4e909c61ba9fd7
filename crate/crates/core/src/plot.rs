//! Static SVG charts of report tables.
//!
//! Output depends only on the input table: coordinates are printed with a
//! fixed precision and series keep their table order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::Table;
use crate::Waveform;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// Max deviation against lag, one line per repetition rate.
    Deviation,
    /// Fringe intensity against phase difference.
    Fringe,
    /// Angular distance against time with the threshold.
    Drift,
    /// Normalized peak intensity against spacing.
    Spacing,
    /// Translucent overlay of pulse groups.
    Overlay,
}

impl PlotStyle {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "deviation" => PlotStyle::Deviation,
            "fringe" => PlotStyle::Fringe,
            "drift" => PlotStyle::Drift,
            "spacing" => PlotStyle::Spacing,
            "overlay" => PlotStyle::Overlay,
            _ => return Err(Error::invalid(format!("unknown plot style `{s}`"))),
        })
    }

    /// Style implied by a report table name.
    pub fn for_table(name: &str) -> Option<Self> {
        match name {
            "max_deviation" => Some(PlotStyle::Deviation),
            "fringe" => Some(PlotStyle::Fringe),
            "drift" => Some(PlotStyle::Drift),
            "intensity_by_spacing" => Some(PlotStyle::Spacing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Line,
    Points,
    /// Thin translucent line.
    Trace,
}

#[derive(Debug, Clone)]
struct Series {
    label: String,
    mark: Mark,
    points: Vec<(f64, f64, Option<f64>)>,
}

#[derive(Debug, Clone, Default)]
struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    hlines: Vec<(String, f64)>,
    /// Legend entries for overlays; otherwise one per series.
    legend: Option<Vec<(String, usize)>>,
    colors: Vec<usize>,
}

fn schema(style: &str, e: Error) -> Error {
    match e {
        Error::Table(m) => Error::Table(format!("{style} plot needs a different table: {m}")),
        other => other,
    }
}

fn required(table: &Table, name: &str, style: &str) -> Result<Vec<f64>> {
    table
        .f64_column(name)
        .map_err(|e| schema(style, e))?
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::Table(format!("{style} plot: empty `{name}` cell"))))
        .collect()
}

/// Renders a report table.
pub fn plot_table(table: &Table, style: PlotStyle) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let chart = match style {
        PlotStyle::Deviation => deviation_chart(table)?,
        PlotStyle::Fringe => fringe_chart(table)?,
        PlotStyle::Drift => drift_chart(table)?,
        PlotStyle::Spacing => spacing_chart(table)?,
        PlotStyle::Overlay => {
            return Err(Error::invalid(
                "overlay plots take pulse groups, not a report table",
            ))
        }
    };
    Ok(render(&chart))
}

fn by_rate(rates: &[f64]) -> BTreeMap<u64, Vec<usize>> {
    let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in rates.iter().enumerate() {
        out.entry(r.round() as u64).or_default().push(i);
    }
    out
}

fn rate_label(hz: u64) -> String {
    if hz >= 1_000_000_000 {
        format!("{} GHz", fmt_short(hz as f64 / 1e9))
    } else {
        format!("{} MHz", fmt_short(hz as f64 / 1e6))
    }
}

fn deviation_chart(table: &Table) -> Result<Chart> {
    let rates = required(table, "rep_rate_hz", "deviation")?;
    let n = required(table, "n", "deviation")?;
    let d = required(table, "max_deviation_over_pi", "deviation")?;
    let se = match table.column("stderr_rad") {
        Some(_) => table.f64_column("stderr_rad")?,
        None => vec![None; rates.len()],
    };
    let mut chart = Chart {
        title: "Max phase deviation".into(),
        x_label: "n (pulses)".into(),
        y_label: "max deviation / pi".into(),
        ..Default::default()
    };
    for (hz, rows) in by_rate(&rates) {
        chart.series.push(Series {
            label: rate_label(hz),
            mark: Mark::Line,
            points: rows
                .iter()
                .map(|&i| (n[i], d[i], se[i].map(|s| s / std::f64::consts::PI)))
                .collect(),
        });
    }
    Ok(chart)
}

fn fringe_chart(table: &Table) -> Result<Chart> {
    let x = required(table, "delta_phi_rad", "fringe")?;
    let y = required(table, "intensity", "fringe")?;
    let err = table
        .f64_column("intensity_std")
        .map_err(|e| schema("fringe", e))?;
    Ok(Chart {
        title: "Interference fringe".into(),
        x_label: "phase difference (rad)".into(),
        y_label: "mean intensity".into(),
        series: vec![Series {
            label: "scan".into(),
            mark: Mark::Points,
            points: x
                .into_iter()
                .zip(y)
                .zip(err)
                .map(|((x, y), e)| (x, y, e))
                .collect(),
        }],
        ..Default::default()
    })
}

fn drift_chart(table: &Table) -> Result<Chart> {
    let t = required(table, "timestamp_s", "drift")?;
    let a = required(table, "angle_over_pi", "drift")?;
    Ok(Chart {
        title: "Polarization drift".into(),
        x_label: "time (s)".into(),
        y_label: "angular distance / pi".into(),
        series: vec![Series {
            label: "drift".into(),
            mark: Mark::Line,
            points: t.into_iter().zip(a).map(|(t, a)| (t, a, None)).collect(),
        }],
        hlines: vec![(
            "0.007 pi".into(),
            crate::sourcesim::DRIFT_THRESHOLD / std::f64::consts::PI,
        )],
        ..Default::default()
    })
}

fn spacing_chart(table: &Table) -> Result<Chart> {
    let rates = required(table, "rep_rate_hz", "spacing")?;
    let l = required(table, "spacing_ns", "spacing")?;
    let norm = table
        .f64_column("normalized")
        .map_err(|e| schema("spacing", e))?;
    let mean = table.f64_column("mean").map_err(|e| schema("spacing", e))?;
    let std = table.f64_column("std").map_err(|e| schema("spacing", e))?;
    let mut chart = Chart {
        title: "Peak intensity by spacing".into(),
        x_label: "spacing to previous pulse (slots)".into(),
        y_label: "normalized mean intensity".into(),
        ..Default::default()
    };
    for (hz, rows) in by_rate(&rates) {
        let points: Vec<_> = rows
            .iter()
            .filter_map(|&i| {
                let y = norm[i]?;
                let e = match (std[i], mean[i]) {
                    (Some(s), Some(m)) if m != 0.0 => Some(s * y / m),
                    _ => None,
                };
                Some((l[i], y, e))
            })
            .collect();
        if !points.is_empty() {
            chart.series.push(Series {
                label: rate_label(hz),
                mark: Mark::Points,
                points,
            });
        }
    }
    if chart.series.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(chart)
}

/// Persistence-style overlay: every trace of every group drawn translucent,
/// time relative to each trace's start.
pub fn plot_overlay(groups: &[(String, Vec<Waveform>)]) -> Result<String> {
    if groups.iter().all(|(_, g)| g.is_empty()) {
        return Err(Error::EmptyReport);
    }
    let mut chart = Chart {
        title: "Pulse overlay".into(),
        x_label: "time (ns)".into(),
        y_label: "signal".into(),
        legend: Some(Vec::new()),
        ..Default::default()
    };
    for (gi, (name, traces)) in groups.iter().enumerate() {
        chart.legend.as_mut().unwrap().push((name.clone(), gi));
        for t in traces {
            let dt = 1e9 / t.sample_rate();
            chart.series.push(Series {
                label: name.clone(),
                mark: Mark::Trace,
                points: t
                    .samples()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (i as f64 * dt, v, None))
                    .collect(),
            });
            chart.colors.push(gi);
        }
    }
    Ok(render(&chart))
}

fn fmt_short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn tick_label(x: f64, step: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().max(step);
    if !(1e-3..1e5).contains(&mag) {
        return format!("{x:.1e}");
    }
    fmt_short(x)
}

/// About `target` round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> (f64, f64, Vec<f64>, f64) {
    let span = hi - lo;
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let t = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, t, step)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn render(chart: &Chart) -> String {
    let pts = || chart.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = range(pts().map(|p| p.0));
    let (y0, y1) = range(
        pts()
            .flat_map(|p| {
                let e = p.2.unwrap_or(0.0);
                [p.1 - e, p.1 + e]
            })
            .chain(chart.hlines.iter().map(|h| h.1)),
    );
    let (x0, x1, xt, xs) = ticks(x0, x1, 8);
    let (y0, y1, yt, ys) = ticks(y0, y1, 6);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        esc(&chart.title)
    );
    let _ = writeln!(s, r##"<g stroke="#dddddd" stroke-width="1">"##);
    for &x in &xt {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}"/>"#,
            sx(x),
            TOP,
            TOP + ph
        );
    }
    for &y in &yt {
        let _ = writeln!(
            s,
            r#"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}"/>"#,
            sy(y),
            LEFT,
            LEFT + pw
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for &x in &xt {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(x),
            TOP + ph + 18.0,
            tick_label(x, xs)
        );
    }
    for &y in &yt {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(y) + 4.0,
            tick_label(y, ys)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        esc(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        esc(&chart.y_label)
    );

    for (label, y) in &chart.hlines {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#555555" stroke-dasharray="6 4"/>"##,
            sy(*y),
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + pw + 6.0,
            sy(*y) + 4.0,
            esc(label)
        );
    }

    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[chart.colors.get(i).copied().unwrap_or(i) % PALETTE.len()];
        for &(x, y, e) in &series.points {
            if let Some(e) = e.filter(|e| *e > 0.0) {
                let (cx, a, b) = (sx(x), sy(y - e), sy(y + e));
                let _ = writeln!(
                    s,
                    r#"<path d="M{cx:.2},{a:.2}V{b:.2}M{:.2},{a:.2}H{:.2}M{:.2},{b:.2}H{:.2}" stroke="{color}" fill="none"/>"#,
                    cx - 3.0,
                    cx + 3.0,
                    cx - 3.0,
                    cx + 3.0
                );
            }
        }
        match series.mark {
            Mark::Line | Mark::Trace => {
                let mut d = String::new();
                for (k, &(x, y, _)) in series.points.iter().enumerate() {
                    let _ = write!(
                        d,
                        "{}{:.2},{:.2}",
                        if k == 0 { "M" } else { "L" },
                        sx(x),
                        sy(y)
                    );
                }
                let (width, opacity) = if series.mark == Mark::Trace {
                    (1.0, 0.25)
                } else {
                    (2.0, 1.0)
                };
                let _ = writeln!(
                    s,
                    r#"<path d="{d}" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}" fill="none"/>"#
                );
                if series.mark == Mark::Line {
                    for &(x, y, _) in &series.points {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                            sx(x),
                            sy(y)
                        );
                    }
                }
            }
            Mark::Points => {
                for &(x, y, _) in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        sx(x),
                        sy(y)
                    );
                }
            }
        }
    }

    let entries: Vec<(String, usize)> = match &chart.legend {
        Some(l) => l.clone(),
        None => chart
            .series
            .iter()
            .enumerate()
            .map(|(i, s)| (s.label.clone(), i))
            .collect(),
    };
    for (k, (label, ci)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * k as f64;
        let color = PALETTE[ci % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            LEFT + pw + 12.0,
            y - 10.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
            LEFT + pw + 30.0,
            esc(label)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(name: &str, header: &[&str], rows: &[&[&str]]) -> Table {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    fn dev_table() -> Table {
        table(
            "max_deviation",
            &[
                "rep_rate_hz",
                "n",
                "max_deviation_rad",
                "max_deviation_over_pi",
                "stderr_rad",
            ],
            &[
                &["1e9", "1", "0.03", "0.0095", "0.001"],
                &["1e9", "2", "0.01", "0.0032", "0.001"],
                &["5e8", "1", "0.01", "0.0032", ""],
                &["5e8", "2", "0.001", "0.0003", ""],
            ],
        )
    }

    #[test]
    fn one_series_per_rate() {
        let svg = plot_table(&dev_table(), PlotStyle::Deviation).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">1 GHz<") && svg.contains(">500 MHz<"));
        assert_eq!(svg.matches("stroke-width=\"2\"").count(), 2);
        assert_eq!(svg, plot_table(&dev_table(), PlotStyle::Deviation).unwrap());
    }

    #[test]
    fn empty_and_mismatched_tables() {
        let mut t = dev_table();
        t.rows.clear();
        assert!(matches!(
            plot_table(&t, PlotStyle::Deviation),
            Err(Error::EmptyReport)
        ));
        assert!(matches!(
            plot_table(&dev_table(), PlotStyle::Fringe),
            Err(Error::Table(_))
        ));
        assert!(plot_overlay(&[]).is_err());
    }

    #[test]
    fn fringe_has_error_bars() {
        let t = table(
            "fringe",
            &["delta_phi_rad", "intensity", "intensity_std"],
            &[
                &["0", "1", "0.1"],
                &["3.14", "0", "0.1"],
                &["6.28", "1", ""],
            ],
        );
        let svg = plot_table(&t, PlotStyle::Fringe).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn styles_from_table_names() {
        assert_eq!(PlotStyle::for_table("fringe"), Some(PlotStyle::Fringe));
        assert_eq!(PlotStyle::for_table("per_case"), None);
        assert_eq!(PlotStyle::parse("drift").unwrap(), PlotStyle::Drift);
        assert!(PlotStyle::parse("pie").is_err());
    }

    #[test]
    fn tick_steps_are_round() {
        let (lo, hi, t, step) = ticks(0.13, 0.97, 6);
        assert_eq!((lo, hi, step), (0.0, 1.0, 0.2));
        assert_eq!(t.len(), 6);
    }
}
