//! Dependency-free SVG line and bar charts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::record::SimulationRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Demands,
    Prices,
    Totals,
    Cutdown,
}

impl ChartKind {
    pub const ALL: [ChartKind; 4] = [
        ChartKind::Demands,
        ChartKind::Prices,
        ChartKind::Totals,
        ChartKind::Cutdown,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            ChartKind::Demands => "demands.svg",
            ChartKind::Prices => "prices.svg",
            ChartKind::Totals => "totals.svg",
            ChartKind::Cutdown => "cutdown.svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line `(label, y)`.
    pub reference: Option<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BarChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear axis with "nice" tick spacing (1, 2 or 5 times a power of ten).
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn new(min: f64, max: f64) -> Self {
        let (mut lo, mut hi) = (min, max);
        if (hi - lo).abs() < 1e-12 * (1.0 + lo.abs()) {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            lo -= pad;
            hi += pad;
        }
        let raw = (hi - lo) / 5.0;
        let magnitude = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * magnitude)
            .find(|&s| s >= raw)
            .unwrap_or(10.0 * magnitude);
        Self {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=count)
            .map(|i| self.lo + i as f64 * self.step)
            .collect()
    }

    fn label(&self, v: f64) -> String {
        let decimals = (-self.step.log10().floor()).max(0.0) as usize;
        let s = format!("{v:.decimals$}");
        if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
            s[1..].to_string()
        } else {
            s
        }
    }
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn plot_w() -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_h() -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.lo) / (self.x.hi - self.x.lo) * Self::plot_w()
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN_TOP + (self.y.hi - y) / (self.y.hi - self.y.lo) * Self::plot_h()
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Draws both axes, tick labels and axis titles. With `x_ticks = false` the
/// caller labels the x axis itself.
fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(out, r##"<g class="axes" stroke="#333" stroke-width="1">"##);
    let _ = writeln!(
        out,
        r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>"#
    );
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="ticks">"#);
    for t in f.y.ticks() {
        let y = f.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            y + 4.0,
            f.y.label(t)
        );
    }
    if x_ticks {
        for t in f.x.ticks() {
            let x = f.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                bottom + 5.0,
                bottom + 18.0,
                f.x.label(t)
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, entries: &[(String, &str, bool)]) {
    let x = WIDTH - MARGIN_RIGHT + 15.0;
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (name, color, dashed)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let dash = if *dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(out, "</g>");
}

pub fn render_line_chart(chart: &LineChart) -> Result<String> {
    if chart.series.is_empty() || chart.series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::Argument("line chart needs nonempty series".into()));
    }
    let points = chart.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Argument("line chart data must be finite".into()));
        }
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if let Some((_, r)) = &chart.reference {
        y0 = y0.min(*r);
        y1 = y1.max(*r);
    }
    let frame = Frame {
        x: Axis::new(x0, x1),
        y: Axis::new(y0, y1),
    };

    let mut out = String::new();
    open(&mut out, &chart.title);
    axes(&mut out, &frame, &chart.x_label, &chart.y_label, true);

    let mut legend_entries = Vec::new();
    let _ = writeln!(out, r#"<g class="series" fill="none" stroke-width="1.5">"#);
    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline stroke="{color}" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&s.name)
        );
        legend_entries.push((s.name.clone(), color, false));
    }
    let _ = writeln!(out, "</g>");

    if let Some((label, y)) = &chart.reference {
        let py = frame.py(*y);
        let _ = writeln!(
            out,
            r##"<line class="reference" data-value="{y}" x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#000" stroke-dasharray="6 4"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        legend_entries.push((label.clone(), "#000", true));
    }
    legend(&mut out, &legend_entries);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_bar_chart(chart: &BarChart) -> Result<String> {
    if chart.values.is_empty() || chart.values.len() != chart.labels.len() {
        return Err(Error::Argument(
            "bar chart needs one label per value and at least one value".into(),
        ));
    }
    if chart.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("bar chart data must be finite".into()));
    }
    let lo = chart.values.iter().fold(0.0f64, |a, &v| a.min(v));
    let hi = chart.values.iter().fold(0.0f64, |a, &v| a.max(v));
    let n = chart.values.len() as f64;
    let frame = Frame {
        x: Axis {
            lo: 0.0,
            hi: n,
            step: 1.0,
        },
        y: Axis::new(lo, hi),
    };

    let mut out = String::new();
    open(&mut out, &chart.title);
    axes(&mut out, &frame, &chart.x_label, &chart.y_label, false);

    let slot = Frame::plot_w() / n;
    let base = frame.py(0.0);
    let _ = writeln!(out, r#"<g class="bars">"#);
    for (i, (label, &v)) in chart.labels.iter().zip(&chart.values).enumerate() {
        let x = frame.px(i as f64) + 0.15 * slot;
        let top = frame.py(v).min(base);
        let h = (frame.py(v) - base).abs();
        let _ = writeln!(
            out,
            r#"<rect class="bar" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{}: {v}</title></rect>"#,
            0.7 * slot,
            PALETTE[0],
            escape(label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            x + 0.35 * slot,
            HEIGHT - MARGIN_BOTTOM + 18.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r##"<line class="zero" x1="{MARGIN_LEFT}" y1="{base:.2}" x2="{}" y2="{base:.2}" stroke="#333"/>"##,
        WIDTH - MARGIN_RIGHT
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn per_building<S: Scalar>(
    record: &SimulationRecord<S>,
    prefix: &str,
    pick: impl Fn(&crate::protocol::SlotOutcome<S>) -> &[S],
) -> Vec<Series> {
    (0..record.n())
        .map(|i| Series {
            name: format!("{prefix}{i}"),
            points: record
                .slots
                .iter()
                .map(|s| (s.slot as f64, pick(s)[i].widen()))
                .collect(),
        })
        .collect()
}

/// Renders one chart of a run record.
pub fn render_svg<S: Scalar>(kind: ChartKind, record: &SimulationRecord<S>) -> Result<String> {
    let mode = record.mode();
    match kind {
        ChartKind::Demands => render_line_chart(&LineChart {
            title: format!("Demand per building ({mode})"),
            x_label: "slot".into(),
            y_label: "demand".into(),
            series: per_building(record, "b", |s| &s.demands),
            reference: None,
        }),
        ChartKind::Prices => render_line_chart(&LineChart {
            title: format!("Unit price ({mode})"),
            x_label: "slot".into(),
            y_label: "price".into(),
            series: per_building(record, "p", |s| &s.prices),
            reference: None,
        }),
        ChartKind::Totals => render_line_chart(&LineChart {
            title: format!("Total demand ({mode})"),
            x_label: "slot".into(),
            y_label: "total demand".into(),
            series: vec![Series {
                name: "total_true".into(),
                points: record
                    .slots
                    .iter()
                    .map(|s| (s.slot as f64, s.total_true.widen()))
                    .collect(),
            }],
            reference: Some(("capacity".into(), record.scenario.pricing.capacity.widen())),
        }),
        ChartKind::Cutdown => render_bar_chart(&BarChart {
            title: format!("Demand cut down per building ({mode})"),
            x_label: "building".into(),
            y_label: "initial - final demand".into(),
            labels: (0..record.n()).map(|i| i.to_string()).collect(),
            values: record.cut_down.iter().map(|v| v.widen()).collect(),
        }),
    }
}

/// Writes the four charts into `dir`.
pub fn write_svgs<S: Scalar>(record: &SimulationRecord<S>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    ChartKind::ALL
        .iter()
        .map(|&kind| {
            let path = dir.join(kind.file_name());
            fs::write(&path, render_svg(kind, record)?).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well_formed(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed XML")
    }

    #[test]
    fn single_series_has_one_polyline() {
        let svg = render_line_chart(&LineChart {
            title: "t".into(),
            series: vec![Series {
                name: "s".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            }],
            ..Default::default()
        })
        .unwrap();
        let doc = well_formed(&svg);
        let polylines = doc
            .descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .count();
        assert_eq!(polylines, 1);
        assert_eq!(doc.root_element().attribute("version"), Some("1.1"));
    }

    #[test]
    fn reference_line_is_drawn() {
        let svg = render_line_chart(&LineChart {
            series: vec![Series {
                name: "total".into(),
                points: vec![(1.0, 765.6), (2.0, 707.7)],
            }],
            reference: Some(("capacity".into(), 700.0)),
            ..Default::default()
        })
        .unwrap();
        let doc = well_formed(&svg);
        let reference = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("reference"))
            .unwrap();
        assert_eq!(reference.attribute("data-value"), Some("700"));
    }

    #[test]
    fn bar_count_matches_values() {
        let values: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        let svg = render_bar_chart(&BarChart {
            labels: (0..10).map(|i| i.to_string()).collect(),
            values,
            ..Default::default()
        })
        .unwrap();
        let doc = well_formed(&svg);
        assert_eq!(
            doc.descendants().filter(|n| n.has_tag_name("rect")).count(),
            10
        );
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(render_line_chart(&LineChart::default()).is_err());
        let empty_series = LineChart {
            series: vec![Series {
                name: "x".into(),
                points: vec![],
            }],
            ..Default::default()
        };
        assert!(render_line_chart(&empty_series).is_err());
        assert!(render_bar_chart(&BarChart::default()).is_err());
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_line_chart(&LineChart {
            title: "a < b & \"c\"".into(),
            series: vec![Series {
                name: "<s>".into(),
                points: vec![(0.0, 0.0)],
            }],
            ..Default::default()
        })
        .unwrap();
        well_formed(&svg);
    }

    #[test]
    fn axis_ticks_cover_range() {
        let axis = Axis::new(693.2, 765.6);
        assert!(axis.lo <= 693.2 && axis.hi >= 765.6);
        assert!(axis.ticks().len() >= 3);
        assert_eq!(Axis::new(0.0, 0.0).ticks().first().copied(), Some(-1.0));
    }
}
