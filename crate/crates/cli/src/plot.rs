//! Minimal self-contained SVG line plots and heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Heatmap,
}

/// Plot data. Line plots read `(x, y)`; heatmaps read `(x, y, value)` on a
/// rectangular grid.
#[derive(Debug, Clone)]
pub struct Plot {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub rows: Vec<[f64; 3]>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, plot: &Plot, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for (v, anchor, x, y) in [
        (frame.x.0, "start", x0, y0 + 16.0),
        (frame.x.1, "end", x1, y0 + 16.0),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.4e}</text>"#
        );
    }
    for (v, y) in [(frame.y.0, y0), (frame.y.1, y1 + 10.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" text-anchor="end">{v:.4e}</text>"#,
            x0 - 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&plot.y_label)
    );
}

fn line(plot: &Plot) -> String {
    let frame = Frame {
        x: range(plot.rows.iter().map(|r| r[0])),
        y: range(plot.rows.iter().map(|r| r[1])),
    };
    let mut out = String::new();
    header(&mut out, plot, &frame);
    let mut d = String::new();
    let mut pen_down = false;
    for r in &plot.rows {
        if !(r[0].is_finite() && r[1].is_finite()) {
            pen_down = false;
            continue;
        }
        let cmd = if pen_down { 'L' } else { 'M' };
        let _ = write!(d, "{cmd}{:.2} {:.2} ", frame.px(r[0]), frame.py(r[1]));
        pen_down = true;
    }
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        d.trim_end()
    );
    for r in plot
        .rows
        .iter()
        .filter(|r| r[0].is_finite() && r[1].is_finite())
    {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#,
            frame.px(r[0]),
            frame.py(r[1])
        );
    }
    out.push_str("</svg>\n");
    out
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Diverging colour: blue for negative, white at 0, red for positive.
fn colour(v: f64, scale: f64) -> String {
    if !v.is_finite() {
        return "#bbbbbb".into();
    }
    let s = (v / scale).clamp(-1.0, 1.0);
    let fade = |a: f64| (255.0 * (1.0 - a)).round() as u8;
    let (r, g, b) = if s >= 0.0 {
        (255, fade(s), fade(s))
    } else {
        (fade(-s), fade(-s), 255)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn heatmap(plot: &Plot) -> String {
    let xs = sorted_unique(plot.rows.iter().map(|r| r[0]));
    let ys = sorted_unique(plot.rows.iter().map(|r| r[1]));
    let step = |v: &[f64]| {
        if v.len() > 1 {
            (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
        } else {
            1.0
        }
    };
    let (hx, hy) = (step(&xs), step(&ys));
    let frame = Frame {
        x: (xs[0] - hx / 2.0, xs[xs.len() - 1] + hx / 2.0),
        y: (ys[0] - hy / 2.0, ys[ys.len() - 1] + hy / 2.0),
    };
    let scale = plot
        .rows
        .iter()
        .map(|r| r[2].abs())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut out = String::new();
    header(&mut out, plot, &frame);
    for r in &plot.rows {
        let (x0, x1) = (frame.px(r[0] - hx / 2.0), frame.px(r[0] + hx / 2.0));
        let (y0, y1) = (frame.py(r[1] + hy / 2.0), frame.py(r[1] - hy / 2.0));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{:.6e}</title></rect>"#,
            x1 - x0,
            y1 - y0,
            colour(r[2], scale),
            r[2]
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="44" text-anchor="end">colour scale: +/-{scale:.3e}</text>"#,
        WIDTH - MARGIN
    );
    out.push_str("</svg>\n");
    out
}

/// Render `plot` as SVG text.
pub fn render(plot: &Plot) -> Result<String> {
    if plot.rows.is_empty() {
        bail!("cannot plot {:?}: no rows", plot.title);
    }
    Ok(match plot.kind {
        PlotKind::Line => line(plot),
        PlotKind::Heatmap => heatmap(plot),
    })
}

/// Write `plot` to `path`.
pub fn emit_plot(plot: &Plot, path: &Path) -> Result<()> {
    let svg = render(plot)?;
    std::fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))
}
