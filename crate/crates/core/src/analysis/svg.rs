//! Self-contained SVG output.

use std::fmt::Write as _;

use super::{CurveRow, HeatmapGrid};
use crate::circle2d::{Geometry, Position};

const RAMP: [(u8, u8, u8); 5] = [
    (44, 123, 182),
    (171, 217, 233),
    (255, 255, 191),
    (253, 174, 97),
    (215, 25, 28),
];

/// Blue→red color for `t ∈ [0, 1]`, linear between five stops.
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let scaled = t * (RAMP.len() - 1) as f64;
    let i = (scaled.floor() as usize).min(RAMP.len() - 2);
    let f = scaled - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + f * (y as f64 - x as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const MAP_SIZE: f64 = 600.0;
const MAP_MARGIN: f64 = 30.0;

/// Visit-count cells colored on `log(1 + count)`, with the cost-region
/// outline and both optima drawn on top.
pub fn render_heatmap_svg(grid: &HeatmapGrid, geometry: &Geometry, title: &str) -> String {
    let span = grid.cell_width * grid.resolution as f64;
    let scale = MAP_SIZE / span;
    let ymax = grid.ymin + span;
    let sx = |x: f64| MAP_MARGIN + (x - grid.xmin) * scale;
    let sy = |y: f64| MAP_MARGIN + (ymax - y) * scale;
    let total = MAP_SIZE + 2.0 * MAP_MARGIN;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MAP_MARGIN}" y="20" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MAP_MARGIN}" y="{MAP_MARGIN}" width="{MAP_SIZE}" height="{MAP_SIZE}" fill="{}"/>"#,
        ramp_color(0.0)
    );

    let peak = (1.0 + grid.max_count() as f64).ln();
    let cell = grid.cell_width * scale;
    for iy in 0..grid.resolution {
        for ix in 0..grid.resolution {
            let c = grid.count(ix, iy);
            if c == 0 {
                continue;
            }
            let x = grid.xmin + ix as f64 * grid.cell_width;
            let y = grid.ymin + (iy + 1) as f64 * grid.cell_width;
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{cell:.3}" height="{cell:.3}" fill="{}"><title>{c}</title></rect>"#,
                sx(x),
                sy(y),
                ramp_color((1.0 + c as f64).ln() / peak)
            );
        }
    }

    let _ = writeln!(
        out,
        r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        sx(geometry.disk_center.x),
        sy(geometry.disk_center.y),
        geometry.disk_radius * scale
    );
    for slot in geometry.slots() {
        let points: Vec<String> = slot
            .corners()
            .iter()
            .map(|p| format!("{:.3},{:.3}", sx(p.x), sy(p.y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1" stroke-dasharray="4 3"/>"#,
            points.join(" ")
        );
    }
    let marker = |out: &mut String, p: Position, color: &str, label: &str| {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="{color}" stroke="black"><title>{label}</title></circle>"#,
            sx(p.x),
            sy(p.y)
        );
    };
    marker(&mut out, geometry.infeasible_optimum, "#d7191c", "infeasible optimum");
    marker(&mut out, geometry.feasible_optimum, "#1a9641", "feasible optimum");
    out.push_str("</svg>\n");
    out
}

const CHART_W: f64 = 640.0;
const PANEL_H: f64 = 220.0;
const PAD: f64 = 50.0;

struct Series<'a> {
    label: &'a str,
    mean: Vec<f64>,
    std: Vec<f64>,
    limit: Option<f64>,
    color: &'a str,
}

fn panel(out: &mut String, top: f64, xs: &[f64], series: &Series) {
    let Series {
        label,
        mean,
        std,
        limit,
        color,
    } = series;
    let limit = *limit;
    let xmin = xs.first().copied().unwrap_or(0.0);
    let xmax = xs.last().copied().unwrap_or(1.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (m, s) in mean.iter().zip(std) {
        lo = lo.min(m - s);
        hi = hi.max(m + s);
    }
    if let Some(l) = limit {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let width = CHART_W - 2.0 * PAD;
    let sx = |x: f64| PAD + (x - xmin) / xspan * width;
    let sy = |y: f64| top + PANEL_H - (y - lo) / (hi - lo) * PANEL_H;

    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{top}" width="{width}" height="{PANEL_H}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="13">{}</text>"#,
        top - 6.0,
        escape(label)
    );
    for (value, y) in [(hi, top + 4.0), (lo, top + PANEL_H)] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{value:.3}</text>"#,
            PAD - 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{xmax}</text>"#,
        CHART_W - PAD,
        top + PANEL_H + 12.0
    );

    let upper = xs.iter().zip(mean.iter().zip(std)).map(|(&x, (m, s))| (x, m + s));
    let lower = xs.iter().zip(mean.iter().zip(std)).rev().map(|(&x, (m, s))| (x, m - s));
    let band: Vec<String> = upper
        .chain(lower)
        .map(|(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
        band.join(" ")
    );
    let line: Vec<String> = xs
        .iter()
        .zip(mean)
        .map(|(&x, &y)| format!("{:.3},{:.3}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        line.join(" ")
    );
    if let Some(l) = limit {
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="black" stroke-dasharray="6 4"><title>cost limit {l}</title></line>"#,
            PAD + width,
            y = sy(l)
        );
    }
}

/// Return and cost-return panels against cumulative steps, with ±1 std
/// bands and a dashed cost-limit line.
pub fn render_curves_svg(rows: &[CurveRow], cost_limit: f64) -> String {
    let height = 2.0 * PANEL_H + 3.0 * PAD;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_W}" height="{height}" viewBox="0 0 {CHART_W} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let xs: Vec<f64> = rows.iter().map(|r| r.cumulative_steps).collect();
    let col = |f: fn(&CurveRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let returns = Series {
        label: "episodic return",
        mean: col(|r| r.return_mean),
        std: col(|r| r.return_std),
        limit: None,
        color: "#2c7bb6",
    };
    let costs = Series {
        label: "episodic cost return",
        mean: col(|r| r.cost_return_mean),
        std: col(|r| r.cost_return_std),
        limit: Some(cost_limit),
        color: "#d7191c",
    };
    panel(&mut out, PAD, &xs, &returns);
    panel(&mut out, 2.0 * PAD + PANEL_H, &xs, &costs);
    out.push_str("</svg>\n");
    out
}
