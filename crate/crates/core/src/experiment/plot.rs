//! Static SVG plot of delay against ARL on a log axis.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::output::CurveRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn usable(r: &CurveRow) -> bool {
    r.arl_mean.is_finite() && r.arl_mean > 0.0
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, arl: f64) -> f64 {
        let t = (arl.log10() - self.x0) / (self.x1 - self.x0);
        MARGIN_LEFT + t * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, delay: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - delay / self.y1 * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

/// Measured delay (solid, with markers) and the analytic bound column
/// (dashed) for every scheme in `rows`. Points with non-finite or
/// non-positive ARL are skipped.
pub fn delay_vs_arl_svg(rows: &[CurveRow]) -> String {
    let mut series: BTreeMap<&str, Vec<&CurveRow>> = BTreeMap::new();
    for r in rows {
        series.entry(r.scheme.as_str()).or_default().push(r);
    }
    let arls: Vec<f64> = rows.iter().filter(|r| usable(r)).map(|r| r.arl_mean).collect();
    let delays: Vec<f64> = rows
        .iter()
        .filter(|r| usable(r))
        .flat_map(|r| [Some(r.delay_mean), r.bound_delay])
        .flatten()
        .filter(|d| d.is_finite())
        .collect();
    let (lo, hi) = arls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        (lo.min(*a), hi.max(*a))
    });
    let (x0, x1) = if lo.is_finite() {
        (lo.log10().floor(), hi.log10().ceil().max(lo.log10().floor() + 1.0))
    } else {
        (0.0, 1.0)
    };
    let ymax = delays.iter().cloned().fold(0.0, f64::max);
    let frame = Frame {
        x0,
        x1,
        y1: if ymax > 0.0 { ymax * 1.1 } else { 1.0 },
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{left},{top} V{bottom} H{right}" fill="none" stroke="black"/>"#
    );
    for e in (x0 as i32)..=(x1 as i32) {
        let x = frame.x(10f64.powi(e));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#,
            bottom + 18.0
        );
    }
    for i in 0..=5 {
        let d = frame.y1 * i as f64 / 5.0;
        let y = frame.y(d);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#,
            left - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{d:.3}</text>"#,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">ARL (log scale)</text>"#,
        (left + right) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">detection delay</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );

    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let measured: Vec<(f64, f64)> = pts
            .iter()
            .filter(|r| usable(r))
            .filter(|r| r.delay_mean.is_finite())
            .map(|r| (frame.x(r.arl_mean), frame.y(r.delay_mean)))
            .collect();
        polyline(&mut out, &measured, color, false);
        for (x, y) in &measured {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let bound: Vec<(f64, f64)> = pts
            .iter()
            .filter(|r| usable(r))
            .filter_map(|r| {
                r.bound_delay
                    .filter(|b| b.is_finite())
                    .map(|b| (frame.x(r.arl_mean), frame.y(b)))
            })
            .collect();
        polyline(&mut out, &bound, color, true);

        let ly = top + 18.0 * i as f64;
        let lx = right + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    let ly = top + 18.0 * series.len() as f64;
    let lx = right + 15.0;
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="gray" stroke-dasharray="6 4"/>"#,
        lx + 20.0
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">analytic</text>"#, lx + 26.0, ly + 4.0);
    out.push_str("</svg>\n");
    out
}
