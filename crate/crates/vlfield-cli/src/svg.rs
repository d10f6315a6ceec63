//! Dependency-free SVG emission for diagnostic plots: polyline charts,
//! cell heatmaps, and per-check margin bars.

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const PAD: f64 = 56.0;

fn document(body: &str, title: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
            "<text x=\"{tx}\" y=\"24\" font-family=\"monospace\" font-size=\"15\" ",
            "text-anchor=\"middle\">{title}</text>\n{body}</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = escape(title),
        body = body
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Polyline plot of (x, y) points with linear axes.
pub fn line_plot(points: &[(f64, f64)], title: &str) -> String {
    if points.is_empty() {
        return document("", title);
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-300 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-300 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
    let sy = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);
    let mut body = String::new();
    let _ = writeln!(
        body,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        WIDTH - 2.0 * PAD,
        HEIGHT - 2.0 * PAD
    );
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        body,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        path.join(" ")
    );
    for (label, v, x) in [("min", x0, true), ("max", x1, true), ("min", y0, false), ("max", y1, false)] {
        let (px, py, anchor) = if x {
            (sx(v), HEIGHT - PAD + 18.0, "middle")
        } else {
            (PAD - 6.0, sy(v) + 4.0, "end")
        };
        let _ = writeln!(
            body,
            "<text x=\"{px:.1}\" y=\"{py:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"{anchor}\">{label} {v:.6}</text>"
        );
    }
    document(&body, title)
}

/// Grayscale-to-heat cell map of row-major values with a fixed column count.
pub fn heatmap(values: &[f64], cols: usize, title: &str) -> String {
    if values.is_empty() || cols == 0 {
        return document("", title);
    }
    let rows = values.len().div_ceil(cols);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < 1e-300 {
        hi = lo + 1.0;
    }
    let cw = (WIDTH - 2.0 * PAD) / cols as f64;
    let ch = (HEIGHT - 2.0 * PAD) / rows as f64;
    let mut body = String::new();
    for (i, &v) in values.iter().enumerate() {
        let r = i / cols;
        let c = i % cols;
        let t = (v - lo) / (hi - lo);
        let red = (255.0 * t) as u8;
        let blue = (255.0 * (1.0 - t)) as u8;
        let green = (96.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8;
        let _ = writeln!(
            body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({red},{green},{blue})\"/>",
            PAD + c as f64 * cw,
            PAD + r as f64 * ch,
            cw.max(0.5),
            ch.max(0.5),
        );
    }
    let _ = writeln!(
        body,
        "<text x=\"{PAD}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">range [{lo:.6e}, {hi:.6e}]</text>",
        HEIGHT - PAD + 18.0
    );
    document(&body, title)
}

/// Horizontal margin bars for verification checks; negative margins in red.
pub fn margin_bars(entries: &[(String, f64)], title: &str) -> String {
    if entries.is_empty() {
        return document("", title);
    }
    let bar_h = ((HEIGHT - 2.0 * PAD) / entries.len() as f64).min(22.0);
    let mid = WIDTH / 2.0;
    let scale = (WIDTH / 2.0 - PAD) / 4.0;
    let mut body = String::new();
    let _ = writeln!(
        body,
        "<line x1=\"{mid}\" y1=\"{PAD}\" x2=\"{mid}\" y2=\"{}\" stroke=\"#888\"/>",
        PAD + entries.len() as f64 * bar_h
    );
    for (i, (id, margin)) in entries.iter().enumerate() {
        let y = PAD + i as f64 * bar_h;
        // Signed log scale keeps tiny and huge margins on one axis.
        let len = margin.abs().ln_1p().min(4.0) * scale * margin.signum();
        let (x, w, color) = if len >= 0.0 {
            (mid, len, "#2ca02c")
        } else {
            (mid + len, -len, "#d62728")
        };
        let _ = writeln!(
            body,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{color}\"/>",
            y + 2.0,
            w.max(0.75),
            bar_h - 4.0
        );
        let _ = writeln!(
            body,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{} ({margin:.2e})</text>",
            mid - 8.0,
            y + bar_h / 2.0 + 3.0,
            escape(id)
        );
    }
    document(&body, title)
}
