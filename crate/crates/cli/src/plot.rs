//! Static SVG output. Everything is computed from the data alone (no
//! timestamps, fixed number formatting), so equal inputs give equal bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 86.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[i][j]` sits at `(xs[j], ys[i])`.
    pub values: Vec<Vec<f64>>,
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

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title))
        .unwrap();
}

fn axes(out: &mut String, f: &Frame, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)], xl: &str, yl: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    writeln!(out, r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0)
        .unwrap();
    for (v, label) in x_ticks {
        let x = f.px(*v);
        writeln!(out, r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0).unwrap();
        writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 19.0, escape(label)).unwrap();
    }
    for (v, label) in y_ticks {
        let y = f.py(*v);
        writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, escape(label)).unwrap();
    }
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 14.0, escape(xl))
        .unwrap();
    writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(yl)
    )
    .unwrap();
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).map(|v| (v, tick_label(v))).collect()
}

pub fn line_plot(plot: &LinePlot) -> String {
    let tx = |x: f64| if plot.log_x { x.log10() } else { x };
    let keep = |x: f64| !plot.log_x || x > 0.0;
    let xr = range(plot.series.iter().flat_map(|s| s.xs.iter().copied().filter(|&x| keep(x)).map(tx)));
    let yr = range(plot.series.iter().flat_map(|s| s.ys.iter().copied()));
    let frame = Frame { x: xr.unwrap_or((0.0, 1.0)), y: yr.unwrap_or((0.0, 1.0)) };

    let x_ticks = if plot.log_x {
        let (a, b) = (frame.x.0.ceil() as i32, frame.x.1.floor() as i32);
        let step = ((b - a) / 6 + 1).max(1);
        (a..=b).step_by(step as usize).map(|e| (e as f64, format!("1e{e}"))).collect()
    } else {
        linear_ticks(frame.x.0, frame.x.1)
    };

    let mut out = String::new();
    header(&mut out, &plot.title);
    axes(&mut out, &frame, &x_ticks, &linear_ticks(frame.y.0, frame.y.1), &plot.x_label, &plot.y_label);
    for (k, s) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        let mut last = (f64::NAN, f64::NAN);
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            if !keep(x) || !y.is_finite() {
                continue;
            }
            let p = ((frame.px(tx(x)) * 10.0).round() / 10.0, (frame.py(y) * 10.0).round() / 10.0);
            // Points closer than the output precision add bytes, not detail.
            if p != last {
                write!(points, "{:.1},{:.1} ", p.0, p.1).unwrap();
                last = p;
            }
        }
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        )
        .unwrap();
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let lx = WIDTH - RIGHT - 170.0;
        writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0)
            .unwrap();
        writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Viridis-like ramp through five anchors.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * 4.0;
    let i = (x.floor() as usize).min(3);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn heatmap(map: &Heatmap) -> String {
    let frame = Frame {
        x: range(map.xs.iter().copied()).unwrap_or((0.0, 1.0)),
        y: range(map.ys.iter().copied()).unwrap_or((0.0, 1.0)),
    };
    let (lo, hi) = range(map.values.iter().flatten().copied()).unwrap_or((0.0, 1.0));

    let mut out = String::new();
    header(&mut out, &map.title);
    // Cell edges halfway between neighbouring samples.
    let edges = |v: &[f64], i: usize| -> (f64, f64) {
        let a = if i == 0 { v[0] } else { 0.5 * (v[i - 1] + v[i]) };
        let b = if i + 1 == v.len() { v[i] } else { 0.5 * (v[i] + v[i + 1]) };
        (a, b)
    };
    for (i, row) in map.values.iter().enumerate() {
        let (ya, yb) = edges(&map.ys, i);
        for (j, &v) in row.iter().enumerate() {
            let (xa, xb) = edges(&map.xs, j);
            let (x, y) = (frame.px(xa), frame.py(yb));
            let (w, h) = (frame.px(xb) - x, frame.py(ya) - y);
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                w + 0.3,
                h + 0.3,
                color((v - lo) / (hi - lo))
            )
            .unwrap();
        }
    }
    axes(
        &mut out,
        &frame,
        &linear_ticks(frame.x.0, frame.x.1),
        &linear_ticks(frame.y.0, frame.y.1),
        &map.x_label,
        &map.y_label,
    );
    // Colour bar along the top right.
    let (bx, by, bw) = (WIDTH - RIGHT - 200.0, 8.0, 120.0);
    for k in 0..24 {
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{by}" width="{:.2}" height="10" fill="{}"/>"#,
            bx + bw * k as f64 / 24.0,
            bw / 24.0 + 0.3,
            color(k as f64 / 23.0)
        )
        .unwrap();
    }
    writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="end">{}</text>"#, bx - 4.0, by + 9.0, tick_label(lo)).unwrap();
    writeln!(out, r#"<text x="{:.2}" y="{}">{}</text>"#, bx + bw + 4.0, by + 9.0, tick_label(hi)).unwrap();
    out.push_str("</svg>\n");
    out
}
