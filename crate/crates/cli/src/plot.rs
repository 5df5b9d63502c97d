//! Minimal SVG scatter plot: axes, a colour legend and sized circles.

use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const LEGEND: f64 = 140.0;
const BASE_RADIUS: f64 = 4.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22",
];

pub struct Scatter<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    /// Group of each point; drives colour and legend.
    pub groups: Option<&'a [String]>,
    /// Extra radius per point, e.g. a scaled MRD value.
    pub sizes: Option<&'a [Option<f64>]>,
    pub tooltips: &'a [String],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    (lo - pad, hi + pad)
}

impl Scatter<'_> {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = span(self.points.iter().map(|p| p.0));
        let (y0, y1) = span(self.points.iter().map(|p| p.1));
        let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

        let colours: BTreeMap<&str, &str> = self
            .groups
            .map(|g| {
                let mut names: Vec<&str> = g.iter().map(String::as_str).collect();
                names.sort_unstable();
                names.dedup();
                names
                    .into_iter()
                    .enumerate()
                    .map(|(i, n)| (n, PALETTE[i % PALETTE.len()]))
                    .collect()
            })
            .unwrap_or_default();

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(self.title)
        )
        .unwrap();
        let (left, right, top, bottom) = (MARGIN, MARGIN + plot_w, MARGIN, HEIGHT - MARGIN);
        writeln!(
            s,
            r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>"#
        )
        .unwrap();
        for t in 0..=4 {
            let f = t as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            writeln!(
                s,
                r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#,
                bottom + 16.0
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.2}</text>"#,
                left - 6.0,
                py + 4.0
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (left + right) / 2.0,
            HEIGHT - 12.0,
            escape(self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(self.y_label)
        )
        .unwrap();

        for (i, &(x, y)) in self.points.iter().enumerate() {
            let colour = self.groups.map_or(PALETTE[0], |g| colours[g[i].as_str()]);
            let extra = self.sizes.and_then(|sz| sz[i]).unwrap_or(0.0);
            let r = BASE_RADIUS + 2.0 * extra.max(0.0);
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{colour}" fill-opacity="0.75"><title>{}</title></circle>"#,
                sx(x),
                sy(y),
                escape(&self.tooltips[i])
            )
            .unwrap();
        }

        for (row, (name, colour)) in colours.iter().enumerate() {
            let y = top + 18.0 * row as f64;
            writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{y:.1}" r="5" fill="{colour}"/>"#,
                right + 20.0
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
                right + 30.0,
                y + 4.0,
                escape(name)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}
