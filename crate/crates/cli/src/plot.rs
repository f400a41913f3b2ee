//! Minimal SVG charts: F1-versus-cost step curves and objective-space
//! scatter plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct Axes {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Each value holds until the next point.
    Step,
    Scatter,
}

struct Frame {
    axes: Axes,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.axes.x;
        MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.axes.y;
        HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn chart(title: &str, x_label: &str, y_label: &str, axes: Axes, style: Style, series: &[Series]) -> String {
    let f = Frame { axes };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (f.px(axes.x.0), f.px(axes.x.1), f.py(axes.y.0), f.py(axes.y.1));
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = axes.x.0 + t * (axes.x.1 - axes.x.0);
        let yv = axes.y.0 + t * (axes.y.1 - axes.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"##,
            y0 + 4.0,
            y0 + 18.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.2}</text>"##,
            x0 - 4.0,
            x0 - 7.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );

    for (k, series) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        match style {
            Style::Step => {
                let mut d = String::new();
                for (i, &(x, y)) in series.points.iter().enumerate() {
                    if i == 0 {
                        let _ = write!(d, "M{:.2},{:.2}", f.px(x), f.py(y));
                    } else {
                        let prev = series.points[i - 1].1;
                        let _ = write!(d, " L{:.2},{:.2} L{:.2},{:.2}", f.px(x), f.py(prev), f.px(x), f.py(y));
                    }
                }
                let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"/>"#);
            }
            Style::Scatter => {
                for &(x, y) in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.7"/>"#,
                        f.px(x),
                        f.py(y)
                    );
                }
            }
        }
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            ly - 9.0,
            WIDTH - MARGIN - 135.0,
            ly,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
