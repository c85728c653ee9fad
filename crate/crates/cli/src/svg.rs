//! Bare-bones SVG plots: polylines, scatter and heatmap cells on a box with
//! axis labels.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const M: f64 = 56.0;

pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    title: String,
    labels: (String, String),
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if (b - a).abs() < 1e-300 { (a - 0.5, b + 0.5) } else { (a, b) };
        Plot { x: pad(x), y: pad(y), body: String::new(), title: title.into(), labels: (xlabel.into(), ylabel.into()) }
    }

    /// Bounding box of a point cloud with a small margin.
    pub fn bounds(pts: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return ((0.0, 1.0), (0.0, 1.0));
        }
        let (dx, dy) = (0.03 * (x1 - x0), 0.03 * (y1 - y0));
        ((x0 - dx, x1 + dx), (y0 - dy, y1 + dy))
    }

    fn sx(&self, x: f64) -> f64 {
        M + (W - 2.0 * M) * (x - self.x.0) / (self.x.1 - self.x.0)
    }

    fn sy(&self, y: f64) -> f64 {
        H - M - (H - 2.0 * M) * (y - self.y.0) / (self.y.1 - self.y.0)
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str, closed: bool) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, self.sx(x), self.sy(y));
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(self.body, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#);
    }

    pub fn scatter(&mut self, pts: &[(f64, f64)], color: &str, radius: f64) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}"/>"#,
                self.sx(x),
                self.sy(y)
            );
        }
    }

    /// Axis-aligned cell centred at (x, y) with data-space size (w, h).
    pub fn cell(&mut self, x: f64, y: f64, w: f64, h: f64, color: &str) {
        let (x0, x1) = (self.sx(x - 0.5 * w), self.sx(x + 0.5 * w));
        let (y0, y1) = (self.sy(y + 0.5 * h), self.sy(y - 0.5 * h));
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
            x0,
            y0,
            (x1 - x0).max(0.5),
            (y1 - y0).max(0.5)
        );
    }

    pub fn finish(self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        s.push_str(&self.body);
        let _ = writeln!(
            s,
            r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * M,
            H - 2.0 * M
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                self.sx(xv),
                H - M + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                M - 4.0,
                self.sy(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 12.0,
            esc(&self.labels.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.labels.1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(&self.title)
        );
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Blue (negative) through white to red (positive), saturating at ±scale.
pub fn diverging(v: f64, scale: f64) -> String {
    let t = (v / scale).clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let u = -t;
        (255.0 * (1.0 - u), 255.0 * (1.0 - u), 255.0)
    } else {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}
