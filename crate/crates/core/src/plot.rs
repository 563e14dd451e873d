//! Two-panel SVG figures: the path in the plane and the polar coordinates
//! over time.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::output::OutputError;
use crate::sim::Trajectory;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 980.0;
const LEFT: f64 = 80.0;
const PANEL_W: f64 = 600.0;
const XY_TOP: f64 = 50.0;
const XY_H: f64 = 480.0;
const TS_TOP: f64 = 620.0;
const TS_H: f64 = 300.0;
const GLYPHS: usize = 16;

const SERIES: [(&str, &str); 4] =
    [("e", "#1f77b4"), ("\u{3b8}\u{2081}", "#ff7f0e"), ("\u{3b8}\u{2082}", "#2ca02c"), ("\u{3c6}", "#d62728")];

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        let half = 0.5 * lo.abs().max(1.0);
        (lo - half, hi + half)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut k = (lo / step).ceil();
    while k * step <= hi + 1e-9 * step {
        let v = k * step;
        out.push(if v.abs() < 1e-12 * step { 0.0 } else { v });
        k += 1.0;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn frame(svg: &mut String, xa: &Axis, ya: &Axis, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (xa.px_lo, xa.px_hi, ya.px_hi, ya.px_lo);
    for t in ticks(xa.lo, xa.hi) {
        let px = xa.map(t);
        let _ = writeln!(svg, r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{y1:.2}" stroke="#e5e5e5"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            y1 + 16.0,
            tick_label(t)
        );
    }
    for t in ticks(ya.lo, ya.hi) {
        let py = ya.map(t);
        let _ = writeln!(svg, r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#e5e5e5"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#,
        0.5 * (x0 + x1),
        y1 + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
        x0 - 50.0,
        0.5 * (y0 + y1),
        x0 - 50.0,
        0.5 * (y0 + y1)
    );
}

fn polyline(svg: &mut String, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let mut d = String::new();
    for (x, y) in pts {
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        d.trim_end()
    );
}

/// The SVG document for a trajectory.
pub fn trajectory_svg(traj: &Trajectory) -> String {
    let s = &traj.samples;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" font-size="15" text-anchor="middle">t = {:.2} s, {}</text>"#,
        WIDTH / 2.0,
        traj.last().t,
        traj.stop_reason
    );

    // Path panel, equal scale on both axes, goal always in view.
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in s {
        xlo = xlo.min(p.cartesian.x);
        xhi = xhi.max(p.cartesian.x);
        ylo = ylo.min(p.cartesian.y);
        yhi = yhi.max(p.cartesian.y);
    }
    let (xlo, xhi) = padded(xlo, xhi);
    let (ylo, yhi) = padded(ylo, yhi);
    let scale = (PANEL_W / (xhi - xlo)).min(XY_H / (yhi - ylo));
    let (xc, yc) = (0.5 * (xlo + xhi), 0.5 * (ylo + yhi));
    let (hw, hh) = (0.5 * PANEL_W / scale, 0.5 * XY_H / scale);
    let xa = Axis { lo: xc - hw, hi: xc + hw, px_lo: LEFT, px_hi: LEFT + PANEL_W };
    let ya = Axis { lo: yc - hh, hi: yc + hh, px_lo: XY_TOP + XY_H, px_hi: XY_TOP };
    frame(&mut svg, &xa, &ya, "x (m)", "y (m)");
    polyline(&mut svg, s.iter().map(|p| (xa.map(p.cartesian.x), ya.map(p.cartesian.y))), "#1f77b4");

    // Heading arrows evenly spaced along the path.
    let glyph = 0.035 * (xa.hi - xa.lo);
    let length: f64 = s.windows(2).map(|w| (w[1].cartesian.x - w[0].cartesian.x).hypot(w[1].cartesian.y - w[0].cartesian.y)).sum();
    let spacing = length / GLYPHS as f64;
    let mut travelled = 0.0;
    let mut next = 0.0;
    for (k, p) in s.iter().enumerate() {
        if k > 0 {
            let q = s[k - 1].cartesian;
            travelled += (p.cartesian.x - q.x).hypot(p.cartesian.y - q.y);
        }
        if travelled + 1e-12 < next {
            continue;
        }
        next += spacing.max(f64::MIN_POSITIVE);
        let c = p.cartesian;
        let (x0, y0) = (xa.map(c.x), ya.map(c.y));
        let (x1, y1) = (xa.map(c.x + glyph * c.psi.cos()), ya.map(c.y + glyph * c.psi.sin()));
        let (ux, uy) = ((x1 - x0) / (x1 - x0).hypot(y1 - y0), (y1 - y0) / (x1 - x0).hypot(y1 - y0));
        let _ = writeln!(
            svg,
            r##"<g stroke="#555" fill="#555" stroke-width="1.2"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}"/><polygon points="{x1:.2},{y1:.2} {:.2},{:.2} {:.2},{:.2}"/></g>"##,
            x1 - 6.0 * ux - 3.0 * uy,
            y1 - 6.0 * uy + 3.0 * ux,
            x1 - 6.0 * ux + 3.0 * uy,
            y1 - 6.0 * uy - 3.0 * ux
        );
        if spacing == 0.0 {
            break;
        }
    }
    let start = s[0].cartesian;
    let _ = writeln!(
        svg,
        r##"<circle cx="{:.2}" cy="{:.2}" r="5" fill="#2ca02c"><title>start</title></circle>"##,
        xa.map(start.x),
        ya.map(start.y)
    );
    let (gx, gy) = (xa.map(0.0), ya.map(0.0));
    let _ = writeln!(
        svg,
        r##"<g stroke="#d62728" stroke-width="2"><line x1="{:.2}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}"/><line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}"/><title>goal</title></g>"##,
        gx - 6.0,
        gx + 6.0,
        gy - 6.0,
        gy + 6.0
    );

    // Polar coordinates against time.
    let t0 = s[0].t;
    let t1 = if traj.last().t > t0 { traj.last().t } else { t0 + 1.0 };
    let values = |p: &crate::sim::TrajectorySample| [p.polar.e, p.polar.theta1, p.polar.theta2, p.polar.phi];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in s {
        for v in values(p) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let (lo, hi) = padded(lo, hi);
    let ta = Axis { lo: t0, hi: t1, px_lo: LEFT, px_hi: LEFT + PANEL_W };
    let va = Axis { lo, hi, px_lo: TS_TOP + TS_H, px_hi: TS_TOP };
    frame(&mut svg, &ta, &va, "t (s)", "e (m), angles (rad)");
    for (k, (name, color)) in SERIES.iter().enumerate() {
        polyline(&mut svg, s.iter().map(|p| (ta.map(p.t), va.map(values(p)[k]))), color);
        let lx = LEFT + PANEL_W - 120.0;
        let ly = TS_TOP + 18.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="12">{name}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn render_trajectory_svg(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    fs::write(path, trajectory_svg(traj))
        .map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}
