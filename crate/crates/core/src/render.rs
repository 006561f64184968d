//! Static SVG snapshots of a flock.

use std::fmt::Write;

use crate::flock::vec2::Vec2;
use crate::flock::{FlockConfig, FlockParams};

const MARGIN: f64 = 1.0;
const PIXELS_PER_UNIT: f64 = 80.0;

/// Draws every bird as its wing segment, a dot at its position and an arrow
/// along its velocity. The view box is fitted to the flock; the y axis
/// points up.
pub fn flock_svg(c: &FlockConfig, params: &FlockParams, caption: &str) -> String {
    let half_wing = params.wingspan / 2.0;
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, v) in c.positions().iter().zip(c.velocities()) {
        for p in [*x + Vec2::new(half_wing, half_wing), *x - Vec2::new(half_wing, half_wing), *x + *v] {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    lo = lo - Vec2::new(MARGIN, MARGIN);
    hi = hi + Vec2::new(MARGIN, MARGIN);
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    // Flip y so the picture reads like a plot.
    let map = |p: Vec2| Vec2::new(p.x - lo.x, hi.y - p.y);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {w:.4} {h:.4}">"#,
        w * PIXELS_PER_UNIT,
        h * PIXELS_PER_UNIT
    );
    let _ = writeln!(
        svg,
        r#"<defs><marker id="head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="4" markerHeight="4" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="firebrick"/></marker></defs>"#
    );
    let _ = writeln!(svg, r#"<rect width="{w:.4}" height="{h:.4}" fill="white"/>"#);
    let _ =
        writeln!(svg, r#"<text x="0.1" y="0.35" font-size="0.3" font-family="sans-serif">{}</text>"#, escape(caption));
    for (x, v) in c.positions().iter().zip(c.velocities()) {
        let n = v.norm();
        let side = if n > 0.0 { v.perp() * (half_wing / n) } else { Vec2::new(0.0, half_wing) };
        let (a, b) = (map(*x + side), map(*x - side));
        let _ = writeln!(
            svg,
            r#"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="steelblue" stroke-width="0.06" stroke-linecap="round"/>"#,
            a.x, a.y, b.x, b.y
        );
        let (p, tip) = (map(*x), map(*x + *v));
        let _ = writeln!(
            svg,
            r#"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="firebrick" stroke-width="0.03" marker-end="url(#head)"/>"#,
            p.x, p.y, tip.x, tip.y
        );
        let _ = writeln!(svg, r#"<circle cx="{:.4}" cy="{:.4}" r="0.07" fill="black"/>"#, p.x, p.y);
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
