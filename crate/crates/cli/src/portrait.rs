//! SVG phase portraits: streamlines through seeds on a ring, drawn forward and
//! backward in time, with one arrowhead at the middle of each.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use anyhow::bail;
use planar_core::integrator::{streamline, StreamlineLimits};
use planar_core::{PlanarSystem, Vec2};

#[derive(Debug, Clone)]
pub struct PortraitOptions {
    pub ring: f64,
    pub seeds: usize,
    pub t_max: f64,
    /// Stop streamlines beyond this radius even inside the view.
    pub outer_limit: Option<f64>,
}

/// View half-width relative to the ring radius.
const VIEW: f64 = 1.2;

/// One streamline through a seed, oriented along the flow.
pub fn seeded_streamline(sys: &PlanarSystem, seed: Vec2, limits: &StreamlineLimits) -> Vec<Vec2> {
    let mut line = streamline(sys, seed, true, limits);
    line.reverse();
    line.extend(streamline(sys, seed, false, limits).into_iter().skip(1));
    line
}

/// Point and unit tangent at half the arc length.
fn midpoint(line: &[Vec2]) -> Option<(Vec2, Vec2)> {
    let lengths: Vec<f64> = line.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    if total == 0.0 {
        return None;
    }
    let mut acc = 0.0;
    for (i, len) in lengths.iter().enumerate() {
        if acc + len >= 0.5 * total && *len > 0.0 {
            let s = (0.5 * total - acc) / len;
            let dir = (line[i + 1] - line[i]) * (1.0 / len);
            return Some((line[i] + (line[i + 1] - line[i]) * s, dir));
        }
        acc += len;
    }
    None
}

pub fn render(sys: &PlanarSystem, opts: &PortraitOptions) -> anyhow::Result<String> {
    if !(opts.ring > 0.0 && opts.ring.is_finite()) {
        bail!("ring radius must be positive, got {}", opts.ring);
    }
    if opts.seeds == 0 {
        bail!("need at least one seed");
    }
    if opts.t_max.is_nan() || opts.t_max <= 0.0 {
        bail!("t-max must be positive, got {}", opts.t_max);
    }
    let half = VIEW * opts.ring;
    // corners of the view lie at half·√2
    let mut outer = half * 1.5;
    if let Some(limit) = opts.outer_limit {
        outer = outer.min(limit);
    }
    let limits = StreamlineLimits {
        t_max: opts.t_max,
        outer_radius: outer,
        inner_radius: 1e-3 * opts.ring,
        max_arc: 0.01 * opts.ring,
    };
    let stroke = 0.008 * opts.ring;
    let arrow = 0.05 * opts.ring;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="480" height="480" viewBox="{} {} {} {}">"#,
        -half,
        -half,
        2.0 * half,
        2.0 * half
    );
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="view"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        -half,
        -half,
        2.0 * half,
        2.0 * half
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff"/>"##,
        -half,
        -half,
        2.0 * half,
        2.0 * half
    );
    // y up
    let _ = writeln!(svg, r#"<g transform="scale(1,-1)" clip-path="url(#view)">"#);

    let mut arrows = String::new();
    for i in 0..opts.seeds {
        let seed = Vec2::from_polar(opts.ring, TAU * i as f64 / opts.seeds as f64);
        let line = seeded_streamline(sys, seed, &limits);
        let mut d = String::new();
        for (j, p) in line.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.5} {:.5}",
                if j == 0 { "M" } else { " L" },
                p.x,
                p.y
            );
        }
        let _ = writeln!(
            svg,
            r##"<path d="{d}" fill="none" stroke="#000000" stroke-width="{stroke:.5}" stroke-linejoin="round"/>"##
        );
        if let Some((p, t)) = midpoint(&line) {
            let n = Vec2::new(-t.y, t.x);
            let tip = p + t * (0.5 * arrow);
            let base = p - t * (0.5 * arrow);
            let a = base + n * (0.35 * arrow);
            let b = base - n * (0.35 * arrow);
            let _ = writeln!(
                arrows,
                r##"<polygon points="{:.5},{:.5} {:.5},{:.5} {:.5},{:.5}" fill="#000000"/>"##,
                tip.x, tip.y, a.x, a.y, b.x, b.y
            );
        }
    }
    svg.push_str(&arrows);
    let _ = writeln!(
        svg,
        r##"<circle cx="0" cy="0" r="{:.5}" fill="#000000"/>"##,
        2.5 * stroke
    );
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}
