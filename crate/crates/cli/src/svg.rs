//! Static SVG renders with fixed six-decimal coordinates.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write;

use carousel_core::geom::Vec2;
use carousel_core::scalar::{AngleState, CRITICAL_ANGLE};

pub const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Maps the square `[pi/2, pi]^2` containing the region onto the canvas,
/// `y` pointing up.
fn to_canvas(s: AngleState) -> (f64, f64) {
    let scale = (CANVAS - 2.0 * MARGIN) / FRAC_PI_2;
    (
        MARGIN + (s.x - FRAC_PI_2) * scale,
        CANVAS - MARGIN - (s.y - FRAC_PI_2) * scale,
    )
}

fn points_attr(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = String::new();
    for (i, (x, y)) in points.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x:.6},{y:.6}").unwrap();
    }
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.6} {height:.6}" width="{width:.6}" height="{height:.6}">"#
    )
    .unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    writeln!(
        out,
        r##"<rect x="0.000000" y="0.000000" width="{width:.6}" height="{height:.6}" fill="#ffffff"/>"##
    )
    .unwrap();
}

fn region_and_critical_point(out: &mut String) {
    let corners = [
        AngleState::new(FRAC_PI_2, FRAC_PI_2),
        AngleState::new(PI, FRAC_PI_2),
        AngleState::new(FRAC_PI_2, PI),
    ];
    writeln!(
        out,
        r##"<polygon class="region" points="{}" fill="none" stroke="#444444" stroke-width="1.500000"/>"##,
        points_attr(corners.iter().map(|&c| to_canvas(c)))
    )
    .unwrap();
    let (cx, cy) = to_canvas(AngleState::new(CRITICAL_ANGLE, CRITICAL_ANGLE));
    writeln!(
        out,
        r##"<circle class="critical" cx="{cx:.6}" cy="{cy:.6}" r="4.000000" fill="#c0392b"><title>(2pi/3, 2pi/3)</title></circle>"##
    )
    .unwrap();
}

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

/// Level curves of `H` as closed polylines, one per `(level, samples)`.
pub fn level_sets(curves: &[(f64, Vec<AngleState>)]) -> String {
    let mut out = String::new();
    header(&mut out, CANVAS, CANVAS, "Level sets of H");
    region_and_critical_point(&mut out);
    for (i, (level, samples)) in curves.iter().enumerate() {
        writeln!(
            out,
            r#"<polygon class="level" points="{}" fill="none" stroke="{}" stroke-width="1.000000"><title>H = {level}</title></polygon>"#,
            points_attr(samples.iter().map(|&s| to_canvas(s))),
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Phase portrait of one orbit; a stationary orbit is drawn as a single dot.
pub fn orbit_portrait(title: &str, samples: &[AngleState]) -> String {
    let mut out = String::new();
    header(&mut out, CANVAS, CANVAS, title);
    region_and_critical_point(&mut out);
    let first = samples[0];
    let spread = samples.iter().map(|s| s.distance(first)).fold(0.0, f64::max);
    if spread < 1e-12 {
        let (cx, cy) = to_canvas(first);
        writeln!(
            out,
            r##"<circle class="orbit" cx="{cx:.6}" cy="{cy:.6}" r="3.000000" fill="#1f77b4"/>"##
        )
        .unwrap();
    } else {
        writeln!(
            out,
            r##"<polyline class="orbit" points="{}" fill="none" stroke="#1f77b4" stroke-width="1.000000"/>"##,
            points_attr(samples.iter().map(|&s| to_canvas(s)))
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// A horizontal strip of hexagon snapshots `(t, vertices)`; each frame's
/// title records its time and side lengths.
pub fn hexagon_frames(title: &str, frames: &[(f64, [Vec2; 6])]) -> String {
    let cell = 200.0;
    let scale = 30.0;
    let width = cell * frames.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, width, cell, title);
    for (k, (t, v)) in frames.iter().enumerate() {
        let cx = cell * (k as f64 + 0.5);
        let cy = cell * 0.5;
        let sides: Vec<String> = (0..6)
            .map(|i| format!("{:.6}", v[(i + 1) % 6].distance(v[i])))
            .collect();
        writeln!(
            out,
            r##"<g class="frame"><title>t = {t:.6}; sides {}</title>"##,
            sides.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            r##"<polygon points="{}" fill="#eaf2fb" stroke="#1f77b4" stroke-width="1.000000"/>"##,
            points_attr(v.iter().map(|p| (cx + scale * p.x, cy - scale * p.y)))
        )
        .unwrap();
        writeln!(
            out,
            r##"<circle cx="{cx:.6}" cy="{cy:.6}" r="1.500000" fill="#444444"/></g>"##
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
