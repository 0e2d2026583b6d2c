use std::fmt::Write;

use super::Drawing;
use crate::geometry::{Aabb, Piece, Point};
use crate::nudger::BundleGraph;
use crate::routing_graph::{Boundary, Obstacle};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SvgOptions {
    pub hubs: bool,
    pub obstacles: bool,
    /// Written into a comment when set.
    pub timestamp: Option<String>,
}

fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn pt(p: Point) -> String {
    format!("{} {}", num(p.x), num(p.y))
}

fn path_data(pieces: &[Piece]) -> String {
    let mut d = String::new();
    let mut at: Option<Point> = None;
    for p in pieces {
        if at.is_none_or(|a| a.dist(p.start()) > 1e-9) {
            let _ = write!(d, "M{} ", pt(p.start()));
        }
        match *p {
            Piece::Line { to, .. } => {
                let _ = write!(d, "L{} ", pt(to));
            }
            Piece::Arc { radius, sweep, to, .. } => {
                let large = u8::from(sweep.abs() > std::f64::consts::PI);
                let dir = u8::from(sweep > 0.0);
                let _ = write!(d, "A{} {} 0 {large} {dir} {} ", num(radius), num(radius), pt(to));
            }
        }
        at = Some(p.end());
    }
    d.trim_end().to_string()
}

/// Drawing in math orientation (y up): node boundaries, optional obstacle and
/// hub layers, then one path element per rendered path in input edge order.
pub fn write_svg(drawing: &Drawing, graph: &BundleGraph, terminals: &[Obstacle], options: &SvgOptions) -> String {
    let mut bbox: Option<Aabb> = None;
    let mut grow = |b: Aabb| bbox = Some(bbox.map_or(b, |o| o.union(&b)));
    for t in terminals {
        grow(t.hull.bbox());
    }
    for p in &drawing.paths {
        for s in p.sample(4) {
            grow(Aabb::around(s, p.width));
        }
    }
    let b = bbox.unwrap_or(Aabb::around(Point::ORIGIN, 1.0)).inflate(1.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        num(b.min.x),
        num(-b.max.y),
        num(b.width()),
        num(b.height()),
        num(b.width() * 10.0),
        num(b.height() * 10.0)
    );
    if let Some(ts) = &options.timestamp {
        let _ = writeln!(out, "<!-- generated {ts} -->");
    }
    let _ = writeln!(out, r#"<g transform="scale(1,-1)">"#);
    if options.obstacles {
        let _ = writeln!(out, r##"<g id="obstacles" fill="none" stroke="#999" stroke-dasharray="0.2 0.2" stroke-width="0.05">"##);
        for o in graph.obstacles() {
            let pts: Vec<String> = o.vertices().iter().map(|&p| pt(p).replace(' ', ",")).collect();
            let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r##"<g id="nodes" fill="#eee" stroke="#333" stroke-width="0.05">"##);
    for t in terminals {
        let c = t.center;
        match &t.boundary {
            Boundary::Rectangle { width, height } => {
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
                    num(c.x - width / 2.0),
                    num(c.y - height / 2.0),
                    num(*width),
                    num(*height)
                );
            }
            Boundary::Ellipse { rx, ry } => {
                let _ = writeln!(out, r#"<ellipse cx="{}" cy="{}" rx="{}" ry="{}"/>"#, num(c.x), num(c.y), num(*rx), num(*ry));
            }
            Boundary::Polygon { points } => {
                let pts: Vec<String> = points.iter().map(|&p| pt(c + p).replace(' ', ",")).collect();
                let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
            }
        }
    }
    let _ = writeln!(out, "</g>");
    if options.hubs {
        let _ = writeln!(out, r##"<g id="hubs" fill="none" stroke="#bbb" stroke-width="0.03">"##);
        for h in &drawing.hubs {
            let c = graph.position(h.node);
            let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, num(c.x), num(c.y), num(h.radius()));
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r#"<g id="paths" fill="none" stroke-linecap="butt">"#);
    let mut order: Vec<usize> = (0..drawing.paths.len()).collect();
    order.sort_by_key(|&i| (drawing.paths[i].edge, i));
    for i in order {
        let p = &drawing.paths[i];
        let _ = writeln!(
            out,
            r#"<path data-edge="{}" stroke="{}" stroke-width="{}" d="{}"/>"#,
            p.edge,
            PALETTE[p.edge % PALETTE.len()],
            num(p.width.max(0.02)),
            path_data(&p.pieces)
        );
    }
    let _ = writeln!(out, "</g>\n</g>\n</svg>");
    out
}
