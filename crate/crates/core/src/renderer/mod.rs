//! Turning ordered bundles into curves.
//!
//! Every bundle edge gets a base at each end: a chord across the hub of an
//! intermediate node, or the stretch of a terminal's boundary curve where the
//! bundle leaves it. Paths occupy parallel slots across the base in bundle
//! order. A rendered path alternates straight bundle segments between bases
//! and biarc hub segments inside hubs.

mod svg;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::geometry::{angle_between, fit_biarc, Biarc, Piece, Point};
use crate::nudger::{BundleGraph, Hub};
use crate::ordering::{edge_key, BundleOrdering};
use crate::routing_graph::Obstacle;

pub use svg::{write_svg, SvgOptions};

/// Containment samples per hub segment.
pub const HUB_SAMPLES: usize = 64;

/// Fraction of the free space a bundle may use next to obstacles and inside
/// terminal boundaries.
const CLEARANCE_FRACTION: f64 = 0.9;

/// Fraction of the half-angle to the nearest other edge a base may span.
const BASE_ANGLE_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Slot {
    pub path: usize,
    /// Signed distance from the edge axis, positive to the left of min→max.
    pub offset: f64,
    /// Scaled stroke width.
    pub width: f64,
    pub point: Point,
}

/// Attachment of one bundle at one of its end nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleBase {
    /// Edge key, smaller node first.
    pub edge: (usize, usize),
    pub node: usize,
    /// Unit direction from `node` along the edge.
    pub direction: Point,
    /// Common factor applied to widths and separations on this edge.
    pub scale: f64,
    /// Left to right travelling min→max.
    pub slots: Vec<Slot>,
}

impl BundleBase {
    /// Distance between the outermost slot boundaries.
    pub fn extent(&self) -> f64 {
        match (self.slots.first(), self.slots.last()) {
            (Some(a), Some(b)) => a.offset - b.offset + (a.width + b.width) / 2.0,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedPath {
    /// Index into the bundle graph paths.
    pub path: usize,
    /// Input edge id.
    pub edge: usize,
    pub width: f64,
    pub pieces: Vec<Piece>,
    /// Hubs where the single biarc left the hub and two biarcs were used.
    pub fallbacks: usize,
    /// Hub segments with a sample outside the hub even after the fallback.
    pub hub_violations: usize,
}

impl RenderedPath {
    pub fn start(&self) -> Option<Point> {
        self.pieces.first().map(Piece::start)
    }

    pub fn end(&self) -> Option<Point> {
        self.pieces.last().map(Piece::end)
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    /// Largest gap between consecutive piece endpoints.
    pub fn max_gap(&self) -> f64 {
        self.pieces
            .windows(2)
            .map(|w| w[0].end().dist(w[1].start()))
            .fold(0.0, f64::max)
    }

    /// Largest tangent turn at a junction between consecutive pieces.
    pub fn max_kink(&self) -> f64 {
        self.pieces
            .windows(2)
            .map(|w| angle_between(w[0].end_tangent(), w[1].start_tangent()))
            .fold(0.0, f64::max)
    }

    /// `n + 1` points along every piece.
    pub fn sample(&self, n: usize) -> Vec<Point> {
        self.pieces
            .iter()
            .flat_map(|p| (0..=n).map(move |k| p.point_at(k as f64 / n as f64)))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Drawing {
    pub hubs: Vec<Hub>,
    pub bases: Vec<BundleBase>,
    pub paths: Vec<RenderedPath>,
}

impl Drawing {
    pub fn fallbacks(&self) -> usize {
        self.paths.iter().map(|p| p.fallbacks).sum()
    }

    pub fn hub_violations(&self) -> usize {
        self.paths.iter().map(|p| p.hub_violations).sum()
    }

    pub fn base(&self, edge: (usize, usize), node: usize) -> Option<&BundleBase> {
        self.bases.iter().find(|b| b.edge == edge && b.node == node)
    }
}

/// Offsets of consecutive slots, centred on the axis, first slot leftmost.
pub fn slot_offsets(widths: &[f64], separation: f64, scale: f64) -> Vec<f64> {
    let total = crate::nudger::bundle_width(widths, separation);
    let mut cum = 0.0;
    widths
        .iter()
        .map(|&w| {
            let o = scale * (total / 2.0 - cum - w / 2.0);
            cum += w + separation;
            o
        })
        .collect()
}

/// Places both bases of every bundle edge.
///
/// The chord at an intermediate node is perpendicular to the edge and lies
/// inside the hub; its angular half-extent stays below half the angle to the
/// nearest other edge at that node, so bases on one hub never overlap. At a
/// terminal the slots extend to the boundary curve. When a hub, a terminal or
/// a nearby obstacle leaves too little room, all widths and separations of the
/// edge shrink by one common factor.
pub fn place_bundle_bases(
    graph: &BundleGraph,
    terminals: &[Obstacle],
    ordering: &BundleOrdering,
    hubs: &BTreeMap<usize, Hub>,
) -> Vec<BundleBase> {
    let mut bases = Vec::new();
    for (a, b) in graph.edges() {
        let order = match ordering.order(a, b) {
            Some(o) => o,
            None => graph.edge_paths(a, b),
        };
        let widths: Vec<f64> = order.iter().map(|&p| graph.paths[p].width).collect();
        let half = crate::nudger::bundle_width(&widths, graph.cost.separation) / 2.0;
        let (pa, pb) = (graph.position(a), graph.position(b));
        let Some(dir) = (pb - pa).normalized() else {
            continue;
        };
        let normal = dir.perp();
        let mut scale: f64 = 1.0;
        if half > 0.0 {
            for (x, toward) in [(a, dir), (b, -dir)] {
                let room = match graph.nodes[x].center_of {
                    None => {
                        let r = hubs.get(&x).map_or(0.0, Hub::radius);
                        r * half_angle_room(graph, x, toward).sin()
                    }
                    Some(o) => {
                        let t = &terminals[o].boundary;
                        CLEARANCE_FRACTION * t.support(normal).min(t.support(-normal))
                    }
                };
                scale = scale.min(room / half);
            }
            let skip: Vec<usize> = [a, b].iter().filter_map(|&x| graph.nodes[x].center_of).collect();
            let clear = graph.segment_clearance(pa, pb, &skip, half / CLEARANCE_FRACTION);
            scale = scale.min(CLEARANCE_FRACTION * clear / half);
            scale = scale.max(0.0);
        }
        let offsets = slot_offsets(&widths, graph.cost.separation, scale);
        for (x, toward) in [(a, dir), (b, -dir)] {
            let px = graph.position(x);
            let r = hubs.get(&x).map_or(0.0, Hub::radius);
            // Chord endpoints sit on the hub circle.
            let depth = (r * r - (scale * half).powi(2)).max(0.0).sqrt();
            let slots = order
                .iter()
                .zip(&offsets)
                .zip(&widths)
                .map(|((&path, &offset), &w)| {
                    let point = match graph.nodes[x].center_of {
                        None => px + toward * depth + normal * offset,
                        Some(o) => {
                            let t = &terminals[o];
                            let origin = px + normal * offset;
                            match t.boundary.clip_line(t.center, origin, toward) {
                                Some((_, exit)) => origin + toward * exit.max(0.0),
                                None => origin,
                            }
                        }
                    };
                    Slot {
                        path,
                        offset,
                        width: w * scale,
                        point,
                    }
                })
                .collect();
            bases.push(BundleBase {
                edge: (a, b),
                node: x,
                direction: toward,
                scale,
                slots,
            });
        }
    }
    bases
}

/// Half-angle a base at `x` may span towards `toward`.
fn half_angle_room(graph: &BundleGraph, x: usize, toward: Point) -> f64 {
    let px = graph.position(x);
    let nearest = graph
        .neighbors(x)
        .into_iter()
        .filter_map(|y| (graph.position(y) - px).normalized())
        .map(|d| angle_between(d, toward))
        .filter(|&phi| phi > 1e-12)
        .fold(std::f64::consts::PI, f64::min);
    FRAC_PI_4.min(BASE_ANGLE_FRACTION * nearest / 2.0)
}

/// Tangent connector from `p` (direction `t_in`) to `q` (direction `t_out`)
/// inside the circle `center`, `radius`.
///
/// Returns the pieces and whether the two-biarc fallback was needed. The
/// fallback passes through the hub center, heading along the mean of the two
/// directions.
pub fn build_hub_segment(p: Point, t_in: Point, q: Point, t_out: Point, center: Point, radius: f64) -> (Vec<Piece>, bool) {
    if p.dist(q) <= 1e-12 * (1.0 + radius) {
        return (Vec::new(), false);
    }
    if let Ok(b) = fit_biarc(p, t_in, q, t_out) {
        if biarc_inside(&b, center, radius) {
            return (b.pieces().to_vec(), false);
        }
    }
    let mid = (t_in + t_out).normalized().unwrap_or_else(|| {
        let side = if (q - p).dot(t_in.perp()) >= 0.0 { 1.0 } else { -1.0 };
        t_in.perp() * side
    });
    let m = center;
    let first = fit_biarc(p, t_in, m, mid);
    let second = fit_biarc(m, mid, q, t_out);
    match (first, second) {
        (Ok(f), Ok(s)) => {
            let mut out = f.pieces().to_vec();
            out.extend(s.pieces());
            (out, true)
        }
        _ => (vec![Piece::Line { from: p, to: q }], true),
    }
}

/// Every one of [`HUB_SAMPLES`] + 1 samples within the disk, tolerance 1e-9.
pub fn biarc_inside(b: &Biarc, center: Point, radius: f64) -> bool {
    b.sample(HUB_SAMPLES)
        .into_iter()
        .all(|s| s.dist(center) <= radius + 1e-9 * (1.0 + radius))
}

fn pieces_inside(pieces: &[Piece], center: Point, radius: f64) -> bool {
    pieces.iter().all(|p| {
        (0..=HUB_SAMPLES).all(|k| p.point_at(k as f64 / HUB_SAMPLES as f64).dist(center) <= radius + 1e-9 * (1.0 + radius))
    })
}

/// Bases, bundle segments and hub segments for every path of `graph`.
pub fn render(graph: &BundleGraph, terminals: &[Obstacle], ordering: &BundleOrdering) -> Drawing {
    let hubs: Vec<Hub> = graph.hubs();
    let hub_of: BTreeMap<usize, Hub> = hubs.iter().map(|h| (h.node, *h)).collect();
    let bases = place_bundle_bases(graph, terminals, ordering, &hub_of);
    let mut slot_at: BTreeMap<(usize, usize, usize), Point> = BTreeMap::new();
    for b in &bases {
        let other = if b.node == b.edge.0 { b.edge.1 } else { b.edge.0 };
        for s in &b.slots {
            slot_at.insert((s.path, b.node, other), s.point);
        }
    }
    let mut paths = Vec::with_capacity(graph.paths.len());
    for (pi, bp) in graph.paths.iter().enumerate() {
        let mut pieces = Vec::new();
        let mut fallbacks = 0;
        let mut hub_violations = 0;
        let nodes = &bp.nodes;
        for i in 0..nodes.len().saturating_sub(1) {
            let (x, y) = (nodes[i], nodes[i + 1]);
            let from = slot_at[&(pi, x, y)];
            let to = slot_at[&(pi, y, x)];
            if i > 0 {
                // Hub segment at x joining the previous bundle segment.
                let w = nodes[i - 1];
                let t_in = (graph.position(x) - graph.position(w)).normalized().unwrap_or_default();
                let t_out = (graph.position(y) - graph.position(x)).normalized().unwrap_or_default();
                let start = slot_at[&(pi, x, w)];
                let hub = hub_of[&x];
                let (hp, fell_back) = build_hub_segment(start, t_in, from, t_out, graph.position(x), hub.radius());
                if fell_back {
                    fallbacks += 1;
                }
                if !pieces_inside(&hp, graph.position(x), hub.radius()) {
                    hub_violations += 1;
                }
                pieces.extend(hp);
            }
            if from.dist(to) > 0.0 {
                pieces.push(Piece::Line { from, to });
            }
        }
        paths.push(RenderedPath {
            path: pi,
            edge: bp.edge,
            width: bp.width * base_scale(&bases, bp, pi),
            pieces,
            fallbacks,
            hub_violations,
        });
    }
    Drawing { hubs, bases, paths }
}

/// Smallest scale over the edges of a path; used for its stroke width.
fn base_scale(bases: &[BundleBase], bp: &crate::nudger::BundlePath, pi: usize) -> f64 {
    bp.nodes
        .windows(2)
        .filter_map(|w| {
            let key = edge_key(w[0], w[1]);
            bases
                .iter()
                .find(|b| b.edge == key && b.slots.iter().any(|s| s.path == pi))
                .map(|b| b.scale)
        })
        .fold(1.0, f64::min)
}

/// Serializable form of a piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceRecord {
    Line { from: [f64; 2], to: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start_angle: f64, sweep: f64, from: [f64; 2], to: [f64; 2] },
}

impl From<&Piece> for PieceRecord {
    fn from(p: &Piece) -> Self {
        let xy = |p: Point| [p.x, p.y];
        match *p {
            Piece::Line { from, to } => PieceRecord::Line { from: xy(from), to: xy(to) },
            Piece::Arc { center, radius, start_angle, sweep, from, to } => PieceRecord::Arc {
                center: xy(center),
                radius,
                start_angle,
                sweep,
                from: xy(from),
                to: xy(to),
            },
        }
    }
}
