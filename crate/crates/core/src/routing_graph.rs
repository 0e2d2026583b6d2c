//! Obstacles around node boundaries and the sparse cone visibility graph.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{PI, TAU};

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    intersects, normalize_angle, Aabb, ConvexPolygon, Point, Segment, Shape, SpatialIndex,
};

/// Default aperture of the visibility cones.
pub const DEFAULT_CONE_ANGLE: f64 = PI / 6.0;
/// Default upper bound on obstacle corners.
pub const DEFAULT_MAX_CORNERS: usize = 8;
/// Clearance kept between a boundary curve and its shrunk obstacle.
pub const SHRINK_CLEARANCE: f64 = 1e-6;

const ELLIPSE_SAMPLES: usize = 32;
const REPAIR_ITERATIONS: usize = 20;

/// Shape of a node's boundary curve, relative to the node position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Boundary {
    Rectangle { width: f64, height: f64 },
    Ellipse { rx: f64, ry: f64 },
    /// Offsets from the node position; the convex hull of the points is used.
    Polygon { points: Vec<Point> },
}

impl Boundary {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Boundary::Rectangle { width, height } => {
                width.is_finite() && height.is_finite() && *width > 0.0 && *height > 0.0
            }
            Boundary::Ellipse { rx, ry } => {
                rx.is_finite() && ry.is_finite() && *rx > 0.0 && *ry > 0.0
            }
            Boundary::Polygon { points } => {
                points.len() >= 3
                    && points.iter().all(|p| p.is_finite())
                    && ConvexPolygon::hull(points)
                        .map(|h| h.contains_with_clearance(Point::ORIGIN, 0.0))
                        .unwrap_or(false)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid boundary {self:?}")))
        }
    }

    /// Points whose convex hull contains the curve.
    pub fn outline(&self, center: Point) -> Vec<Point> {
        match self {
            Boundary::Rectangle { width, height } => {
                let (hw, hh) = (width / 2.0, height / 2.0);
                vec![
                    center + Point::new(-hw, -hh),
                    center + Point::new(hw, -hh),
                    center + Point::new(hw, hh),
                    center + Point::new(-hw, hh),
                ]
            }
            Boundary::Ellipse { rx, ry } => {
                let grow = 1.0 / (PI / ELLIPSE_SAMPLES as f64).cos();
                (0..ELLIPSE_SAMPLES)
                    .map(|k| {
                        let u = Point::from_angle(TAU * k as f64 / ELLIPSE_SAMPLES as f64);
                        center + Point::new(u.x * rx * grow, u.y * ry * grow)
                    })
                    .collect()
            }
            Boundary::Polygon { points } => points.iter().map(|&p| center + p).collect(),
        }
    }

    /// Convex region used for overlap and containment tests.
    pub fn region(&self, center: Point) -> Result<ConvexPolygon> {
        ConvexPolygon::hull(&self.outline(center))
    }

    /// Support function `max_{q ∈ curve} (q − center)·dir` for a unit `dir`.
    pub fn support(&self, dir: Point) -> f64 {
        match self {
            Boundary::Rectangle { width, height } => {
                dir.x.abs() * width / 2.0 + dir.y.abs() * height / 2.0
            }
            Boundary::Ellipse { rx, ry } => (rx * dir.x).hypot(ry * dir.y),
            Boundary::Polygon { points } => points
                .iter()
                .map(|p| p.dot(dir))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Smallest distance from the node position to the curve.
    pub fn inradius(&self) -> f64 {
        match self {
            Boundary::Rectangle { width, height } => width.min(*height) / 2.0,
            Boundary::Ellipse { rx, ry } => rx.min(*ry),
            Boundary::Polygon { points } => ConvexPolygon::hull(points)
                .map(|h| {
                    h.edges()
                        .map(|e| e.distance_to_point(Point::ORIGIN))
                        .fold(f64::INFINITY, f64::min)
                })
                .unwrap_or(0.0),
        }
    }

    /// Parameter interval where `origin + t·dir` is inside the closed curve.
    pub fn clip_line(&self, center: Point, origin: Point, dir: Point) -> Option<(f64, f64)> {
        match self {
            Boundary::Ellipse { rx, ry } => {
                let o = origin - center;
                let (ox, oy) = (o.x / rx, o.y / ry);
                let (dx, dy) = (dir.x / rx, dir.y / ry);
                let a = dx * dx + dy * dy;
                let b = 2.0 * (ox * dx + oy * dy);
                let c = ox * ox + oy * oy - 1.0;
                let disc = b * b - 4.0 * a * c;
                if a == 0.0 || disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                Some(((-b - s) / (2.0 * a), (-b + s) / (2.0 * a)))
            }
            _ => self.region(center).ok()?.clip_line(origin, dir),
        }
    }

    pub fn contains(&self, center: Point, p: Point) -> bool {
        match self {
            Boundary::Ellipse { rx, ry } => {
                let o = p - center;
                (o.x / rx).powi(2) + (o.y / ry).powi(2) <= 1.0 + 1e-12
            }
            _ => self.region(center).map(|r| r.contains(p)).unwrap_or(false),
        }
    }
}

/// A positioned node with its boundary curve.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeShape {
    pub position: Point,
    pub boundary: Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleParams {
    pub max_corners: usize,
    /// Outward padding of each hull before disjointness repair.
    pub padding: f64,
}

impl ObstacleParams {
    /// Padding of half the path separation, with a small floor so hulls stay
    /// strictly outside the boundary curves.
    pub fn for_separation(separation: f64) -> Self {
        ObstacleParams {
            max_corners: DEFAULT_MAX_CORNERS,
            padding: (0.5 * separation).max(1e-3),
        }
    }
}

/// Convex obstacle wrapped around one node.
#[derive(Clone, Debug)]
pub struct Obstacle {
    pub node: usize,
    pub boundary: Boundary,
    pub center: Point,
    /// Hull the visibility graph is built against.
    pub hull: ConvexPolygon,
    /// Hull after shrinking; equal to `hull` until [`shrink_obstacles`] runs.
    pub shrunk: ConvexPolygon,
    /// Hull corners plus augmentation points, counterclockwise.
    pub ports: Vec<Point>,
}

impl Obstacle {
    /// Ports scaled onto the shrunk hull.
    pub fn shrunk_ports(&self, factor: f64) -> Vec<Point> {
        self.ports
            .iter()
            .map(|&p| self.center + (p - self.center) * factor)
            .collect()
    }
}

fn padded_hull(base: &ConvexPolygon, padding: f64) -> Result<ConvexPolygon> {
    base.offset(padding)
}

/// Builds one disjoint convex obstacle per node.
pub fn build_obstacles(nodes: &[NodeShape], params: &ObstacleParams) -> Result<Vec<Obstacle>> {
    let mut regions = Vec::with_capacity(nodes.len());
    let mut bases = Vec::with_capacity(nodes.len());
    for n in nodes {
        n.boundary.validate()?;
        if !n.position.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite position {:?}", n.position)));
        }
        let region = n.boundary.region(n.position)?;
        bases.push(region.reduce_corners(params.max_corners)?);
        regions.push(region);
    }
    let region_index = SpatialIndex::from_polygons(&regions);
    for (i, r) in regions.iter().enumerate() {
        for j in region_index.query(&r.bbox()) {
            if j > i && r.intersects_polygon(&regions[j]) {
                return Err(Error::OverlappingBoundaries(i, j));
            }
        }
    }

    let mut paddings = vec![params.padding; nodes.len()];
    let mut hulls = bases
        .iter()
        .zip(&paddings)
        .map(|(b, &p)| padded_hull(b, p))
        .collect::<Result<Vec<_>>>()?;
    let index = SpatialIndex::from_polygons(&hulls);
    let mut pairs = Vec::new();
    for (i, h) in hulls.iter().enumerate() {
        for j in index.query(&h.bbox()) {
            if j > i {
                pairs.push((i, j));
            }
        }
    }
    for (i, j) in pairs {
        if !hulls[i].intersects_polygon(&hulls[j]) {
            continue;
        }
        if bases[i].intersects_polygon(&bases[j]) {
            return Err(Error::InvalidInput(format!(
                "boundaries of nodes {i} and {j} are too close for {}-corner obstacles",
                params.max_corners
            )));
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..REPAIR_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            let a = padded_hull(&bases[i], paddings[i] * mid)?;
            let b = padded_hull(&bases[j], paddings[j] * mid)?;
            if a.intersects_polygon(&b) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        paddings[i] *= lo;
        paddings[j] *= lo;
        hulls[i] = padded_hull(&bases[i], paddings[i])?;
        hulls[j] = padded_hull(&bases[j], paddings[j])?;
        if paddings[i] == 0.0 || paddings[j] == 0.0 {
            log::warn!("obstacles {i} and {j} touch their boundary curves after repair");
        }
    }

    Ok(nodes
        .iter()
        .zip(hulls)
        .enumerate()
        .map(|(i, (n, hull))| Obstacle {
            node: i,
            boundary: n.boundary.clone(),
            center: n.position,
            ports: hull.vertices().to_vec(),
            shrunk: hull.clone(),
            hull,
        })
        .collect())
}

/// Adds hull-boundary points so that, seen from the center, consecutive
/// ports are at most `cone_angle` apart.
pub fn augment_boundary_points(obstacle: &Obstacle, cone_angle: f64) -> Obstacle {
    let c = obstacle.center;
    let corners = obstacle.hull.vertices();
    let n = corners.len();
    let mut ports = Vec::with_capacity(n * 2);
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        ports.push(a);
        let (da, db) = (a - c, b - c);
        let span = da.cross(db).atan2(da.dot(db));
        let pieces = (span / cone_angle - 1e-9).ceil().max(1.0) as usize;
        let start = da.angle();
        for k in 1..pieces {
            let dir = Point::from_angle(start + span * k as f64 / pieces as f64);
            // Ray from the center meets side ab.
            let e = b - a;
            let denom = dir.cross(e);
            let t = (a - c).cross(e) / denom;
            ports.push(c + dir * t);
        }
    }
    Obstacle {
        ports,
        ..obstacle.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Center(usize),
    /// Boundary vertex of the given obstacle.
    Intermediate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    Visibility,
    CenterSpoke,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoutingNode {
    pub id: usize,
    pub position: Point,
    pub kind: NodeKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoutingEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub kind: EdgeKind,
}

impl RoutingEdge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Embedded routing graph. Node `i < obstacle count` is the center of obstacle `i`.
#[derive(Clone, Debug)]
pub struct RoutingGraph {
    pub nodes: Vec<RoutingNode>,
    pub edges: Vec<RoutingEdge>,
    /// Incident `(neighbor, edge)` pairs in clockwise order.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    lookup: HashMap<(usize, usize), usize>,
}

impl RoutingGraph {
    pub fn new(nodes: Vec<RoutingNode>, pairs: Vec<(usize, usize, EdgeKind)>) -> Self {
        let mut edges = Vec::with_capacity(pairs.len());
        let mut lookup = HashMap::with_capacity(pairs.len());
        for (a, b, kind) in pairs {
            let key = (a.min(b), a.max(b));
            if a == b || lookup.contains_key(&key) {
                continue;
            }
            lookup.insert(key, edges.len());
            edges.push(RoutingEdge {
                a: key.0,
                b: key.1,
                length: nodes[a].position.dist(nodes[b].position),
                kind,
            });
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        for (u, adj) in adjacency.iter_mut().enumerate() {
            let p = nodes[u].position;
            adj.sort_by(|&(v, _), &(w, _)| {
                let dv = nodes[v].position - p;
                let dw = nodes[w].position - p;
                dw.angle()
                    .total_cmp(&dv.angle())
                    .then(dv.norm2().total_cmp(&dw.norm2()))
                    .then(v.cmp(&w))
            });
        }
        RoutingGraph {
            nodes,
            edges,
            adjacency,
            lookup,
        }
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn position(&self, v: usize) -> Point {
        self.nodes[v].position
    }

    pub fn is_center(&self, v: usize) -> bool {
        matches!(self.nodes[v].kind, NodeKind::Center(_))
    }

    pub fn segment(&self, e: usize) -> Segment {
        let edge = &self.edges[e];
        Segment::new(self.position(edge.a), self.position(edge.b))
    }

    /// Whether `a` and `b` are joined by some path.
    pub fn connected(&self, a: usize, b: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(u) = stack.pop() {
            if u == b {
                return true;
            }
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }
}

fn cone_of(dir: Point, cone_angle: f64, cones: usize) -> usize {
    ((normalize_angle(dir.angle()) / cone_angle) as usize).min(cones - 1)
}

/// Whether the segment avoids the interior of every hull.
fn visible(s: &Segment, hulls: &[ConvexPolygon], index: &SpatialIndex) -> bool {
    index
        .query(&s.bbox())
        .into_iter()
        .all(|i| !hulls[i].segment_crosses_interior(s))
}

/// Cones that point strictly into the hull at a port and can never hold an edge.
fn blocked_cones(prev: Point, p: Point, next: Point, cone_angle: f64, cones: usize) -> Vec<bool> {
    let out = (next - p).angle();
    let back = (prev - p).angle();
    let span = normalize_angle(back - out);
    (0..cones)
        .map(|k| {
            let lo = k as f64 * cone_angle;
            let hi = ((k + 1) as f64 * cone_angle).min(TAU);
            let rel = normalize_angle(lo - out);
            rel > 1e-9 && rel + (hi - lo) < span - 1e-9
        })
        .collect()
}

/// Sparse visibility graph over obstacle centers and ports.
///
/// Every port keeps, in each cone of aperture `cone_angle`, an edge to the
/// closest port it can see (ties to the smaller id). Centers are joined to all
/// ports of their own obstacle.
pub fn build_sparse_visibility_graph(obstacles: &[Obstacle], cone_angle: f64) -> RoutingGraph {
    let cones = ((TAU / cone_angle) - 1e-9).ceil().max(1.0) as usize;
    let mut nodes: Vec<RoutingNode> = obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| RoutingNode {
            id: i,
            position: o.center,
            kind: NodeKind::Center(i),
        })
        .collect();
    let mut port_ranges = Vec::with_capacity(obstacles.len());
    for (i, o) in obstacles.iter().enumerate() {
        let start = nodes.len();
        for &p in &o.ports {
            nodes.push(RoutingNode {
                id: nodes.len(),
                position: p,
                kind: NodeKind::Intermediate(i),
            });
        }
        port_ranges.push(start..nodes.len());
    }

    let hulls: Vec<ConvexPolygon> = obstacles.iter().map(|o| o.hull.clone()).collect();
    let index = SpatialIndex::from_polygons(&hulls);
    let tree = RTree::bulk_load(
        nodes
            .iter()
            .skip(obstacles.len())
            .map(|n| GeomWithData::new([n.position.x, n.position.y], n.id))
            .collect(),
    );

    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (oi, range) in port_ranges.iter().enumerate() {
        let m = range.len();
        for (k, u) in range.clone().enumerate() {
            let p = nodes[u].position;
            let prev = obstacles[oi].ports[(k + m - 1) % m];
            let next = obstacles[oi].ports[(k + 1) % m];
            let mut closed = blocked_cones(prev, p, next, cone_angle, cones);
            let mut best: Vec<Option<(f64, usize)>> = vec![None; cones];
            let mut open = closed.iter().filter(|c| !**c).count();
            for cand in tree.nearest_neighbor_iter([p.x, p.y]) {
                if open == 0 {
                    break;
                }
                let v = cand.data;
                if v == u {
                    continue;
                }
                let q = nodes[v].position;
                let d2 = (q - p).norm2();
                if d2 == 0.0 {
                    continue;
                }
                // Settle cones whose best candidate is strictly nearer.
                for c in 0..cones {
                    if !closed[c] {
                        if let Some((bd, _)) = best[c] {
                            if d2 > bd {
                                closed[c] = true;
                                open -= 1;
                            }
                        }
                    }
                }
                let c = cone_of(q - p, cone_angle, cones);
                if closed[c] {
                    continue;
                }
                if let Some((bd, bv)) = best[c] {
                    if d2 > bd || v > bv {
                        continue;
                    }
                }
                if visible(&Segment::new(p, q), &hulls, &index) {
                    best[c] = Some((d2, v));
                }
            }
            for (_, v) in best.into_iter().flatten() {
                pairs.insert((u.min(v), u.max(v)));
            }
        }
    }

    let mut edges: Vec<(usize, usize, EdgeKind)> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, EdgeKind::Visibility))
        .collect();
    for (i, range) in port_ranges.iter().enumerate() {
        for v in range.clone() {
            edges.push((i, v, EdgeKind::CenterSpoke));
        }
    }
    RoutingGraph::new(nodes, edges)
}

/// Scale factor per obstacle below which the boundary curve would come closer
/// than [`SHRINK_CLEARANCE`] to the hull.
fn min_scale(o: &Obstacle) -> f64 {
    o.hull
        .edges()
        .map(|e| {
            let d = e.b - e.a;
            let n = Point::new(d.y, -d.x) / d.norm();
            let reach = n.dot(e.a - o.center);
            (o.boundary.support(n) + SHRINK_CLEARANCE) / reach
        })
        .fold(0.0, f64::max)
}

/// Shrinks every hull toward its center so visibility edges clear it.
///
/// Each obstacle is scaled by the midpoint between the smallest admissible
/// factor (boundary clearance) and 1. Returns the applied factors.
pub fn shrink_obstacles(graph: &RoutingGraph, obstacles: &mut [Obstacle]) -> Result<Vec<f64>> {
    let mut factors = Vec::with_capacity(obstacles.len());
    for (i, o) in obstacles.iter_mut().enumerate() {
        let s_min = min_scale(o);
        if !(s_min < 1.0) {
            return Err(Error::CannotShrink {
                obstacle: i,
                reason: "boundary curve touches the obstacle".to_string(),
            });
        }
        let s = 0.5 * (s_min + 1.0);
        o.shrunk = o.hull.scaled_about(o.center, s)?;
        factors.push(s);
    }

    let hulls: Vec<ConvexPolygon> = obstacles.iter().map(|o| o.shrunk.clone()).collect();
    let index = SpatialIndex::from_polygons(&hulls);
    for (ei, e) in graph.edges.iter().enumerate() {
        if e.kind != EdgeKind::Visibility {
            continue;
        }
        let seg = graph.segment(ei);
        for i in index.query(&seg.bbox()) {
            if intersects(&Shape::Segment(seg), &hulls[i]) {
                return Err(Error::CannotShrink {
                    obstacle: i,
                    reason: format!("visibility edge {ei} ({}-{}) still touches it", e.a, e.b),
                });
            }
        }
    }
    for n in &graph.nodes {
        if let NodeKind::Intermediate(_) = n.kind {
            for i in index.query(&Aabb::around(n.position, 0.0)) {
                if hulls[i].contains(n.position) {
                    return Err(Error::CannotShrink {
                        obstacle: i,
                        reason: format!("intermediate node {} lies inside", n.id),
                    });
                }
            }
        }
    }
    Ok(factors)
}

/// Runs obstacle construction, augmentation, graph building and shrinking.
pub fn build_routing_graph(
    nodes: &[NodeShape],
    params: &ObstacleParams,
    cone_angle: f64,
) -> Result<(Vec<Obstacle>, RoutingGraph, Vec<f64>)> {
    if !(cone_angle > 0.0 && cone_angle <= TAU) {
        return Err(Error::InvalidInput(format!("cone angle {cone_angle} out of range")));
    }
    let mut obstacles: Vec<Obstacle> = build_obstacles(nodes, params)?
        .iter()
        .map(|o| augment_boundary_points(o, cone_angle))
        .collect();
    let graph = build_sparse_visibility_graph(&obstacles, cone_angle);
    let factors = shrink_obstacles(&graph, &mut obstacles)?;
    Ok((obstacles, graph, factors))
}
