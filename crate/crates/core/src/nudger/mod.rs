//! Routing graph clean-up and node relocation.
//!
//! After routing, the graph is cut down to the nodes and edges that carry
//! paths. Every intermediate node gets a circular hub whose radius is the
//! smaller of a desired radius (room for its bundles) and an allowed radius
//! (room left by obstacles and neighbouring hubs). Nodes are then pushed away
//! from obstacles, slid downhill on ink and path length, and finally the graph
//! is simplified by shortcutting and gluing nodes.

mod optimize;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::geometry::{intersects, Aabb, ConvexPolygon, Point, Segment, Shape, SpatialIndex};
use crate::ordering::OrderInstance;
use crate::router::{CostParams, Path};
use crate::routing_graph::{NodeKind, RoutingGraph};

pub use optimize::{NudgeReport, TraceEntry};

/// Σ widths + (k − 1)·separation for `k` paths; 0 when empty.
pub fn bundle_width(widths: &[f64], separation: f64) -> f64 {
    if widths.is_empty() {
        return 0.0;
    }
    widths.iter().sum::<f64>() + (widths.len() - 1) as f64 * separation
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerParams {
    /// Desired radius is at least `mu` times the widest adjacent bundle.
    pub mu: f64,
    /// Escape step length as a multiple of the trial radius.
    pub theta: f64,
    pub max_escape_attempts: usize,
    pub passes: usize,
    /// Descent step as a fraction of the node's desired radius.
    pub step_factor: f64,
    /// Desired radius is at most this multiple of the widest adjacent bundle.
    pub radius_cap_factor: f64,
    /// Lower bound on desired radii (zero-width bundles still need a hub).
    pub min_radius: f64,
    pub max_descent_steps: usize,
    /// Check full validity after every accepted change.
    pub audit: bool,
    pub trace: bool,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            mu: FRAC_1_SQRT_2,
            theta: 1.1,
            max_escape_attempts: 10,
            passes: 2,
            step_factor: 0.05,
            radius_cap_factor: 4.0,
            min_radius: 1e-3,
            max_descent_steps: 100,
            audit: false,
            trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hub {
    pub node: usize,
    pub desired: f64,
    pub allowed: f64,
}

impl Hub {
    pub fn radius(&self) -> f64 {
        self.desired.min(self.allowed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundleNode {
    pub position: Point,
    /// Obstacle whose center this is, for center nodes.
    pub center_of: Option<usize>,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundlePath {
    pub edge: usize,
    pub nodes: Vec<usize>,
    pub width: f64,
    pub st: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidityReport {
    pub violations: Vec<(usize, String)>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

type PointEntry = GeomWithData<[f64; 2], usize>;

/// Routing graph restricted to the routed paths, with movable intermediates.
#[derive(Clone, Debug)]
pub struct BundleGraph {
    pub nodes: Vec<BundleNode>,
    pub paths: Vec<BundlePath>,
    pub cost: CostParams,
    pub params: OptimizerParams,
    obstacles: Vec<ConvexPolygon>,
    centers: Vec<Point>,
    index: SpatialIndex,
    through: Vec<Vec<usize>>,
    points: RTree<PointEntry>,
    /// Paths on each edge `(min, max)`, ascending.
    edge_index: HashMap<(usize, usize), Vec<usize>>,
    /// Memoized [`BundleGraph::radius_cap`] per node.
    caps: RefCell<Vec<Option<f64>>>,
}

fn index_edges(paths: &[BundlePath]) -> HashMap<(usize, usize), Vec<usize>> {
    let mut index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        for w in p.nodes.windows(2) {
            let e = index.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default();
            if e.last() != Some(&i) {
                e.push(i);
            }
        }
    }
    index
}

/// Keeps the nodes and edges used by at least one path, plus all centers.
pub fn prune_unused(
    graph: &RoutingGraph,
    paths: &[Option<Path>],
    obstacles: Vec<ConvexPolygon>,
    cost: CostParams,
    params: OptimizerParams,
) -> BundleGraph {
    let mut used = vec![false; graph.nodes.len()];
    let bpaths: Vec<BundlePath> = paths
        .iter()
        .flatten()
        .map(|p| {
            for &v in &p.nodes {
                used[v] = true;
            }
            BundlePath {
                edge: p.edge,
                nodes: p.nodes.clone(),
                width: p.width,
                st: p.st,
            }
        })
        .collect();
    let nodes = graph
        .nodes
        .iter()
        .map(|n| {
            let center_of = match n.kind {
                NodeKind::Center(o) => Some(o),
                NodeKind::Intermediate(_) => None,
            };
            BundleNode {
                position: n.position,
                center_of,
                alive: used[n.id] || center_of.is_some(),
            }
        })
        .collect();
    BundleGraph::new(nodes, bpaths, obstacles, cost, params)
}

impl BundleGraph {
    pub fn new(
        nodes: Vec<BundleNode>,
        paths: Vec<BundlePath>,
        obstacles: Vec<ConvexPolygon>,
        cost: CostParams,
        params: OptimizerParams,
    ) -> Self {
        let mut through = vec![Vec::new(); nodes.len()];
        for (i, p) in paths.iter().enumerate() {
            for &v in &p.nodes {
                through[v].push(i);
            }
        }
        for t in &mut through {
            t.dedup();
        }
        // Built by insertion: nodes move during optimization, and rstar can
        // mis-handle removals from bulk-loaded trees.
        let mut points = RTree::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.alive && n.center_of.is_none() {
                points.insert(GeomWithData::new([n.position.x, n.position.y], i));
            }
        }
        let index = SpatialIndex::from_polygons(&obstacles);
        let mut centers: Vec<Point> = obstacles.iter().map(|o| o.centroid()).collect();
        for n in &nodes {
            if let Some(o) = n.center_of {
                centers[o] = n.position;
            }
        }
        let edge_index = index_edges(&paths);
        let caps = RefCell::new(vec![None; nodes.len()]);
        BundleGraph {
            nodes,
            paths,
            cost,
            params,
            obstacles,
            centers,
            index,
            through,
            points,
            edge_index,
            caps,
        }
    }

    pub fn obstacles(&self) -> &[ConvexPolygon] {
        &self.obstacles
    }

    pub fn position(&self, v: usize) -> Point {
        self.nodes[v].position
    }

    pub fn is_intermediate(&self, v: usize) -> bool {
        self.nodes[v].center_of.is_none()
    }

    pub fn alive_intermediates(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.nodes[v].alive && self.is_intermediate(v))
            .collect()
    }

    pub fn paths_through(&self, v: usize) -> &[usize] {
        &self.through[v]
    }

    /// Distinct neighbours along the paths, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &pi in &self.through[v] {
            let nodes = &self.paths[pi].nodes;
            for (k, &x) in nodes.iter().enumerate() {
                if x == v {
                    if k > 0 {
                        out.insert(nodes[k - 1]);
                    }
                    if k + 1 < nodes.len() {
                        out.insert(nodes[k + 1]);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// Undirected edges `(min, max)` used by at least one path, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.edge_index.keys().copied().collect();
        out.sort_unstable();
        out
    }

    /// Paths that traverse edge `uv` in either direction, ascending.
    pub fn edge_paths(&self, u: usize, v: usize) -> Vec<usize> {
        self.edge_index.get(&(u.min(v), u.max(v))).cloned().unwrap_or_default()
    }

    /// Refreshes derived data after path node lists changed.
    fn paths_changed(&mut self) {
        self.edge_index = index_edges(&self.paths);
        self.caps.get_mut().iter_mut().for_each(|c| *c = None);
    }

    pub fn edge_bundle_width(&self, u: usize, v: usize) -> f64 {
        let widths: Vec<f64> = self
            .edge_paths(u, v)
            .iter()
            .map(|&pi| self.paths[pi].width)
            .collect();
        bundle_width(&widths, self.cost.separation)
    }

    /// Ink I and Σ ℓ_st/|st| of the current geometry.
    pub fn ink_and_length(&self) -> (f64, f64) {
        let ink = self
            .edges()
            .iter()
            .map(|&(a, b)| self.position(a).dist(self.position(b)))
            .sum();
        let len = self
            .paths
            .iter()
            .map(|p| self.path_length(&p.nodes) / p.st)
            .sum();
        (ink, len)
    }

    /// k_ink·I + k_len·Σ ℓ_st/|st|; the capacity term is fixed during optimization.
    pub fn routing_cost(&self) -> f64 {
        let (ink, len) = self.ink_and_length();
        self.cost.k_ink * ink + self.cost.k_len * len
    }

    fn path_length(&self, nodes: &[usize]) -> f64 {
        nodes
            .windows(2)
            .map(|w| self.position(w[0]).dist(self.position(w[1])))
            .sum()
    }

    /// Desired hub radius of an intermediate node.
    ///
    /// At least `mu·e_w` for every adjacent bundle, and large enough that two
    /// angularly consecutive bundles of half-widths h1, h2 meeting at angle φ
    /// are `separation` apart on the hub: r ≥ (h1 + h2 + sep) / (2 sin(φ/2)).
    /// Capped at `radius_cap_factor` times the widest adjacent bundle.
    pub fn desired_radius(&self, v: usize) -> f64 {
        self.desired_radius_at(v, self.position(v), &self.neighbors(v))
    }

    fn desired_radius_at(&self, v: usize, p: Point, nbrs: &[usize]) -> f64 {
        let mut bundles: Vec<(f64, f64)> = nbrs
            .iter()
            .map(|&u| ((self.position(u) - p).angle(), self.edge_bundle_width(v, u)))
            .collect();
        let max_w = bundles.iter().map(|b| b.1).fold(0.0, f64::max);
        let mut r = self.params.mu * max_w;
        bundles.sort_by(|a, b| a.0.total_cmp(&b.0));
        let k = bundles.len();
        if k >= 2 {
            for i in 0..k {
                let (a1, w1) = bundles[i];
                let (a2, w2) = bundles[(i + 1) % k];
                let mut phi = a2 - a1;
                if phi <= 0.0 {
                    phi += 2.0 * PI;
                }
                let s = (phi / 2.0).sin();
                let need = (w1 / 2.0 + w2 / 2.0 + self.cost.separation) / (2.0 * s.max(1e-12));
                r = r.max(need);
            }
        }
        r.min(self.params.radius_cap_factor * max_w).max(self.params.min_radius)
    }

    /// Distance from `p` to the nearest obstacle, or `bound` if none is closer.
    pub fn obstacle_distance(&self, p: Point, bound: f64) -> f64 {
        self.index
            .query(&Aabb::around(p, bound))
            .into_iter()
            .map(|i| crate::geometry::distance_point_to_polygon(p, &self.obstacles[i]))
            .fold(bound, f64::min)
    }

    /// Distance from segment `ab` to the nearest obstacle not in `skip`, or
    /// `bound` if none is closer.
    pub fn segment_clearance(&self, a: Point, b: Point, skip: &[usize], bound: f64) -> f64 {
        let s = Segment::new(a, b);
        self.index
            .query(&s.bbox().inflate(bound))
            .into_iter()
            .filter(|i| !skip.contains(i))
            .map(|i| self.obstacles[i].distance_to_segment(&s))
            .fold(bound, f64::min)
    }

    /// Ordering instance over the current paths; path ids are indices into
    /// `paths`.
    pub fn order_instance(&self) -> crate::error::Result<OrderInstance> {
        let positions: Vec<Point> = self.nodes.iter().map(|n| n.position).collect();
        let paths = self.paths.iter().map(|p| p.nodes.clone()).collect();
        OrderInstance::from_positions(&positions, &self.edges(), paths)
    }

    /// Obstacles whose distance to `p` is below `r`.
    pub fn obstacles_within(&self, p: Point, r: f64) -> Vec<usize> {
        self.index
            .query(&Aabb::around(p, r))
            .into_iter()
            .filter(|&i| crate::geometry::distance_point_to_polygon(p, &self.obstacles[i]) < r)
            .collect()
    }

    fn radius_cap(&self, u: usize) -> f64 {
        if let Some(c) = self.caps.borrow()[u] {
            return c;
        }
        let d = self.desired_radius(u);
        let c = d.min(self.obstacle_distance(self.position(u), d));
        self.caps.borrow_mut()[u] = Some(c);
        c
    }

    /// Largest radius keeping the hub of `v` off obstacles and off the hubs
    /// of nearby intermediate nodes.
    pub fn allowed_radius(&self, v: usize) -> f64 {
        let desired = self.desired_radius(v);
        self.allowed_radius_at(v, self.position(v), desired, &[])
    }

    fn allowed_radius_at(&self, v: usize, p: Point, desired: f64, skip: &[usize]) -> f64 {
        let mut allowed = self.obstacle_distance(p, desired) * (1.0 - 1e-6);
        let reach = 2.0 * desired;
        for e in self
            .points
            .locate_within_distance([p.x, p.y], reach * reach)
        {
            let u = e.data;
            if u == v || skip.contains(&u) {
                continue;
            }
            let d = p.dist(self.position(u));
            let cap_u = self.radius_cap(u);
            allowed = allowed.min((d / 2.0).max(d - cap_u));
        }
        allowed.max(0.0)
    }

    pub fn hub(&self, v: usize) -> Hub {
        Hub {
            node: v,
            desired: self.desired_radius(v),
            allowed: self.allowed_radius(v),
        }
    }

    /// Hubs of all live intermediate nodes.
    pub fn hubs(&self) -> Vec<Hub> {
        self.alive_intermediates().into_iter().map(|v| self.hub(v)).collect()
    }

    /// Segment validity: it may touch only the obstacles of its center endpoints.
    fn segment_valid(&self, a: Point, oa: Option<usize>, b: Point, ob: Option<usize>) -> bool {
        let s = Segment::new(a, b);
        if s.length() == 0.0 {
            return false;
        }
        self.index
            .query(&s.bbox())
            .into_iter()
            .filter(|&i| Some(i) != oa && Some(i) != ob)
            .all(|i| !intersects(&Shape::Segment(s), &self.obstacles[i]))
    }

    /// Whether intermediate `v` placed at `p` with neighbours `nbrs` is valid.
    /// Nodes in `skip` are ignored for coincidence checks.
    fn placement_valid(&self, v: usize, p: Point, nbrs: &[usize], skip: &[usize]) -> bool {
        if !p.is_finite() || self.obstacle_distance(p, 1.0) <= 0.0 {
            return false;
        }
        for e in self.points.locate_all_at_point([p.x, p.y]) {
            if e.data != v && !skip.contains(&e.data) {
                return false;
            }
        }
        nbrs.iter().all(|&u| {
            let n = &self.nodes[u];
            self.segment_valid(p, None, n.position, n.center_of)
        })
    }

    pub fn node_valid(&self, v: usize) -> bool {
        self.placement_valid(v, self.position(v), &self.neighbors(v), &[])
    }

    pub fn validity_report(&self) -> ValidityReport {
        let mut violations = Vec::new();
        for v in self.alive_intermediates() {
            if !self.node_valid(v) {
                violations.push((v, "hub or incident edge meets an obstacle".to_string()));
            }
        }
        ValidityReport { violations }
    }

    fn move_node(&mut self, v: usize, p: Point) {
        let old = self.position(v);
        if self.nodes[v].alive && self.is_intermediate(v) {
            self.points.remove(&GeomWithData::new([old.x, old.y], v));
            self.points.insert(GeomWithData::new([p.x, p.y], v));
        }
        self.nodes[v].position = p;
        // Desired radii depend on the directions to neighbours.
        let nbrs = self.neighbors(v);
        let caps = self.caps.get_mut();
        caps[v] = None;
        for u in nbrs {
            caps[u] = None;
        }
    }

    fn kill_node(&mut self, v: usize) {
        let p = self.position(v);
        self.points.remove(&GeomWithData::new([p.x, p.y], v));
        self.nodes[v].alive = false;
        self.through[v].clear();
    }

    /// The node's contribution f(p) to the ink and length part of the cost.
    pub fn contribution(&self, u: usize, p: Point) -> f64 {
        let ink: f64 = self
            .neighbors(u)
            .iter()
            .map(|&v| p.dist(self.position(v)))
            .sum();
        let mut len = 0.0;
        for &pi in &self.through[u] {
            let path = &self.paths[pi];
            for (k, &x) in path.nodes.iter().enumerate() {
                if x == u && k > 0 && k + 1 < path.nodes.len() {
                    let a = self.position(path.nodes[k - 1]);
                    let b = self.position(path.nodes[k + 1]);
                    len += (p.dist(a) + p.dist(b)) / path.st;
                }
            }
        }
        self.cost.k_ink * ink + self.cost.k_len * len
    }

    /// D = −∇f at the node's position.
    pub fn descent_direction(&self, u: usize) -> Point {
        let p = self.position(u);
        let unit = |q: Point| (q - p).normalized().unwrap_or(Point::ORIGIN);
        let mut d = Point::ORIGIN;
        for v in self.neighbors(u) {
            d = d + unit(self.position(v)) * self.cost.k_ink;
        }
        for &pi in &self.through[u] {
            let path = &self.paths[pi];
            for (k, &x) in path.nodes.iter().enumerate() {
                if x == u && k > 0 && k + 1 < path.nodes.len() {
                    let a = unit(self.position(path.nodes[k - 1]));
                    let b = unit(self.position(path.nodes[k + 1]));
                    d = d + (a + b) * (self.cost.k_len / path.st);
                }
            }
        }
        d
    }

    /// Direction Σ unit(center(O_s) → p) over obstacles closer than `r`.
    pub fn escape_direction(&self, v: usize, r: f64) -> Option<Point> {
        let p = self.position(v);
        let mut sum = Point::ORIGIN;
        for s in self.obstacles_within(p, r) {
            if let Some(u) = (p - self.centers[s]).normalized() {
                sum = sum + u;
            }
        }
        sum.normalized()
    }
}
