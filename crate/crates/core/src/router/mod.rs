//! Routing of input edges as paths on the routing graph.
//!
//! Each path is routed by a shortest-path search whose edge weights encode the
//! additional routing cost: ink not yet used by earlier paths, length
//! normalized by the center distance, and capacity overflow growth.

mod multi;
mod single;

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityLedger;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::routing_graph::RoutingGraph;

pub use multi::{route_multi_dp, DpSolution, DpTable, MAX_DP_TERMINALS};
pub use single::route_single;

/// Weights of the routing cost and default path geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub k_ink: f64,
    pub k_len: f64,
    pub k_cap: f64,
    pub width: f64,
    pub separation: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams::with_weights(1.0, 500.0)
    }
}

impl CostParams {
    /// `k_cap` follows the other two weights as `10·(k_ink + k_len)`.
    pub fn with_weights(k_ink: f64, k_len: f64) -> Self {
        CostParams {
            k_ink,
            k_len,
            k_cap: 10.0 * (k_ink + k_len),
            width: 1.0,
            separation: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.k_ink, self.k_len, self.k_cap];
        if w.iter().any(|k| !(k.is_finite() && *k >= 0.0)) || w.iter().all(|&k| k == 0.0) {
            return Err(Error::InvalidInput(format!(
                "cost weights must be nonnegative with at least one positive: {w:?}"
            )));
        }
        if !(self.width >= 0.0 && self.separation >= 0.0) {
            return Err(Error::InvalidInput("width and separation must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Input edge to be routed between two obstacle centers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Demand {
    pub source: usize,
    pub target: usize,
    pub width: f64,
}

/// A routed input edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Path {
    /// Index of the input edge.
    pub edge: usize,
    pub nodes: Vec<usize>,
    /// ℓ_st, the length along the routing graph.
    pub length: f64,
    pub width: f64,
    /// |st|, the distance between the two centers.
    pub st: f64,
}

impl Path {
    pub fn source(&self) -> usize {
        self.nodes[0]
    }

    pub fn target(&self) -> usize {
        *self.nodes.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub ink: f64,
    pub length_term: f64,
    pub capacity: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(ink: f64, length_term: f64, capacity: f64, p: &CostParams) -> Self {
        CostBreakdown {
            ink,
            length_term,
            capacity,
            total: p.k_ink * ink + p.k_len * length_term + p.k_cap * capacity,
        }
    }
}

/// Graph, ledger and the paths routed so far.
#[derive(Clone, Debug)]
pub struct RoutingState {
    pub graph: RoutingGraph,
    pub ledger: CapacityLedger,
    pub params: CostParams,
    /// Capacity segments crossed by each routing edge.
    pub edge_crossings: Vec<Vec<usize>>,
    usage: Vec<u32>,
    ink: f64,
    length_term: f64,
    paths: Vec<Option<Path>>,
}

impl RoutingState {
    pub fn new(graph: RoutingGraph, ledger: CapacityLedger, params: CostParams) -> Self {
        let edge_crossings = (0..graph.edges.len())
            .map(|e| {
                let s = graph.segment(e);
                ledger.crossed_segments(&[s.a, s.b])
            })
            .collect();
        let usage = vec![0; graph.edges.len()];
        RoutingState {
            graph,
            ledger,
            params,
            edge_crossings,
            usage,
            ink: 0.0,
            length_term: 0.0,
            paths: Vec::new(),
        }
    }

    pub fn usage(&self, e: usize) -> u32 {
        self.usage[e]
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter().flatten()
    }

    pub fn path(&self, edge: usize) -> Option<&Path> {
        self.paths.get(edge).and_then(|p| p.as_ref())
    }

    pub fn into_paths(self) -> (RoutingGraph, CapacityLedger, Vec<Option<Path>>) {
        (self.graph, self.ledger, self.paths)
    }

    /// |st| for two centers; rejects coincident centers.
    pub fn center_distance(&self, s: usize, t: usize) -> Result<f64> {
        if s == t {
            return Err(Error::InvalidInput(format!("self-loop at node {s}")));
        }
        let d = self.graph.position(s).dist(self.graph.position(t));
        if !(d > 0.0) {
            return Err(Error::InvalidInput(format!("nodes {s} and {t} have coincident centers")));
        }
        Ok(d)
    }

    /// Frozen capacity growth ΔC_e for a path of `width` using edge `e`.
    pub fn capacity_delta(&self, e: usize, width: f64) -> f64 {
        self.edge_crossings[e]
            .iter()
            .map(|&s| self.ledger.delta_if_added(s, width))
            .sum()
    }

    /// k_ink·δ_e + k_len·ℓ_e/|st| + k_cap·ΔC_e.
    pub fn edge_weight(&self, e: usize, st: f64, width: f64) -> f64 {
        let p = &self.params;
        let len = self.graph.edges[e].length;
        let delta = if self.usage[e] > 0 { 0.0 } else { len };
        let w = p.k_ink * delta + p.k_len * len / st + p.k_cap * self.capacity_delta(e, width);
        debug_assert!(w >= 0.0, "negative edge weight {w}");
        w
    }

    fn path_edges(&self, nodes: &[usize]) -> Result<Vec<usize>> {
        nodes
            .windows(2)
            .map(|w| {
                self.graph.edge_between(w[0], w[1]).ok_or_else(|| {
                    Error::Invariant(format!("no routing edge between {} and {}", w[0], w[1]))
                })
            })
            .collect()
    }

    /// Records a path and updates usage, ink, length term and the ledger.
    pub fn commit(&mut self, edge: usize, nodes: Vec<usize>, width: f64) -> Result<&Path> {
        let s = nodes[0];
        let t = *nodes.last().unwrap();
        let st = self.center_distance(s, t)?;
        let edges = self.path_edges(&nodes)?;
        let mut length = 0.0;
        let mut crossings = Vec::new();
        for &e in &edges {
            let len = self.graph.edges[e].length;
            length += len;
            if self.usage[e] == 0 {
                self.ink += len;
            }
            self.usage[e] += 1;
            crossings.extend_from_slice(&self.edge_crossings[e]);
        }
        self.length_term += length / st;
        self.ledger.assign_segments(edge, width, crossings)?;
        if self.paths.len() <= edge {
            self.paths.resize(edge + 1, None);
        }
        self.paths[edge] = Some(Path {
            edge,
            nodes,
            length,
            width,
            st,
        });
        Ok(self.paths[edge].as_ref().unwrap())
    }

    /// Incrementally maintained routing cost.
    pub fn cost(&self) -> CostBreakdown {
        CostBreakdown::new(self.ink, self.length_term, self.ledger.total(), &self.params)
    }

    /// Routing cost recomputed from the raw paths: ink from the union of used
    /// edges, capacity from a fresh ledger fed with the path polylines.
    pub fn recompute_cost(&self) -> CostBreakdown {
        let mut used = vec![false; self.graph.edges.len()];
        let mut length_term = 0.0;
        let mut fresh = CapacityLedger::new(self.ledger.segments().to_vec(), self.params.separation);
        for p in self.paths() {
            let mut len = 0.0;
            for w in p.nodes.windows(2) {
                let e = self.graph.edge_between(w[0], w[1]).expect("path edge");
                used[e] = true;
                len += self.graph.edges[e].length;
            }
            length_term += len / self.graph.position(p.source()).dist(self.graph.position(p.target()));
            let poly: Vec<Point> = p.nodes.iter().map(|&v| self.graph.position(v)).collect();
            fresh.assign_path(p.edge, p.width, &poly).expect("fresh ledger");
        }
        let ink = used
            .iter()
            .zip(&self.graph.edges)
            .filter(|(u, _)| **u)
            .map(|(_, e)| e.length)
            .sum();
        CostBreakdown::new(ink, length_term, fresh.total(), &self.params)
    }
}

/// Options for [`route_all`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RouteOptions {
    /// Route the edges of every source with at least this many edges jointly.
    pub multi_dp_threshold: Option<usize>,
}

/// Routes every demand; returns the order in which edges were committed.
///
/// Edges are routed one by one in ascending order of center distance. With a
/// multi-path threshold, sources with many edges are first routed jointly in
/// groups of at most [`MAX_DP_TERMINALS`] distinct targets.
pub fn route_all(
    state: &mut RoutingState,
    demands: &[Demand],
    options: &RouteOptions,
    mut on_commit: impl FnMut(&RoutingState, usize),
) -> Result<Vec<usize>> {
    let mut dist = Vec::with_capacity(demands.len());
    for d in demands {
        dist.push(state.center_distance(d.source, d.target)?);
    }
    let mut done = vec![false; demands.len()];
    let mut sequence = Vec::with_capacity(demands.len());

    if let Some(threshold) = options.multi_dp_threshold {
        let n = state.graph.nodes.len();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, d) in demands.iter().enumerate() {
            incident[d.source].push(i);
            incident[d.target].push(i);
        }
        let mut hubs: Vec<usize> = (0..n).filter(|&v| incident[v].len() >= threshold.max(2)).collect();
        hubs.sort_by_key(|&v| (std::cmp::Reverse(incident[v].len()), v));
        for s in hubs {
            loop {
                let mut group: Vec<usize> = Vec::new();
                let mut targets: Vec<usize> = Vec::new();
                for &i in &incident[s] {
                    let other = if demands[i].source == s { demands[i].target } else { demands[i].source };
                    if !done[i] && !targets.contains(&other) && group.len() < MAX_DP_TERMINALS {
                        group.push(i);
                        targets.push(other);
                    }
                }
                if group.len() < threshold.max(2) {
                    break;
                }
                let width = group.iter().map(|&i| demands[i].width).fold(0.0, f64::max);
                let sol = route_multi_dp(state, s, &targets, width)?;
                for (&i, nodes) in group.iter().zip(sol.paths) {
                    let mut nodes = nodes;
                    if demands[i].source != s {
                        nodes.reverse();
                    }
                    state.commit(i, nodes, demands[i].width)?;
                    done[i] = true;
                    sequence.push(i);
                    on_commit(state, i);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..demands.len()).filter(|&i| !done[i]).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    for i in order {
        let d = demands[i];
        let nodes = route_single(state, d.source, d.target, d.width)?.nodes;
        state.commit(i, nodes, d.width)?;
        sequence.push(i);
        on_commit(state, i);
    }
    Ok(sequence)
}
