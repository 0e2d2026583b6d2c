//! Small routing graphs and exhaustive oracles for the router.

use ordered_bundles::capacity::CapacitySegment;
use ordered_bundles::router::{CostParams, RoutingState};
use ordered_bundles::routing_graph::{EdgeKind, NodeKind, RoutingGraph, RoutingNode};
use ordered_bundles::Point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

/// Connected random graph; nodes `0..centers` are centers.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, centers: usize) -> RoutingGraph {
    let nodes = (0..n)
        .map(|i| RoutingNode {
            id: i,
            position: Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
            kind: if i < centers { NodeKind::Center(i) } else { NodeKind::Intermediate(0) },
        })
        .collect();
    // Intermediates form a tree; every center hangs off one of them.
    let mut pairs = Vec::new();
    for v in centers + 1..n {
        pairs.push((rng.gen_range(centers..v), v, EdgeKind::Visibility));
    }
    for c in 0..centers {
        pairs.push((c, rng.gen_range(centers..n), EdgeKind::Visibility));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.35) {
                pairs.push((a, b, EdgeKind::Visibility));
            }
        }
    }
    RoutingGraph::new(nodes, pairs)
}

pub fn random_segments(rng: &mut ChaCha8Rng, count: usize) -> Vec<CapacitySegment> {
    (0..count)
        .map(|_| CapacitySegment {
            a: Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
            b: Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
            obstacles: (0, 1),
            capacity: rng.gen_range(0.2..2.0),
        })
        .collect()
}

pub fn random_params(rng: &mut ChaCha8Rng, with_capacity: bool) -> CostParams {
    CostParams {
        k_ink: rng.gen_range(0.0..5.0),
        k_len: rng.gen_range(0.1..50.0),
        k_cap: if with_capacity { rng.gen_range(0.0..100.0) } else { 0.0 },
        width: 1.0,
        separation: 0.5,
    }
}

/// Simple paths from `s` to `t` whose interior avoids centers.
pub fn simple_paths(g: &RoutingGraph, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn go(g: &RoutingGraph, t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        if path.len() > 1 && g.is_center(v) {
            return;
        }
        for &(w, _) in &g.adjacency[v] {
            if !path.contains(&w) {
                path.push(w);
                go(g, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, t, &mut vec![s], &mut out);
    out
}

pub fn frozen_cost(state: &RoutingState, nodes: &[usize], st: f64) -> f64 {
    nodes
        .windows(2)
        .map(|w| state.edge_weight(state.graph.edge_between(w[0], w[1]).unwrap(), st, 1.0))
        .sum()
}

/// Commits a few random center-to-center paths so some edges carry ink.
pub fn preload(rng: &mut ChaCha8Rng, state: &mut RoutingState, centers: usize) {
    for e in 0..rng.gen_range(0..3) {
        let s = rng.gen_range(0..centers);
        let t = (s + 1 + rng.gen_range(0..centers - 1)) % centers;
        let paths = simple_paths(&state.graph, s, t);
        if paths.is_empty() {
            continue;
        }
        let p = paths[rng.gen_range(0..paths.len())].clone();
        state.commit(100 + e, p, 1.0).unwrap();
    }
}

pub fn tree_like(paths: &[Vec<usize>]) -> bool {
    let mut edges: Vec<(usize, usize)> = paths
        .iter()
        .flat_map(|p| p.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut nodes: Vec<usize> = paths.iter().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    edges.len() + 1 == nodes.len()
}

/// Cheapest joint routing of `root` to `t1` and `t2` over all pairs of
/// simple paths: ink of the union's unused edges plus both length terms.
pub fn pair_brute_force(state: &RoutingState, root: usize, t1: usize, t2: usize) -> f64 {
    let params = state.params;
    let st1 = state.center_distance(root, t1).unwrap();
    let st2 = state.center_distance(root, t2).unwrap();
    let len = |p: &[usize]| -> f64 {
        p.windows(2)
            .map(|w| state.graph.position(w[0]).dist(state.graph.position(w[1])))
            .sum()
    };
    let value = |a: &[usize], b: &[usize]| {
        let mut edges: Vec<usize> = [a, b]
            .iter()
            .flat_map(|p| p.windows(2).map(|w| state.graph.edge_between(w[0], w[1]).unwrap()))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let ink: f64 = edges
            .iter()
            .filter(|&&e| state.usage(e) == 0)
            .map(|&e| state.graph.edges[e].length)
            .sum();
        params.k_ink * ink + params.k_len * (len(a) / st1 + len(b) / st2)
    };
    let (p1, p2) = (simple_paths(&state.graph, root, t1), simple_paths(&state.graph, root, t2));
    let mut best = f64::INFINITY;
    for a in &p1 {
        for b in &p2 {
            best = best.min(value(a, b));
        }
    }
    best
}
