//! Random bundle graphs for optimizer tests.

use ordered_bundles::geometry::ConvexPolygon;
use ordered_bundles::nudger::{BundleGraph, BundleNode, BundlePath, NudgeReport, OptimizerParams};
use ordered_bundles::pipeline::PipelineConfig;
use ordered_bundles::router::CostParams;
use ordered_bundles::Point;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn square(c: Point, side: f64) -> ConvexPolygon {
    ConvexPolygon::rectangle(c, side, side).unwrap()
}

pub fn center(p: Point, o: usize) -> BundleNode {
    BundleNode { position: p, center_of: Some(o), alive: true }
}

pub fn free(p: Point) -> BundleNode {
    BundleNode { position: p, center_of: None, alive: true }
}

pub fn path(edge: usize, nodes: Vec<usize>, graph: &[BundleNode], width: f64) -> BundlePath {
    let st = graph[nodes[0]].position.dist(graph[*nodes.last().unwrap()].position);
    BundlePath { edge, nodes, width, st }
}

/// Obstacles on a grid with random intermediates and random paths between
/// their centers.
pub fn random_bundle(rng: &mut ChaCha8Rng) -> BundleGraph {
    let k = rng.gen_range(2..6);
    let m = rng.gen_range(1..8);
    let mut nodes = Vec::new();
    let mut obstacles = Vec::new();
    for i in 0..k {
        let c = Point::new(8.0 * i as f64, rng.gen_range(0.0..8.0));
        obstacles.push(square(c, 1.0));
        nodes.push(center(c, i));
    }
    for _ in 0..m {
        nodes.push(free(Point::new(rng.gen_range(-2.0..35.0), rng.gen_range(-6.0..14.0))));
    }
    let mut paths = Vec::new();
    for e in 0..rng.gen_range(1..6) {
        let s = rng.gen_range(0..k);
        let t = (s + rng.gen_range(1..k)) % k;
        let mut mids: Vec<usize> = (k..k + m).collect();
        mids.shuffle(rng);
        mids.truncate(rng.gen_range(1..=m.min(3)));
        let mut seq = vec![s];
        seq.extend(mids);
        seq.push(t);
        paths.push(path(e, seq, &nodes, rng.gen_range(0.5..2.0)));
    }
    let cost = CostParams::with_weights(rng.gen_range(0.1..2.0), rng.gen_range(0.0..600.0));
    BundleGraph::new(nodes, paths, obstacles, cost, OptimizerParams::default())
}

pub fn audited(mut cfg: PipelineConfig) -> PipelineConfig {
    cfg.timestamp = false;
    cfg.optimizer.audit = true;
    cfg.optimizer.trace = true;
    cfg
}

/// Descent, shortcut and glue entries never raise the cost of the state
/// before them.
pub fn non_increasing_outside_escapes(report: &NudgeReport) -> Result<(), String> {
    let mut prev = report.initial_cost;
    for (i, t) in report.trace.iter().enumerate() {
        if t.phase != "escape" && t.cost > prev * (1.0 + 1e-12) + 1e-12 {
            return Err(format!("entry {i} ({}) raised the cost from {prev} to {}", t.phase, t.cost));
        }
        prev = t.cost;
    }
    Ok(())
}

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Relative error allowed between D and the finite-difference gradient.
pub const FD_TOL: f64 = 1e-5;

/// Relative gap between D at `u` and the central difference of −f.
pub fn descent_fd_error(g: &BundleGraph, u: usize) -> f64 {
    let p = g.position(u);
    let f = |q: Point| g.contribution(u, q);
    let dx = (f(p + Point::new(FD_STEP, 0.0)) - f(p - Point::new(FD_STEP, 0.0))) / (2.0 * FD_STEP);
    let dy = (f(p + Point::new(0.0, FD_STEP)) - f(p - Point::new(0.0, FD_STEP))) / (2.0 * FD_STEP);
    let d = g.descent_direction(u);
    (d - Point::new(-dx, -dy)).norm() / d.norm().max(1.0)
}

/// An intermediate carrying at least one path, if any.
pub fn random_live_node(rng: &mut ChaCha8Rng, g: &BundleGraph) -> Option<usize> {
    let live: Vec<usize> = g
        .alive_intermediates()
        .into_iter()
        .filter(|&v| !g.paths_through(v).is_empty())
        .collect();
    live.choose(rng).copied()
}
