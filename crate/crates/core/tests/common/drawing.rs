//! Geometric checks on pipeline output.

use ordered_bundles::geometry::Point;
use ordered_bundles::input::GraphInput;
use ordered_bundles::pipeline::PipelineOutput;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Tangent continuity tolerance at piece junctions.
pub const TANGENT_TOL: f64 = 1e-9;
/// Samples per piece for the obstacle test.
pub const OBSTACLE_SAMPLES: usize = 128;
/// Tolerance on adjacent slot spacing after removing the scale factor.
pub const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Default)]
pub struct DrawingReport {
    pub max_gap: f64,
    pub max_kink: f64,
    pub obstacle_hits: usize,
    pub spacing_error: f64,
    pub order_mismatches: usize,
    pub hub_violations: usize,
}

impl DrawingReport {
    pub fn ok(&self) -> bool {
        self.max_gap <= 1e-9
            && self.max_kink <= TANGENT_TOL
            && self.obstacle_hits == 0
            && self.spacing_error <= SPACING_TOL
            && self.order_mismatches == 0
            && self.hub_violations == 0
    }
}

pub fn check_drawing(out: &PipelineOutput) -> DrawingReport {
    let bundle = &out.bundle;
    let mut r = DrawingReport::default();
    for rp in &out.drawing.paths {
        let scale = 1.0 + rp.pieces.iter().map(|p| p.start().norm()).fold(0.0, f64::max);
        r.max_gap = r.max_gap.max(rp.max_gap() / scale);
        r.max_kink = r.max_kink.max(rp.max_kink());
        r.hub_violations += rp.hub_violations;
        let nodes = &bundle.paths[rp.path].nodes;
        let own: Vec<usize> = [nodes[0], *nodes.last().unwrap()]
            .iter()
            .filter_map(|&v| bundle.nodes[v].center_of)
            .collect();
        for p in &rp.pieces {
            for k in 0..=OBSTACLE_SAMPLES {
                let q = p.point_at(k as f64 / OBSTACLE_SAMPLES as f64);
                for (i, o) in bundle.obstacles().iter().enumerate() {
                    if !own.contains(&i) && o.contains_with_clearance(q, 1e-9) {
                        r.obstacle_hits += 1;
                    }
                }
            }
        }
    }
    let sep = bundle.cost.separation;
    for b in &out.drawing.bases {
        let want = out.ordering.order(b.edge.0, b.edge.1).unwrap_or_default();
        let got: Vec<usize> = b.slots.iter().map(|s| s.path).collect();
        if want != got {
            r.order_mismatches += 1;
        }
        let normal = {
            let d = bundle.position(b.edge.1) - bundle.position(b.edge.0);
            d.normalized().unwrap().perp()
        };
        for w in b.slots.windows(2) {
            let (wi, wj) = (bundle.paths[w[0].path].width, bundle.paths[w[1].path].width);
            let expect = b.scale * ((wi + wj) / 2.0 + sep);
            let gap = (w[0].point - w[1].point).dot(normal);
            r.spacing_error = r.spacing_error.max((gap - expect).abs());
        }
    }
    r
}

fn node(id: usize, x: f64, y: f64, kind: u8) -> serde_json::Value {
    let boundary = match kind % 3 {
        0 => serde_json::json!({"shape": "rectangle", "width": 1.0, "height": 0.7}),
        1 => serde_json::json!({"shape": "ellipse", "rx": 0.5, "ry": 0.4}),
        _ => serde_json::json!({"shape": "polygon", "points": [[-0.5, -0.35], [0.5, -0.35], [0.0, 0.5]]}),
    };
    serde_json::json!({"id": id, "x": x, "y": y, "boundary": boundary})
}

/// `n` nodes on a jittered grid with spacing `gap`, and `m` distinct random
/// edges.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize, gap: f64) -> GraphInput {
    let cols = (n as f64).sqrt().ceil() as usize;
    let nodes: Vec<serde_json::Value> = (0..n)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let p = Point::new(c as f64 * gap, r as f64 * gap)
                + Point::new(rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25)) * gap;
            node(i, p.x, p.y, rng.gen_range(0..3))
        })
        .collect();
    let mut pairs = std::collections::BTreeSet::new();
    while pairs.len() < m.min(n * (n - 1) / 2) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<serde_json::Value> = pairs
        .into_iter()
        .map(|(a, b)| serde_json::json!({"source": a, "target": b}))
        .collect();
    serde_json::from_value(serde_json::json!({"nodes": nodes, "edges": edges})).unwrap()
}
