//! Configuration and the end-to-end driver: routing graph, routing, nudging,
//! ordering and rendering.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::capacity::{build_cdt, extract_capacity_segments, CapacityLedger};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};
use crate::input::{GraphInput, NodeId};
use crate::nudger::{prune_unused, BundleGraph, NudgeReport, OptimizerParams};
use crate::ordering::{count_crossings, order_linear, order_simple, BundleOrdering};
use crate::renderer::{render, write_svg, Drawing, PieceRecord, SvgOptions};
use crate::router::{route_all, CostBreakdown, CostParams, Demand, RouteOptions, RoutingState};
use crate::routing_graph::{build_routing_graph, Obstacle, ObstacleParams, DEFAULT_CONE_ANGLE, DEFAULT_MAX_CORNERS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingAlgorithm {
    #[default]
    Simple,
    Linear,
    /// Runs both and fails if their crossing counts differ.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub cost: CostParams,
    pub cone_angle: f64,
    /// Upper bound on obstacle corners.
    pub max_corners: usize,
    pub optimizer: OptimizerParams,
    pub ordering: OrderingAlgorithm,
    /// Joint routing for nodes with at least this many edges.
    pub multi_dp: Option<usize>,
    /// Compare incremental and recomputed routing cost after every path.
    pub verify_costs: bool,
    pub svg_hubs: bool,
    pub svg_obstacles: bool,
    /// Record wall-clock timings and stamp the drawing.
    pub timestamp: bool,
    /// Only used by test generators; the pipeline itself is deterministic.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            cost: CostParams::default(),
            cone_angle: DEFAULT_CONE_ANGLE,
            max_corners: DEFAULT_MAX_CORNERS,
            optimizer: OptimizerParams::default(),
            ordering: OrderingAlgorithm::Simple,
            multi_dp: None,
            verify_costs: false,
            svg_hubs: false,
            svg_obstacles: false,
            timestamp: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GraphSizes {
    pub nodes: usize,
    pub edges: usize,
    pub routing_nodes: usize,
    pub routing_edges: usize,
    pub capacity_segments: usize,
    pub bundle_nodes: usize,
    pub bundle_edges: usize,
}

/// Seconds per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub routing: f64,
    pub optimization: f64,
    pub ordering: f64,
    pub overall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub config: PipelineConfig,
    pub graph: GraphSizes,
    /// Cost when routing ends.
    pub routing_cost: CostBreakdown,
    /// Cost of the final geometry.
    pub final_cost: CostBreakdown,
    pub crossings: usize,
    pub escapes: usize,
    pub descent_moves: usize,
    pub shortcuts: usize,
    pub glues: usize,
    pub hub_fallbacks: usize,
    pub hub_violations: usize,
    /// Largest relative gap between incremental and recomputed cost terms;
    /// present when costs were verified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bookkeeping_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Route {
    pub edge: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub width: f64,
    /// Bundle graph nodes along the path.
    pub polyline: Vec<Point>,
    pub curve: Vec<PieceRecord>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub obstacles: Vec<Obstacle>,
    pub bundle: BundleGraph,
    pub ordering: BundleOrdering,
    pub drawing: Drawing,
    pub nudge: NudgeReport,
    pub stats: Stats,
    pub routes: Vec<Route>,
    /// Capacity table after routing.
    pub capacity_table: String,
    pub svg: String,
}

impl PipelineOutput {
    pub fn stats_json(&self) -> String {
        serde_json::to_string_pretty(&self.stats).expect("stats serialize")
    }

    pub fn routes_json(&self) -> String {
        serde_json::to_string_pretty(&self.routes).expect("routes serialize")
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Capacity penalty of polylines through the given segments.
fn capacity_of(segments: &CapacityLedger, bundle: &BundleGraph) -> Result<f64> {
    let mut fresh = CapacityLedger::new(segments.segments().to_vec(), bundle.cost.separation);
    for (i, p) in bundle.paths.iter().enumerate() {
        let line: Vec<Point> = p.nodes.iter().map(|&v| bundle.position(v)).collect();
        fresh.assign_path(i, p.width, &line)?;
    }
    Ok(fresh.total())
}

pub fn run(config: &PipelineConfig, input: &GraphInput) -> Result<PipelineOutput> {
    config.cost.validate()?;
    let start = Instant::now();
    let graph_in = input.resolve()?;

    let obstacle_params = ObstacleParams {
        max_corners: config.max_corners,
        ..ObstacleParams::for_separation(config.cost.separation)
    };
    let (obstacles, graph, _) = build_routing_graph(&graph_in.shapes, &obstacle_params, config.cone_angle)?;
    let shrunk: Vec<ConvexPolygon> = obstacles.iter().map(|o| o.shrunk.clone()).collect();
    let rings: Vec<Vec<Point>> = shrunk.iter().map(|p| p.vertices().to_vec()).collect();
    let segments = if rings.len() >= 2 {
        extract_capacity_segments(&build_cdt(&rings)?, &shrunk)
    } else {
        Vec::new()
    };
    let ledger = CapacityLedger::new(segments, config.cost.separation);
    let sizes_routing = (graph.nodes.len(), graph.edges.len(), ledger.segments().len());

    let demands: Vec<Demand> = graph_in
        .edges
        .iter()
        .map(|&(s, t, w)| Demand {
            source: s,
            target: t,
            width: w.unwrap_or(config.cost.width),
        })
        .collect();
    let mut state = RoutingState::new(graph, ledger, config.cost);
    let mut worst: f64 = 0.0;
    let options = RouteOptions {
        multi_dp_threshold: config.multi_dp,
    };
    route_all(&mut state, &demands, &options, |s, _| {
        if config.verify_costs {
            let (a, b) = (s.cost(), s.recompute_cost());
            worst = worst
                .max(relative_gap(a.ink, b.ink))
                .max(relative_gap(a.length_term, b.length_term))
                .max(relative_gap(a.capacity, b.capacity));
        }
    })?;
    let routing_cost = state.cost();
    let capacity_table = state.ledger.dump_table();
    let t_routing = start.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let (graph, ledger, paths) = state.into_paths();
    let mut bundle = prune_unused(&graph, &paths, shrunk, config.cost, config.optimizer);
    let nudge = bundle.optimize();
    let t_opt = t0.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let inst = bundle.order_instance()?;
    let ordering = match config.ordering {
        OrderingAlgorithm::Simple => order_simple(&inst),
        OrderingAlgorithm::Linear => order_linear(&inst),
        OrderingAlgorithm::Both => {
            let a = order_simple(&inst);
            let b = order_linear(&inst);
            let (ca, cb) = (count_crossings(&inst, &a), count_crossings(&inst, &b));
            if ca != cb {
                return Err(Error::Invariant(format!(
                    "ordering algorithms disagree: simple {ca}, linear {cb} crossings"
                )));
            }
            a
        }
    };
    let crossings = count_crossings(&inst, &ordering);
    let t_order = t0.elapsed().as_secs_f64();

    let drawing = render(&bundle, &obstacles, &ordering);
    let (ink, length_term) = bundle.ink_and_length();
    let final_cost = CostBreakdown::new(ink, length_term, capacity_of(&ledger, &bundle)?, &config.cost);
    let svg = write_svg(
        &drawing,
        &bundle,
        &obstacles,
        &SvgOptions {
            hubs: config.svg_hubs,
            obstacles: config.svg_obstacles,
            timestamp: config.timestamp.then(|| format!("{:?}", std::time::SystemTime::now())),
        },
    );
    let mut routes: Vec<Route> = drawing
        .paths
        .iter()
        .map(|rp| {
            let bp = &bundle.paths[rp.path];
            let (s, t, _) = graph_in.edges[bp.edge];
            Route {
                edge: bp.edge,
                source: graph_in.ids[s].clone(),
                target: graph_in.ids[t].clone(),
                width: rp.width,
                polyline: bp.nodes.iter().map(|&v| bundle.position(v)).collect(),
                curve: rp.pieces.iter().map(PieceRecord::from).collect(),
            }
        })
        .collect();
    routes.sort_by_key(|r| r.edge);
    let overall = start.elapsed().as_secs_f64();

    let stats = Stats {
        config: config.clone(),
        graph: GraphSizes {
            nodes: graph_in.shapes.len(),
            edges: graph_in.edges.len(),
            routing_nodes: sizes_routing.0,
            routing_edges: sizes_routing.1,
            capacity_segments: sizes_routing.2,
            bundle_nodes: bundle.nodes.iter().filter(|n| n.alive).count(),
            bundle_edges: bundle.edges().len(),
        },
        routing_cost,
        final_cost,
        crossings,
        escapes: nudge.escapes,
        descent_moves: nudge.descent_moves,
        shortcuts: nudge.shortcuts,
        glues: nudge.glues,
        hub_fallbacks: drawing.fallbacks(),
        hub_violations: drawing.hub_violations(),
        bookkeeping_error: config.verify_costs.then_some(worst),
        timings: config.timestamp.then_some(Timings {
            routing: t_routing,
            optimization: t_opt,
            ordering: t_order,
            overall,
        }),
    };
    Ok(PipelineOutput {
        obstacles,
        bundle,
        ordering,
        drawing,
        nudge,
        stats,
        routes,
        capacity_table,
        svg,
    })
}
