//! Ordered edge bundling.
//!
//! Edges of a graph with fixed node positions are routed over a sparse
//! visibility graph built around the node boundaries, bundled by minimizing a
//! cost that mixes shared ink, normalized path length and channel capacity
//! overflow, and finally drawn as separate parallel curves whose order inside
//! every bundle has the minimum possible number of crossings.
//!
//! The pipeline stages live in their own modules:
//!
//! * [`routing_graph`]: obstacles, sparse visibility graph, obstacle shrinking
//! * [`capacity`]: constrained Delaunay triangulation and the overflow ledger
//! * [`router`]: shortest-path and subset dynamic-programming routing
//! * [`nudger`]: hub sizing, node relocation and graph simplification
//! * [`ordering`]: crossing-minimal path orders inside bundles
//! * [`renderer`]: bundle bases, biarc hub segments, SVG and stats output
//! * [`pipeline`]: configuration and the end-to-end driver

pub mod capacity;
pub mod error;
pub mod geometry;
pub mod input;
pub mod nudger;
pub mod ordering;
pub mod pipeline;
pub mod renderer;
pub mod router;
pub mod routing_graph;

pub use error::{Error, Result};
pub use geometry::Point;
