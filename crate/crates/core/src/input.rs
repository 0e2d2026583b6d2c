//! Graph input: positioned nodes with boundary curves, and edges.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::routing_graph::{Boundary, NodeShape};

/// Node identifier as written in the input, a number or a string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Int(i64),
    Str(String),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Int(i) => write!(f, "{i}"),
            NodeId::Str(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeInput {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeInput {
    pub source: NodeId,
    pub target: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    pub nodes: Vec<NodeInput>,
    #[serde(default)]
    pub edges: Vec<EdgeInput>,
}

/// Validated input with edges resolved to node indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    pub ids: Vec<NodeId>,
    pub shapes: Vec<NodeShape>,
    /// `(source, target, width override)`.
    pub edges: Vec<(usize, usize, Option<f64>)>,
}

impl GraphInput {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("input serializes")
    }

    pub fn resolve(&self) -> Result<Graph> {
        let mut index: HashMap<&NodeId, usize> = HashMap::new();
        let mut shapes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(&n.id, i).is_some() {
                return Err(Error::InvalidInput(format!("nodes[{i}].id: duplicate id {}", n.id)));
            }
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(Error::InvalidInput(format!("nodes[{i}]: non-finite position")));
            }
            n.boundary
                .validate()
                .map_err(|e| Error::InvalidInput(format!("nodes[{i}].boundary: {e}")))?;
            shapes.push(NodeShape {
                position: Point::new(n.x, n.y),
                boundary: n.boundary.clone(),
            });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let lookup = |id: &NodeId, field: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("edges[{i}].{field}: unknown node {id}")))
            };
            let s = lookup(&e.source, "source")?;
            let t = lookup(&e.target, "target")?;
            if s == t {
                return Err(Error::InvalidInput(format!("edges[{i}]: self-loop at node {}", e.source)));
            }
            if let Some(w) = e.width {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidInput(format!("edges[{i}].width: must be a nonnegative number")));
                }
            }
            edges.push((s, t, e.width));
        }
        Ok(Graph {
            ids: self.nodes.iter().map(|n| n.id.clone()).collect(),
            shapes,
            edges,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "nodes": [
            {"id": "a", "x": 0, "y": 0, "boundary": {"shape": "rectangle", "width": 2, "height": 1}},
            {"id": 7, "x": 10, "y": 0, "boundary": {"shape": "ellipse", "rx": 1, "ry": 1}}
        ],
        "edges": [{"source": "a", "target": 7, "width": 2}]
    }"#;

    #[test]
    fn parses_mixed_ids() {
        let g = GraphInput::from_json(SMALL).unwrap().resolve().unwrap();
        assert_eq!(g.edges, vec![(0, 1, Some(2.0))]);
        assert_eq!(g.ids[1], NodeId::Int(7));
    }

    #[test]
    fn round_trips() {
        let g = GraphInput::from_json(SMALL).unwrap();
        assert_eq!(GraphInput::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn unknown_endpoint_names_field() {
        let text = SMALL.replace(r#""target": 7"#, r#""target": 8"#);
        let err = GraphInput::from_json(&text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("edges[0].target"), "{err}");
    }

    #[test]
    fn syntax_error_names_line() {
        let err = GraphInput::from_json("{\n\"nodes\": [\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_self_loop() {
        let text = SMALL.replace(r#""target": 7"#, r#""target": "a""#);
        assert!(GraphInput::from_json(&text).unwrap().resolve().is_err());
    }
}
