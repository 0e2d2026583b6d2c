//! Orders of paths inside bundles.
//!
//! Paths that share edges are drawn side by side; the order on each edge
//! decides where pairs of paths cross. An ordering is consistent when only the
//! pairs that cross under every ordering cross, and those exactly once per
//! common subpath. Two algorithms produce consistent orderings: a sort-based
//! one and a linear-time node deletion scheme. Both require that no node is
//! the endpoint of one path and an interior node of another.

mod brute;
mod linear;
mod simple;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub use brute::{brute_force_min, BRUTE_FORCE_LIMIT};
pub use linear::{order_linear, order_linear_with_forest, DeletionForest, ForestEdge};
pub use simple::{order_nice_tree, order_simple, order_simple_with};

/// Canonical key of an undirected edge.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Embedded graph with paths.
///
/// `rotation[v]` lists the neighbours of `v` in clockwise order. Paths are
/// node sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderInstance {
    pub rotation: Vec<Vec<usize>>,
    pub paths: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(skip)]
    index: Index,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct Index {
    rot_pos: Vec<HashMap<usize, usize>>,
    path_pos: Vec<HashMap<usize, usize>>,
    edge_paths: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Clockwise neighbour order from positions: decreasing angle, then distance, then id.
pub fn clockwise_rotation(positions: &[Point], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut rot = vec![Vec::new(); positions.len()];
    for &(a, b) in edges {
        rot[a].push(b);
        rot[b].push(a);
    }
    for (v, r) in rot.iter_mut().enumerate() {
        r.sort_unstable();
        r.dedup();
        let p = positions[v];
        r.sort_by(|&x, &y| {
            let (dx, dy) = (positions[x] - p, positions[y] - p);
            dy.angle()
                .total_cmp(&dx.angle())
                .then(dx.norm2().total_cmp(&dy.norm2()))
                .then(x.cmp(&y))
        });
    }
    rot
}

impl OrderInstance {
    pub fn new(rotation: Vec<Vec<usize>>, paths: Vec<Vec<usize>>) -> Result<Self> {
        let mut inst = OrderInstance {
            rotation,
            paths,
            positions: None,
            index: Index::default(),
        };
        inst.prepare()?;
        Ok(inst)
    }

    /// Instance whose rotation system comes from node positions.
    pub fn from_positions(positions: &[Point], edges: &[(usize, usize)], paths: Vec<Vec<usize>>) -> Result<Self> {
        let mut inst = OrderInstance::new(clockwise_rotation(positions, edges), paths)?;
        inst.positions = Some(positions.iter().map(|p| [p.x, p.y]).collect());
        Ok(inst)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut inst: OrderInstance = serde_json::from_str(text)?;
        inst.prepare()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    fn prepare(&mut self) -> Result<()> {
        let n = self.rotation.len();
        let mut rot_pos = Vec::with_capacity(n);
        for (v, r) in self.rotation.iter().enumerate() {
            let mut m = HashMap::with_capacity(r.len());
            for (i, &u) in r.iter().enumerate() {
                if u >= n || u == v {
                    return Err(Error::InvalidInput(format!("bad neighbour {u} in rotation of node {v}")));
                }
                if m.insert(u, i).is_some() {
                    return Err(Error::InvalidInput(format!("neighbour {u} repeated around node {v}")));
                }
            }
            rot_pos.push(m);
        }
        for (v, r) in self.rotation.iter().enumerate() {
            for &u in r {
                if !rot_pos[u].contains_key(&v) {
                    return Err(Error::InvalidInput(format!("edge {v}-{u} missing around node {u}")));
                }
            }
        }
        let mut is_terminal = vec![false; n];
        let mut is_inner = vec![false; n];
        let mut path_pos = Vec::with_capacity(self.paths.len());
        let mut edge_paths: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (pi, p) in self.paths.iter().enumerate() {
            if p.len() < 2 {
                return Err(Error::InvalidInput(format!("path {pi} has fewer than two nodes")));
            }
            let mut m = HashMap::with_capacity(p.len());
            for (i, &v) in p.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidInput(format!("path {pi} uses unknown node {v}")));
                }
                if m.insert(v, i).is_some() {
                    return Err(Error::InvalidInput(format!("path {pi} visits node {v} twice")));
                }
                if i == 0 || i + 1 == p.len() {
                    is_terminal[v] = true;
                } else {
                    is_inner[v] = true;
                }
            }
            for w in p.windows(2) {
                if !rot_pos[w[0]].contains_key(&w[1]) {
                    return Err(Error::InvalidInput(format!(
                        "path {pi} uses missing edge {}-{}",
                        w[0], w[1]
                    )));
                }
                edge_paths.entry(edge_key(w[0], w[1])).or_default().push(pi);
            }
            path_pos.push(m);
        }
        if let Some(v) = (0..n).find(|&v| is_terminal[v] && is_inner[v]) {
            return Err(Error::PathTerminalProperty(v));
        }
        self.index = Index {
            rot_pos,
            path_pos,
            edge_paths,
        };
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.rotation.len()
    }

    /// Paths on each used edge, ascending ids.
    pub fn edge_paths(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.index.edge_paths
    }

    /// Total path length L in edges.
    pub fn total_length(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.paths.iter().any(|p| p[0] == v || *p.last().unwrap() == v)
    }

    /// Clockwise steps from `from` to `x` around `v`.
    pub(crate) fn rank(&self, v: usize, from: usize, x: usize) -> usize {
        let d = self.rotation[v].len();
        let r = &self.index.rot_pos[v];
        (r[&x] + d - r[&from]) % d
    }

    pub(crate) fn pos(&self, path: usize, v: usize) -> Option<usize> {
        self.index.path_pos[path].get(&v).copied()
    }

    /// Node after `cur` on `path` when it is traversed from `prev` to `cur`.
    pub(crate) fn next_along(&self, path: usize, prev: usize, cur: usize) -> Option<usize> {
        let p = &self.paths[path];
        let i = self.pos(path, cur)?;
        let j = self.pos(path, prev)?;
        if j + 1 == i {
            p.get(i + 1).copied()
        } else if i + 1 == j {
            i.checked_sub(1).map(|k| p[k])
        } else {
            None
        }
    }

    /// Maximal common subpaths of paths `a` and `b`, in the direction of `a`.
    pub fn common_subpaths(&self, a: usize, b: usize) -> Vec<CommonSubpath> {
        let pa = &self.paths[a];
        let shared = |i: usize| match (self.pos(b, pa[i]), self.pos(b, pa[i + 1])) {
            (Some(x), Some(y)) => x.abs_diff(y) == 1,
            _ => false,
        };
        let mut out = Vec::new();
        let mut i = 0;
        while i + 1 < pa.len() {
            if !shared(i) {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < pa.len() && shared(i) {
                i += 1;
            }
            let nodes = pa[start..=i].to_vec();
            let k = nodes.len();
            let start_fork = match (
                self.next_along(a, nodes[1], nodes[0]),
                self.next_along(b, nodes[1], nodes[0]),
            ) {
                (Some(x), Some(y)) => Some((x, y)),
                _ => None,
            };
            let end_fork = match (
                self.next_along(a, nodes[k - 2], nodes[k - 1]),
                self.next_along(b, nodes[k - 2], nodes[k - 1]),
            ) {
                (Some(x), Some(y)) => Some((x, y)),
                _ => None,
            };
            out.push(CommonSubpath {
                nodes,
                start_fork,
                end_fork,
            });
        }
        out
    }

    /// Whether `a` should be left of `b` on the first edge of `s` to avoid a
    /// crossing at its start, if the start is a fork.
    pub fn start_rule(&self, s: &CommonSubpath) -> Option<bool> {
        s.start_fork
            .map(|(xa, xb)| self.rank(s.nodes[0], s.nodes[1], xa) > self.rank(s.nodes[0], s.nodes[1], xb))
    }

    /// Same for the last edge of `s` and its end.
    pub fn end_rule(&self, s: &CommonSubpath) -> Option<bool> {
        let k = s.nodes.len();
        s.end_fork
            .map(|(ya, yb)| self.rank(s.nodes[k - 1], s.nodes[k - 2], ya) < self.rank(s.nodes[k - 1], s.nodes[k - 2], yb))
    }
}

/// A maximal run of edges shared by two paths.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonSubpath {
    /// Nodes in the direction of the first path.
    pub nodes: Vec<usize>,
    /// Neighbours of the first node on the first and second path, if both continue.
    pub start_fork: Option<(usize, usize)>,
    pub end_fork: Option<(usize, usize)>,
}

/// For each used edge, the paths from left to right when travelling from the
/// smaller to the larger endpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleOrdering {
    pub edges: BTreeMap<(usize, usize), Vec<usize>>,
}

impl BundleOrdering {
    /// The paths of edge `x`–`y` from left to right travelling from `x` to `y`.
    pub fn order(&self, x: usize, y: usize) -> Option<Vec<usize>> {
        let mut o = self.edges.get(&edge_key(x, y))?.clone();
        if x > y {
            o.reverse();
        }
        Some(o)
    }

    /// Whether `a` is left of `b` travelling from `x` to `y`.
    pub fn left_of(&self, a: usize, b: usize, x: usize, y: usize) -> bool {
        let o = &self.edges[&edge_key(x, y)];
        let ia = o.iter().position(|&p| p == a).expect("path on edge");
        let ib = o.iter().position(|&p| p == b).expect("path on edge");
        (ia < ib) == (x < y)
    }

    /// Every path on each edge exactly once.
    pub fn validate(&self, inst: &OrderInstance) -> Result<()> {
        if self.edges.len() != inst.edge_paths().len() {
            return Err(Error::Invariant("ordering does not cover the used edges".into()));
        }
        for (e, paths) in inst.edge_paths() {
            let mut o = self
                .edges
                .get(e)
                .ok_or_else(|| Error::Invariant(format!("edge {e:?} has no order")))?
                .clone();
            o.sort_unstable();
            if &o != paths {
                return Err(Error::Invariant(format!("edge {e:?} order is not a permutation of its paths")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let list: Vec<_> = self
            .edges
            .iter()
            .map(|(&(a, b), o)| serde_json::json!({"edge": [a, b], "order": o}))
            .collect();
        serde_json::to_string_pretty(&list).expect("ordering serializes")
    }
}

/// Crossings of paths `a` and `b` on common subpath `s`.
pub fn subpath_crossings(inst: &OrderInstance, ord: &BundleOrdering, a: usize, b: usize, s: &CommonSubpath) -> usize {
    let labels: Vec<bool> = s
        .nodes
        .windows(2)
        .map(|w| ord.left_of(a, b, w[0], w[1]))
        .collect();
    let mut c = labels.windows(2).filter(|w| w[0] != w[1]).count();
    if inst.start_rule(s).is_some_and(|r| r != labels[0]) {
        c += 1;
    }
    if inst.end_rule(s).is_some_and(|r| r != *labels.last().unwrap()) {
        c += 1;
    }
    c
}

/// Crossings of each path pair `(a, b)` with `a < b` that cross at least once.
pub fn pair_crossings(inst: &OrderInstance, ord: &BundleOrdering) -> Vec<((usize, usize), usize)> {
    let mut out = Vec::new();
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            let c: usize = inst
                .common_subpaths(a, b)
                .iter()
                .map(|s| subpath_crossings(inst, ord, a, b, s))
                .sum();
            if c > 0 {
                out.push(((a, b), c));
            }
        }
    }
    out
}

/// Total number of crossings along common subpaths.
pub fn count_crossings(inst: &OrderInstance, ord: &BundleOrdering) -> usize {
    pair_crossings(inst, ord).iter().map(|p| p.1).sum()
}

/// Crossings no ordering can avoid: common subpaths whose two end forks
/// demand opposite sides.
pub fn unavoidable_crossings(inst: &OrderInstance) -> usize {
    let mut c = 0;
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                if let (Some(x), Some(y)) = (inst.start_rule(&s), inst.end_rule(&s)) {
                    c += usize::from(x != y);
                }
            }
        }
    }
    c
}

/// Each pair keeps one relative order along each of its common subpaths.
pub fn is_nice(inst: &OrderInstance, ord: &BundleOrdering) -> bool {
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                let first = ord.left_of(a, b, s.nodes[0], s.nodes[1]);
                if s.nodes.windows(2).any(|w| ord.left_of(a, b, w[0], w[1]) != first) {
                    return false;
                }
            }
        }
    }
    true
}
