use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::RoutingState;
use crate::error::{Error, Result};

/// Entry of the search queue; ordered so the heap pops the smallest key.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QueueItem {
    pub cost: f64,
    pub hops: u32,
    pub node: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for QueueItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost
            .total_cmp(&self.cost)
            .then(o.hops.cmp(&self.hops))
            .then(o.node.cmp(&self.node))
    }
}

/// Result of a single-path search.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleRoute {
    pub nodes: Vec<usize>,
    /// Sum of the frozen edge weights along `nodes`.
    pub cost: f64,
}

/// Minimum additional-cost path from center `s` to center `t`.
///
/// Weights are frozen at the current state. Paths never pass through an
/// obstacle center other than their endpoints. Among equal-cost paths the one
/// with fewest edges wins, then the lexicographically smallest node sequence.
/// The state is not modified; see [`RoutingState::commit`].
pub fn route_single(state: &RoutingState, s: usize, t: usize, width: f64) -> Result<SingleRoute> {
    let st = state.center_distance(s, t)?;
    let g = &state.graph;
    let n = g.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![u32::MAX; n];
    let mut weight_cache: Vec<Option<f64>> = vec![None; g.edges.len()];
    let mut weight = |e: usize| *weight_cache[e].get_or_insert_with(|| state.edge_weight(e, st, width));
    let mut heap = BinaryHeap::new();
    dist[t] = 0.0;
    hops[t] = 0;
    heap.push(QueueItem {
        cost: 0.0,
        hops: 0,
        node: t,
    });
    while let Some(QueueItem { cost, hops: h, node: v }) = heap.pop() {
        if cost > dist[v] || (cost == dist[v] && h > hops[v]) {
            continue;
        }
        if v == s {
            break;
        }
        if v != t && g.is_center(v) {
            continue;
        }
        for &(u, e) in &g.adjacency[v] {
            let nd = cost + weight(e);
            let nh = h + 1;
            if nd < dist[u] || (nd == dist[u] && nh < hops[u]) {
                dist[u] = nd;
                hops[u] = nh;
                heap.push(QueueItem {
                    cost: nd,
                    hops: nh,
                    node: u,
                });
            }
        }
    }
    if !dist[s].is_finite() {
        return Err(Error::Unroutable {
            from: s,
            target: t,
            reason: "the routing graph has no path between the two centers".to_string(),
        });
    }

    let mut nodes = vec![s];
    let mut v = s;
    while v != t {
        let next = g.adjacency[v]
            .iter()
            .filter(|&&(u, e)| {
                (u == t || !g.is_center(u))
                    && hops[u] != u32::MAX
                    && hops[u] + 1 == hops[v]
                    && dist[u] + weight(e) == dist[v]
            })
            .map(|&(u, _)| u)
            .min()
            .ok_or_else(|| Error::Invariant(format!("broken predecessor chain at node {v}")))?;
        nodes.push(next);
        v = next;
    }
    Ok(SingleRoute {
        nodes,
        cost: dist[s],
    })
}
