use std::collections::BinaryHeap;

use super::single::QueueItem;
use super::RoutingState;
use crate::error::{Error, Result};

/// Largest terminal count accepted by [`route_multi_dp`].
pub const MAX_DP_TERMINALS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Back {
    Unset,
    Leaf,
    Edge(usize),
    Split(usize),
}

/// Values f(v, P) over node `v` and terminal subset `P` (bit mask).
#[derive(Clone, Debug)]
pub struct DpTable {
    pub root: usize,
    pub terminals: Vec<usize>,
    /// `f[mask][v]`.
    pub f: Vec<Vec<f64>>,
}

impl DpTable {
    pub fn value(&self, v: usize, mask: usize) -> f64 {
        self.f[mask][v]
    }

    pub fn full_mask(&self) -> usize {
        (1 << self.terminals.len()) - 1
    }
}

/// Joint routing of several paths from one root.
#[derive(Clone, Debug)]
pub struct DpSolution {
    /// One node sequence per terminal, each starting at the root.
    pub paths: Vec<Vec<usize>>,
    /// f(root, all terminals).
    pub value: f64,
    /// Ink and length part of the additional cost of `paths`.
    pub cost: f64,
    pub table: DpTable,
}

/// Exact minimum of the ink and length part of the additional cost for paths
/// from `root` to every terminal, by dynamic programming over terminal subsets.
///
/// For each subset the values for all nodes come from one shortest-path run on
/// the graph extended with a virtual node joined to every node by the best
/// split of the subset at that node. Splits happen only at intermediate nodes
/// or at the root; no path passes through another center. The capacity term is
/// not part of the recurrence and is applied when the paths are committed.
/// The reconstructed paths are replaced by shortest paths inside their union,
/// which always yields a tree. The state is not modified.
pub fn route_multi_dp(
    state: &RoutingState,
    root: usize,
    terminals: &[usize],
    _width: f64,
) -> Result<DpSolution> {
    let k = terminals.len();
    if k > MAX_DP_TERMINALS {
        return Err(Error::TooManyTerminals(k, MAX_DP_TERMINALS));
    }
    if k == 0 {
        return Err(Error::InvalidInput("no terminals for multi-path routing".into()));
    }
    for (i, &t) in terminals.iter().enumerate() {
        if terminals[..i].contains(&t) {
            return Err(Error::InvalidInput(format!("terminal {t} listed twice")));
        }
    }
    let g = &state.graph;
    let p = &state.params;
    let n = g.nodes.len();
    let mut inv = Vec::with_capacity(k);
    for &t in terminals {
        inv.push(1.0 / state.center_distance(root, t)?);
    }
    let full = (1usize << k) - 1;
    let can_split = |v: usize| v == root || !g.is_center(v);
    let mut f = vec![vec![f64::INFINITY; n]; full + 1];
    let mut back = vec![vec![Back::Unset; n]; full + 1];
    let mut hops = vec![0u32; n];

    for mask in 1..=full {
        let coef: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| inv[i]).sum();
        let single = mask.is_power_of_two().then(|| mask.trailing_zeros() as usize);
        let (fm, rest) = f.split_at_mut(mask);
        let cur = &mut rest[0];
        let bm = &mut back[mask];
        if let Some(i) = single {
            cur[terminals[i]] = 0.0;
            bm[terminals[i]] = Back::Leaf;
        } else {
            for v in (0..n).filter(|&v| can_split(v)) {
                let mut sub = (mask - 1) & mask;
                while sub > 0 {
                    let other = mask ^ sub;
                    if sub < other {
                        let val = fm[sub][v] + fm[other][v];
                        if val < cur[v] {
                            cur[v] = val;
                            bm[v] = Back::Split(sub);
                        }
                    }
                    sub = (sub - 1) & mask;
                }
            }
        }
        let mut heap = BinaryHeap::new();
        for v in 0..n {
            if cur[v].is_finite() {
                hops[v] = 0;
                heap.push(QueueItem {
                    cost: cur[v],
                    hops: 0,
                    node: v,
                });
            }
        }
        while let Some(QueueItem { cost, hops: h, node: u }) = heap.pop() {
            if cost > cur[u] || (cost == cur[u] && h > hops[u]) {
                continue;
            }
            let passable = !g.is_center(u) || single.is_some_and(|i| terminals[i] == u);
            if !passable {
                continue;
            }
            for &(v, e) in &g.adjacency[u] {
                let len = g.edges[e].length;
                let delta = if state.usage(e) > 0 { 0.0 } else { len };
                let nd = cost + p.k_ink * delta + p.k_len * len * coef;
                if nd < cur[v] {
                    cur[v] = nd;
                    hops[v] = h + 1;
                    bm[v] = Back::Edge(u);
                    heap.push(QueueItem {
                        cost: nd,
                        hops: h + 1,
                        node: v,
                    });
                }
            }
        }
    }

    let value = f[full][root];
    if !value.is_finite() {
        let missing = terminals
            .iter()
            .enumerate()
            .find(|(i, _)| !f[1 << i][root].is_finite())
            .map(|(_, &t)| t)
            .unwrap_or(terminals[0]);
        return Err(Error::Unroutable {
            from: root,
            target: missing,
            reason: "no joint route to all terminals".to_string(),
        });
    }

    // Edges of the back-pointer structure.
    let mut used = Vec::new();
    let mut stack = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        match back[mask][v] {
            Back::Leaf => {}
            Back::Edge(u) => {
                used.push(g.edge_between(v, u).expect("adjacent"));
                stack.push((mask, u));
            }
            Back::Split(sub) => {
                stack.push((sub, v));
                stack.push((mask ^ sub, v));
            }
            Back::Unset => return Err(Error::Invariant(format!("missing back-pointer at {v}"))),
        }
    }
    used.sort_unstable();
    used.dedup();

    // Shortest-path tree of the union, rooted at the root.
    let mut in_union = vec![false; g.edges.len()];
    for &e in &used {
        in_union[e] = true;
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(QueueItem {
        cost: 0.0,
        hops: 0,
        node: root,
    });
    while let Some(QueueItem { cost, hops: h, node: u }) = heap.pop() {
        if cost > dist[u] {
            continue;
        }
        if u != root && g.is_center(u) {
            continue;
        }
        for &(v, e) in &g.adjacency[u] {
            if !in_union[e] {
                continue;
            }
            let nd = cost + g.edges[e].length;
            if nd < dist[v] || (nd == dist[v] && u < parent[v]) {
                dist[v] = nd;
                parent[v] = u;
                heap.push(QueueItem {
                    cost: nd,
                    hops: h + 1,
                    node: v,
                });
            }
        }
    }
    let mut paths = Vec::with_capacity(k);
    let mut tree_edges = Vec::new();
    let mut cost = 0.0;
    for (i, &t) in terminals.iter().enumerate() {
        let mut path = vec![t];
        let mut v = t;
        while v != root {
            let u = parent[v];
            if u == usize::MAX {
                return Err(Error::Invariant(format!("terminal {t} not reached in tree cleanup")));
            }
            tree_edges.push(g.edge_between(u, v).expect("adjacent"));
            path.push(u);
            v = u;
        }
        path.reverse();
        cost += p.k_len * dist[t] * inv[i];
        paths.push(path);
    }
    tree_edges.sort_unstable();
    tree_edges.dedup();
    cost += tree_edges
        .iter()
        .filter(|&&e| state.usage(e) == 0)
        .map(|&e| p.k_ink * g.edges[e].length)
        .sum::<f64>();

    Ok(DpSolution {
        paths,
        value,
        cost,
        table: DpTable {
            root,
            terminals: terminals.to_vec(),
            f,
        },
    })
}
