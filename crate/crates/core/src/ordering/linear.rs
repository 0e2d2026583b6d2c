use std::collections::BTreeMap;

use super::{edge_key, BundleOrdering, OrderInstance};

/// An edge of the working multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestEdge {
    pub ends: [usize; 2],
    /// Replacement edges, clockwise around `expanded_at`.
    pub children: Vec<usize>,
    /// Surviving endpoint when the edge was replaced.
    pub expanded_at: Option<usize>,
    /// Paths on the edge when it was created.
    pub paths: Vec<usize>,
    /// Final order, left to right travelling from `ends[0]` to `ends[1]`.
    pub order: Vec<usize>,
}

/// Record of node deletions: original edges first, then replacement edges in
/// creation order. A replacement edge is a child of the two edges it joins.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeletionForest {
    pub edges: Vec<ForestEdge>,
    /// Number of original edges, which occupy ids `0..roots`.
    pub roots: usize,
}

pub fn order_linear(inst: &OrderInstance) -> BundleOrdering {
    order_linear_with_forest(inst).0
}

/// Consistent ordering by deleting every non-terminal node and re-inserting
/// in reverse.
///
/// Deleting v joins, for each path through v, the two neighbours it uses by a
/// new edge. New edges at a neighbour take the place of the old edge in its
/// clockwise order, sorted by the clockwise position of their far end around
/// v. After all deletions each edge order is the concatenation of the orders
/// of its replacement edges.
pub fn order_linear_with_forest(inst: &OrderInstance) -> (BundleOrdering, DeletionForest) {
    let n = inst.node_count();
    let mut edges: Vec<ForestEdge> = Vec::new();
    let mut id_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(a, b), paths) in inst.edge_paths() {
        id_of.insert((a, b), edges.len());
        edges.push(ForestEdge {
            ends: [a, b],
            children: Vec::new(),
            expanded_at: None,
            paths: paths.clone(),
            order: Vec::new(),
        });
    }
    let roots = edges.len();
    // Live paths of each edge; emptied when the edge is replaced.
    let mut live: Vec<Vec<usize>> = edges.iter().map(|e| e.paths.clone()).collect();

    // Circular clockwise lists of half-edges; half-edge 2e + s sits at ends[s].
    let mut next: Vec<usize> = vec![usize::MAX; 2 * edges.len()];
    let mut prev: Vec<usize> = vec![usize::MAX; 2 * edges.len()];
    let mut anchor = vec![usize::MAX; n];
    for v in 0..n {
        let halves: Vec<usize> = inst.rotation[v]
            .iter()
            .filter_map(|&u| id_of.get(&edge_key(u, v)).map(|&e| 2 * e + usize::from(edges[e].ends[1] == v)))
            .collect();
        let k = halves.len();
        for i in 0..k {
            next[halves[i]] = halves[(i + 1) % k];
            prev[halves[(i + 1) % k]] = halves[i];
        }
        if k > 0 {
            anchor[v] = halves[0];
        }
    }

    let mut is_terminal = vec![false; n];
    for p in &inst.paths {
        is_terminal[p[0]] = true;
        is_terminal[*p.last().unwrap()] = true;
    }
    let mut first_slot = vec![usize::MAX; inst.paths.len()];
    for v in 0..n {
        if is_terminal[v] || anchor[v] == usize::MAX {
            continue;
        }
        // Clockwise half-edges around v.
        let mut around = vec![anchor[v]];
        let mut h = next[anchor[v]];
        while h != anchor[v] {
            around.push(h);
            h = next[h];
        }
        let t = around.len();
        let far: Vec<usize> = around.iter().map(|&h| edges[h / 2].ends[1 - h % 2]).collect();
        // Pair up the two slots used by each path through v.
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        let mut touched = Vec::new();
        for (i, &h) in around.iter().enumerate() {
            for &p in &live[h / 2] {
                if first_slot[p] == usize::MAX {
                    first_slot[p] = i;
                    touched.push(p);
                } else {
                    pairs.push((first_slot[p], i, p));
                }
            }
        }
        for p in touched {
            first_slot[p] = usize::MAX;
        }
        // One new edge per slot pair.
        pairs.sort_unstable();
        let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        for (a, b, p) in pairs {
            match groups.last_mut() {
                Some(g) if g.0 == a && g.1 == b => g.2.push(p),
                _ => groups.push((a, b, vec![p])),
            }
        }
        let mut at_slot: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t];
        for (a, b, paths) in groups {
            let e = edges.len();
            edges.push(ForestEdge {
                ends: [far[a], far[b]],
                children: Vec::new(),
                expanded_at: None,
                paths: paths.clone(),
                order: Vec::new(),
            });
            live.push(paths);
            next.extend([usize::MAX; 2]);
            prev.extend([usize::MAX; 2]);
            at_slot[a].push(((b + t - a) % t, 2 * e));
            at_slot[b].push(((a + t - b) % t, 2 * e + 1));
        }
        for (i, &h) in around.iter().enumerate() {
            let mut new_halves = std::mem::take(&mut at_slot[i]);
            new_halves.sort_unstable();
            let outer = h ^ 1;
            let w = edges[h / 2].ends[1 - h % 2];
            let seq: Vec<usize> = new_halves.iter().map(|&(_, nh)| nh).collect();
            // Splice seq in place of the old half-edge at w.
            let (p, q) = (prev[outer], next[outer]);
            if p == outer {
                // The old edge was the only one at w.
                for k in 0..seq.len() {
                    next[seq[k]] = seq[(k + 1) % seq.len()];
                    prev[seq[(k + 1) % seq.len()]] = seq[k];
                }
            } else {
                next[p] = seq[0];
                prev[seq[0]] = p;
                for k in 0..seq.len() - 1 {
                    next[seq[k]] = seq[k + 1];
                    prev[seq[k + 1]] = seq[k];
                }
                next[seq[seq.len() - 1]] = q;
                prev[q] = seq[seq.len() - 1];
            }
            anchor[w] = seq[0];
            let e = &mut edges[h / 2];
            e.children = seq.iter().map(|&nh| nh / 2).collect();
            e.expanded_at = Some(w);
            live[h / 2].clear();
        }
        anchor[v] = usize::MAX;
    }

    // Remaining edges join terminals; their paths run together to the end.
    for (e, l) in live.iter().enumerate() {
        if !l.is_empty() {
            let mut o = l.clone();
            o.sort_unstable();
            edges[e].order = o;
        }
    }
    for e in (0..edges.len()).rev() {
        let Some(w) = edges[e].expanded_at else {
            continue;
        };
        let mut order = Vec::with_capacity(edges[e].paths.len());
        for &c in &edges[e].children {
            let child = &edges[c];
            if child.ends[0] == w {
                order.extend_from_slice(&child.order);
            } else {
                order.extend(child.order.iter().rev());
            }
        }
        if edges[e].ends[0] != w {
            order.reverse();
        }
        edges[e].order = order;
    }
    let ordering = BundleOrdering {
        edges: edges[..roots]
            .iter()
            .map(|e| ((e.ends[0], e.ends[1]), e.order.clone()))
            .collect(),
    };
    (ordering, DeletionForest { edges, roots })
}
