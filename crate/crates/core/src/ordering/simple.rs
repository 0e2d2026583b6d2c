use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use super::{edge_key, BundleOrdering, OrderInstance};
use crate::error::{Error, Result};

/// Consistent ordering by sorting the paths of each edge.
///
/// Edges are processed in ascending key order, directed from the smaller to
/// the larger endpoint.
pub fn order_simple(inst: &OrderInstance) -> BundleOrdering {
    let edges: Vec<(usize, usize)> = inst.edge_paths().keys().copied().collect();
    order_simple_with(inst, &edges)
}

/// The sort-based algorithm with an explicit processing order; each entry
/// `(u, v)` is an edge directed from `u` to `v`.
///
/// Two paths on edge u→v are compared by walking their common subpath forward
/// from v. An already ordered edge on the way decides; otherwise the fork at
/// the end decides, the path turning left being smaller. If the paths end
/// together the walk is repeated backward from u. Coincident paths are
/// ordered by id.
pub fn order_simple_with(inst: &OrderInstance, edges: &[(usize, usize)]) -> BundleOrdering {
    let mut done: HashMap<(usize, usize), HashMap<usize, usize>> = HashMap::new();
    let mut result = BTreeMap::new();
    for &(u, v) in edges {
        let key = edge_key(u, v);
        let Some(paths) = inst.edge_paths().get(&key) else {
            continue;
        };
        let mut order = paths.clone();
        order.sort_by(|&a, &b| {
            if a == b {
                Ordering::Equal
            } else if left_first(inst, &done, a, b, u, v) {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        });
        if u > v {
            order.reverse();
        }
        done.insert(key, order.iter().enumerate().map(|(i, &p)| (p, i)).collect());
        result.insert(key, order);
    }
    BundleOrdering { edges: result }
}

fn processed_left(done: &HashMap<(usize, usize), HashMap<usize, usize>>, a: usize, b: usize, x: usize, y: usize) -> Option<bool> {
    let pos = done.get(&edge_key(x, y))?;
    Some((pos[&a] < pos[&b]) == (x < y))
}

/// Whether `a` goes left of `b` travelling u→v.
fn left_first(
    inst: &OrderInstance,
    done: &HashMap<(usize, usize), HashMap<usize, usize>>,
    a: usize,
    b: usize,
    u: usize,
    v: usize,
) -> bool {
    let (mut prev, mut cur) = (u, v);
    loop {
        match (inst.next_along(a, prev, cur), inst.next_along(b, prev, cur)) {
            (Some(na), Some(nb)) if na != nb => {
                return inst.rank(cur, prev, na) < inst.rank(cur, prev, nb);
            }
            (Some(n), Some(_)) => {
                if let Some(l) = processed_left(done, a, b, cur, n) {
                    return l;
                }
                prev = cur;
                cur = n;
            }
            _ => break,
        }
    }
    let (mut prev, mut cur) = (v, u);
    loop {
        match (inst.next_along(a, prev, cur), inst.next_along(b, prev, cur)) {
            (Some(na), Some(nb)) if na != nb => {
                return inst.rank(cur, prev, na) > inst.rank(cur, prev, nb);
            }
            (Some(n), Some(_)) => {
                if let Some(l) = processed_left(done, a, b, n, cur) {
                    return l;
                }
                prev = cur;
                cur = n;
            }
            _ => break,
        }
    }
    a < b
}

/// Nice ordering for an instance whose used edges form a forest.
///
/// Each tree is rooted at a terminal; edges are processed from the deepest
/// upward and directed towards the root, so every pair settles its order on
/// the edge at one end of its common subpath and keeps it along the rest.
pub fn order_nice_tree(inst: &OrderInstance) -> Result<BundleOrdering> {
    let n = inst.node_count();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in inst.edge_paths().keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut roots: Vec<usize> = (0..n).filter(|&v| inst.is_terminal(v)).collect();
    roots.extend(0..n);
    let mut visited_edges = 0;
    for r in roots {
        if depth[r] != usize::MAX || adj[r].is_empty() {
            continue;
        }
        depth[r] = 0;
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if w == parent[v] {
                    continue;
                }
                if depth[w] != usize::MAX {
                    return Err(Error::NotATree(format!("cycle through edge {v}-{w}")));
                }
                depth[w] = depth[v] + 1;
                parent[w] = v;
                visited_edges += 1;
                stack.push(w);
            }
        }
    }
    debug_assert_eq!(visited_edges, inst.edge_paths().len());
    let mut edges: Vec<(usize, usize)> = inst
        .edge_paths()
        .keys()
        .map(|&(a, b)| if parent[a] == b { (a, b) } else { (b, a) })
        .collect();
    edges.sort_by_key(|&(child, _)| (std::cmp::Reverse(depth[child]), child));
    Ok(order_simple_with(inst, &edges))
}
