#![allow(dead_code)]

pub mod drawing;
pub mod nudging;
pub mod routing;

use std::collections::BinaryHeap;
use std::cmp::Reverse;

use ordered_bundles::ordering::{brute_force_min, BundleOrdering, OrderInstance, BRUTE_FORCE_LIMIT};
use ordered_bundles::Point;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random walks over a small core; each walk end gets a terminal leaf, so
/// paths overlap heavily and fork at both ends.
pub fn random_walk_instance(rng: &mut ChaCha8Rng, max_nodes: usize, max_paths: usize) -> Option<OrderInstance> {
    let core = rng.gen_range(4..=(max_nodes - 4).min(if max_nodes > 12 { 10 } else { 7 }));
    let max_terms = max_nodes - core;
    let want = rng.gen_range(2..=max_paths);
    let mut edges = Vec::new();
    let mut core_adj = vec![Vec::new(); core];
    for v in 1..core {
        let u = rng.gen_range(0..v);
        core_adj[v].push(u);
        core_adj[u].push(v);
    }
    for _ in 0..core {
        let (a, b) = (rng.gen_range(0..core), rng.gen_range(0..core));
        if a != b && !core_adj[a].contains(&b) {
            core_adj[a].push(b);
            core_adj[b].push(a);
        }
    }
    // Terminal leaves: (core node, terminal id).
    let mut leaves: Vec<(usize, usize)> = Vec::new();
    let mut paths = Vec::new();
    for _ in 0..want {
        let len = rng.gen_range(1..=5);
        let mut walk = vec![rng.gen_range(0..core)];
        for _ in 0..len {
            let v = *walk.last().unwrap();
            let next: Vec<usize> = core_adj[v].iter().copied().filter(|u| !walk.contains(u)).collect();
            if next.is_empty() {
                break;
            }
            walk.push(next[rng.gen_range(0..next.len())]);
        }
        let mut ends = [0; 2];
        for (k, &c) in [walk[0], *walk.last().unwrap()].iter().enumerate() {
            let existing: Vec<usize> = leaves.iter().filter(|l| l.0 == c).map(|l| l.1).collect();
            ends[k] = if !existing.is_empty() && (rng.gen_bool(0.5) || leaves.len() >= max_terms) {
                existing[rng.gen_range(0..existing.len())]
            } else if leaves.len() < max_terms {
                let id = core + leaves.len();
                leaves.push((c, id));
                id
            } else {
                return None;
            };
        }
        if ends[0] == ends[1] {
            return None;
        }
        let mut p = vec![ends[0]];
        p.extend(&walk);
        p.push(ends[1]);
        paths.push(p);
    }
    let n = core + leaves.len();
    for p in &paths {
        for w in p.windows(2) {
            edges.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    for (v, adj) in core_adj.iter().enumerate() {
        for &u in adj {
            edges.push((v.min(u), v.max(u)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut rotation = vec![Vec::new(); n];
    for &(a, b) in &edges {
        rotation[a].push(b);
        rotation[b].push(a);
    }
    for r in &mut rotation {
        r.shuffle(rng);
    }
    OrderInstance::new(rotation, paths).ok()
}

/// Random embedded instance with at most `max_nodes` nodes and `max_paths`
/// paths obeying the terminal property; `None` if the draw is degenerate.
pub fn random_instance(rng: &mut ChaCha8Rng, max_nodes: usize, max_paths: usize) -> Option<OrderInstance> {
    let n = rng.gen_range(8..=max_nodes);
    let pos: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
    // Terminals hang off a core of intermediate nodes, as obstacle centers do.
    let t = rng.gen_range(4..=6.min(n - 4));
    let is_term = |v: usize| v < t;
    let terminals: Vec<usize> = (0..t).collect();
    let nearest = |v: usize, pool: &mut Vec<usize>| {
        pool.sort_by(|&a, &b| pos[v].dist(pos[a]).total_cmp(&pos[v].dist(pos[b])));
    };
    let mut edges = Vec::new();
    for v in 0..n {
        let mut core: Vec<usize> = (t..n).filter(|&u| u != v).collect();
        nearest(v, &mut core);
        let k = if is_term(v) { rng.gen_range(1..=2) } else { rng.gen_range(2..=3) };
        for &u in core.iter().take(k) {
            edges.push((v.min(u), v.max(u)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let edge_id = |a: usize, b: usize| edges.binary_search(&(a.min(b), a.max(b))).unwrap();
    let mut base: Vec<f64> = (0..edges.len()).map(|_| rng.gen_range(1.0..2.0)).collect();
    // A cheap trunk through the core makes paths share long stretches.
    let mut v = rng.gen_range(t..n);
    for _ in 0..4 {
        let next: Vec<usize> = adj[v].iter().copied().filter(|&u| !is_term(u)).collect();
        if next.is_empty() {
            break;
        }
        let u = next[rng.gen_range(0..next.len())];
        base[edge_id(v, u)] = 0.2;
        v = u;
    }
    let mut paths = Vec::new();
    let want = rng.gen_range(2..=max_paths);
    for _ in 0..want * 3 {
        if paths.len() == want {
            break;
        }
        let s = terminals[rng.gen_range(0..t)];
        let g = terminals[rng.gen_range(0..t)];
        if s == g {
            continue;
        }
        let noise: Vec<f64> = (0..edges.len()).map(|_| rng.gen_range(0.0..0.3)).collect();
        // Dijkstra through intermediates only.
        let mut dist = vec![f64::INFINITY; n];
        let mut par = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push((Reverse(ordered(0.0)), s));
        while let Some((Reverse(d), v)) = heap.pop() {
            let d = d as f64 / 1e9;
            if d > dist[v] || (v != s && is_term(v)) {
                continue;
            }
            for &u in &adj[v] {
                let e = edge_id(v, u);
                let nd = d + base[e] + noise[e];
                if nd < dist[u] {
                    dist[u] = nd;
                    par[u] = v;
                    heap.push((Reverse(ordered(nd)), u));
                }
            }
        }
        if !dist[g].is_finite() {
            continue;
        }
        let mut p = vec![g];
        while *p.last().unwrap() != s {
            p.push(par[*p.last().unwrap()]);
        }
        p.reverse();
        paths.push(p);
    }
    if paths.len() < 2 {
        return None;
    }
    // Arbitrary rotation systems give far more forced crossings than
    // geometric ones.
    let mut rotation = ordered_bundles::ordering::clockwise_rotation(&pos, &edges);
    if rng.gen_bool(0.75) {
        for r in &mut rotation {
            r.shuffle(rng);
        }
    }
    OrderInstance::new(rotation, paths).ok()
}

fn ordered(x: f64) -> u64 {
    (x * 1e9) as u64
}

/// Permutation count searched by the brute-force oracle.
pub fn brute_force_size(inst: &OrderInstance) -> f64 {
    inst.edge_paths()
        .values()
        .map(|p| (1..=p.len()).map(|x| x as f64).product::<f64>())
        .product()
}

/// Instances accepted by the brute-force oracle.
pub fn random_instances(rng: &mut ChaCha8Rng, count: usize, max_nodes: usize, max_paths: usize) -> Vec<OrderInstance> {
    let mut out = Vec::new();
    while out.len() < count {
        let inst = if rng.gen_bool(0.5) {
            random_walk_instance(rng, max_nodes, max_paths)
        } else {
            random_instance(rng, max_nodes, max_paths)
        };
        if let Some(inst) = inst {
            if brute_force_size(&inst) <= BRUTE_FORCE_LIMIT {
                out.push(inst);
            }
        }
    }
    out
}

/// Minimum crossings of one pair on one common subpath, by trying every
/// left/right assignment on its edges.
pub fn pair_subpath_min(inst: &OrderInstance, s: &ordered_bundles::ordering::CommonSubpath) -> usize {
    let k = s.nodes.len() - 1;
    let start = inst.start_rule(s);
    let end = inst.end_rule(s);
    (0u32..1 << k)
        .map(|mask| {
            let l = |i: usize| mask >> i & 1 == 1;
            let mut c = (1..k).filter(|&i| l(i) != l(i - 1)).count();
            c += usize::from(start.is_some_and(|r| r != l(0)));
            c += usize::from(end.is_some_and(|r| r != l(k - 1)));
            c
        })
        .min()
        .unwrap()
}

/// Every crossing is unavoidable and no pair crosses twice on one subpath.
pub fn check_consistent(inst: &OrderInstance, ord: &BundleOrdering) -> Result<(), String> {
    use ordered_bundles::ordering::subpath_crossings;
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                let got = subpath_crossings(inst, ord, a, b, &s);
                let min = pair_subpath_min(inst, &s);
                if got != min {
                    return Err(format!("paths {a},{b} cross {got} times on {:?}, minimum {min}", s.nodes));
                }
            }
        }
    }
    Ok(())
}

pub fn brute_min(inst: &OrderInstance) -> usize {
    brute_force_min(inst).expect("small instance").0
}

/// Whether some consistent ordering keeps every pair in one relative order
/// along each common subpath. Backtracking over the free side choices with
/// a cyclic-triangle check on every edge.
pub fn nice_consistent_exists(inst: &OrderInstance) -> bool {
    use std::collections::BTreeMap;
    // Per subpath: pair, edges with direction flags, allowed labels.
    struct Var {
        a: usize,
        b: usize,
        slots: Vec<((usize, usize), bool)>,
        options: Vec<bool>,
    }
    let mut vars = Vec::new();
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                let options = match (inst.start_rule(&s), inst.end_rule(&s)) {
                    (Some(x), Some(y)) if x == y => vec![x],
                    (Some(x), Some(y)) => vec![x, y],
                    (Some(x), None) | (None, Some(x)) => vec![x],
                    (None, None) => vec![true, false],
                };
                let slots = s
                    .nodes
                    .windows(2)
                    .map(|w| ((w[0].min(w[1]), w[0].max(w[1])), w[0] < w[1]))
                    .collect();
                vars.push(Var { a, b, slots, options });
            }
        }
    }
    vars.sort_by_key(|v| v.options.len());
    // rel[edge][(a, b)] = a left of b in canonical direction.
    let mut rel: BTreeMap<(usize, usize), BTreeMap<(usize, usize), bool>> = BTreeMap::new();
    fn cyclic(rel: &BTreeMap<(usize, usize), bool>, paths: &[usize], a: usize, b: usize) -> bool {
        let get = |x: usize, y: usize| -> Option<bool> {
            if x < y {
                rel.get(&(x, y)).copied()
            } else {
                rel.get(&(y, x)).map(|v| !v)
            }
        };
        for &c in paths {
            if c == a || c == b {
                continue;
            }
            if let (Some(ab), Some(bc), Some(ca)) = (get(a, b), get(b, c), get(c, a)) {
                if ab == bc && bc == ca {
                    return true;
                }
            }
        }
        false
    }
    fn go(
        i: usize,
        vars: &[Var],
        rel: &mut BTreeMap<(usize, usize), BTreeMap<(usize, usize), bool>>,
        inst: &OrderInstance,
    ) -> bool {
        if i == vars.len() {
            return true;
        }
        let v = &vars[i];
        for &label in &v.options {
            let mut ok = true;
            for &(e, fwd) in &v.slots {
                rel.entry(e).or_default().insert((v.a, v.b), label == fwd);
            }
            for &(e, _) in &v.slots {
                if cyclic(&rel[&e], &inst.edge_paths()[&e], v.a, v.b) {
                    ok = false;
                    break;
                }
            }
            if ok && go(i + 1, vars, rel, inst) {
                return true;
            }
            for &(e, _) in &v.slots {
                rel.get_mut(&e).unwrap().remove(&(v.a, v.b));
            }
        }
        false
    }
    go(0, &vars, &mut rel, inst)
}

/// Random tree over a small core with terminal leaves; every path runs
/// between two leaves along the unique tree path.
pub fn random_tree_instance(rng: &mut ChaCha8Rng, max_nodes: usize, max_paths: usize) -> Option<OrderInstance> {
    let core = rng.gen_range(2..=(max_nodes / 2).max(2));
    let leaves = rng.gen_range(3..=(max_nodes - core).max(3));
    let n = core + leaves;
    let mut parent = vec![usize::MAX; n];
    for v in 1..core {
        parent[v] = rng.gen_range(0..v);
    }
    for v in core..n {
        parent[v] = rng.gen_range(0..core);
    }
    let to_root = |mut v: usize| {
        let mut p = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            p.push(v);
        }
        p
    };
    let mut paths = Vec::new();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(2..=max_paths) {
        let (a, b) = (rng.gen_range(core..n), rng.gen_range(core..n));
        if a == b {
            continue;
        }
        let (pa, pb) = (to_root(a), to_root(b));
        let lca = *pa.iter().find(|v| pb.contains(v)).unwrap();
        let mut p: Vec<usize> = pa.iter().copied().take_while(|&v| v != lca).collect();
        p.push(lca);
        let tail: Vec<usize> = pb.iter().copied().take_while(|&v| v != lca).collect();
        p.extend(tail.into_iter().rev());
        for w in p.windows(2) {
            edges.push((w[0].min(w[1]), w[0].max(w[1])));
        }
        paths.push(p);
    }
    if paths.len() < 2 {
        return None;
    }
    edges.sort_unstable();
    edges.dedup();
    let mut rotation = vec![Vec::new(); n];
    for &(a, b) in &edges {
        rotation[a].push(b);
        rotation[b].push(a);
    }
    for r in &mut rotation {
        r.shuffle(rng);
    }
    let inst = OrderInstance::new(rotation, paths).ok()?;
    (brute_force_size(&inst) <= BRUTE_FORCE_LIMIT).then_some(inst)
}

/// Every combination of the free side choices, checked edge by edge by
/// sorting: a set of pairwise relations is a total order exactly when the
/// counts of paths to the right are all distinct.
pub fn nice_exists_exhaustive(inst: &OrderInstance) -> Option<bool> {
    use std::collections::BTreeMap;
    let mut fixed = Vec::new();
    let mut free = Vec::new();
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                let edges: Vec<((usize, usize), bool)> =
                    s.nodes.windows(2).map(|w| ((w[0].min(w[1]), w[0].max(w[1])), w[0] < w[1])).collect();
                match (inst.start_rule(&s), inst.end_rule(&s)) {
                    (Some(x), Some(y)) if x == y => fixed.push((a, b, edges, x)),
                    (Some(x), None) | (None, Some(x)) => fixed.push((a, b, edges, x)),
                    (Some(x), Some(_)) => free.push((a, b, edges, x)),
                    (None, None) => free.push((a, b, edges, true)),
                }
            }
        }
    }
    if free.len() > 24 {
        return None;
    }
    for mask in 0u32..1 << free.len() {
        // right[edge][path] = paths to its right in canonical direction.
        let mut right: BTreeMap<(usize, usize), BTreeMap<usize, usize>> = BTreeMap::new();
        let mut put = |a: usize, b: usize, edges: &[((usize, usize), bool)], label: bool| {
            for &(e, fwd) in edges {
                let left = if label == fwd { a } else { b };
                *right.entry(e).or_default().entry(left).or_insert(0) += 1;
            }
        };
        for (a, b, edges, label) in &fixed {
            put(*a, *b, edges, *label);
        }
        for (i, (a, b, edges, x)) in free.iter().enumerate() {
            let label = if mask >> i & 1 == 1 { *x } else { !*x };
            put(*a, *b, edges, label);
        }
        let total = inst.edge_paths().iter().all(|(e, paths)| {
            let mut counts: Vec<usize> = paths.iter().map(|p| right.get(e).and_then(|m| m.get(p)).copied().unwrap_or(0)).collect();
            counts.sort_unstable();
            counts.iter().enumerate().all(|(i, &c)| c == i)
        });
        if total {
            return Some(true);
        }
    }
    Some(false)
}
