use std::collections::BTreeMap;

use super::{edge_key, BundleOrdering, OrderInstance};
use crate::error::{Error, Result};

/// Largest number of per-edge permutation combinations searched.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// A crossing test between one or two edge orders of a path pair.
#[derive(Clone, Copy, Debug)]
enum Event {
    /// Relative order on an edge must equal the fork demand.
    Fork { slot: Slot, want_left: bool },
    /// Relative order must not change between two consecutive edges.
    Keep { first: Slot, second: Slot },
}

/// Position of a pair on one edge: is `a` left of `b` travelling along the subpath?
#[derive(Clone, Copy, Debug)]
struct Slot {
    edge: usize,
    a: usize,
    b: usize,
    /// Subpath direction agrees with the canonical edge direction.
    forward: bool,
}

/// Exact minimum crossing count over all per-edge permutations, with a witness.
///
/// Depth-first search over the edges carrying two or more paths; each crossing
/// is charged once all edges it depends on are fixed, and branches that cannot
/// beat the best count so far are cut.
pub fn brute_force_min(inst: &OrderInstance) -> Result<(usize, BundleOrdering)> {
    let keys: Vec<(usize, usize)> = inst.edge_paths().keys().copied().collect();
    let multi: Vec<usize> = (0..keys.len()).filter(|&i| inst.edge_paths()[&keys[i]].len() > 1).collect();
    let mut combos = 1.0f64;
    for &i in &multi {
        let k = inst.edge_paths()[&keys[i]].len();
        combos *= (1..=k).map(|x| x as f64).product::<f64>();
    }
    if combos > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge(combos));
    }
    let key_index: BTreeMap<(usize, usize), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let depth_of: BTreeMap<usize, usize> = multi.iter().enumerate().map(|(d, &e)| (e, d)).collect();
    let slot = |a: usize, b: usize, x: usize, y: usize| Slot {
        edge: key_index[&edge_key(x, y)],
        a,
        b,
        forward: x < y,
    };

    // Events grouped by the deepest search level they depend on.
    let mut events: Vec<Vec<Event>> = vec![Vec::new(); multi.len()];
    for a in 0..inst.paths.len() {
        for b in a + 1..inst.paths.len() {
            for s in inst.common_subpaths(a, b) {
                let slots: Vec<Slot> = s.nodes.windows(2).map(|w| slot(a, b, w[0], w[1])).collect();
                if let Some(r) = inst.start_rule(&s) {
                    events[depth_of[&slots[0].edge]].push(Event::Fork {
                        slot: slots[0],
                        want_left: r,
                    });
                }
                if let Some(r) = inst.end_rule(&s) {
                    let last = *slots.last().unwrap();
                    events[depth_of[&last.edge]].push(Event::Fork {
                        slot: last,
                        want_left: r,
                    });
                }
                for w in slots.windows(2) {
                    let d = depth_of[&w[0].edge].max(depth_of[&w[1].edge]);
                    events[d].push(Event::Keep {
                        first: w[0],
                        second: w[1],
                    });
                }
            }
        }
    }

    let n_paths = inst.paths.len();
    // pos[edge][path] in the current permutation.
    let mut pos: Vec<Vec<usize>> = vec![vec![usize::MAX; n_paths]; keys.len()];
    let mut perms: Vec<Vec<usize>> = keys.iter().map(|k| inst.edge_paths()[k].clone()).collect();
    for (e, perm) in perms.iter().enumerate() {
        for (i, &p) in perm.iter().enumerate() {
            pos[e][p] = i;
        }
    }
    let mut search = Search {
        multi: &multi,
        events: &events,
        pos,
        perms: perms.clone(),
        best: usize::MAX,
        best_perms: perms.clone(),
    };
    search.run(0, 0);
    perms = search.best_perms;
    let ordering = BundleOrdering {
        edges: keys.into_iter().zip(perms).collect(),
    };
    Ok((search.best, ordering))
}

struct Search<'a> {
    multi: &'a [usize],
    events: &'a [Vec<Event>],
    pos: Vec<Vec<usize>>,
    perms: Vec<Vec<usize>>,
    best: usize,
    best_perms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn left(&self, s: Slot) -> bool {
        (self.pos[s.edge][s.a] < self.pos[s.edge][s.b]) == s.forward
    }

    fn run(&mut self, depth: usize, count: usize) {
        if count >= self.best {
            return;
        }
        if depth == self.multi.len() {
            self.best = count;
            self.best_perms = self.perms.clone();
            return;
        }
        let e = self.multi[depth];
        let mut perm = self.perms[e].clone();
        perm.sort_unstable();
        loop {
            for (i, &p) in perm.iter().enumerate() {
                self.pos[e][p] = i;
            }
            self.perms[e].clone_from(&perm);
            let added = self.events[depth]
                .iter()
                .filter(|ev| match **ev {
                    Event::Fork { slot, want_left } => self.left(slot) != want_left,
                    Event::Keep { first, second } => self.left(first) != self.left(second),
                })
                .count();
            self.run(depth + 1, count + added);
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
