use std::collections::BTreeSet;

use serde::Serialize;

use super::BundleGraph;
use crate::geometry::Point;

/// Relative tolerance for "strictly cheaper".
const STRICT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub phase: &'static str,
    pub node: usize,
    pub from: Point,
    pub to: Point,
    /// Ink and length part of the routing cost after the change.
    pub cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NudgeReport {
    pub escapes: usize,
    pub descent_moves: usize,
    pub shortcuts: usize,
    pub glues: usize,
    /// Accepted states that failed the full validity audit.
    pub audit_failures: usize,
    pub audits: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub trace: Vec<TraceEntry>,
}

impl BundleGraph {
    /// Full check: node validity, hubs pairwise disjoint, hubs off obstacles.
    pub fn audit(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .validity_report()
            .violations
            .into_iter()
            .map(|(v, m)| format!("node {v}: {m}"))
            .collect();
        let hubs = self.hubs();
        for (i, a) in hubs.iter().enumerate() {
            let pa = self.position(a.node);
            let ra = a.radius();
            if self.obstacle_distance(pa, ra) < ra {
                out.push(format!("hub {} meets an obstacle", a.node));
            }
            for b in &hubs[i + 1..] {
                let d = pa.dist(self.position(b.node));
                if ra + b.radius() > d * (1.0 + 1e-9) {
                    out.push(format!("hubs {} and {} overlap", a.node, b.node));
                }
            }
        }
        out
    }

    fn after_change(&self, report: &mut NudgeReport, phase: &'static str, node: usize, from: Point, to: Point) {
        if self.params.audit {
            report.audits += 1;
            if !self.audit().is_empty() {
                report.audit_failures += 1;
            }
        }
        if self.params.trace {
            report.trace.push(TraceEntry {
                phase,
                node,
                from,
                to,
                cost: self.routing_cost(),
            });
        }
    }

    /// Moves `v` away from nearby obstacles if that brings its allowed radius
    /// strictly closer to the desired one. Tries radius r = desired, halving r
    /// after each failed attempt.
    pub fn escape_node(&mut self, v: usize) -> Option<Point> {
        let p = self.position(v);
        let nbrs = self.neighbors(v);
        let desired = self.desired_radius(v);
        let gap = desired - self.allowed_radius(v).min(desired);
        if gap <= 0.0 {
            return None;
        }
        let mut r = desired;
        for _ in 0..self.params.max_escape_attempts {
            if let Some(dir) = self.escape_direction(v, r) {
                let q = p + dir * (self.params.theta * r);
                if self.placement_valid(v, q, &nbrs, &[]) {
                    let dq = self.desired_radius_at(v, q, &nbrs);
                    let aq = self.allowed_radius_at(v, q, dq, &[]);
                    if dq - aq.min(dq) < gap {
                        self.move_node(v, q);
                        return Some(q);
                    }
                }
            }
            r /= 2.0;
        }
        None
    }

    pub fn escape_obstacles(&mut self, report: &mut NudgeReport) {
        for v in self.alive_intermediates() {
            let from = self.position(v);
            if let Some(to) = self.escape_node(v) {
                report.escapes += 1;
                self.after_change(report, "escape", v, from, to);
            }
        }
    }

    /// Fixed-size steps along D while the cost strictly drops and the graph
    /// stays valid. Returns the number of steps taken.
    pub fn descend_node(&mut self, v: usize, report: &mut NudgeReport) -> usize {
        let nbrs = self.neighbors(v);
        let mut steps = 0;
        while steps < self.params.max_descent_steps {
            let Some(dir) = self.descent_direction(v).normalized() else {
                break;
            };
            let p = self.position(v);
            let q = p + dir * (self.params.step_factor * self.desired_radius(v));
            let before = self.contribution(v, p);
            let delta = self.contribution(v, q) - before;
            if !(delta < -1e-12 * before) || !self.placement_valid(v, q, &nbrs, &[]) {
                break;
            }
            self.move_node(v, q);
            steps += 1;
            self.after_change(report, "descent", v, p, q);
        }
        steps
    }

    pub fn gradient_descent(&mut self, report: &mut NudgeReport) {
        for v in self.alive_intermediates() {
            report.descent_moves += self.descend_node(v, report);
        }
    }

    /// Replaces v–u–w by v–w for a degree-2 intermediate `u` when that is
    /// strictly cheaper and the new edge is valid.
    pub fn shortcut_node(&mut self, u: usize) -> bool {
        if !self.nodes[u].alive || !self.is_intermediate(u) {
            return false;
        }
        let nbrs = self.neighbors(u);
        let [v, w] = nbrs[..] else {
            return false;
        };
        let (pu, pv, pw) = (self.position(u), self.position(v), self.position(w));
        let (a, b, c) = (pv.dist(pu), pu.dist(pw), pv.dist(pw));
        let ink_after = if self.edge_paths(v, w).is_empty() { c } else { 0.0 };
        let mut d_len = 0.0;
        let mut len_before = 0.0;
        for &pi in &self.through[u] {
            let st = self.paths[pi].st;
            d_len += (c - a - b) / st;
            len_before += (a + b) / st;
        }
        let delta = self.cost.k_ink * (ink_after - a - b) + self.cost.k_len * d_len;
        let scale = self.cost.k_ink * (a + b) + self.cost.k_len * len_before;
        if !(delta < -STRICT_TOL * scale) {
            return false;
        }
        let (nv, nw) = (&self.nodes[v], &self.nodes[w]);
        if !self.segment_valid(nv.position, nv.center_of, nw.position, nw.center_of) {
            return false;
        }
        for pi in self.through[u].clone() {
            self.paths[pi].nodes.retain(|&x| x != u);
        }
        self.kill_node(u);
        self.paths_changed();
        true
    }

    /// Merges adjacent intermediates `u` and `v` into `u`, placed at p_u, p_v
    /// or their midpoint, whichever is cheapest among the valid strict
    /// improvements.
    pub fn glue_nodes(&mut self, u: usize, v: usize) -> Option<Point> {
        if u == v
            || !self.nodes[u].alive
            || !self.nodes[v].alive
            || !self.is_intermediate(u)
            || !self.is_intermediate(v)
            || self.edge_paths(u, v).is_empty()
        {
            return None;
        }
        let affected: Vec<usize> = self.through[u]
            .iter()
            .chain(&self.through[v])
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut rewritten = Vec::with_capacity(affected.len());
        for &pi in &affected {
            let nodes = &self.paths[pi].nodes;
            let iu = nodes.iter().position(|&x| x == u);
            let iv = nodes.iter().position(|&x| x == v);
            if let (Some(i), Some(j)) = (iu, iv) {
                if i.abs_diff(j) != 1 {
                    return None;
                }
            }
            let mut out: Vec<usize> = Vec::with_capacity(nodes.len());
            for &x in nodes {
                let x = if x == v { u } else { x };
                if out.last() != Some(&x) {
                    out.push(x);
                }
            }
            rewritten.push(out);
        }
        let (pu, pv) = (self.position(u), self.position(v));
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let ink_before: f64 = nu.iter().map(|&x| pu.dist(self.position(x))).sum::<f64>()
            + nv.iter().map(|&x| pv.dist(self.position(x))).sum::<f64>()
            - pu.dist(pv);
        let merged: Vec<usize> = nu
            .iter()
            .chain(&nv)
            .copied()
            .filter(|&x| x != u && x != v)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let len_before: f64 = affected
            .iter()
            .map(|&pi| self.path_length(&self.paths[pi].nodes) / self.paths[pi].st)
            .sum();
        let before = self.cost.k_ink * ink_before + self.cost.k_len * len_before;

        let mut best: Option<(f64, Point)> = None;
        for q in [pu, pv, pu.lerp(pv, 0.5)] {
            let pos = |x: usize| if x == u { q } else { self.position(x) };
            let ink: f64 = merged.iter().map(|&x| q.dist(self.position(x))).sum();
            let len: f64 = affected
                .iter()
                .zip(&rewritten)
                .map(|(&pi, nodes)| {
                    nodes.windows(2).map(|w| pos(w[0]).dist(pos(w[1]))).sum::<f64>() / self.paths[pi].st
                })
                .sum();
            let after = self.cost.k_ink * ink + self.cost.k_len * len;
            if after - before < -STRICT_TOL * before
                && best.is_none_or(|(c, _)| after < c)
                && self.placement_valid(u, q, &merged, &[v])
            {
                best = Some((after, q));
            }
        }
        let (_, q) = best?;
        for (&pi, nodes) in affected.iter().zip(rewritten) {
            self.paths[pi].nodes = nodes;
        }
        self.kill_node(v);
        self.through[u] = affected;
        self.paths_changed();
        self.move_node(u, q);
        Some(q)
    }

    /// Shortcuts and glues until neither applies.
    pub fn simplify_graph(&mut self, report: &mut NudgeReport) {
        loop {
            let mut changed = false;
            for u in self.alive_intermediates() {
                let from = self.position(u);
                if self.shortcut_node(u) {
                    report.shortcuts += 1;
                    changed = true;
                    self.after_change(report, "shortcut", u, from, from);
                }
            }
            for u in self.alive_intermediates() {
                for v in self.neighbors(u) {
                    if v <= u || !self.nodes[u].alive || !self.is_intermediate(v) {
                        continue;
                    }
                    let from = self.position(u);
                    if let Some(to) = self.glue_nodes(u, v) {
                        report.glues += 1;
                        changed = true;
                        self.after_change(report, "glue", u, from, to);
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Escape and descent passes followed by simplification.
    pub fn optimize(&mut self) -> NudgeReport {
        let mut report = NudgeReport {
            initial_cost: self.routing_cost(),
            ..NudgeReport::default()
        };
        for _ in 0..self.params.passes {
            self.escape_obstacles(&mut report);
            self.gradient_descent(&mut report);
        }
        self.simplify_graph(&mut report);
        report.final_cost = self.routing_cost();
        report
    }
}
