//! Capacity segments from a constrained Delaunay triangulation, and the
//! ledger of routing widths and overflow penalties.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rstar::primitives::{GeomWithData, Line};
use rstar::{RTree, AABB};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{distance_point_to_polygon, segments_cross_properly, ConvexPolygon, Point, Segment};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdtEdge {
    pub a: usize,
    pub b: usize,
    pub constrained: bool,
}

/// Triangulation with vertex ownership.
#[derive(Clone, Debug, Default)]
pub struct Cdt {
    pub vertices: Vec<Point>,
    /// Ring (obstacle) each vertex came from.
    pub owner: Vec<usize>,
    pub edges: Vec<CdtEdge>,
    pub triangles: Vec<[usize; 3]>,
}

/// Constrained Delaunay triangulation of closed rings; consecutive ring
/// points become constrained edges. Duplicate points keep their first owner.
pub fn build_cdt(rings: &[Vec<Point>]) -> Result<Cdt> {
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let mut owner = Vec::new();
    let mut handles = Vec::with_capacity(rings.len());
    for (ri, ring) in rings.iter().enumerate() {
        let mut hs = Vec::with_capacity(ring.len());
        for &p in ring {
            if !p.is_finite() {
                return Err(Error::InvalidGeometry(format!("non-finite vertex {p:?}")));
            }
            let h = cdt
                .insert(Point2::new(p.x, p.y))
                .map_err(|e| Error::InvalidGeometry(format!("triangulation insert: {e:?}")))?;
            if h.index() < owner.len() {
                log::warn!("duplicate triangulation vertex {p:?} (ring {ri}) merged");
            } else {
                owner.push(ri);
            }
            hs.push(h);
        }
        handles.push(hs);
    }
    for hs in &handles {
        let n = hs.len();
        if n < 2 {
            continue;
        }
        for i in 0..n {
            let (a, b) = (hs[i], hs[(i + 1) % n]);
            if a != b && !(n == 2 && i == 1) {
                if !cdt.can_add_constraint(a, b) {
                    return Err(Error::InvalidGeometry(
                        "obstacle sides intersect each other".to_string(),
                    ));
                }
                cdt.add_constraint(a, b);
            }
        }
    }
    let vertices = cdt
        .vertices()
        .map(|v| Point::new(v.position().x, v.position().y))
        .collect();
    let edges = cdt
        .undirected_edges()
        .map(|e| {
            let [a, b] = e.vertices();
            let (a, b) = (a.fix().index(), b.fix().index());
            CdtEdge {
                a: a.min(b),
                b: a.max(b),
                constrained: e.is_constraint_edge(),
            }
        })
        .collect();
    let triangles = cdt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    Ok(Cdt {
        vertices,
        owner,
        edges,
        triangles,
    })
}

/// Triangulation edge between two different obstacles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacitySegment {
    pub a: Point,
    pub b: Point,
    pub obstacles: (usize, usize),
    pub capacity: f64,
}

impl CapacitySegment {
    pub fn segment(&self) -> Segment {
        Segment::new(self.a, self.b)
    }
}

/// Capacity segments of a triangulation; `polygons[i]` is the region of ring `i`.
pub fn extract_capacity_segments(cdt: &Cdt, polygons: &[ConvexPolygon]) -> Vec<CapacitySegment> {
    cdt.edges
        .iter()
        .filter(|e| cdt.owner[e.a] != cdt.owner[e.b])
        .map(|e| {
            let (a, b) = (cdt.vertices[e.a], cdt.vertices[e.b]);
            let (oa, ob) = (cdt.owner[e.a], cdt.owner[e.b]);
            let capacity = 0.5
                * (distance_point_to_polygon(a, &polygons[ob])
                    + distance_point_to_polygon(b, &polygons[oa]));
            CapacitySegment {
                a,
                b,
                obstacles: (oa, ob),
                capacity,
            }
        })
        .collect()
}

/// Routing widths and overflow penalties per capacity segment.
///
/// Widths are always recomputed from the stored per-path widths, so removing a
/// path restores the previous state bit for bit.
#[derive(Clone, Debug)]
pub struct CapacityLedger {
    segments: Vec<CapacitySegment>,
    separation: f64,
    assigned: Vec<BTreeMap<usize, f64>>,
    widths: Vec<f64>,
    penalties: Vec<f64>,
    total: f64,
    path_segments: HashMap<usize, Vec<usize>>,
    tree: RTree<GeomWithData<Line<[f64; 2]>, usize>>,
}

fn routing_width(paths: &BTreeMap<usize, f64>, separation: f64) -> f64 {
    if paths.is_empty() {
        return 0.0;
    }
    paths.values().sum::<f64>() + (paths.len() - 1) as f64 * separation
}

fn penalty(width: f64, capacity: f64) -> f64 {
    (width - capacity).max(0.0)
}

impl CapacityLedger {
    pub fn new(segments: Vec<CapacitySegment>, separation: f64) -> Self {
        let n = segments.len();
        let tree = RTree::bulk_load(
            segments
                .iter()
                .enumerate()
                .map(|(i, s)| GeomWithData::new(Line::new([s.a.x, s.a.y], [s.b.x, s.b.y]), i))
                .collect(),
        );
        CapacityLedger {
            segments,
            separation,
            assigned: vec![BTreeMap::new(); n],
            widths: vec![0.0; n],
            penalties: vec![0.0; n],
            total: 0.0,
            path_segments: HashMap::new(),
            tree,
        }
    }

    pub fn segments(&self) -> &[CapacitySegment] {
        &self.segments
    }

    pub fn width(&self, sigma: usize) -> f64 {
        self.widths[sigma]
    }

    pub fn penalty(&self, sigma: usize) -> f64 {
        self.penalties[sigma]
    }

    pub fn paths_on(&self, sigma: usize) -> impl Iterator<Item = usize> + '_ {
        self.assigned[sigma].keys().copied()
    }

    /// Incrementally maintained C.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// C summed from scratch over the stored widths.
    pub fn recompute_total(&self) -> f64 {
        self.segments
            .iter()
            .zip(&self.assigned)
            .map(|(s, a)| penalty(routing_width(a, self.separation), s.capacity))
            .sum()
    }

    pub fn is_assigned(&self, path: usize) -> bool {
        self.path_segments.contains_key(&path)
    }

    pub fn segments_of(&self, path: usize) -> Option<&[usize]> {
        self.path_segments.get(&path).map(|v| v.as_slice())
    }

    /// Segments properly crossed by the polyline, ascending and without repeats.
    pub fn crossed_segments(&self, polyline: &[Point]) -> Vec<usize> {
        let mut out = Vec::new();
        for w in polyline.windows(2) {
            let s = Segment::new(w[0], w[1]);
            let env = AABB::from_corners([s.a.x, s.a.y], [s.b.x, s.b.y]);
            for hit in self.tree.locate_in_envelope_intersecting(env) {
                if segments_cross_properly(&s, &self.segments[hit.data].segment()) {
                    out.push(hit.data);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Increase of p_σ if one more path of `width` were assigned to σ.
    pub fn delta_if_added(&self, sigma: usize, width: f64) -> f64 {
        let k = self.assigned[sigma].len();
        let extra = if k == 0 { width } else { width + self.separation };
        let cap = self.segments[sigma].capacity;
        penalty(self.widths[sigma] + extra, cap) - self.penalties[sigma]
    }

    fn refresh(&mut self, sigma: usize) {
        let w = routing_width(&self.assigned[sigma], self.separation);
        let p = penalty(w, self.segments[sigma].capacity);
        self.total += p - self.penalties[sigma];
        self.widths[sigma] = w;
        self.penalties[sigma] = p;
    }

    /// Assigns `path` to every capacity segment its polyline crosses; returns ΔC.
    pub fn assign_path(&mut self, path: usize, width: f64, polyline: &[Point]) -> Result<f64> {
        let segs = self.crossed_segments(polyline);
        self.assign_segments(path, width, segs)
    }

    /// Assigns `path` to an explicit set of segments; returns ΔC.
    pub fn assign_segments(&mut self, path: usize, width: f64, mut segs: Vec<usize>) -> Result<f64> {
        if self.path_segments.contains_key(&path) {
            return Err(Error::Ledger(format!("path {path} is already assigned")));
        }
        if !(width >= 0.0 && width.is_finite()) {
            return Err(Error::Ledger(format!("path {path} has invalid width {width}")));
        }
        segs.sort_unstable();
        segs.dedup();
        let before = self.total;
        for &s in &segs {
            self.assigned[s].insert(path, width);
            self.refresh(s);
        }
        self.path_segments.insert(path, segs);
        Ok(self.total - before)
    }

    /// Exactly undoes [`CapacityLedger::assign_path`]; returns ΔC (≤ 0).
    pub fn remove_path(&mut self, path: usize) -> Result<f64> {
        let Some(segs) = self.path_segments.remove(&path) else {
            return Err(Error::Ledger(format!("path {path} is not assigned")));
        };
        let before = self.total;
        for s in segs {
            self.assigned[s].remove(&path);
            self.refresh(s);
        }
        Ok(self.total - before)
    }

    /// Plain-text table of every segment with its capacity, width and penalty.
    pub fn dump_table(&self) -> String {
        let mut out = String::from("sigma\tobstacles\tax\tay\tbx\tby\tcapacity\twidth\tpenalty\tpaths\n");
        for (i, s) in self.segments.iter().enumerate() {
            let paths: Vec<String> = self.assigned[i].keys().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "{i}\t{}-{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
                s.obstacles.0,
                s.obstacles.1,
                s.a.x,
                s.a.y,
                s.b.x,
                s.b.y,
                s.capacity,
                self.widths[i],
                self.penalties[i],
                paths.join(",")
            );
        }
        let _ = writeln!(out, "total\t{:.9}", self.total);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(cx: f64, cy: f64) -> ConvexPolygon {
        ConvexPolygon::rectangle(Point::new(cx, cy), 1.0, 1.0).unwrap()
    }

    #[test]
    fn three_points_make_one_triangle() {
        let rings = vec![
            vec![Point::ORIGIN],
            vec![Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0)],
        ];
        let cdt = build_cdt(&rings).unwrap();
        assert_eq!(cdt.triangles.len(), 1);
        assert_eq!(cdt.edges.len(), 3);
    }

    #[test]
    fn duplicate_vertices_are_merged() {
        let rings = vec![
            vec![Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            vec![Point::new(1.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 1.0)],
        ];
        let cdt = build_cdt(&rings).unwrap();
        assert_eq!(cdt.vertices.len(), 5);
        assert_eq!(cdt.owner[1], 0);
    }

    #[test]
    fn squares_keep_their_sides() {
        let polys = [square(0.0, 0.0), square(3.0, 0.0)];
        let rings: Vec<Vec<Point>> = polys.iter().map(|p| p.vertices().to_vec()).collect();
        let cdt = build_cdt(&rings).unwrap();
        let has = |p: Point, q: Point| {
            cdt.edges.iter().any(|e| {
                let (a, b) = (cdt.vertices[e.a], cdt.vertices[e.b]);
                e.constrained && ((a == p && b == q) || (a == q && b == p))
            })
        };
        for poly in &polys {
            for s in poly.edges() {
                assert!(has(s.a, s.b));
            }
        }
        assert!(extract_capacity_segments(&build_cdt(&rings[..1]).unwrap(), &polys[..1]).is_empty());
    }

    #[test]
    fn facing_squares_capacity_equals_gap() {
        let g = 1.75;
        let polys = [square(0.0, 0.0), square(1.0 + g, 0.0)];
        let rings: Vec<Vec<Point>> = polys.iter().map(|p| p.vertices().to_vec()).collect();
        let cdt = build_cdt(&rings).unwrap();
        let segs = extract_capacity_segments(&cdt, &polys);
        let nearest = segs
            .iter()
            .min_by(|x, y| x.segment().length().total_cmp(&y.segment().length()))
            .unwrap();
        assert_eq!(nearest.capacity, g);
    }

    #[test]
    fn penalty_is_positive_part() {
        let seg = CapacitySegment {
            a: Point::ORIGIN,
            b: Point::new(0.0, 3.0),
            obstacles: (0, 1),
            capacity: 3.0,
        };
        let mut ledger = CapacityLedger::new(vec![seg], 0.0);
        assert_eq!(ledger.total(), 0.0);
        let cross = [Point::new(-1.0, 1.0), Point::new(1.0, 1.0)];
        ledger.assign_path(0, 5.0, &cross).unwrap();
        assert_eq!(ledger.penalty(0), 2.0);
        ledger.remove_path(0).unwrap();
        ledger.assign_path(1, 2.0, &cross).unwrap();
        assert_eq!(ledger.penalty(0), 0.0);
        assert!(ledger.assign_path(1, 2.0, &cross).is_err());
        assert!(ledger.remove_path(7).is_err());
    }

    #[test]
    fn endpoint_grazing_is_not_a_crossing() {
        let seg = CapacitySegment {
            a: Point::ORIGIN,
            b: Point::new(0.0, 3.0),
            obstacles: (0, 1),
            capacity: 1.0,
        };
        let ledger = CapacityLedger::new(vec![seg], 0.5);
        assert!(ledger
            .crossed_segments(&[Point::new(-1.0, 0.0), Point::ORIGIN, Point::new(1.0, -1.0)])
            .is_empty());
        assert_eq!(
            ledger.crossed_segments(&[Point::new(-1.0, 1.0), Point::new(1.0, 1.0), Point::new(-1.0, 2.0)]),
            vec![0]
        );
    }
}
