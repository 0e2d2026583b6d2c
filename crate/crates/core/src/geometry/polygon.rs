use std::f64::consts::{PI, TAU};

use super::{angle_between, segments_intersect, Aabb, Circle, Point, Segment, EPS};
use crate::error::{Error, Result};

/// Strictly convex polygon with counterclockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

/// Shapes tested against polygons by [`intersects`].
#[derive(Clone, Copy, Debug)]
pub enum Shape {
    Point(Point),
    Segment(Segment),
    Circle(Circle),
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex {p:?}")));
        }
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            if e1.norm() <= EPS {
                return Err(Error::InvalidGeometry(format!("repeated vertex {a:?}")));
            }
            if e1.cross(e2) <= EPS * e1.norm() * e2.norm() {
                return Err(Error::InvalidGeometry(format!(
                    "polygon is not strictly convex and counterclockwise at {b:?}"
                )));
            }
            turning += angle_between(e1, e2);
        }
        if (turning - TAU).abs() > 1e-6 {
            return Err(Error::InvalidGeometry(
                "polygon winds more than once".to_string(),
            ));
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Convex hull of a point cloud (monotone chain); collinear points are dropped.
    pub fn hull(points: &[Point]) -> Result<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup_by(|a, b| a.dist(*b) <= EPS);
        if pts.len() < 3 {
            return Err(Error::InvalidGeometry(
                "hull needs at least 3 distinct points".to_string(),
            ));
        }
        let keep = |h: &Vec<Point>, p: Point| {
            let n = h.len();
            let a = h[n - 2];
            let b = h[n - 1];
            let e1 = b - a;
            let e2 = p - b;
            e1.cross(e2) > EPS * e1.norm() * e2.norm()
        };
        let mut lower: Vec<Point> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && !keep(&lower, p) {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && !keep(&upper, p) {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon::new(lower)
    }

    /// Axis-aligned rectangle centered at `center`.
    pub fn rectangle(center: Point, width: f64, height: f64) -> Result<Self> {
        let (hw, hh) = (width / 2.0, height / 2.0);
        ConvexPolygon::new(vec![
            center + Point::new(-hw, -hh),
            center + Point::new(hw, -hh),
            center + Point::new(hw, hh),
            center + Point::new(-hw, hh),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            a += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point::new(cx / (3.0 * a), cy / (3.0 * a))
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
            / 2.0
    }

    /// Largest signed distance from `p` to the supporting lines of the sides;
    /// negative inside, positive outside.
    fn max_side_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|e| {
                let d = e.b - e.a;
                d.cross(p - e.a) / d.norm() * -1.0
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Closed containment with tolerance [`EPS`].
    pub fn contains(&self, p: Point) -> bool {
        self.max_side_distance(p) <= EPS
    }

    /// Whether `p` lies inside with at least `clearance` to every side.
    pub fn contains_with_clearance(&self, p: Point, clearance: f64) -> bool {
        self.max_side_distance(p) <= -clearance
    }

    pub fn distance_to_point(&self, p: Point) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        self.edges()
            .map(|e| e.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to_segment(&self, s: &Segment) -> f64 {
        if intersects(&Shape::Segment(*s), self) {
            return 0.0;
        }
        self.edges()
            .map(|e| e.distance_to_segment(s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Homothety about `center` with factor `s`.
    pub fn scaled_about(&self, center: Point, s: f64) -> Result<Self> {
        ConvexPolygon::new(
            self.vertices
                .iter()
                .map(|&v| center + (v - center) * s)
                .collect(),
        )
    }

    /// Moves every side outward by `margin` along its normal.
    pub fn offset(&self, margin: f64) -> Result<Self> {
        if margin == 0.0 {
            return Ok(self.clone());
        }
        let n = self.vertices.len();
        let normal = |i: usize| {
            let d = self.vertices[(i + 1) % n] - self.vertices[i];
            Point::new(d.y, -d.x) / d.norm()
        };
        let out = (0..n)
            .map(|i| {
                let prev = normal((i + n - 1) % n);
                let next = normal(i);
                self.vertices[i] + (prev + next) * (margin / (1.0 + prev.dot(next)))
            })
            .collect();
        ConvexPolygon::new(out)
    }

    /// Reduces the corner count to at most `max_corners` by collapsing sides.
    ///
    /// A side is collapsed by extending its two neighbouring sides until they
    /// meet, so the result always contains the input. The side whose two end
    /// corners turn the least is collapsed first.
    pub fn reduce_corners(&self, max_corners: usize) -> Result<Self> {
        if max_corners < 4 {
            return Err(Error::InvalidInput(format!(
                "corner limit must be at least 4, got {max_corners}"
            )));
        }
        let mut v = self.vertices.clone();
        while v.len() > max_corners {
            let n = v.len();
            let turn = |i: usize| {
                let a = v[(i + n - 1) % n];
                let b = v[i];
                let c = v[(i + 1) % n];
                angle_between(b - a, c - b)
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..n {
                let t = turn(i) + turn((i + 1) % n);
                if t < PI - 1e-9 && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, i));
                }
            }
            let Some((_, i)) = best else {
                return Err(Error::InvalidGeometry(
                    "cannot reduce polygon corners further".to_string(),
                ));
            };
            let p0 = v[(i + n - 1) % n];
            let p1 = v[i];
            let q1 = v[(i + 1) % n];
            let q0 = v[(i + 2) % n];
            let Some(x) = line_intersection(p0, p1 - p0, q0, q1 - q0) else {
                return Err(Error::InvalidGeometry("parallel sides".to_string()));
            };
            let j = (i + 1) % n;
            v[i] = x;
            v.remove(j);
        }
        ConvexPolygon::new(v)
    }

    /// Closed polygon–polygon overlap (separating axis test).
    pub fn intersects_polygon(&self, other: &ConvexPolygon) -> bool {
        !self.separated_from(other) && !other.separated_from(self)
    }

    fn separated_from(&self, other: &ConvexPolygon) -> bool {
        self.edges().any(|e| {
            let d = e.b - e.a;
            let n = Point::new(d.y, -d.x) / d.norm();
            let c = n.dot(e.a);
            other.vertices.iter().all(|&p| n.dot(p) - c > EPS)
        })
    }

    /// Whether the segment passes through the open interior.
    pub fn segment_crosses_interior(&self, s: &Segment) -> bool {
        let d = s.b - s.a;
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        for e in self.edges() {
            let ed = e.b - e.a;
            let n = Point::new(ed.y, -ed.x) / ed.norm();
            let c = n.dot(e.a);
            let tol = EPS * (1.0 + c.abs());
            let lhs = n.dot(s.a);
            let nd = n.dot(d);
            let rhs = c - tol - lhs;
            if nd.abs() < 1e-300 {
                if rhs < 0.0 {
                    return false;
                }
                continue;
            }
            let t = rhs / nd;
            if nd > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
            if t0 >= t1 {
                return false;
            }
        }
        (t1 - t0) * d.norm() > EPS
    }

    /// Parameter interval where the infinite line `origin + t·dir` lies inside.
    pub fn clip_line(&self, origin: Point, dir: Point) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for e in self.edges() {
            let ed = e.b - e.a;
            let n = Point::new(ed.y, -ed.x);
            let rhs = n.dot(e.a) - n.dot(origin);
            let nd = n.dot(dir);
            if nd.abs() < 1e-300 {
                if rhs < 0.0 {
                    return None;
                }
                continue;
            }
            let t = rhs / nd;
            if nd > 0.0 {
                t1 = t1.min(t);
            } else {
                t0 = t0.max(t);
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }

    /// Extent of the polygon along `dir` measured from `origin`: (min, max).
    pub fn support(&self, origin: Point, dir: Point) -> (f64, f64) {
        self.vertices
            .iter()
            .map(|&v| (v - origin).dot(dir))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                (lo.min(t), hi.max(t))
            })
    }
}

pub(crate) fn line_intersection(p: Point, r: Point, q: Point, s: Point) -> Option<Point> {
    let denom = r.cross(s);
    if denom.abs() <= 1e-300 {
        return None;
    }
    let t = (q - p).cross(s) / denom;
    Some(p + r * t)
}

/// Euclidean distance from `p` to the closed polygonal region.
pub fn distance_point_to_polygon(p: Point, poly: &ConvexPolygon) -> f64 {
    poly.distance_to_point(p)
}

/// Closed intersection test; boundary contact within [`EPS`] counts.
pub fn intersects(shape: &Shape, poly: &ConvexPolygon) -> bool {
    match shape {
        Shape::Point(p) => poly.contains(*p),
        Shape::Segment(s) => {
            poly.contains(s.a)
                || poly.contains(s.b)
                || poly.edges().any(|e| segments_intersect(s, &e))
        }
        Shape::Circle(c) => {
            poly.contains(c.center)
                || poly
                    .edges()
                    .any(|e| e.distance_to_point(c.center) <= c.radius + EPS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(Point::ORIGIN, 1.0, 1.0).unwrap()
    }

    /// Dense boundary sampling; independent of the closed-form edge distance.
    fn sampled_distance(p: Point, poly: &ConvexPolygon, samples: usize) -> f64 {
        if poly.contains(p) {
            return 0.0;
        }
        let per_edge = samples / poly.len();
        let mut best = f64::INFINITY;
        for e in poly.edges() {
            for k in 0..=per_edge {
                let q = e.point_at(k as f64 / per_edge as f64);
                best = best.min(p.dist(q));
            }
        }
        best
    }

    #[test]
    fn rejects_degenerate_polygons() {
        assert!(ConvexPolygon::new(vec![Point::ORIGIN, Point::new(1.0, 0.0)]).is_err());
        let collinear = vec![Point::ORIGIN, Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(ConvexPolygon::new(collinear).is_err());
        let clockwise = vec![Point::ORIGIN, Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(ConvexPolygon::new(clockwise).is_err());
        let repeated = vec![Point::ORIGIN, Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(ConvexPolygon::new(repeated).is_err());
    }

    #[test]
    fn distance_examples() {
        let sq = unit_square();
        assert_eq!(distance_point_to_polygon(Point::new(0.1, -0.2), &sq), 0.0);
        assert_eq!(distance_point_to_polygon(Point::new(2.0, 0.0), &sq), 1.5);
        assert_eq!(distance_point_to_polygon(Point::new(0.5, 0.5), &sq), 0.0);
    }

    #[test]
    fn distance_matches_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let pts: Vec<Point> = (0..8)
                .map(|_| Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                .collect();
            let Ok(poly) = ConvexPolygon::hull(&pts) else {
                continue;
            };
            let p = Point::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
            let exact = distance_point_to_polygon(p, &poly);
            let oracle = sampled_distance(p, &poly, 100_000);
            // Sampling overestimates by at most half the sample spacing squared over distance.
            assert!(oracle >= exact - 1e-12);
            assert!((exact - oracle).abs() <= 1e-9 + 2e-4, "{exact} vs {oracle}");
        }
    }

    #[test]
    fn distance_agrees_with_sampling_at_vertex_aligned_samples() {
        // When the closest point is a vertex the sampled oracle is exact.
        let sq = unit_square();
        let p = Point::new(1.5, 1.5);
        let exact = distance_point_to_polygon(p, &sq);
        assert!((exact - sampled_distance(p, &sq, 100_000)).abs() < 1e-9);
        assert!((exact - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn segment_and_circle_intersections() {
        let sq = unit_square();
        let through = Segment::new(Point::new(-2.0, 0.1), Point::new(2.0, -0.1));
        assert!(intersects(&Shape::Segment(through), &sq));
        let far = Segment::new(Point::new(5.0, 5.0), Point::new(6.0, 7.0));
        assert!(!intersects(&Shape::Segment(far), &sq));
        // Circle centered at (0, 2): the line y = 0.5 meets it in a double root
        // of (x)^2 + (0.5 - 2)^2 = r^2 exactly when r = 1.5.
        let r = (0.5f64 - 2.0).abs();
        let tangent = Circle::new(Point::new(0.0, 2.0), r);
        assert!(intersects(&Shape::Circle(tangent), &sq));
        let apart = Circle::new(Point::new(0.0, 2.0), r - 1e-6);
        assert!(!intersects(&Shape::Circle(apart), &sq));
    }

    #[test]
    fn interior_crossing_ignores_sides() {
        let sq = unit_square();
        let side = Segment::new(Point::new(-0.5, -0.5), Point::new(0.5, -0.5));
        assert!(!sq.segment_crosses_interior(&side));
        let corner = Segment::new(Point::new(0.5, 0.5), Point::new(2.0, 3.0));
        assert!(!sq.segment_crosses_interior(&corner));
        let chord = Segment::new(Point::new(-0.5, -0.5), Point::new(0.5, 0.5));
        assert!(sq.segment_crosses_interior(&chord));
    }

    #[test]
    fn offset_and_reduce_contain_original() {
        let pts: Vec<Point> = (0..16)
            .map(|k| Point::from_angle(k as f64 * TAU / 16.0) * 3.0)
            .collect();
        let poly = ConvexPolygon::new(pts).unwrap();
        let reduced = poly.reduce_corners(8).unwrap();
        assert!(reduced.len() <= 8);
        assert!(poly.vertices().iter().all(|&v| reduced.contains(v)));
        let padded = reduced.offset(0.5).unwrap();
        for e in reduced.edges() {
            assert!(padded.contains_with_clearance(e.a, 0.5 - 1e-9));
        }
    }

    proptest! {
        #[test]
        fn zero_distance_iff_point_intersects(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let sq = unit_square();
            let p = Point::new(x, y);
            let zero = distance_point_to_polygon(p, &sq) == 0.0;
            let hit = intersects(&Shape::Circle(Circle::new(p, 0.0)), &sq);
            prop_assert_eq!(zero, hit);
        }
    }
}
