use super::{angle_between, Point, TANGENT_EPS};
use crate::error::{Error, Result};

/// One piece of a biarc: either a straight segment or a circular arc.
///
/// Arcs keep their exact endpoints next to the center/angle form so that
/// chained pieces meet without rounding drift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Line {
        from: Point,
        to: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        /// Signed; positive is counterclockwise.
        sweep: f64,
        from: Point,
        to: Point,
    },
}

impl Piece {
    /// Circular arc leaving `p` with unit tangent `t` and ending at `q`;
    /// a straight piece when `q` lies on the tangent line.
    pub fn tangent_arc(p: Point, t: Point, q: Point) -> Piece {
        let c = q - p;
        let len2 = c.norm2();
        let cr = t.cross(c);
        if cr.abs() <= 1e-12 * len2.sqrt() || len2 == 0.0 {
            return Piece::Line { from: p, to: q };
        }
        let r = len2 / (2.0 * cr);
        let center = p + t.perp() * r;
        let phi = cr.atan2(t.dot(c));
        Piece::Arc {
            center,
            radius: r.abs(),
            start_angle: (p - center).angle(),
            sweep: 2.0 * phi,
            from: p,
            to: q,
        }
    }

    pub fn start(&self) -> Point {
        match *self {
            Piece::Line { from, .. } | Piece::Arc { from, .. } => from,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Piece::Line { to, .. } | Piece::Arc { to, .. } => to,
        }
    }

    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Line { from, to } => Piece::Line { from: to, to: from },
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
                from,
                to,
            } => Piece::Arc {
                center,
                radius,
                start_angle: start_angle + sweep,
                sweep: -sweep,
                from: to,
                to: from,
            },
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { from, to } => from.dist(to),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Signed curvature; zero for lines.
    pub fn curvature(&self) -> f64 {
        match *self {
            Piece::Line { .. } => 0.0,
            Piece::Arc { radius, sweep, .. } => sweep.signum() / radius,
        }
    }

    /// Point at parameter `s ∈ [0, 1]`, proportional to arc length.
    pub fn point_at(&self, s: f64) -> Point {
        if s <= 0.0 {
            return self.start();
        }
        if s >= 1.0 {
            return self.end();
        }
        match *self {
            Piece::Line { from, to } => from.lerp(to, s),
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
                ..
            } => center + Point::from_angle(start_angle + sweep * s) * radius,
        }
    }

    /// Unit tangent at parameter `s ∈ [0, 1]`.
    pub fn tangent_at(&self, s: f64) -> Point {
        match *self {
            Piece::Line { from, to } => (to - from).normalized().unwrap_or(Point::new(1.0, 0.0)),
            Piece::Arc {
                start_angle, sweep, ..
            } => {
                let radial = Point::from_angle(start_angle + sweep * s.clamp(0.0, 1.0));
                if sweep >= 0.0 {
                    radial.perp()
                } else {
                    -radial.perp()
                }
            }
        }
    }

    pub fn start_tangent(&self) -> Point {
        self.tangent_at(0.0)
    }

    pub fn end_tangent(&self) -> Point {
        self.tangent_at(1.0)
    }
}

/// Two tangent-continuous pieces meeting at `join`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biarc {
    pub first: Piece,
    pub second: Piece,
    pub join: Point,
}

impl Biarc {
    pub fn start(&self) -> Point {
        self.first.start()
    }

    pub fn end(&self) -> Point {
        self.second.end()
    }

    pub fn length(&self) -> f64 {
        self.first.length() + self.second.length()
    }

    pub fn pieces(&self) -> [Piece; 2] {
        [self.first, self.second]
    }

    /// Angle between the tangents of the two pieces at the join.
    pub fn join_deviation(&self) -> f64 {
        angle_between(self.first.end_tangent(), self.second.start_tangent())
    }

    /// `n + 1` points evenly spaced in parameter over the whole curve.
    pub fn sample(&self, n: usize) -> Vec<Point> {
        let total = self.length();
        let split = if total > 0.0 {
            self.first.length() / total
        } else {
            0.5
        };
        (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                if s <= split && split > 0.0 {
                    self.first.point_at(s / split)
                } else if split < 1.0 {
                    self.second.point_at((s - split) / (1.0 - split))
                } else {
                    self.second.end()
                }
            })
            .collect()
    }
}

/// Fits a biarc from `p0` (unit tangent `t0`) to `p1` (unit tangent `t1`).
///
/// The two tangent legs have equal length `d`, which places the join at the
/// midpoint of the inner control points `p0 + d·t0` and `p1 − d·t1`. `d` is the
/// positive root of `2(t0·t1 − 1)d² − 2(v·t)d + v·v = 0` with `v = p1 − p0`,
/// `t = t0 + t1`.
pub fn fit_biarc(p0: Point, t0: Point, p1: Point, t1: Point) -> Result<Biarc> {
    if !(p0.is_finite() && p1.is_finite() && t0.is_finite() && t1.is_finite()) {
        return Err(Error::FitFailure("non-finite input".to_string()));
    }
    if (t0.norm() - 1.0).abs() > 1e-6 || (t1.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::FitFailure("tangents must have unit length".to_string()));
    }
    let v = p1 - p0;
    let vv = v.norm2();
    if vv == 0.0 {
        return Err(Error::FitFailure("coincident endpoints".to_string()));
    }
    let t = t0 + t1;
    let vt = v.dot(t);
    let a = 2.0 * (t0.dot(t1) - 1.0);
    // Rationalized positive root; stays accurate when a → 0.
    let disc = vt * vt - a * vv;
    let denom = vt + disc.max(0.0).sqrt();
    if denom <= 0.0 {
        return Err(Error::FitFailure("tangents point away from each other".to_string()));
    }
    let d = vv / denom;
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::FitFailure(format!("no positive leg length (d = {d})")));
    }
    let q1 = p0 + t0 * d;
    let q2 = p1 - t1 * d;
    let join = q1.lerp(q2, 0.5);
    let scale = vv.sqrt();
    if join.dist(p0) <= 1e-9 * scale || join.dist(p1) <= 1e-9 * scale {
        return Err(Error::FitFailure("join collapses onto an endpoint".to_string()));
    }
    let first = Piece::tangent_arc(p0, t0, join);
    let second = Piece::tangent_arc(p1, -t1, join).reversed();
    let biarc = Biarc {
        first,
        second,
        join,
    };
    let ok = biarc.join_deviation() <= TANGENT_EPS
        && angle_between(first.start_tangent(), t0) <= TANGENT_EPS
        && angle_between(second.end_tangent(), t1) <= TANGENT_EPS;
    if !ok {
        return Err(Error::FitFailure("cusp at the join".to_string()));
    }
    Ok(biarc)
}
