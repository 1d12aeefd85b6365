use alloc::vec::Vec;

use super::segment::{BoundaryCurve, CurveBuilder, Segment, SegmentShape};
use crate::error::{Error, Result};
use crate::math::{dot, hypot, norm, scale, sqrt, Vector, PI};
use crate::poly;

/// Tolerance (in length units) for deciding that a point lies on a boundary piece.
const ON_BOUNDARY_TOL: f64 = 1e-8;
/// Hits closer than this (arclength) to a corner vertex are reported as corner hits.
const CORNER_TOL: f64 = 1e-9;

/// A boundary piece: segment `segment` of boundary curve `curve`.
/// For the ball in 3D both indices are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PieceId {
    pub curve: usize,
    pub segment: usize,
}

/// First boundary intersection of a ballistic flight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit<const N: usize> {
    pub t: f64,
    pub position: Vector<N>,
    pub velocity: Vector<N>,
    pub piece: PieceId,
}

/// A billiard table in `ℝ^N` with gravity along `-e_N`.
pub trait BilliardDomain<const N: usize> {
    /// First time in `(0, t_max]` at which the flight `x + u t - g t² e_N / 2`
    /// leaves the domain. `from` names the piece the flight departs from.
    fn first_hit(&self, x: &Vector<N>, u: &Vector<N>, g: f64, t_max: f64, from: Option<PieceId>)
        -> Result<Option<Hit<N>>>;

    /// Unit normal pointing into the domain at a point of the given piece.
    fn inward_normal(&self, piece: PieceId, x: &Vector<N>) -> Vector<N>;

    /// Whether `x` lies in the closed domain.
    fn contains(&self, x: &Vector<N>) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind {
    Disc { radius: f64 },
    /// `{|x1| ≤ width/2}`.
    Strip { width: f64 },
    /// Square `[-h, h]²` with a circular scatterer removed.
    Sinai { half_side: f64, radius: f64, center: Vector<2> },
    Custom,
}

/// A planar billiard table bounded by lines and circular arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain2 {
    pub kind: DomainKind,
    pub curves: Vec<BoundaryCurve>,
}

/// Polynomial `q(t)` in the flight time, negative inside near the piece, and
/// its local parameter at a point.
fn crossing_poly(seg: &Segment, x: &Vector<2>, u: &Vector<2>, a: &Vector<2>) -> [f64; 5] {
    match seg.shape {
        SegmentShape::Line { origin, .. } => {
            let n = seg.outward(0.0);
            let d0 = (x[0] - origin[0]) * n[0] + (x[1] - origin[1]) * n[1];
            [d0, dot(u, &n), 0.5 * dot(a, &n), 0.0, 0.0]
        }
        SegmentShape::Arc { center, radius, orient, .. } => {
            let d = [x[0] - center[0], x[1] - center[1]];
            let c = [
                dot(&d, &d) - radius * radius,
                2.0 * dot(&d, u),
                dot(u, u) + dot(&d, a),
                dot(u, a),
                0.25 * dot(a, a),
            ];
            // Counterclockwise arcs bound their disc from inside; clockwise
            // arcs are scatterers whose interior is outside the table.
            [orient * c[0], orient * c[1], orient * c[2], orient * c[3], orient * c[4]]
        }
    }
}

impl Domain2 {
    pub fn disc(radius: f64) -> Result<Self> {
        check_length(radius, "disc radius must be positive")?;
        let seg = Segment::arc([0.0, 0.0], radius, 0.0, 1.0, 2.0 * PI * radius);
        Ok(Self { kind: DomainKind::Disc { radius }, curves: alloc::vec![BoundaryCurve::single(seg, true)] })
    }

    /// Two parallel walls `x1 = ±width/2`. The right wall is traversed upward,
    /// the left wall downward, keeping the strip on the left.
    pub fn strip(width: f64) -> Result<Self> {
        check_length(width, "strip width must be positive")?;
        let h = 0.5 * width;
        let right = Segment::line([h, 0.0], [0.0, 1.0], f64::NEG_INFINITY, f64::INFINITY);
        let left = Segment::line([-h, 0.0], [0.0, -1.0], f64::NEG_INFINITY, f64::INFINITY);
        Ok(Self {
            kind: DomainKind::Strip { width },
            curves: alloc::vec![BoundaryCurve::single(right, false), BoundaryCurve::single(left, false)],
        })
    }

    /// Square `[-h, h]²` (counterclockwise) with a disc scatterer (clockwise).
    pub fn sinai(half_side: f64, radius: f64, center: Vector<2>) -> Result<Self> {
        check_length(half_side, "square half side must be positive")?;
        check_length(radius, "scatterer radius must be positive")?;
        if center[0].abs() + radius >= half_side || center[1].abs() + radius >= half_side {
            return Err(Error::Domain("scatterer must lie strictly inside the square"));
        }
        let side = 2.0 * half_side;
        let square = CurveBuilder::new([-half_side, -half_side], 0.0)
            .line(side)
            .turn(0.5 * PI)
            .line(side)
            .turn(0.5 * PI)
            .line(side)
            .turn(0.5 * PI)
            .line(side)
            .close()?;
        let scatterer = Segment::arc(center, radius, 0.0, -1.0, 2.0 * PI * radius);
        Ok(Self {
            kind: DomainKind::Sinai { half_side, radius, center },
            curves: alloc::vec![square, BoundaryCurve::single(scatterer, true)],
        })
    }

    pub fn custom(curves: Vec<BoundaryCurve>) -> Result<Self> {
        if curves.is_empty() || curves.iter().any(|c| c.segments.is_empty()) {
            return Err(Error::Domain("a domain needs at least one non-empty boundary curve"));
        }
        Ok(Self { kind: DomainKind::Custom, curves })
    }

    pub fn segment(&self, piece: PieceId) -> &Segment {
        &self.curves[piece.curve].segments[piece.segment]
    }

    pub fn pieces(&self) -> impl Iterator<Item = PieceId> + '_ {
        self.curves
            .iter()
            .enumerate()
            .flat_map(|(c, curve)| (0..curve.segments.len()).map(move |s| PieceId { curve: c, segment: s }))
    }

    /// Boundary piece containing `a` and its local parameter.
    pub fn locate(&self, a: &Vector<2>) -> Option<(PieceId, f64)> {
        self.pieces().find_map(|p| self.segment(p).locate(a, ON_BOUNDARY_TOL).map(|s| (p, s)))
    }

    /// Inward unit normal `ν` and unit tangent at a regular boundary point.
    ///
    /// The tangent is `τ = Jν`, so that the 2D collision map acts on the
    /// tangential velocity `u·τ` and the spin `s` of `S = sJ` with the
    /// orientation used throughout this crate.
    pub fn boundary_data(&self, a: &Vector<2>) -> Result<(Vector<2>, Vector<2>)> {
        let (piece, s) = self.locate(a).ok_or(Error::Domain("point is not on the boundary"))?;
        if self.near_corner(piece, s) {
            return Err(Error::Corner { point: *a });
        }
        let e1 = self.segment(piece).outward(s);
        let nu = [-e1[0], -e1[1]];
        Ok((nu, [-nu[1], nu[0]]))
    }

    fn near_corner(&self, piece: PieceId, s: f64) -> bool {
        let curve = &self.curves[piece.curve];
        let seg = &curve.segments[piece.segment];
        (s - seg.s_max).abs() <= CORNER_TOL && curve.corner_after(piece.segment)
            || (s - seg.s_min).abs() <= CORNER_TOL && curve.corner_before(piece.segment)
    }

    /// Shortest-time exit with a general constant acceleration `a`.
    pub fn first_hit_accel(
        &self,
        x: &Vector<2>,
        u: &Vector<2>,
        a: &Vector<2>,
        t_max: f64,
        from: Option<PieceId>,
    ) -> Result<Option<(f64, PieceId, f64)>> {
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::Domain("flight time limit must be finite and positive"));
        }
        let mut best: Option<(f64, PieceId, f64)> = None;
        for piece in self.pieces() {
            let seg = self.segment(piece);
            let mut c = crossing_poly(seg, x, u, a);
            let departing = from == Some(piece);
            let roots = if departing {
                // The flight starts on this piece: factor out the root t = 0.
                let d = [c[1], c[2], c[3], c[4]];
                c = [0.0, c[1], c[2], c[3], c[4]];
                poly::roots_in(&d, 0.0, t_max)
            } else {
                poly::roots_in(&c, 0.0, t_max)
            };
            let dc = poly::derivative(&c);
            for t in roots {
                if t <= 0.0 || best.is_some_and(|b| t >= b.0) {
                    continue;
                }
                // Only outward crossings count; inward ones belong to the
                // far side of a line or circle.
                if poly::eval(&dc, t) < 0.0 {
                    continue;
                }
                let p = [x[0] + u[0] * t + 0.5 * a[0] * t * t, x[1] + u[1] * t + 0.5 * a[1] * t * t];
                if let Some(s) = seg.locate(&p, ON_BOUNDARY_TOL) {
                    best = Some((t, piece, s));
                    break;
                }
            }
        }
        if let Some((_, piece, s)) = best {
            if self.near_corner(piece, s) {
                let p = self.segment(piece).point(s);
                return Err(Error::Corner { point: p });
            }
        }
        Ok(best)
    }

    /// Even-odd test along the ray `x + λ e1`, `λ > 0`.
    fn crossings_right(&self, x: &Vector<2>) -> usize {
        let mut count = 0;
        for piece in self.pieces() {
            let seg = self.segment(piece);
            match seg.shape {
                SegmentShape::Line { origin, dir } => {
                    if dir[1].abs() < 1e-300 {
                        continue;
                    }
                    let s = (x[1] - origin[1]) / dir[1];
                    // Half-open parameter range so shared vertices count once.
                    if s >= seg.s_min && s < seg.s_max || seg.s_max.is_infinite() && s >= seg.s_min {
                        let px = origin[0] + s * dir[0];
                        if px > x[0] {
                            count += 1;
                        }
                    }
                }
                SegmentShape::Arc { center, radius, .. } => {
                    let dy = x[1] - center[1];
                    if dy.abs() >= radius {
                        continue;
                    }
                    let w = sqrt(radius * radius - dy * dy);
                    for px in [center[0] - w, center[0] + w] {
                        if px > x[0] {
                            let sp = seg.project(&[px, x[1]]);
                            if seg.is_full_circle() || sp >= seg.s_min && sp < seg.s_max {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }
}

fn check_length(v: f64, msg: &'static str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(msg))
    }
}

impl BilliardDomain<2> for Domain2 {
    fn first_hit(&self, x: &Vector<2>, u: &Vector<2>, g: f64, t_max: f64, from: Option<PieceId>)
        -> Result<Option<Hit<2>>> {
        let a = [0.0, -g];
        Ok(self.first_hit_accel(x, u, &a, t_max, from)?.map(|(t, piece, _)| Hit {
            t,
            position: [x[0] + u[0] * t, x[1] + u[1] * t - 0.5 * g * t * t],
            velocity: [u[0], u[1] - g * t],
            piece,
        }))
    }

    fn inward_normal(&self, piece: PieceId, x: &Vector<2>) -> Vector<2> {
        let seg = self.segment(piece);
        let e1 = seg.outward(seg.project(x));
        [-e1[0], -e1[1]]
    }

    fn contains(&self, x: &Vector<2>) -> bool {
        if self.locate(x).is_some() {
            return true;
        }
        self.crossings_right(x) % 2 == 1
    }
}

/// Three-dimensional tables: a vertical cylinder over a planar table, or a ball.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain3 {
    Cylinder(Domain2),
    Ball { radius: f64 },
}

impl Domain3 {
    pub fn ball(radius: f64) -> Result<Self> {
        check_length(radius, "ball radius must be positive")?;
        Ok(Domain3::Ball { radius })
    }

    pub fn cross_section(&self) -> Option<&Domain2> {
        match self {
            Domain3::Cylinder(d) => Some(d),
            Domain3::Ball { .. } => None,
        }
    }
}

impl BilliardDomain<3> for Domain3 {
    fn first_hit(&self, x: &Vector<3>, u: &Vector<3>, g: f64, t_max: f64, from: Option<PieceId>)
        -> Result<Option<Hit<3>>> {
        let t = match self {
            Domain3::Cylinder(d) => {
                // Gravity is axial, so the horizontal motion is uniform.
                d.first_hit_accel(&[x[0], x[1]], &[u[0], u[1]], &[0.0, 0.0], t_max, from)?.map(|h| (h.0, h.1))
            }
            Domain3::Ball { radius } => {
                if !t_max.is_finite() || t_max <= 0.0 {
                    return Err(Error::Domain("flight time limit must be finite and positive"));
                }
                let a = [0.0, 0.0, -g];
                let c = [
                    dot(x, x) - radius * radius,
                    2.0 * dot(x, u),
                    dot(u, u) + dot(x, &a),
                    dot(u, &a),
                    0.25 * dot(&a, &a),
                ];
                let piece = PieceId { curve: 0, segment: 0 };
                let (roots, c) = if from.is_some() {
                    (poly::roots_in(&c[1..], 0.0, t_max), [0.0, c[1], c[2], c[3], c[4]])
                } else {
                    (poly::roots_in(&c, 0.0, t_max), c)
                };
                let dc = poly::derivative(&c);
                roots.into_iter().find(|&t| t > 0.0 && poly::eval(&dc, t) >= 0.0).map(|t| (t, piece))
            }
        };
        Ok(t.map(|(t, piece)| Hit {
            t,
            position: [x[0] + u[0] * t, x[1] + u[1] * t, x[2] + u[2] * t - 0.5 * g * t * t],
            velocity: [u[0], u[1], u[2] - g * t],
            piece,
        }))
    }

    fn inward_normal(&self, piece: PieceId, x: &Vector<3>) -> Vector<3> {
        match self {
            Domain3::Cylinder(d) => {
                let n = d.inward_normal(piece, &[x[0], x[1]]);
                [n[0], n[1], 0.0]
            }
            Domain3::Ball { .. } => scale(x, -1.0 / norm(x)),
        }
    }

    fn contains(&self, x: &Vector<3>) -> bool {
        match self {
            Domain3::Cylinder(d) => d.contains(&[x[0], x[1]]),
            Domain3::Ball { radius } => norm(x) <= radius * (1.0 + 1e-12),
        }
    }
}

/// Distance from `p` to the nearest boundary piece (used by diagnostics).
pub fn boundary_residual(d: &Domain2, p: &Vector<2>) -> f64 {
    d.pieces()
        .map(|piece| {
            let seg = d.segment(piece);
            let s = seg.project(p).clamp(seg.s_min, seg.s_max);
            let q = seg.point(s);
            hypot(q[0] - p[0], q[1] - p[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_hit_from_center() {
        let d = Domain2::disc(1.0).unwrap();
        let h = d.first_hit(&[0.0, 0.0], &[1.0, 0.0], 0.0, 10.0, None).unwrap().unwrap();
        assert!((h.t - 1.0).abs() < 1e-15);
        assert!((h.position[0] - 1.0).abs() < 1e-15);
        let (nu, tau) = d.boundary_data(&h.position).unwrap();
        assert!((nu[0] + 1.0).abs() < 1e-15 && nu[1].abs() < 1e-15);
        assert!((tau[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn departing_flight_skips_start_piece() {
        let d = Domain2::disc(1.0).unwrap();
        let from = Some(PieceId { curve: 0, segment: 0 });
        let h = d.first_hit(&[1.0, 0.0], &[-1.0, 0.0], 0.0, 10.0, from).unwrap().unwrap();
        assert!((h.t - 2.0).abs() < 1e-14);
        assert!((h.position[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn strip_horizontal_time_independent_of_gravity() {
        let d = Domain2::strip(1.0).unwrap();
        for g in [0.0, 1.0, 9.81] {
            let h = d.first_hit(&[0.0, 0.0], &[0.5, 0.3], g, 10.0, None).unwrap().unwrap();
            assert!((h.t - 1.0).abs() < 1e-14);
            assert_eq!(h.piece.curve, 0);
        }
        let (nu, _) = d.boundary_data(&[0.5, 3.0]).unwrap();
        assert_eq!(nu, [-1.0, 0.0]);
    }

    #[test]
    fn parabola_against_circle_lands_on_boundary() {
        let d = Domain2::disc(1.0).unwrap();
        let h = d.first_hit(&[0.1, 0.2], &[0.7, 1.3], 2.0, 10.0, None).unwrap().unwrap();
        assert!((norm(&h.position) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sinai_normal_points_into_table() {
        let d = Domain2::sinai(1.0, 0.3, [0.0, 0.0]).unwrap();
        let (nu, _) = d.boundary_data(&[0.3, 0.0]).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-15 && nu[1].abs() < 1e-15);
        let h = d.first_hit(&[0.8, 0.0], &[-1.0, 0.0], 0.0, 10.0, None).unwrap().unwrap();
        assert!((h.t - 0.5).abs() < 1e-14);
        assert!(d.contains(&[0.8, 0.8]));
        assert!(!d.contains(&[0.1, 0.1]));
        assert!(!d.contains(&[1.5, 0.0]));
    }

    #[test]
    fn corner_hits_are_errors() {
        let d = Domain2::sinai(1.0, 0.3, [0.0, 0.0]).unwrap();
        let r = d.first_hit(&[0.5, 0.5], &[1.0, 1.0], 0.0, 10.0, None);
        assert!(matches!(r, Err(Error::Corner { .. })));
    }

    #[test]
    fn ball_and_cylinder_hits() {
        let b = Domain3::ball(2.0).unwrap();
        let h = b.first_hit(&[0.0; 3], &[0.0, 0.0, 1.0], 0.0, 10.0, None).unwrap().unwrap();
        assert!((h.t - 2.0).abs() < 1e-14);
        assert_eq!(b.inward_normal(h.piece, &h.position), [0.0, 0.0, -1.0]);
        let c = Domain3::Cylinder(Domain2::disc(1.0).unwrap());
        let h = c.first_hit(&[0.0; 3], &[0.0, 1.0, 5.0], 3.0, 10.0, None).unwrap().unwrap();
        assert!((h.t - 1.0).abs() < 1e-15);
        assert!((h.position[2] - 3.5).abs() < 1e-14);
        assert!(c.contains(&[0.5, 0.5, 100.0]));
    }

    #[test]
    fn timeout_when_no_hit() {
        let d = Domain2::strip(1.0).unwrap();
        assert!(d.first_hit(&[0.0, 0.0], &[0.0, 1.0], 0.0, 5.0, None).unwrap().is_none());
    }
}
