use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{atan2, cos, hypot, sin, wrap_angle, Vector, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentShape {
    /// `origin + s * dir`, `dir` a unit vector.
    Line { origin: Vector<2>, dir: Vector<2> },
    /// `center + radius (cos θ, sin θ)` with `θ = theta0 + orient * s / radius`;
    /// `orient = +1` is counterclockwise.
    Arc { center: Vector<2>, radius: f64, theta0: f64, orient: f64 },
}

/// A line piece or circular arc parametrized by arclength `s ∈ [s_min, s_max]`.
/// Lines may be unbounded in either direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub shape: SegmentShape,
    pub s_min: f64,
    pub s_max: f64,
}

impl Segment {
    pub fn line(origin: Vector<2>, dir: Vector<2>, s_min: f64, s_max: f64) -> Self {
        let n = hypot(dir[0], dir[1]);
        Self { shape: SegmentShape::Line { origin, dir: [dir[0] / n, dir[1] / n] }, s_min, s_max }
    }

    pub fn arc(center: Vector<2>, radius: f64, theta0: f64, orient: f64, length: f64) -> Self {
        Self { shape: SegmentShape::Arc { center, radius, theta0, orient: orient.signum() }, s_min: 0.0, s_max: length }
    }

    pub fn length(&self) -> f64 {
        self.s_max - self.s_min
    }

    pub fn is_full_circle(&self) -> bool {
        match self.shape {
            SegmentShape::Arc { radius, .. } => self.length() >= 2.0 * PI * radius * (1.0 - 1e-12),
            SegmentShape::Line { .. } => false,
        }
    }

    pub fn point(&self, s: f64) -> Vector<2> {
        match self.shape {
            SegmentShape::Line { origin, dir } => [origin[0] + s * dir[0], origin[1] + s * dir[1]],
            SegmentShape::Arc { center, radius, theta0, orient } => {
                let th = theta0 + orient * s / radius;
                [center[0] + radius * cos(th), center[1] + radius * sin(th)]
            }
        }
    }

    /// Unit tangent `e2 = γ'(s)`.
    pub fn tangent(&self, s: f64) -> Vector<2> {
        match self.shape {
            SegmentShape::Line { dir, .. } => dir,
            SegmentShape::Arc { radius, theta0, orient, .. } => {
                let th = theta0 + orient * s / radius;
                [-orient * sin(th), orient * cos(th)]
            }
        }
    }

    /// Outward unit normal `e1 = -J e2`.
    pub fn outward(&self, s: f64) -> Vector<2> {
        let t = self.tangent(s);
        [t[1], -t[0]]
    }

    /// Signed curvature, `d e1/ds = -κ e2`.
    pub fn curvature(&self) -> f64 {
        match self.shape {
            SegmentShape::Line { .. } => 0.0,
            SegmentShape::Arc { radius, orient, .. } => -orient / radius,
        }
    }

    /// Arclength parameter of the point of this segment's underlying line or
    /// circle closest to `p`; for arcs the result lies in `[0, 2πR)`.
    pub fn project(&self, p: &Vector<2>) -> f64 {
        match self.shape {
            SegmentShape::Line { origin, dir } => (p[0] - origin[0]) * dir[0] + (p[1] - origin[1]) * dir[1],
            SegmentShape::Arc { center, radius, theta0, orient } => {
                let th = atan2(p[1] - center[1], p[0] - center[0]);
                radius * wrap_angle(orient * (th - theta0))
            }
        }
    }

    /// Local parameter of `p` if it lies on the segment within `tol` (arclength units).
    pub fn locate(&self, p: &Vector<2>, tol: f64) -> Option<f64> {
        let mut s = self.project(p);
        if let SegmentShape::Arc { radius, .. } = self.shape {
            let period = 2.0 * PI * radius;
            if !self.is_full_circle() && s > self.s_max + tol && s - period >= self.s_min - tol {
                s -= period;
            }
        }
        if s < self.s_min - tol || s > self.s_max + tol {
            return None;
        }
        let q = self.point(s);
        if hypot(q[0] - p[0], q[1] - p[1]) <= tol.max(1e-9) {
            Some(s)
        } else {
            None
        }
    }
}

/// A connected boundary component: a closed loop of segments, or a single
/// unbounded line.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    pub segments: Vec<Segment>,
    pub closed: bool,
}

impl BoundaryCurve {
    pub fn single(seg: Segment, closed: bool) -> Self {
        Self { segments: alloc::vec![seg], closed }
    }

    /// Index of the segment following `k` along the curve.
    pub fn next(&self, k: usize) -> Option<usize> {
        if k + 1 < self.segments.len() {
            Some(k + 1)
        } else if self.closed && !self.segments[k].is_full_circle() {
            Some(0)
        } else {
            None
        }
    }

    pub fn prev(&self, k: usize) -> Option<usize> {
        if k > 0 {
            Some(k - 1)
        } else if self.closed && !self.segments[k].is_full_circle() {
            Some(self.segments.len() - 1)
        } else {
            None
        }
    }

    /// Whether the vertex at the end of segment `k` is a corner (tangent jump).
    pub fn corner_after(&self, k: usize) -> bool {
        match self.next(k) {
            None => false,
            Some(j) => {
                let a = self.segments[k].tangent(self.segments[k].s_max);
                let b = self.segments[j].tangent(self.segments[j].s_min);
                (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > 1e-9
            }
        }
    }

    pub fn corner_before(&self, k: usize) -> bool {
        self.prev(k).is_some_and(|j| self.corner_after(j))
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Builds closed boundary loops turtle-style: a pen position and heading
/// advanced by straight lines and circular arcs, with optional corner turns.
#[derive(Clone, Debug)]
pub struct CurveBuilder {
    start: Vector<2>,
    start_heading: f64,
    pos: Vector<2>,
    heading: f64,
    segments: Vec<Segment>,
}

impl CurveBuilder {
    pub fn new(start: Vector<2>, heading: f64) -> Self {
        Self { start, start_heading: heading, pos: start, heading, segments: Vec::new() }
    }

    pub fn line(mut self, length: f64) -> Self {
        let dir = [cos(self.heading), sin(self.heading)];
        self.segments.push(Segment::line(self.pos, dir, 0.0, length));
        self.pos = [self.pos[0] + length * dir[0], self.pos[1] + length * dir[1]];
        self
    }

    /// Circular arc of the given radius; positive `sweep` turns left (counterclockwise).
    pub fn arc(mut self, radius: f64, sweep: f64) -> Self {
        let orient = sweep.signum();
        // The center lies to the left of the heading for a left turn.
        let left = [-sin(self.heading), cos(self.heading)];
        let center = [self.pos[0] + orient * radius * left[0], self.pos[1] + orient * radius * left[1]];
        let theta0 = atan2(self.pos[1] - center[1], self.pos[0] - center[0]);
        let length = radius * sweep.abs();
        let seg = Segment::arc(center, radius, theta0, orient, length);
        self.pos = seg.point(length);
        self.heading += sweep;
        self.segments.push(seg);
        self
    }

    /// Corner: rotate the heading in place.
    pub fn turn(mut self, angle: f64) -> Self {
        self.heading += angle;
        self
    }

    pub fn close(self) -> Result<BoundaryCurve> {
        let gap = hypot(self.pos[0] - self.start[0], self.pos[1] - self.start[1]);
        let scale = self.segments.iter().map(Segment::length).sum::<f64>().max(1.0);
        if self.segments.is_empty() || gap > 1e-9 * scale {
            return Err(Error::Domain("boundary loop does not close"));
        }
        let _ = self.start_heading;
        Ok(BoundaryCurve { segments: self.segments, closed: true })
    }
}
