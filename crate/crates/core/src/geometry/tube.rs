//! The hypersurface `𝒩_r ⊂ ℝ⁴` traced by the center of a 4-ball of radius `r`
//! rolling on the solid cylinder `P = 𝒞 × ℝ` (with `P` lying in `x4 = 0`).
//!
//! `𝒩_r` has two flat parts `𝒩±` at `x4 = ±r` over the region `𝒞`, joined by
//! a curved part `𝒩ᶜ` over the boundary of `𝒞`, parametrized by
//!
//! ```text
//! a(s, φ, x3) = γ(s) + r (sin φ e1 + cos φ e4) + x3 e3,   φ ∈ [0, π]
//! ```
//!
//! with unit normal `ν = sin φ e1 + cos φ e4` and orthonormal frame
//! `X1 = τ = cos φ e1 - sin φ e4`, `X2 = e2`, `X3 = e3`. Vectors of `ℝ⁴` are
//! written in the coordinates `(x1, x2, x3, x4)`.

use super::domain::{Domain2, PieceId};
use crate::error::{Error, Result};
use crate::math::{cos, sin, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// Top flat part, `x4 = +r` (the junction is at `φ = 0`).
    FlatPlus,
    /// Bottom flat part, `x4 = -r` (the junction is at `φ = π`).
    FlatMinus,
    Curved,
}

/// `(f_c, f_s) = κ (cos φ, sin φ) / (1 - r κ sin φ)`.
pub fn curvature_factors(kappa: f64, phi: f64, r: f64) -> Result<(f64, f64)> {
    let den = 1.0 - r * kappa * sin(phi);
    if !(den > 0.0) {
        return Err(Error::FocalPoint { denominator: den });
    }
    Ok((kappa * cos(phi) / den, kappa * sin(phi) / den))
}

/// Principal curvatures of `𝒩_r` along `(X1, X2, X3)`, for the shape operator
/// `𝕊 v = -D_v ν`.
pub fn shape_eigen(region: Region, kappa: f64, phi: f64, r: f64) -> Result<[f64; 3]> {
    match region {
        Region::FlatPlus | Region::FlatMinus => Ok([0.0; 3]),
        Region::Curved => {
            let (_, f_s) = curvature_factors(kappa, phi, r)?;
            Ok([-1.0 / r, f_s, 0.0])
        }
    }
}

/// Chart on the curved part of `𝒩_r` over a planar cross-section.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeChart {
    pub section: Domain2,
    pub r: f64,
}

fn lift(v: &Vector<2>) -> Vector<4> {
    [v[0], v[1], 0.0, 0.0]
}

impl TubeChart {
    /// Rejects radii for which the tube reaches a focal point (`r κ ≥ 1` on a
    /// concave piece).
    pub fn new(section: Domain2, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain("ball radius must be positive"));
        }
        for p in section.pieces() {
            let k = section.segment(p).curvature();
            if r * k >= 1.0 {
                return Err(Error::FocalPoint { denominator: 1.0 - r * k });
            }
        }
        Ok(Self { section, r })
    }

    pub fn kappa(&self, piece: PieceId) -> f64 {
        self.section.segment(piece).curvature()
    }

    pub fn factors(&self, piece: PieceId, phi: f64) -> Result<(f64, f64)> {
        curvature_factors(self.kappa(piece), phi, self.r)
    }

    pub fn embed(&self, piece: PieceId, s: f64, phi: f64, x3: f64) -> Vector<4> {
        let seg = self.section.segment(piece);
        let g = seg.point(s);
        let e1 = seg.outward(s);
        let (sp, cp) = (sin(phi), cos(phi));
        [g[0] + self.r * sp * e1[0], g[1] + self.r * sp * e1[1], x3, self.r * cp]
    }

    pub fn normal(&self, piece: PieceId, s: f64, phi: f64) -> Vector<4> {
        let e1 = self.section.segment(piece).outward(s);
        let (sp, cp) = (sin(phi), cos(phi));
        [sp * e1[0], sp * e1[1], 0.0, cp]
    }

    /// Orthonormal tangent frame `(X1, X2, X3)`.
    pub fn frame(&self, piece: PieceId, s: f64, phi: f64) -> [Vector<4>; 3] {
        let seg = self.section.segment(piece);
        let e1 = seg.outward(s);
        let (sp, cp) = (sin(phi), cos(phi));
        [[cp * e1[0], cp * e1[1], 0.0, -sp], lift(&seg.tangent(s)), [0.0, 0.0, 1.0, 0.0]]
    }
}

/// Finite-difference residuals of the frame calculus at one chart point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameResiduals {
    /// `|[X1, X2] - f_c X2|`.
    pub bracket: f64,
    /// `|𝕊 X_i - λ_i X_i|` with `𝕊 X = -D_X ν`.
    pub shape: [f64; 3],
    /// `|∇_{X2} X1 + f_c X2|` (tangential part of the ambient derivative).
    pub connection: f64,
    /// `| |∂a/∂s| - (1 - rκ sin φ) |`, `| |∂a/∂φ| - r |`, `| |∂a/∂x3| - 1 |`.
    pub embedding: [f64; 3],
    /// Largest `|ν · ∂a/∂q|` over the chart coordinates.
    pub normal: f64,
}

impl FrameResiduals {
    pub fn max(&self) -> f64 {
        let mut m = self.bracket.max(self.connection).max(self.normal);
        for v in self.shape.iter().chain(self.embedding.iter()) {
            m = m.max(*v);
        }
        m
    }
}

/// Compares the analytic frame calculus with finite differences of the
/// embedding. Central differences are used in the interior; at the junction
/// circles `φ ∈ {0, π}` the `φ` derivative is one-sided.
pub fn frame_check(chart: &TubeChart, piece: PieceId, s: f64, phi: f64, x3: f64, h: f64) -> Result<FrameResiduals> {
    if !(h > 0.0) {
        return Err(Error::Domain("finite-difference step must be positive"));
    }
    let kappa = chart.kappa(piece);
    let r = chart.r;
    let (f_c, _) = curvature_factors(kappa, phi, r)?;
    let den = 1.0 - r * kappa * sin(phi);
    let lambda = shape_eigen(Region::Curved, kappa, phi, r)?;

    // Derivative of a field along s, φ or x3 (index 0, 1, 2).
    let diff = |f: &dyn Fn(f64, f64, f64) -> Vector<4>, k: usize| -> Vector<4> {
        let (lo, hi, w) = match k {
            0 => ((s - h, phi, x3), (s + h, phi, x3), 2.0 * h),
            1 if phi - h < 0.0 => ((s, phi, x3), (s, phi + h, x3), h),
            1 if phi + h > core::f64::consts::PI => ((s, phi - h, x3), (s, phi, x3), h),
            1 => ((s, phi - h, x3), (s, phi + h, x3), 2.0 * h),
            _ => ((s, phi, x3 - h), (s, phi, x3 + h), 2.0 * h),
        };
        let a = f(lo.0, lo.1, lo.2);
        let b = f(hi.0, hi.1, hi.2);
        core::array::from_fn(|i| (b[i] - a[i]) / w)
    };
    // Directional derivative along X1 = (1/r) ∂φ, X2 = ∂s / den, X3 = ∂x3.
    let along = |f: &dyn Fn(f64, f64, f64) -> Vector<4>, i: usize| -> Vector<4> {
        match i {
            0 => crate::math::scale(&diff(f, 1), 1.0 / r),
            1 => crate::math::scale(&diff(f, 0), 1.0 / den),
            _ => diff(f, 2),
        }
    };

    let embed = |s: f64, p: f64, z: f64| chart.embed(piece, s, p, z);
    let nu = |s: f64, p: f64, _z: f64| chart.normal(piece, s, p);
    let x1 = |s: f64, p: f64, _z: f64| chart.frame(piece, s, p)[0];
    let x2 = |s: f64, p: f64, _z: f64| chart.frame(piece, s, p)[1];

    let frame = chart.frame(piece, s, phi);
    let n0 = chart.normal(piece, s, phi);
    let dist = |a: &Vector<4>, b: &Vector<4>| crate::math::norm(&crate::math::sub(a, b));

    // [X1, X2] = D_{X1} X2 - D_{X2} X1 (ambient derivatives; the normal
    // components cancel by symmetry of the second fundamental form).
    let bracket_v = crate::math::sub(&along(&x2, 0), &along(&x1, 1));
    let bracket = dist(&bracket_v, &crate::math::scale(&frame[1], f_c));

    let mut shape = [0.0; 3];
    for i in 0..3 {
        let s_x = crate::math::scale(&along(&nu, i), -1.0);
        shape[i] = dist(&s_x, &crate::math::scale(&frame[i], lambda[i]));
    }

    let d21 = along(&x1, 1);
    let tangential = crate::math::axpy(&d21, -crate::math::dot(&d21, &n0), &n0);
    let connection = crate::math::norm(&crate::math::axpy(&tangential, f_c, &frame[1]));

    let partials = [diff(&embed, 0), diff(&embed, 1), diff(&embed, 2)];
    let embedding = [
        (crate::math::norm(&partials[0]) - den).abs(),
        (crate::math::norm(&partials[1]) - r).abs(),
        (crate::math::norm(&partials[2]) - 1.0).abs(),
    ];
    let normal = partials
        .iter()
        .map(|p| crate::math::dot(p, &n0).abs() / crate::math::norm(p))
        .fold(0.0, f64::max);

    Ok(FrameResiduals { bracket, shape, connection, embedding, normal })
}
