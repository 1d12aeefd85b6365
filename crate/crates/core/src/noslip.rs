//! No-slip collisions and the billiard flow with constant gravity.
//!
//! Kinetic states are `(S, u)` with `u` the center velocity and `S = γ r U`
//! the scaled angular velocity (a skew matrix). With unit mass the kinetic
//! energy is `½ (½ Tr(S Sᵀ) + |u|²)`.
//!
//! At a boundary point with inward unit normal `ν` the state splits into
//! the normal speed `û = u·ν`, the tangential velocity `ū = Π u`, the
//! tangential spin `S̄ = Π S Π` and `W = S ν`. A collision flips `û`, keeps
//! `S̄`, and maps `(ū, W) ↦ (c_β ū + s_β W, s_β ū - c_β W)`.
//!
//! # Orientation
//!
//! In the plane `S = s J`, with `J` the counterclockwise quarter turn, and the
//! tangent used for `ū` is `τ = J ν`, so that `W = s τ`. In space the
//! tangential spin is `s̄ = ω · n` where `ω` is the axial vector of `S` and
//! `n = -ν` the outward normal; a tangent basis `(t1, t2)` is positively
//! oriented when `t1 × t2 = n`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{BilliardDomain, Domain2, Domain3, PieceId};
use crate::inertia::InertiaParams;
use crate::math::{
    add, axpy, cross, dot, hat, mat_add, mat_mul, mat_vec, norm, perp_projector, scale, skew_inner, sub,
    upper_triangle, vee, wedge, zeros, Matrix, Vector,
};
use crate::trace::{BoundaryParts, EventKind, EventTrace, TraceRow};

/// Collisions with `|û|` below this are treated as grazing.
pub const GRAZING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoSlipState<const N: usize> {
    pub x: Vector<N>,
    pub u: Vector<N>,
    /// Scaled angular velocity, skew-symmetric.
    pub spin: Matrix<N>,
}

pub type NoSlipState3D = NoSlipState<3>;

/// Planar state with scalar spin `s`, `S = s J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoSlipState2D {
    pub x: Vector<2>,
    pub u: Vector<2>,
    pub s: f64,
}

pub fn spin_2d(s: f64) -> Matrix<2> {
    [[0.0, -s], [s, 0.0]]
}

impl NoSlipState2D {
    pub fn general(&self) -> NoSlipState<2> {
        NoSlipState { x: self.x, u: self.u, spin: spin_2d(self.s) }
    }

    pub fn from_general(g: &NoSlipState<2>) -> Self {
        Self { x: g.x, u: g.u, s: g.spin[1][0] }
    }
}

impl<const N: usize> NoSlipState<N> {
    pub fn kinetic_energy(&self) -> f64 {
        kinetic_energy(&self.spin, &self.u)
    }

    /// Time reversal `(u, S) ↦ (-u, -S)`.
    pub fn reversed(&self) -> Self {
        Self { x: self.x, u: scale(&self.u, -1.0), spin: self.spin.map(|r| r.map(|v| -v)) }
    }
}

/// `⟨(S, u), (T, v)⟩ = ½ Tr(S Tᵀ) + u·v`.
pub fn metric<const N: usize>(s: &Matrix<N>, u: &Vector<N>, t: &Matrix<N>, v: &Vector<N>) -> f64 {
    skew_inner(s, t) + dot(u, v)
}

pub fn kinetic_energy<const N: usize>(s: &Matrix<N>, u: &Vector<N>) -> f64 {
    0.5 * metric(s, u, s, u)
}

/// The collision map in `(S, u)` form, without any checks.
pub fn collision_map<const N: usize>(
    s: &Matrix<N>,
    u: &Vector<N>,
    nu: &Vector<N>,
    p: &InertiaParams,
) -> (Matrix<N>, Vector<N>) {
    let pi = perp_projector(nu);
    let w = mat_vec(s, nu);
    let ubar = mat_vec(&pi, u);
    let sbar = mat_mul(&mat_mul(&pi, s), &pi);
    let (c, sb) = (p.c_beta(), p.s_beta());
    let mix = axpy(&scale(&ubar, sb), -c, &w);
    let s_new = mat_add(&sbar, &wedge(nu, &mix));
    let u_new = add(&scale(nu, -dot(u, nu)), &axpy(&scale(&ubar, c), sb, &w));
    (s_new, u_new)
}

fn check_normal<const N: usize>(nu: &Vector<N>) -> Result<()> {
    if N < 2 {
        return Err(Error::Domain("dimension must be at least 2"));
    }
    if (norm(nu) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("normal vector must have unit length"));
    }
    Ok(())
}

fn check_grazing(uhat: f64) -> Result<()> {
    if !(uhat.abs() >= GRAZING_TOL) {
        return Err(Error::Grazing { uhat });
    }
    Ok(())
}

/// No-slip collision in any dimension `N ≥ 2`.
pub fn collide_general<const N: usize>(
    s: &Matrix<N>,
    u: &Vector<N>,
    nu: &Vector<N>,
    p: &InertiaParams,
) -> Result<(Matrix<N>, Vector<N>)> {
    check_normal(nu)?;
    check_grazing(dot(u, nu))?;
    Ok(collision_map(s, u, nu, p))
}

/// Planar boundary components `(û, ū, s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parts2 {
    pub uhat: f64,
    pub ubar: f64,
    pub s: f64,
}

/// Tangent `τ = J ν` paired with the inward normal.
pub fn tangent_2d(nu: &Vector<2>) -> Vector<2> {
    [-nu[1], nu[0]]
}

pub fn decompose_2d(u: &Vector<2>, s: f64, nu: &Vector<2>) -> Parts2 {
    Parts2 { uhat: dot(u, nu), ubar: dot(u, &tangent_2d(nu)), s }
}

pub fn recompose_2d(p: &Parts2, nu: &Vector<2>) -> (Vector<2>, f64) {
    (axpy(&scale(nu, p.uhat), p.ubar, &tangent_2d(nu)), p.s)
}

pub fn collide_2d_parts(p: &Parts2, inertia: &InertiaParams) -> Result<Parts2> {
    check_grazing(p.uhat)?;
    let (c, sb) = (inertia.c_beta(), inertia.s_beta());
    Ok(Parts2 { uhat: -p.uhat, ubar: c * p.ubar + sb * p.s, s: sb * p.ubar - c * p.s })
}

pub fn collide_2d(state: &NoSlipState2D, nu: &Vector<2>, inertia: &InertiaParams) -> Result<NoSlipState2D> {
    check_normal(nu)?;
    let parts = collide_2d_parts(&decompose_2d(&state.u, state.s, nu), inertia)?;
    let (u, s) = recompose_2d(&parts, nu);
    Ok(NoSlipState2D { x: state.x, u, s })
}

/// Spatial boundary components `(s̄, û, ū, W)`, with `ū` and `W` expressed in
/// a positively oriented tangent basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parts3 {
    pub sbar: f64,
    pub uhat: f64,
    pub ubar: Vector<2>,
    pub w: Vector<2>,
}

/// Positively oriented tangent basis `(t1, t2)` at a point with inward normal `ν`.
/// On vertical walls `t2 = e3`.
pub fn tangent_basis(nu: &Vector<3>) -> (Vector<3>, Vector<3>) {
    let n = scale(nu, -1.0);
    let axis = if nu[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    // t2 is the projection of the reference axis; t1 completes the basis.
    let t2 = axpy(&axis, -dot(&axis, &n), &n);
    let t2 = scale(&t2, 1.0 / norm(&t2));
    let t1 = cross(&t2, &n);
    (t1, t2)
}

pub fn decompose_3d(u: &Vector<3>, spin: &Matrix<3>, nu: &Vector<3>) -> Parts3 {
    let (t1, t2) = tangent_basis(nu);
    let w = mat_vec(spin, nu);
    Parts3 {
        sbar: -dot(&vee(spin), nu),
        uhat: dot(u, nu),
        ubar: [dot(u, &t1), dot(u, &t2)],
        w: [dot(&w, &t1), dot(&w, &t2)],
    }
}

pub fn recompose_3d(p: &Parts3, nu: &Vector<3>) -> (Matrix<3>, Vector<3>) {
    let (t1, t2) = tangent_basis(nu);
    let n = scale(nu, -1.0);
    let w = axpy(&scale(&t1, p.w[0]), p.w[1], &t2);
    let spin = mat_add(&hat(&scale(&n, p.sbar)), &wedge(nu, &w));
    let u = add(&scale(nu, p.uhat), &axpy(&scale(&t1, p.ubar[0]), p.ubar[1], &t2));
    (spin, u)
}

pub fn collide_3d_parts(p: &Parts3, inertia: &InertiaParams) -> Result<Parts3> {
    check_grazing(p.uhat)?;
    let (c, sb) = (inertia.c_beta(), inertia.s_beta());
    Ok(Parts3 {
        sbar: p.sbar,
        uhat: -p.uhat,
        ubar: [c * p.ubar[0] + sb * p.w[0], c * p.ubar[1] + sb * p.w[1]],
        w: [sb * p.ubar[0] - c * p.w[0], sb * p.ubar[1] - c * p.w[1]],
    })
}

pub fn collide_3d(state: &NoSlipState3D, nu: &Vector<3>, inertia: &InertiaParams) -> Result<NoSlipState3D> {
    check_normal(nu)?;
    let parts = collide_3d_parts(&decompose_3d(&state.u, &state.spin, nu), inertia)?;
    let (spin, u) = recompose_3d(&parts, nu);
    Ok(NoSlipState { x: state.x, u, spin })
}

/// A state in the rolling subspace at a boundary point: `û = 0`, `W = γ ū`,
/// `S̄` arbitrary.
pub fn rolling_subspace_state<const N: usize>(
    sbar: &Matrix<N>,
    ubar: &Vector<N>,
    nu: &Vector<N>,
    p: &InertiaParams,
) -> (Matrix<N>, Vector<N>) {
    let pi = perp_projector(nu);
    let ubar = mat_vec(&pi, ubar);
    let sbar = mat_mul(&mat_mul(&pi, sbar), &pi);
    (mat_add(&sbar, &wedge(nu, &scale(&ubar, p.gamma()))), ubar)
}

/// Velocity of the material point of the ball touching the wall, `u - r U ν`,
/// given the (unscaled) angular velocity `U`.
pub fn contact_velocity(u: &Vector<3>, angular: &Matrix<3>, nu: &Vector<3>, r: f64) -> Vector<3> {
    sub(u, &scale(&mat_vec(angular, nu), r))
}

/// Whether the contact-point velocity has no component along the
/// cross-sectional tangent `tau` of a cylinder wall.
pub fn rolling_impact(u: &Vector<3>, angular: &Matrix<3>, nu: &Vector<3>, tau: &Vector<3>, r: f64, tol: f64) -> bool {
    dot(&contact_velocity(u, angular, nu, r), tau).abs() <= tol
}

/// Ballistic flight to the first boundary event.
pub fn flight<const N: usize, D: BilliardDomain<N>>(
    state: &NoSlipState<N>,
    domain: &D,
    g: f64,
    max_time: f64,
    from: Option<PieceId>,
) -> Result<crate::geometry::Hit<N>> {
    domain.first_hit(&state.x, &state.u, g, max_time, from)?.ok_or(Error::Timeout { t: max_time })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Collision<const N: usize> {
    /// Absolute time of the collision.
    pub t: f64,
    pub piece: PieceId,
    /// Inward unit normal.
    pub nu: Vector<N>,
    pub before: NoSlipState<N>,
    pub after: NoSlipState<N>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub initial: NoSlipState<N>,
    pub collisions: Vec<Collision<N>>,
    /// Why the run stopped early, if it did.
    pub termination: Option<Error>,
}

/// Options for a billiard run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub g: f64,
    pub n_events: usize,
    /// Longest admissible flight between collisions.
    pub max_flight: f64,
}

/// Alternates exact flights and no-slip collisions. `start_piece` names the
/// boundary piece the initial position lies on, if any.
///
/// Dynamics errors (corners, grazing, timeouts) end the run and are recorded
/// in [`Trajectory::termination`]; an initial point outside the table is an
/// error.
pub fn billiard_trajectory<const N: usize, D: BilliardDomain<N>>(
    initial: &NoSlipState<N>,
    start_piece: Option<PieceId>,
    domain: &D,
    inertia: &InertiaParams,
    opts: &FlowOptions,
) -> Result<Trajectory<N>> {
    if !domain.contains(&initial.x) {
        return Err(Error::Domain("initial position lies outside the table"));
    }
    let mut traj = Trajectory { initial: *initial, collisions: Vec::with_capacity(opts.n_events), termination: None };
    let mut state = *initial;
    let mut from = start_piece;
    let mut t = 0.0;
    while traj.collisions.len() < opts.n_events {
        let hit = match flight(&state, domain, opts.g, opts.max_flight, from) {
            Ok(h) => h,
            Err(e) => {
                traj.termination = Some(e);
                break;
            }
        };
        t += hit.t;
        let nu = domain.inward_normal(hit.piece, &hit.position);
        let before = NoSlipState { x: hit.position, u: hit.velocity, spin: state.spin };
        let (spin, u) = match collide_general(&before.spin, &before.u, &nu, inertia) {
            Ok(r) => r,
            Err(e) => {
                traj.termination = Some(e);
                break;
            }
        };
        let after = NoSlipState { x: hit.position, u, spin };
        traj.collisions.push(Collision { t, piece: hit.piece, nu, before, after });
        state = after;
        from = Some(hit.piece);
    }
    Ok(traj)
}

impl<const N: usize> Trajectory<N> {
    /// Times of the collisions.
    pub fn times(&self) -> Vec<f64> {
        self.collisions.iter().map(|c| c.t).collect()
    }

    /// Rows for the initial state and every post-collision state.
    pub fn to_trace(&self, g: f64) -> EventTrace {
        let mut tr = EventTrace::new(N, N);
        let row = |t: f64, k: usize, kind: EventKind, st: &NoSlipState<N>, parts: Option<BoundaryParts>| {
            let ke = st.kinetic_energy();
            TraceRow {
                t,
                event_index: k,
                kind,
                x: st.x.to_vec(),
                u: st.u.to_vec(),
                spin: upper_triangle(&st.spin),
                boundary: parts,
                energy: ke,
                region: None,
                chart: None,
                monitors: Some([ke, 0.0, ke, ke + g * st.x[N - 1]]),
            }
        };
        tr.push(row(0.0, 0, EventKind::Start, &self.initial, None));
        for (k, c) in self.collisions.iter().enumerate() {
            tr.push(row(c.t, k + 1, EventKind::Collision, &c.after, Some(boundary_parts(&c.after, &c.nu))));
        }
        tr
    }
}

/// `(û, |ū|, |W|, s̄)` of a state at a boundary point; `s̄ = 0` in the plane.
pub fn boundary_parts<const N: usize>(st: &NoSlipState<N>, nu: &Vector<N>) -> BoundaryParts {
    let pi = perp_projector(nu);
    let ubar = mat_vec(&pi, &st.u);
    let w = mat_vec(&st.spin, nu);
    let sbar_m = mat_mul(&mat_mul(&pi, &st.spin), &pi);
    // |S̄| in the metric; in 3D this equals |s̄| and the sign is recovered below.
    let mut sbar = skew_inner(&sbar_m, &sbar_m).max(0.0);
    sbar = libm::sqrt(sbar);
    if N == 3 {
        let mut s3 = [[0.0; 3]; 3];
        let mut n3 = [0.0; 3];
        for i in 0..3 {
            n3[i] = nu[i];
            for j in 0..3 {
                s3[i][j] = st.spin[i][j];
            }
        }
        sbar = -dot(&vee(&s3), &n3);
    }
    BoundaryParts { uhat: dot(&st.u, nu), ubar_norm: norm(&ubar), w_norm: norm(&w), sbar }
}

/// Planar (cross-sectional) part of a state in a vertical cylinder:
/// `(Π u, Π S Π)` with `Π` the projection along the axis `e3`.
pub fn project_axis(state: &NoSlipState3D, domain: &Domain3) -> Result<NoSlipState2D> {
    if domain.cross_section().is_none() {
        return Err(Error::Domain("axial projection needs a cylindrical table"));
    }
    Ok(NoSlipState2D { x: [state.x[0], state.x[1]], u: [state.u[0], state.u[1]], s: state.spin[1][0] })
}

/// Distance from `center` to the line through `p` with direction `u`.
pub fn chord_distance(p: &Vector<2>, u: &Vector<2>, center: &Vector<2>) -> f64 {
    let d = sub(p, center);
    (d[0] * u[1] - d[1] * u[0]).abs() / norm(u)
}

/// Lifts a planar state into the cylinder over it, with axial velocity `u3`
/// and no spin about horizontal axes.
pub fn lift_2d(state: &NoSlipState2D, x3: f64, u3: f64) -> NoSlipState3D {
    let mut spin = zeros::<3>();
    spin[0][1] = -state.s;
    spin[1][0] = state.s;
    NoSlipState { x: [state.x[0], state.x[1], x3], u: [state.u[0], state.u[1], u3], spin }
}

/// Convenience wrapper for planar tables.
pub fn billiard_trajectory_2d(
    initial: &NoSlipState2D,
    start_piece: Option<PieceId>,
    domain: &Domain2,
    inertia: &InertiaParams,
    opts: &FlowOptions,
) -> Result<Trajectory<2>> {
    billiard_trajectory(&initial.general(), start_piece, domain, inertia, opts)
}
