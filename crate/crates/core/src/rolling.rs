//! Rolling ("nonholonomic billiard") systems.
//!
//! * A 4-ball of radius `r` rolling on a solid cylinder `P = 𝒞 × ℝ ⊂ ℝ³`
//!   (see [`crate::geometry::TubeChart`]) under gravity `-g e3`. On the flat
//!   parts the motion is a parabola with constant spin; on the curved part
//!   the frame components obey the six rolling equations below.
//! * A 3-ball rolling on a vertical plate, whose center moves on a tube with
//!   stadium cross-section (the "vertical strip" system), with its exact
//!   piecewise solution.
//! * The flat-edge rolling map.
//!
//! # Frame components
//!
//! Velocities and spins are stored in an orthonormal tangent frame: `v_a =
//! X_a · v` and `S_ab = X_a · (S X_b)`. On the curved part the frame is
//! `(X1, X2, X3) = (τ, e2, e3)`; on the flat parts it is the coordinate frame
//! `(ê1, ê2, ê3)` of the cylinder. On the curved part, with `f_c, f_s` the
//! curvature factors and `η` the inertia parameter,
//!
//! ```text
//! φ' = v1/r     s' = v2/(1 - rκ sin φ)     x3' = v3
//! v1'  = -f_c v2² - η f_s v2 S12
//! v2'  =  f_c v1 v2 - (η/r) v1 S12
//! S12' =  η (f_s + 1/r) v1 v2
//! v3'  =  η (f_s v2 S23 - (1/r) v1 S13) - g
//! S13' = -f_c v2 S23 + (η/r) v1 v3
//! S23' =  f_c v2 S13 - η f_s v2 v3
//! ```
//!
//! The transversal energy `E1 = ½(v1² + v2² + S12²)` is conserved there and
//! `E2 = ½(v3² + S13² + S23²)` satisfies `E2' = -g v3`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{curvature_factors, BilliardDomain, Domain2, PieceId, Region, TubeChart};
use crate::inertia::InertiaParams;
use crate::integrate::{integrate, EventFn, IntegratorConfig, Outcome};
use crate::math::{cos, dot, sin, Matrix, Vector, PI};
use crate::trace::{EventKind, EventTrace, TraceRow};

/// State of the rolling 4-ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RollState {
    pub region: Region,
    /// Boundary piece and arclength (curved part only).
    pub piece: PieceId,
    pub s: f64,
    /// Angle around the rim, `0` at `𝒩+` and `π` at `𝒩-` (curved part only).
    pub phi: f64,
    /// Cross-sectional position of the center (flat parts only).
    pub xy: Vector<2>,
    pub x3: f64,
    pub v: Vector<3>,
    pub s12: f64,
    pub s13: f64,
    pub s23: f64,
}

impl Default for RollState {
    fn default() -> Self {
        Self {
            region: Region::FlatPlus,
            piece: PieceId { curve: 0, segment: 0 },
            s: 0.0,
            phi: 0.0,
            xy: [0.0; 2],
            x3: 0.0,
            v: [0.0; 3],
            s12: 0.0,
            s13: 0.0,
            s23: 0.0,
        }
    }
}

impl RollState {
    pub fn spin_matrix(&self) -> Matrix<3> {
        [[0.0, self.s12, self.s13], [-self.s12, 0.0, self.s23], [-self.s13, -self.s23, 0.0]]
    }

    fn set_spin(&mut self, m: &Matrix<3>) {
        self.s12 = m[0][1];
        self.s13 = m[0][2];
        self.s23 = m[1][2];
    }

    /// Time reversal `(v, S) ↦ (-v, -S)`.
    pub fn reversed(&self) -> Self {
        Self { v: self.v.map(|x| -x), s12: -self.s12, s13: -self.s13, s23: -self.s23, ..*self }
    }

    /// ODE vector `[s, φ, x3, v1, v2, v3, S12, S13, S23]` (curved part).
    pub fn to_vec(&self) -> [f64; 9] {
        [self.s, self.phi, self.x3, self.v[0], self.v[1], self.v[2], self.s12, self.s13, self.s23]
    }

    fn from_vec(piece: PieceId, y: &[f64; 9]) -> Self {
        Self {
            region: Region::Curved,
            piece,
            s: y[0],
            phi: y[1],
            xy: [0.0; 2],
            x3: y[2],
            v: [y[3], y[4], y[5]],
            s12: y[6],
            s13: y[7],
            s23: y[8],
        }
    }
}

/// Right-hand side of the rolling equations on the curved part, for the
/// vector layout of [`RollState::to_vec`].
pub fn cylinder4d_rhs(y: &[f64; 9], kappa: f64, r: f64, eta: f64, g: f64) -> Result<[f64; 9]> {
    let [_, phi, _, v1, v2, v3, s12, s13, s23] = *y;
    let den = 1.0 - r * kappa * sin(phi);
    let (fc, fs) = curvature_factors(kappa, phi, r)?;
    Ok([
        v2 / den,
        v1 / r,
        v3,
        -fc * v2 * v2 - eta * fs * v2 * s12,
        fc * v1 * v2 - eta / r * v1 * s12,
        eta * (fs * v2 * s23 - v1 * s13 / r) - g,
        eta * (fs + 1.0 / r) * v1 * v2,
        -fc * v2 * s23 + eta / r * v1 * v3,
        fc * v2 * s13 - eta * fs * v2 * v3,
    ])
}

/// Rolling of a 4-ball on a solid cylinder over a planar cross-section.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder4 {
    pub chart: TubeChart,
    pub inertia: InertiaParams,
    pub g: f64,
    pub cfg: IntegratorConfig,
}

/// Straight motion over a flat part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatLeg {
    pub t0: f64,
    pub t1: f64,
    pub region: Region,
    pub start: Vector<2>,
    pub velocity: Vector<2>,
    /// Whether the leg ended at the curved part (rather than at the horizon).
    pub complete: bool,
}

/// One visit to the curved part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgePass {
    pub t_in: f64,
    pub t_out: f64,
    pub entry: Region,
    pub exit: Region,
    /// Signed arclength travelled along the rim.
    pub arc_distance: f64,
    /// State on the curved part at entry and exit.
    pub state_in: RollState,
    pub state_out: RollState,
}

impl EdgePass {
    pub fn dwell(&self) -> f64 {
        self.t_out - self.t_in
    }

    /// The ball left towards the side it came from.
    pub fn friendly_roll(&self) -> bool {
        self.entry == self.exit
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RollRun {
    pub samples: Vec<(f64, RollState)>,
    pub legs: Vec<FlatLeg>,
    pub passes: Vec<EdgePass>,
    pub t_end: f64,
    pub end: RollState,
    pub termination: Option<Error>,
}

const FLAT_FRAME: [Vector<4>; 3] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];

fn spin_to_ambient(frame: &[Vector<4>; 3], m: &Matrix<3>) -> Matrix<4> {
    let mut out = [[0.0; 4]; 4];
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..4 {
                for j in 0..4 {
                    out[i][j] += m[a][b] * frame[a][i] * frame[b][j];
                }
            }
        }
    }
    out
}

fn spin_from_ambient(frame: &[Vector<4>; 3], s: &Matrix<4>) -> Matrix<3> {
    core::array::from_fn(|a| {
        core::array::from_fn(|b| {
            let mut acc = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    acc += frame[a][i] * s[i][j] * frame[b][j];
                }
            }
            acc
        })
    })
}

impl Cylinder4 {
    pub fn new(section: Domain2, r: f64, inertia: InertiaParams, g: f64, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::Domain("gravity must be finite and non-negative"));
        }
        Ok(Self { chart: TubeChart::new(section, r)?, inertia, g, cfg })
    }

    pub fn r(&self) -> f64 {
        self.chart.r
    }

    pub fn frame(&self, st: &RollState) -> [Vector<4>; 3] {
        match st.region {
            Region::Curved => self.chart.frame(st.piece, st.s, st.phi),
            _ => FLAT_FRAME,
        }
    }

    /// Center position in `ℝ⁴`.
    pub fn position(&self, st: &RollState) -> Vector<4> {
        match st.region {
            Region::Curved => self.chart.embed(st.piece, st.s, st.phi, st.x3),
            Region::FlatPlus => [st.xy[0], st.xy[1], st.x3, self.r()],
            Region::FlatMinus => [st.xy[0], st.xy[1], st.x3, -self.r()],
        }
    }

    /// Center velocity and spin as ambient objects in `ℝ⁴`.
    pub fn ambient(&self, st: &RollState) -> (Vector<4>, Matrix<4>) {
        let f = self.frame(st);
        let v = core::array::from_fn(|i| (0..3).map(|a| st.v[a] * f[a][i]).sum());
        (v, spin_to_ambient(&f, &st.spin_matrix()))
    }

    /// Re-expresses `st` in the frame of `target` (same tangent space).
    fn reframe(&self, st: &RollState, target: &mut RollState) {
        let (v4, s4) = self.ambient(st);
        let f = self.frame(target);
        target.v = core::array::from_fn(|a| dot(&f[a], &v4));
        target.set_spin(&spin_from_ambient(&f, &s4));
    }

    /// Curved-part state at the junction where a flat state sits on the boundary point `(piece, s)`.
    pub fn enter_edge(&self, st: &RollState, piece: PieceId, s: f64) -> RollState {
        let phi = if st.region == Region::FlatMinus { PI } else { 0.0 };
        let mut out = RollState { region: Region::Curved, piece, s, phi, xy: [0.0; 2], ..*st };
        self.reframe(st, &mut out);
        out
    }

    /// Flat state after leaving the curved part at `φ ∈ {0, π}`.
    pub fn leave_edge(&self, st: &RollState) -> RollState {
        let region = if st.phi < 0.5 * PI { Region::FlatPlus } else { Region::FlatMinus };
        let phi = if region == Region::FlatPlus { 0.0 } else { PI };
        let snapped = RollState { phi, ..*st };
        let xy = self.chart.section.segment(st.piece).point(st.s);
        let mut out = RollState { region, xy, ..snapped };
        self.reframe(&snapped, &mut out);
        out
    }

    /// Flat-part state on the top sheet from an ambient velocity `(v1, v2, v3)`
    /// and spin components in the coordinate frame.
    pub fn flat_state(xy: Vector<2>, x3: f64, v: Vector<3>, s12: f64, s13: f64, s23: f64) -> RollState {
        RollState { region: Region::FlatPlus, xy, x3, v, s12, s13, s23, ..Default::default() }
    }

    fn flat_at(&self, st: &RollState, tau: f64) -> RollState {
        let g = self.g;
        RollState {
            xy: [st.xy[0] + st.v[0] * tau, st.xy[1] + st.v[1] * tau],
            x3: st.x3 + st.v[2] * tau - 0.5 * g * tau * tau,
            v: [st.v[0], st.v[1], st.v[2] - g * tau],
            ..*st
        }
    }

    /// Runs the rolling flow from `initial` (at time `t0`) until `t_end` or
    /// until `max_passes` edge passes were completed. `from` names the
    /// boundary piece a flat initial state sits on, if any. Samples are taken
    /// at the absolute times `k·dt`.
    pub fn simulate(
        &self,
        initial: &RollState,
        t0: f64,
        t_end: f64,
        sample_dt: Option<f64>,
        max_passes: usize,
        from: Option<PieceId>,
    ) -> Result<RollRun> {
        let mut run = RollRun {
            samples: Vec::new(),
            legs: Vec::new(),
            passes: Vec::new(),
            t_end: t0,
            end: *initial,
            termination: None,
        };
        if initial.region != Region::Curved && !self.chart.section.contains(&initial.xy) {
            return Err(Error::Domain("initial position lies outside the cross-section"));
        }
        let mut t = t0;
        let mut st = *initial;
        let mut from = from;
        let mut next_sample = sample_dt.map(|dt| (libm::ceil(t0 / dt)) * dt);
        if let (Some(dt), Some(ns)) = (sample_dt, next_sample.as_mut()) {
            if *ns == t0 {
                run.samples.push((t0, st));
                *ns += dt;
            }
        }
        while t < t_end && run.passes.len() < max_passes {
            let step = if st.region == Region::Curved {
                self.curved_segment(&st, t, t_end, sample_dt, &mut next_sample, &mut run)
            } else {
                self.flat_segment(&st, t, t_end, sample_dt, &mut next_sample, &mut run, from)
            };
            match step {
                Ok((t_new, st_new, piece)) => {
                    t = t_new;
                    st = st_new;
                    from = piece;
                }
                Err(e) => {
                    run.termination = Some(e);
                    break;
                }
            }
        }
        run.t_end = t;
        run.end = st;
        Ok(run)
    }

    #[allow(clippy::too_many_arguments)]
    fn flat_segment(
        &self,
        st: &RollState,
        t: f64,
        t_end: f64,
        sample_dt: Option<f64>,
        next_sample: &mut Option<f64>,
        run: &mut RollRun,
        from: Option<PieceId>,
    ) -> Result<(f64, RollState, Option<PieceId>)> {
        let horizon = t_end - t;
        let hit = self.chart.section.first_hit_accel(&st.xy, &[st.v[0], st.v[1]], &[0.0, 0.0], horizon, from)?;
        let tau = hit.map_or(horizon, |h| h.0);
        if let (Some(dt), Some(ns)) = (sample_dt, next_sample.as_mut()) {
            while *ns <= t + tau {
                run.samples.push((*ns, self.flat_at(st, *ns - t)));
                *ns += dt;
            }
        }
        run.legs.push(FlatLeg {
            t0: t,
            t1: t + tau,
            region: st.region,
            start: st.xy,
            velocity: [st.v[0], st.v[1]],
            complete: hit.is_some(),
        });
        let arrived = self.flat_at(st, tau);
        match hit {
            None => Ok((t_end, arrived, None)),
            Some((_, piece, s)) => Ok((t + tau, self.enter_edge(&arrived, piece, s), Some(piece))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn curved_segment(
        &self,
        st: &RollState,
        t: f64,
        t_end: f64,
        sample_dt: Option<f64>,
        next_sample: &mut Option<f64>,
        run: &mut RollRun,
    ) -> Result<(f64, RollState, Option<PieceId>)> {
        let entry = if st.phi < 0.5 * PI { Region::FlatPlus } else { Region::FlatMinus };
        let (t_out, out, distance) = self.pass(st, t, t_end, sample_dt, next_sample, &mut run.samples)?;
        if out.region == Region::Curved {
            // Horizon reached on the rim.
            return Ok((t_out, out, None));
        }
        let rim = RollState { phi: if out.region == Region::FlatPlus { 0.0 } else { PI }, region: Region::Curved, ..out };
        let mut rim_state = rim;
        self.reframe(&out, &mut rim_state);
        run.passes.push(EdgePass {
            t_in: t,
            t_out,
            entry,
            exit: out.region,
            arc_distance: distance,
            state_in: *st,
            state_out: rim_state,
        });
        Ok((t_out, out, Some(rim.piece)))
    }

    /// Integrates the curved part from `st` until the ball leaves it or `t_end`.
    /// Returns the exit time, the state (flat if it left) and the arclength
    /// travelled along the rim.
    fn pass(
        &self,
        st: &RollState,
        t: f64,
        t_end: f64,
        sample_dt: Option<f64>,
        next_sample: &mut Option<f64>,
        samples: &mut Vec<(f64, RollState)>,
    ) -> Result<(f64, RollState, f64)> {
        let r = self.r();
        let eta = self.inertia.eta();
        let g = self.g;
        let mut t = t;
        let mut piece = st.piece;
        let mut y = st.to_vec();
        let mut distance = 0.0;
        loop {
            let seg = *self.chart.section.segment(piece);
            let kappa = seg.curvature();
            let bounded = !seg.is_full_circle();
            let (s_lo, s_hi) = (seg.s_min, seg.s_max);
            let top = |_: f64, y: &[f64; 9]| y[1];
            let bottom = |_: f64, y: &[f64; 9]| PI - y[1];
            let fwd = move |_: f64, y: &[f64; 9]| if bounded { s_hi - y[0] } else { 1.0 };
            let back = move |_: f64, y: &[f64; 9]| if bounded { y[0] - s_lo } else { 1.0 };
            let events: [EventFn<'_, 9>; 4] = [&top, &bottom, &fwd, &back];
            let mut raw = Vec::new();
            let s_start = y[0];
            let (outcome, _) = integrate(
                |_, y: &[f64; 9]| cylinder4d_rhs(y, kappa, r, eta, g),
                t,
                &y,
                t_end,
                &events,
                &self.cfg,
                sample_dt,
                &mut raw,
            )?;
            if let Some(ns) = next_sample.as_mut() {
                if let Some(last) = raw.last() {
                    *ns = last.0 + sample_dt.unwrap_or(0.0);
                }
            }
            samples.extend(raw.iter().map(|(ts, ys)| (*ts, RollState::from_vec(piece, ys))));
            match outcome {
                Outcome::End { t: te, y: ye } => {
                    distance += ye[0] - s_start;
                    return Ok((te, RollState::from_vec(piece, &ye), distance));
                }
                Outcome::Event(ev) => {
                    t = ev.t;
                    y = ev.y;
                    distance += y[0] - s_start;
                    match ev.id {
                        0 | 1 => {
                            y[1] = if ev.id == 0 { 0.0 } else { PI };
                            let on_rim = RollState::from_vec(piece, &y);
                            return Ok((t, self.leave_edge(&on_rim), distance));
                        }
                        _ => {
                            let curve = &self.chart.section.curves[piece.curve];
                            let forward = ev.id == 2;
                            let corner = if forward {
                                curve.corner_after(piece.segment)
                            } else {
                                curve.corner_before(piece.segment)
                            };
                            let next = if forward { curve.next(piece.segment) } else { curve.prev(piece.segment) };
                            let (Some(j), false) = (next, corner) else {
                                let p = seg.point(if forward { s_hi } else { s_lo });
                                return Err(Error::Corner { point: p });
                            };
                            piece = PieceId { curve: piece.curve, segment: j };
                            let ns = self.chart.section.segment(piece);
                            y[0] = if forward { ns.s_min } else { ns.s_max };
                        }
                    }
                }
            }
        }
    }

    /// A single pass over the curved part starting at the junction, with a
    /// time limit of `cfg.max_time`.
    pub fn edge_pass(&self, entry: &RollState) -> Result<EdgePass> {
        let side = if entry.phi < 0.5 * PI { Region::FlatPlus } else { Region::FlatMinus };
        let mut none = None;
        let mut samples = Vec::new();
        let (t_out, out, distance) = self.pass(entry, 0.0, self.cfg.max_time, None, &mut none, &mut samples)?;
        if out.region == Region::Curved {
            return Err(Error::Timeout { t: t_out });
        }
        let mut rim = RollState { phi: if out.region == Region::FlatPlus { 0.0 } else { PI }, region: Region::Curved, ..out };
        let snapshot = rim;
        self.reframe(&out, &mut rim);
        let _ = snapshot;
        Ok(EdgePass { t_in: 0.0, t_out, entry: side, exit: out.region, arc_distance: distance, state_in: *entry, state_out: rim })
    }
}

impl RollRun {
    /// Height samples `(t, x3)`.
    pub fn heights(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|(t, s)| (*t, s.x3)).collect()
    }

    pub fn to_trace(&self, sys: &Cylinder4) -> EventTrace {
        let mut tr = EventTrace::new(4, 3);
        let mut push = |t: f64, k: usize, kind: EventKind, st: &RollState| {
            let (v4, _) = sys.ambient(st);
            let m = crate::integrate::energy_monitor(st, sys.g);
            tr.push(TraceRow {
                t,
                event_index: k,
                kind,
                x: sys.position(st).to_vec(),
                u: v4.to_vec(),
                spin: alloc::vec![st.s12, st.s13, st.s23],
                boundary: None,
                energy: m[2],
                region: Some(st.region),
                chart: if st.region == Region::Curved { Some([st.s, st.phi, st.x3]) } else { None },
                monitors: Some(m),
            });
        };
        if let Some((t, s)) = self.samples.first() {
            push(*t, 0, EventKind::Start, s);
        }
        let mut k = 0;
        let mut passes = self.passes.iter().peekable();
        for (t, s) in self.samples.iter().skip(1) {
            while let Some(p) = passes.peek() {
                if p.t_in > *t {
                    break;
                }
                k += 1;
                push(p.t_in, k, EventKind::Junction, &p.state_in);
                k += 1;
                push(p.t_out, k, EventKind::Junction, &p.state_out);
                passes.next();
            }
            push(*t, k, EventKind::Sample, s);
        }
        push(self.t_end, k + 1, EventKind::End, &self.end);
        tr
    }
}

/// Components `(v_n, v̄, W, S̄)` of a rim state relative to the outward normal
/// `n = e1` of the cross-section at its boundary point, in the tangent basis
/// `(e2, e3)`. At `φ = 0` the outward normal is `X1`, at `φ = π` it is `-X1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeParts {
    pub v_n: f64,
    pub v_bar: Vector<2>,
    pub w: Vector<2>,
    pub s_bar: f64,
}

pub fn edge_parts(st: &RollState) -> EdgeParts {
    let sgn = if st.phi < 0.5 * PI { 1.0 } else { -1.0 };
    // W_a = X_a · (S n) = sgn S_a1 = -sgn S_1a.
    EdgeParts { v_n: sgn * st.v[0], v_bar: [st.v[1], st.v[2]], w: [-sgn * st.s12, -sgn * st.s13], s_bar: st.s23 }
}

/// The flat-edge rolling map: the rotation by `πη` accumulated while rolling
/// around a straight edge, read at the exit with the outward normal of the
/// exit point. Returns `(v̄', W', T)` with `T = π r / v_n` the time spent on
/// the edge; the normal speed simply changes sign.
pub fn edge_map_flat(v_bar: &[f64], w: &[f64], v_n: f64, inertia: &InertiaParams, r: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(v_n > 0.0) {
        return Err(Error::Domain("edge map needs a positive speed into the edge"));
    }
    if v_bar.len() != w.len() {
        return Err(Error::Domain("tangential velocity and W must have the same length"));
    }
    let th = PI * inertia.eta();
    let (c, s) = (cos(th), sin(th));
    let vb = v_bar.iter().zip(w).map(|(v, w)| c * v + s * w).collect();
    let wb = v_bar.iter().zip(w).map(|(v, w)| s * v - c * w).collect();
    Ok((vb, wb, PI * r / v_n))
}

/// Outcome of one edge pass compared with the matched no-slip collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitRow {
    pub r: f64,
    /// Largest component deviation of `(v_n, v̄, W, S̄)` at the exit.
    pub deviation: f64,
    pub dwell: f64,
    /// The ball returned to the side it came from; excluded from fits.
    pub friendly_roll: bool,
}

/// Rolls a 4-ball over the rim of the cylinder over `section` for each
/// radius, starting on the top sheet at the boundary point `(piece, s)`
/// with edge components `entry`, and compares the exit with the no-slip
/// collision map of the matched inertia.
pub fn noslip_limit_check(
    section: &Domain2,
    piece: PieceId,
    s: f64,
    entry: &EdgeParts,
    eta_roll: f64,
    radii: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<LimitRow>> {
    let inertia = InertiaParams::from_eta(eta_roll)?;
    let noslip = inertia.matched_noslip()?;
    let (c, sb) = (noslip.c_beta(), noslip.s_beta());
    let expect = EdgeParts {
        v_n: -entry.v_n,
        v_bar: [c * entry.v_bar[0] + sb * entry.w[0], c * entry.v_bar[1] + sb * entry.w[1]],
        w: [sb * entry.v_bar[0] - c * entry.w[0], sb * entry.v_bar[1] - c * entry.w[1]],
        s_bar: entry.s_bar,
    };
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let sys = Cylinder4::new(section.clone(), r, inertia, 0.0, *cfg)?;
        let st = RollState {
            region: Region::Curved,
            piece,
            s,
            phi: 0.0,
            xy: [0.0; 2],
            x3: 0.0,
            v: [entry.v_n, entry.v_bar[0], entry.v_bar[1]],
            s12: -entry.w[0],
            s13: -entry.w[1],
            s23: entry.s_bar,
        };
        let pass = sys.edge_pass(&st)?;
        let got = edge_parts(&pass.state_out);
        let dev = [
            got.v_n - expect.v_n,
            got.v_bar[0] - expect.v_bar[0],
            got.v_bar[1] - expect.v_bar[1],
            got.w[0] - expect.w[0],
            got.w[1] - expect.w[1],
            got.s_bar - expect.s_bar,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));
        rows.push(LimitRow { r, deviation: dev, dwell: pass.dwell(), friendly_roll: pass.friendly_roll() });
    }
    Ok(rows)
}

/// Cross-section of the tube traced by the center of a 3-ball rolling on a
/// vertical plate of width `width`: a stadium of two flat faces joined by
/// half circles of radius `r`. Arclength `σ` starts at the beginning of a
/// flat face; the axial direction carries gravity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stadium {
    pub width: f64,
    pub r: f64,
}

impl Stadium {
    pub fn new(width: f64, r: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && r.is_finite() && r > 0.0) {
            return Err(Error::Domain("stadium width and radius must be positive"));
        }
        Ok(Self { width, r })
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * self.width + 2.0 * PI * self.r
    }

    /// Piece boundaries `[0, L, L + πr, 2L + πr, 2L + 2πr]`.
    fn breaks(&self) -> [f64; 5] {
        let (l, a) = (self.width, PI * self.r);
        [0.0, l, l + a, 2.0 * l + a, 2.0 * l + 2.0 * a]
    }

    /// Index of the piece containing `σ` (moving in direction `dir`) and its curvature.
    fn piece(&self, sigma: f64, dir: f64) -> (usize, f64) {
        let p = self.perimeter();
        let x = sigma - p * libm::floor(sigma / p);
        let b = self.breaks();
        let mut k = (0..4).find(|&k| x >= b[k] && x < b[k + 1]).unwrap_or(3);
        if dir < 0.0 && x == b[k] {
            k = (k + 3) % 4;
        }
        (k, if k % 2 == 0 { 0.0 } else { -1.0 / self.r })
    }

    pub fn kappa(&self, sigma: f64) -> f64 {
        self.piece(sigma, 1.0).1
    }

    /// Curvature of the current piece and the time until the next break when
    /// moving with speed `u` along the stadium.
    fn next_break(&self, sigma: f64, u: f64) -> (f64, f64) {
        let p = self.perimeter();
        let mut x = sigma - p * libm::floor(sigma / p);
        let b = self.breaks();
        // σ within rounding of a break sits exactly on it
        if let Some(&bk) = b.iter().find(|bk| (*bk - x).abs() < 1e-12 * p) {
            x = if bk == b[4] { 0.0 } else { bk };
        }
        let (k, kappa) = self.piece(x, u);
        let dt = if u > 0.0 { (b[k + 1] - x) / u } else { (b[k] - x) / u };
        (kappa, dt)
    }
}

/// Right-hand side of the vertical-strip rolling system for `[σ, z, v1, v2, s]`:
/// `σ' = v1`, `z' = v2`, `v1' = 0`, `v2' = -η v1 κ s - g`, `s' = η v1 κ v2`.
pub fn cylinder3d_rhs(y: &[f64; 5], eta: f64, g: f64, kappa: f64) -> [f64; 5] {
    let [_, _, v1, v2, s] = *y;
    [v1, v2, 0.0, -eta * v1 * kappa * s - g, eta * v1 * kappa * v2]
}

/// Exact `(v2, s)` of the vertical-strip system at time `t`, starting from
/// `x0 = (v2, s)` at arclength `sigma0` with transversal speed `u`.
///
/// On a piece of constant curvature `κ` the system is `X' = k J X - (g, 0)`
/// with `k = η u κ`, solved by `X(τ) = R(kτ) X - ∫₀^τ R(kσ) dσ (g, 0)`.
pub fn strip_closed_form(eta: f64, u: f64, g: f64, stadium: &Stadium, sigma0: f64, x0: Vector<2>, t: f64) -> Result<Vector<2>> {
    if u == 0.0 || !u.is_finite() {
        return Err(Error::Degenerate("zero transversal speed never reaches the curved pieces"));
    }
    if t < 0.0 {
        return Err(Error::Domain("closed form is evaluated forward in time"));
    }
    let mut x = x0;
    let mut sigma = sigma0;
    let mut left = t;
    while left > 0.0 {
        let (kappa, dt) = stadium.next_break(sigma, u);
        let dt = if dt <= 0.0 { stadium.perimeter() / u.abs() * 1e-16 } else { dt };
        let tau = left.min(dt);
        x = piece_flow(eta * u * kappa, g, &x, tau);
        sigma += u * tau;
        left -= tau;
        if tau == dt {
            // Land exactly on the break to avoid drift in the piece lookup.
            sigma = snap_break(stadium, sigma);
        }
    }
    Ok(x)
}

fn snap_break(st: &Stadium, sigma: f64) -> f64 {
    let p = st.perimeter();
    let base = p * libm::floor(sigma / p + 1e-12);
    let x = sigma - base;
    st.breaks().iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())).map_or(sigma, |b| {
        if (b - x).abs() < 1e-9 {
            base + b
        } else {
            sigma
        }
    })
}

fn piece_flow(k: f64, g: f64, x: &Vector<2>, tau: f64) -> Vector<2> {
    let th = k * tau;
    let (c, s) = (cos(th), sin(th));
    let rx = [c * x[0] - s * x[1], s * x[0] + c * x[1]];
    // ∫₀^τ R(kσ) dσ applied to (g, 0): first column of the integral.
    let (i11, i21) = if k == 0.0 { (tau, 0.0) } else { (s / k, (1.0 - c) / k) };
    [rx[0] - i11 * g, rx[1] - i21 * g]
}

/// Integrates the vertical-strip system numerically, piece by piece, and
/// returns the states at the requested (increasing) times.
pub fn simulate_stadium(
    eta: f64,
    g: f64,
    stadium: &Stadium,
    y0: &[f64; 5],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<[f64; 5]>> {
    let u = y0[2];
    if u == 0.0 {
        return Err(Error::Degenerate("zero transversal speed never reaches the curved pieces"));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = *y0;
    let mut idx = 0;
    let t_last = times.last().copied().unwrap_or(0.0);
    while idx < times.len() {
        let (kappa, dt) = stadium.next_break(y[0], u);
        let t_piece = (t + dt).min(t_last);
        while idx < times.len() && times[idx] <= t_piece {
            let target = times[idx];
            let mut none = Vec::new();
            let (o, _) = integrate(|_, y: &[f64; 5]| Ok(cylinder3d_rhs(y, eta, g, kappa)), t, &y, target, &[], cfg, None, &mut none)?;
            let Outcome::End { y: ys, .. } = o else { unreachable!() };
            out.push(ys);
            idx += 1;
        }
        if idx >= times.len() {
            break;
        }
        let mut none = Vec::new();
        let (o, _) = integrate(|_, y: &[f64; 5]| Ok(cylinder3d_rhs(y, eta, g, kappa)), t, &y, t + dt, &[], cfg, None, &mut none)?;
        let Outcome::End { y: ye, .. } = o else { unreachable!() };
        y = ye;
        y[0] = snap_break(stadium, y[0]);
        t += dt;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sqrt;

    #[test]
    fn stadium_run_crosses_breaks_hit_within_rounding() {
        let st = Stadium::new(1.0, 0.5).unwrap();
        let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.1).collect();
        let ys = simulate_stadium(0.45, 1.0, &st, &[0.25, 0.0, 1.0, 0.3, -0.2], &times, &IntegratorConfig::default()).unwrap();
        assert_eq!(ys.len(), times.len());
        assert!((ys[500][0] - 50.25).abs() < 1e-9);
    }

    #[test]
    fn rhs_reduces_to_strip_system_for_flat_edges() {
        let eta = 0.4;
        let r = 0.5;
        let y = [0.1, 0.7, 0.0, 1.2, -0.3, 0.8, 0.25, -0.6, 0.9];
        let d = cylinder4d_rhs(&y, 0.0, r, eta, 2.0).unwrap();
        let zeta = eta * y[3] / r;
        assert_eq!(d[3], 0.0);
        assert!((d[4] + zeta * y[6]).abs() < 1e-15);
        assert!((d[6] - zeta * y[4]).abs() < 1e-15);
        assert!((d[5] + zeta * y[7] + 2.0).abs() < 1e-15);
        assert!((d[7] - zeta * y[5]).abs() < 1e-15);
        assert_eq!(d[8], 0.0);
    }

    #[test]
    fn rhs_energy_identity() {
        let y = [0.3, 1.1, 2.0, 0.7, -1.3, 0.4, 0.5, -0.2, 0.8];
        let g = 1.5;
        let d = cylinder4d_rhs(&y, -1.0, 0.1, 0.6, g).unwrap();
        let de1 = y[3] * d[3] + y[4] * d[4] + y[6] * d[6];
        let de2 = y[5] * d[5] + y[7] * d[7] + y[8] * d[8];
        assert!(de1.abs() < 1e-13);
        assert!((de2 + g * y[5]).abs() < 1e-13);
    }

    #[test]
    fn edge_map_examples() {
        let p0 = InertiaParams::from_eta(0.0).unwrap();
        let (vb, w, t) = edge_map_flat(&[0.3, -0.2], &[0.5, 0.1], 1.0, &p0, 0.1).unwrap();
        assert_eq!(vb, alloc::vec![0.3, -0.2]);
        assert_eq!(w, alloc::vec![-0.5, -0.1]);
        assert!((t - 0.1 * PI).abs() < 1e-15);
        let ph = InertiaParams::from_eta(0.5).unwrap();
        let (vb, w, _) = edge_map_flat(&[1.0], &[0.0], 2.0, &ph, 1.0).unwrap();
        assert!(vb[0].abs() < 1e-15 && (w[0] - 1.0).abs() < 1e-15);
        assert!(edge_map_flat(&[1.0], &[0.0], 0.0, &ph, 1.0).is_err());
    }

    #[test]
    fn closed_form_half_arc_is_rotation() {
        let st = Stadium::new(1.0, 0.5).unwrap();
        let eta = 0.37;
        let u = 1.3;
        let x0 = [0.4, -0.7];
        let t = PI * st.r / u;
        let x = strip_closed_form(eta, u, 0.0, &st, st.width, x0, t).unwrap();
        let th = PI * eta;
        assert!((x[0] - (cos(th) * x0[0] + sin(th) * x0[1])).abs() < 1e-12);
        assert!((x[1] - (-sin(th) * x0[0] + cos(th) * x0[1])).abs() < 1e-12);
        // decoupled free fall
        let x = strip_closed_form(0.0, u, 5.0, &st, 0.0, [0.2, 0.3], 7.0).unwrap();
        assert!((x[0] - (0.2 - 35.0)).abs() < 1e-12 && x[1] == 0.3);
        assert!(strip_closed_form(0.5, 0.0, 1.0, &st, 0.0, x0, 1.0).is_err());
    }

    #[test]
    fn flat_strip_pass_time_and_rotation() {
        let eta = 0.3;
        let r = 0.2;
        let sys = Cylinder4::new(Domain2::strip(1.0).unwrap(), r, InertiaParams::from_eta(eta).unwrap(), 0.0, IntegratorConfig::default())
            .unwrap();
        let entry = RollState {
            region: Region::Curved,
            piece: PieceId { curve: 0, segment: 0 },
            v: [1.0, 0.3, -0.2],
            s12: 0.5,
            s13: 0.1,
            s23: 0.7,
            ..Default::default()
        };
        let pass = sys.edge_pass(&entry).unwrap();
        assert!((pass.dwell() - PI * r).abs() < 1e-11);
        assert_eq!(pass.exit, Region::FlatMinus);
        let a = edge_parts(&entry);
        let b = edge_parts(&pass.state_out);
        let (vb, w, _) = edge_map_flat(&a.v_bar, &a.w, a.v_n, &sys.inertia, r).unwrap();
        assert!((b.v_n + a.v_n).abs() < 1e-12);
        for i in 0..2 {
            assert!((b.v_bar[i] - vb[i]).abs() < 1e-10);
            assert!((b.w[i] - w[i]).abs() < 1e-10);
        }
        assert!((b.s_bar - a.s_bar).abs() < 1e-12);
        let _ = sqrt(2.0);
    }
}
