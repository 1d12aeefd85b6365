//! Adaptive Dormand-Prince 5(4) stepping with event location.
//!
//! Events are scalar functions `g(t, y)`; an event fires when `g` changes
//! from positive to non-positive across an accepted step. The crossing is
//! bracketed and refined with the Illinois variant of regula falsi, each
//! trial state being an exact Runge-Kutta substep from the start of the
//! bracketing step. Samples on a fixed time grid are produced the same way,
//! so sampled values carry the full fifth-order accuracy.
//!
//! Everything is deterministic: identical inputs give identical outputs.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{powf, sqrt};
use crate::rolling::RollState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Residual `|g|` accepted at a located event.
    pub event_tol: f64,
    pub max_events: usize,
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.1, event_tol: 1e-12, max_events: 100_000, max_time: 1e4 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step) && ok(self.event_tol) && ok(self.max_time) {
            Ok(())
        } else {
            Err(Error::Domain("integrator tolerances, max_step and max_time must be positive"))
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    core::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// One Dormand-Prince step. Returns the fifth-order solution, the embedded
/// error estimate and the derivative at the end point.
pub fn dopri_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<([f64; N], [f64; N], [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &lin(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &lin(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(t + C4 * h, &lin(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(t + C5 * h, &lin(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(t + h, &lin(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = lin(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new)?;
    let err = core::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    Ok((y_new, err, k7))
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc) * (err[i] / sc);
    }
    sqrt(acc / N.max(1) as f64)
}

fn rms<const N: usize>(v: &[f64; N], y: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        acc += (v[i] / sc) * (v[i] / sc);
    }
    sqrt(acc / N.max(1) as f64)
}

/// Starting step size (Hairer, Nørsett and Wanner, II.4).
fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], cfg: &IntegratorConfig) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let d0 = rms(y, y, cfg);
    let d1 = rms(k1, y, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.max_step);
    let y1 = lin(y, h0, &[(1.0, k1)]);
    let k2 = f(t + h0, &y1)?;
    let diff: [f64; N] = core::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = rms(&diff, y, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { powf(0.01 / d1.max(d2), 0.2) };
    Ok((100.0 * h0).min(h1).min(cfg.max_step))
}

/// An event function `g(t, y)`; it fires when `g` goes from `> 0` to `≤ 0`.
pub type EventFn<'a, const N: usize> = &'a dyn Fn(f64, &[f64; N]) -> f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventHit<const N: usize> {
    pub id: usize,
    pub t: f64,
    pub y: [f64; N],
    /// Final bracketing interval of the event time.
    pub bracket: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outcome<const N: usize> {
    Event(EventHit<N>),
    /// The end time was reached without an event.
    End { t: f64, y: [f64; N] },
}

/// Statistics of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates from `t0` until the first event or `t_end`, whichever comes
/// first. When `sample_dt` is given, states at the absolute times `k·dt` in
/// `(t0, t_stop]` are appended to `samples`.
#[allow(clippy::too_many_arguments)]
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: &[f64; N],
    t_end: f64,
    events: &[EventFn<'_, N>],
    cfg: &IntegratorConfig,
    sample_dt: Option<f64>,
    samples: &mut Vec<(f64, [f64; N])>,
) -> Result<(Outcome<N>, Stats)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    cfg.validate()?;
    let mut stats = Stats::default();
    let mut counted = |t: f64, y: &[f64; N]| {
        stats.evaluations += 1;
        f(t, y)
    };
    let mut t = t0;
    let mut y = *y0;
    if t_end <= t0 {
        return Ok((Outcome::End { t, y }, stats));
    }
    let mut k1 = counted(t, &y)?;
    let mut h = initial_step(&mut counted, t, &y, &k1, cfg)?.min(t_end - t);
    let mut g_prev: Vec<f64> = events.iter().map(|g| g(t, &y)).collect();
    let mut next_sample = sample_dt.map(|dt| (libm::floor(t0 / dt) + 1.0) * dt);
    let mut rejected_last = false;

    loop {
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h };
        let (y_new, err, k7) = dopri_step(&mut counted, t, &y, &k1, h_try)?;
        let en = error_norm(&err, &y, &y_new, cfg);
        if !(en <= 1.0) {
            stats.rejected += 1;
            let fac = if en.is_finite() { (0.9 * powf(en, -0.2)).max(0.2) } else { 0.2 };
            h = h_try * fac;
            rejected_last = true;
            continue;
        }
        stats.accepted += 1;
        let t_new = t + h_try;

        // Earliest falling crossing among the events.
        let mut found: Option<EventHit<N>> = None;
        for (id, g) in events.iter().enumerate() {
            let g_new = g(t_new, &y_new);
            if g_prev[id] > 0.0 && g_new <= 0.0 {
                let hit = locate(&mut counted, t, &y, &k1, h_try, g_prev[id], g_new, *g, cfg)?;
                if found.map_or(true, |f| hit.0 < f.t) {
                    found = Some(EventHit { id, t: hit.0, y: hit.1, bracket: hit.2 });
                }
            }
        }
        let t_stop = found.map_or(t_new, |e| e.t);
        if let (Some(dt), Some(ns)) = (sample_dt, next_sample.as_mut()) {
            while *ns <= t_stop {
                let ys = if *ns == t_new {
                    y_new
                } else {
                    dopri_step(&mut counted, t, &y, &k1, *ns - t)?.0
                };
                samples.push((*ns, ys));
                *ns += dt;
            }
        }
        if let Some(ev) = found {
            return Ok((Outcome::Event(ev), stats));
        }
        for (id, g) in events.iter().enumerate() {
            g_prev[id] = g(t_new, &y_new);
        }
        t = t_new;
        y = y_new;
        k1 = k7;
        if last {
            return Ok((Outcome::End { t, y }, stats));
        }
        let mut fac = (0.9 * powf(en.max(1e-10), -0.2)).clamp(0.2, 5.0);
        if rejected_last {
            fac = fac.min(1.0);
        }
        rejected_last = false;
        h = (h_try * fac).min(cfg.max_step);
    }
}

/// Refines a sign change of `g` inside the step `[t, t + h]`.
#[allow(clippy::too_many_arguments)]
fn locate<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    g_a: f64,
    g_b: f64,
    g: EventFn<'_, N>,
    cfg: &IntegratorConfig,
) -> Result<(f64, [f64; N], (f64, f64))>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let (mut a, mut b) = (0.0, h);
    let (mut fa, mut fb) = (g_a, g_b);
    let mut y_b = dopri_step(f, t, y, k1, h)?.0;
    let mut side = 0i8;
    for _ in 0..200 {
        if fb.abs() <= cfg.event_tol || b - a <= 4.0 * f64::EPSILON * (t + b).abs().max(1.0) {
            break;
        }
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let y_m = dopri_step(f, t, y, k1, m)?.0;
        let fm = g(t + m, &y_m);
        if fm > 0.0 {
            a = m;
            fa = fm;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = m;
            fb = fm;
            y_b = y_m;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    Ok((t + b, y_b, (t + a, t + b)))
}

/// Like [`integrate`], but a missing event before `t0 + cfg.max_time` is a
/// timeout error.
pub fn integrate_to_event<const N: usize, F>(
    f: F,
    t0: f64,
    y0: &[f64; N],
    events: &[EventFn<'_, N>],
    cfg: &IntegratorConfig,
) -> Result<EventHit<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut none = Vec::new();
    match integrate(f, t0, y0, t0 + cfg.max_time, events, cfg, None, &mut none)?.0 {
        Outcome::Event(e) => Ok(e),
        Outcome::End { t, .. } => Err(Error::Timeout { t }),
    }
}

/// Fixed-step fifth-order integration (no error control).
pub fn integrate_fixed<const N: usize, F>(mut f: F, t0: f64, y0: &[f64; N], t_end: f64, steps: usize) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let h = (t_end - t0) / steps.max(1) as f64;
    let mut y = *y0;
    for k in 0..steps.max(1) {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &y)?;
        y = dopri_step(&mut f, t, &y, &k1, h)?.0;
    }
    Ok(y)
}

/// `(E1, E2, E_total, E_total + g x3)` of a rolling state: transversal
/// energy `½(v1² + v2² + S12²)`, longitudinal energy `½(v3² + S13² + S23²)`.
pub fn energy_monitor(state: &RollState, g: f64) -> [f64; 4] {
    let e1 = 0.5 * (state.v[0] * state.v[0] + state.v[1] * state.v[1] + state.s12 * state.s12);
    let e2 = 0.5 * (state.v[2] * state.v[2] + state.s13 * state.s13 + state.s23 * state.s23);
    [e1, e2, e1 + e2, e1 + e2 + g * state.x3]
}
