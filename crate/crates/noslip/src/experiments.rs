//! Named experiment runners. Each takes an [`ExperimentSpec`] (reference
//! parameters by default, overridable from a config file), runs its sweep in
//! parallel with results kept in sweep order, and can write one CSV of series
//! plus one CSV summary, both carrying the resolved spec as a header.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use noslip_core::geometry::{BilliardDomain, Domain2, Domain3, PieceId, Region};
use noslip_core::integrate::IntegratorConfig;
use noslip_core::noslip::{
    billiard_trajectory, billiard_trajectory_2d, chord_distance, FlowOptions, NoSlipState, NoSlipState2D,
};
use noslip_core::rolling::{noslip_limit_check, Cylinder4, EdgeParts, LimitRow, RollRun, RollState};
use noslip_core::InertiaParams;

use crate::csvio::{fmt_f64, write_table};
use crate::error::{AppError, AppResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    /// Height of a 4-ball rolling around two parallel plates (strip), per η.
    TwoPlates,
    /// Heights on the strip for decreasing ball radius.
    RadiusLimit,
    /// Dwell time and rim distance over a grid of junction states.
    EdgePortrait,
    /// Caustics and height on the circular cylinder.
    CausticHeight,
    /// Falling no-slip ball in a cylinder for shrinking bounce steps.
    Zigzag,
    /// Chord distances of a planar no-slip disc trajectory.
    DiscCaustic,
    /// Edge passes against the no-slip collision map for shrinking radius.
    LimitCheck,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::TwoPlates,
        ExperimentName::RadiusLimit,
        ExperimentName::EdgePortrait,
        ExperimentName::CausticHeight,
        ExperimentName::Zigzag,
        ExperimentName::DiscCaustic,
        ExperimentName::LimitCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::TwoPlates => "two-plates",
            ExperimentName::RadiusLimit => "radius-limit",
            ExperimentName::EdgePortrait => "edge-portrait",
            ExperimentName::CausticHeight => "caustic-height",
            ExperimentName::Zigzag => "zigzag",
            ExperimentName::DiscCaustic => "disc-caustic",
            ExperimentName::LimitCheck => "limit-check",
        }
    }
}

impl FromStr for ExperimentName {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| AppError::Parse(format!("unknown experiment {s:?}")))
    }
}

/// Fully resolved experiment parameters.
///
/// Vectors are in the coordinate frame of the flat part (rolling) or of the
/// table (no-slip); spins are listed as `(S12, S13, S23)`. For `limit-check`
/// `velocity` holds `(v_n, v̄1, v̄2)` and `spin` holds `(W1, W2, S̄)` at the
/// junction, relative to the outward normal of the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    /// Strip width or disc radius.
    pub size: f64,
    pub ball_radius: f64,
    pub g: f64,
    /// Rolling inertia parameters swept (or used) by rolling experiments.
    pub etas: Vec<f64>,
    /// No-slip inertia parameters for no-slip experiments.
    pub gammas: Vec<f64>,
    pub radii: Vec<f64>,
    /// Scale factors of the initial normal speed (zigzag).
    pub scales: Vec<f64>,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Second initial velocity, for the comparison run of `caustic-height`.
    pub perturbed_velocity: [f64; 3],
    pub spin: [f64; 3],
    pub horizon: f64,
    pub sample_dt: f64,
    /// Cells per axis of the edge portrait.
    pub grid: usize,
    /// Number of collisions for no-slip runs.
    pub events: usize,
    /// Relative tolerance of the bounded-height test.
    pub bounded_tol: f64,
}

macro_rules! overrides {
    ($($f:ident: $t:ty),* $(,)?) => {
        /// Optional overrides of an [`ExperimentSpec`]; only `name` is required.
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ExperimentOverrides {
            pub name: ExperimentName,
            $(#[serde(default, skip_serializing_if = "Option::is_none")] pub $f: Option<$t>,)*
        }

        impl ExperimentSpec {
            pub fn from_overrides(o: &ExperimentOverrides) -> AppResult<Self> {
                let mut s = Self::defaults(o.name);
                $(if let Some(v) = &o.$f { s.$f = v.clone(); })*
                s.validate()?;
                Ok(s)
            }

            /// Overrides reproducing this spec exactly.
            pub fn to_overrides(&self) -> ExperimentOverrides {
                ExperimentOverrides { name: self.name, $($f: Some(self.$f.clone()),)* }
            }
        }
    };
}

overrides! {
    size: f64, ball_radius: f64, g: f64, etas: Vec<f64>, gammas: Vec<f64>, radii: Vec<f64>, scales: Vec<f64>,
    position: [f64; 3], velocity: [f64; 3], perturbed_velocity: [f64; 3], spin: [f64; 3], horizon: f64,
    sample_dt: f64, grid: usize, events: usize, bounded_tol: f64,
}

impl ExperimentSpec {
    /// Reference parameters of the experiment.
    pub fn defaults(name: ExperimentName) -> Self {
        let base = Self {
            name,
            size: 1.0,
            ball_radius: 0.1,
            g: 0.0,
            etas: vec![],
            gammas: vec![],
            radii: vec![],
            scales: vec![],
            position: [0.0; 3],
            velocity: [0.0; 3],
            perturbed_velocity: [0.0; 3],
            spin: [0.0; 3],
            horizon: 20.0,
            sample_dt: 0.01,
            grid: 0,
            events: 0,
            bounded_tol: 0.05,
        };
        match name {
            // Rolling towards the left plate (outward normal -ê1) with unit
            // normal speed, v3 = -1 and S13 = -0.5 relative to that plate,
            // i.e. +0.5 in the coordinate frame.
            ExperimentName::TwoPlates => Self {
                ball_radius: 0.5,
                g: 5.0,
                etas: vec![0.0, 0.3, 0.577, 0.9],
                velocity: [-1.0, 0.0, -1.0],
                spin: [0.0, 0.5, 0.0],
                horizon: 200.0,
                ..base
            },
            ExperimentName::RadiusLimit => Self {
                g: 1.0,
                etas: vec![0.39],
                radii: vec![0.4, 0.2, 0.1, 0.05],
                velocity: [-1.0, 0.0, -1.0],
                horizon: 20.0,
                ..base
            },
            ExperimentName::EdgePortrait => Self { ball_radius: 1.0, etas: vec![0.39183], grid: 41, horizon: 100.0, ..base },
            ExperimentName::CausticHeight => Self {
                g: 1.0,
                etas: vec![0.39183],
                velocity: [-0.2, 1.0, 0.0],
                perturbed_velocity: [-2.0, 1.0, 0.0],
                spin: [0.61, 0.0, -1.0],
                horizon: 200.0,
                sample_dt: 0.05,
                ..base
            },
            ExperimentName::Zigzag => Self {
                g: 1.0,
                gammas: vec![core::f64::consts::FRAC_1_SQRT_2],
                scales: vec![1.0, 0.5, 0.25],
                position: [1.0, 0.0, 0.0],
                velocity: [-0.2, 1.0, 0.0],
                horizon: 50.0,
                events: 100_000,
                ..base
            },
            ExperimentName::DiscCaustic => Self {
                gammas: vec![core::f64::consts::FRAC_1_SQRT_2, 0.0],
                position: [0.3, 0.0, 0.0],
                velocity: [0.2, 1.0, 0.0],
                spin: [-0.5, 0.0, 0.0],
                events: 200,
                ..base
            },
            ExperimentName::LimitCheck => Self {
                etas: vec![0.39183],
                radii: vec![0.2, 0.1, 0.05, 0.025],
                velocity: [1.0, 0.3, 0.2],
                spin: [0.5, -0.4, 0.1],
                ..base
            },
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: &str| Err(AppError::Parse(format!("experiment: {m}")));
        let all: Vec<f64> = [self.size, self.ball_radius, self.g, self.horizon, self.sample_dt, self.bounded_tol]
            .into_iter()
            .chain(self.etas.iter().copied())
            .chain(self.gammas.iter().copied())
            .chain(self.radii.iter().copied())
            .chain(self.scales.iter().copied())
            .chain(self.position)
            .chain(self.velocity)
            .chain(self.perturbed_velocity)
            .chain(self.spin)
            .collect();
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all numeric fields must be finite");
        }
        if self.size <= 0.0 || self.ball_radius <= 0.0 || self.horizon <= 0.0 || self.sample_dt <= 0.0 {
            return bad("size, ball_radius, horizon and sample_dt must be positive");
        }
        if self.g < 0.0 || self.bounded_tol < 0.0 {
            return bad("g and bounded_tol must be non-negative");
        }
        if self.radii.iter().any(|r| *r <= 0.0) || self.scales.iter().any(|r| *r <= 0.0) {
            return bad("radii and scales must be positive");
        }
        if self.etas.iter().any(|e| !(0.0..1.0).contains(e)) || self.gammas.iter().any(|g| *g < 0.0) {
            return bad("etas must lie in [0, 1) and gammas must be non-negative");
        }
        use ExperimentName::*;
        let needs = |list: &[f64], min: usize, what: &str| {
            if list.len() < min {
                bad(&format!("{} needs at least {min} value(s) in {what}", self.name.as_str()))
            } else {
                Ok(())
            }
        };
        match self.name {
            TwoPlates | EdgePortrait | CausticHeight => needs(&self.etas, 1, "etas"),
            RadiusLimit | LimitCheck => needs(&self.etas, 1, "etas").and(needs(&self.radii, 2, "radii")),
            Zigzag => needs(&self.gammas, 1, "gammas").and(needs(&self.scales, 1, "scales")),
            DiscCaustic => needs(&self.gammas, 1, "gammas"),
        }?;
        if self.name == EdgePortrait && self.grid < 2 {
            return bad("edge-portrait needs grid >= 2");
        }
        Ok(())
    }

    /// Header lines: the spec as an `[experiment]` table.
    pub fn header(&self) -> Vec<String> {
        #[derive(Serialize)]
        struct Wrap<'a> {
            mode: &'static str,
            experiment: &'a ExperimentOverrides,
        }
        let ov = self.to_overrides();
        toml::to_string(&Wrap { mode: "experiment", experiment: &ov })
            .expect("spec serializes")
            .lines()
            .map(String::from)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Series analysis

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedReport {
    pub verdict: Verdict,
    /// Mean spacing of upward crossings of the mean.
    pub period: Option<f64>,
    pub range_first: f64,
    pub range_second: f64,
    pub extrema: usize,
    /// Running minimum and maximum.
    pub envelope: Vec<(f64, f64)>,
}

fn range(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    hi - lo
}

/// Classifies a uniformly sampled series: bounded iff the range over the
/// second half does not exceed the range over the first half by more than
/// the factor `1 + tol`. With fewer than four local extrema the series is
/// inconclusive unless its range grows.
pub fn detect_bounded(times: &[f64], values: &[f64], tol: f64) -> BoundedReport {
    let n = values.len().min(times.len());
    let mut envelope = Vec::with_capacity(n);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &values[..n] {
        lo = lo.min(*v);
        hi = hi.max(*v);
        envelope.push((lo, hi));
    }
    if n < 4 {
        return BoundedReport {
            verdict: Verdict::Inconclusive,
            period: None,
            range_first: 0.0,
            range_second: 0.0,
            extrema: 0,
            envelope,
        };
    }
    // sign changes of the nonzero differences, so flat tops count once
    let mut extrema = 0;
    let mut last = 0.0f64;
    for w in values[..n].windows(2) {
        let d = w[1] - w[0];
        if d != 0.0 {
            if d * last < 0.0 {
                extrema += 1;
            }
            last = d;
        }
    }
    let (range_first, range_second) = (range(&values[..n / 2]), range(&values[n / 2..n]));
    let grows = range_second > range_first * (1.0 + tol);
    let verdict = if grows {
        Verdict::Unbounded
    } else if extrema < 4 {
        Verdict::Inconclusive
    } else {
        Verdict::Bounded
    };
    let mean = values[..n].iter().sum::<f64>() / n as f64;
    let ups: Vec<f64> = (1..n)
        .filter(|&i| values[i - 1] - mean < 0.0 && values[i] - mean >= 0.0)
        .map(|i| {
            let (a, b) = (values[i - 1] - mean, values[i] - mean);
            times[i - 1] + (times[i] - times[i - 1]) * (-a) / (b - a)
        })
        .collect();
    let period = (ups.len() >= 2).then(|| (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64);
    BoundedReport { verdict, period, range_first, range_second, extrema, envelope }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    pub center: f64,
    pub spread: f64,
    pub count: usize,
}

/// Splits values into at most two clusters by the best 1D two-means split;
/// the two are merged when their centers are closer than `merge`.
pub fn cluster_values(values: &[f64], merge: f64) -> Vec<Cluster> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let summarize = |s: &[f64]| Cluster {
        center: s.iter().sum::<f64>() / s.len() as f64,
        spread: s[s.len() - 1] - s[0],
        count: s.len(),
    };
    if v.is_empty() {
        return vec![];
    }
    let sse = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
    };
    let best = (1..v.len()).min_by(|&a, &b| (sse(&v[..a]) + sse(&v[a..])).total_cmp(&(sse(&v[..b]) + sse(&v[b..]))));
    match best {
        Some(k) => {
            let (a, b) = (summarize(&v[..k]), summarize(&v[k..]));
            if (b.center - a.center).abs() < merge {
                vec![summarize(&v)]
            } else {
                vec![a, b]
            }
        }
        None => vec![summarize(&v)],
    }
}

// ---------------------------------------------------------------------------
// Runners

fn integrator(tol: Option<(f64, f64)>) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::default();
    if let Some((r, a)) = tol {
        cfg.rel_tol = r;
        cfg.abs_tol = a;
    }
    cfg
}

fn roll_start(spec: &ExperimentSpec, v: [f64; 3], xy: [f64; 2]) -> RollState {
    Cylinder4::flat_state(xy, spec.position[2], v, spec.spin[0], spec.spin[1], spec.spin[2])
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightSeries {
    /// Swept value (η or r).
    pub key: f64,
    pub times: Vec<f64>,
    pub heights: Vec<f64>,
    pub report: BoundedReport,
    pub passes: usize,
    pub termination: Option<String>,
}

fn height_series(key: f64, run: &RollRun, tol: f64) -> HeightSeries {
    let (times, heights): (Vec<f64>, Vec<f64>) = run.samples.iter().map(|(t, s)| (*t, s.x3)).unzip();
    let report = detect_bounded(&times, &heights, tol);
    HeightSeries {
        key,
        times,
        heights,
        report,
        passes: run.passes.len(),
        termination: run.termination.as_ref().map(|e| e.to_string()),
    }
}

fn strip_run(spec: &ExperimentSpec, eta: f64, r: f64, cfg: &IntegratorConfig) -> AppResult<HeightSeries> {
    let sys = Cylinder4::new(Domain2::strip(spec.size)?, r, InertiaParams::from_eta(eta)?, spec.g, *cfg)?;
    let st = roll_start(spec, spec.velocity, [spec.position[0], spec.position[1]]);
    let run = sys.simulate(&st, 0.0, spec.horizon, Some(spec.sample_dt), usize::MAX, None)?;
    if let Some(e) = &run.termination {
        return Err(e.clone().into());
    }
    Ok(height_series(eta, &run, spec.bounded_tol))
}

/// Height series per η on the strip.
pub fn run_two_plates(spec: &ExperimentSpec, tol: Option<(f64, f64)>) -> AppResult<Vec<HeightSeries>> {
    let cfg = integrator(tol);
    spec.etas.par_iter().map(|&eta| strip_run(spec, eta, spec.ball_radius, &cfg)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadiusLimit {
    pub series: Vec<HeightSeries>,
    /// `sup |x3(r_k) - x3(r_{k+1})|` over the common sample grid.
    pub differences: Vec<f64>,
    pub monotone: bool,
}

/// Height series on the strip for each radius, with successive differences.
pub fn run_radius_limit(spec: &ExperimentSpec, tol: Option<(f64, f64)>) -> AppResult<RadiusLimit> {
    let cfg = integrator(tol);
    let eta = *spec.etas.first().ok_or_else(|| AppError::Parse("experiment.etas: one value needed".into()))?;
    let mut series: Vec<HeightSeries> =
        spec.radii.par_iter().map(|&r| strip_run(spec, eta, r, &cfg)).collect::<AppResult<_>>()?;
    for (s, r) in series.iter_mut().zip(&spec.radii) {
        s.key = *r;
    }
    let differences: Vec<f64> = series
        .windows(2)
        .map(|w| w[0].heights.iter().zip(&w[1].heights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    let monotone = differences.windows(2).all(|d| d[1] < d[0]);
    Ok(RadiusLimit { series, differences, monotone })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortraitCell {
    /// Tangential velocity component and tangential spin at entry.
    pub v2: f64,
    pub s: f64,
    pub dwell: Option<f64>,
    pub arc_distance: Option<f64>,
    pub exit: Option<Region>,
    /// Why the cell has no data: outside the energy hemisphere or no exit.
    pub flag: Option<&'static str>,
}

/// Passes over the rim of the disc for a grid of junction states with unit
/// transversal energy: `v1 = sqrt(1 - v2² - s²)`, no axial motion.
pub fn run_edge_portrait(spec: &ExperimentSpec, tol: Option<(f64, f64)>) -> AppResult<Vec<PortraitCell>> {
    let mut cfg = integrator(tol);
    cfg.max_time = spec.horizon;
    let eta = *spec.etas.first().ok_or_else(|| AppError::Parse("experiment.etas: one value needed".into()))?;
    let sys = Cylinder4::new(Domain2::disc(spec.size)?, spec.ball_radius, InertiaParams::from_eta(eta)?, 0.0, cfg)?;
    let n = spec.grid.max(2);
    let axis: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let cells: Vec<(f64, f64)> = axis.iter().flat_map(|&s| axis.iter().map(move |&v2| (v2, s))).collect();
    Ok(cells
        .par_iter()
        .map(|&(v2, s)| {
            let rest = 1.0 - v2 * v2 - s * s;
            let empty = PortraitCell { v2, s, dwell: None, arc_distance: None, exit: None, flag: None };
            if rest <= 1e-12 {
                return PortraitCell { flag: Some("outside"), ..empty };
            }
            let st = RollState {
                region: Region::Curved,
                piece: PieceId { curve: 0, segment: 0 },
                v: [rest.sqrt(), v2, 0.0],
                s12: s,
                ..Default::default()
            };
            match sys.edge_pass(&st) {
                Ok(p) => PortraitCell {
                    dwell: Some(p.dwell()),
                    arc_distance: Some(p.arc_distance),
                    exit: Some(p.exit),
                    ..empty
                },
                Err(_) => PortraitCell { flag: Some("no-exit"), ..empty },
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausticRun {
    pub label: &'static str,
    /// Start offset from the axis, perpendicular to the velocity.
    pub offset: f64,
    pub height: HeightSeries,
    pub chords: Vec<f64>,
    pub clusters: Vec<Cluster>,
}

fn disc_run(sys: &Cylinder4, spec: &ExperimentSpec, v: [f64; 3], offset: f64, horizon: f64) -> AppResult<RollRun> {
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n == 0.0 {
        return Err(AppError::Parse("experiment: planar velocity must not vanish".into()));
    }
    let xy = [offset * v[1] / n, -offset * v[0] / n];
    Ok(sys.simulate(&roll_start(spec, v, xy), 0.0, horizon, Some(spec.sample_dt), usize::MAX, None)?)
}

fn leg_chords(run: &RollRun) -> Vec<f64> {
    run.legs
        .iter()
        .filter(|l| l.velocity[0] != 0.0 || l.velocity[1] != 0.0)
        .map(|l| chord_distance(&l.start, &l.velocity, &[0.0, 0.0]))
        .collect()
}

/// Signed offset of the first chord minus the signed-magnitude of the next
/// one; zero when a single pass maps the chord onto itself.
fn chord_defect(sys: &Cylinder4, spec: &ExperimentSpec, v: [f64; 3], offset: f64) -> Option<f64> {
    let run = disc_run(sys, spec, v, offset, 40.0).ok()?;
    let c = leg_chords(&run);
    (c.len() >= 2).then(|| c[1] - c[0])
}

/// Start offsets (perpendicular to the initial velocity) whose first chord
/// is reproduced after one pass over the rim, i.e. the chords touch a
/// single caustic circle.
pub fn single_caustic_offsets(sys: &Cylinder4, spec: &ExperimentSpec, v: [f64; 3]) -> Vec<f64> {
    let lim = spec.size * (1.0 - 1e-4);
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|i| -lim + 2.0 * lim * i as f64 / n as f64).collect();
    let fs: Vec<Option<f64>> = xs.par_iter().map(|&x| chord_defect(sys, spec, v, x)).collect();
    let mut roots = Vec::new();
    for i in 1..xs.len() {
        let (Some(fa), Some(fb)) = (fs[i - 1], fs[i]) else { continue };
        // Chord distances are unsigned; ignore sign flips caused by a chord through the axis.
        if fa * fb > 0.0 || (fa - fb).abs() > 0.2 * spec.size {
            continue;
        }
        let (mut a, mut b, mut fa) = (xs[i - 1], xs[i], fa);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let Some(fm) = chord_defect(sys, spec, v, m) else { break };
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Runs the circular cylinder from two initial velocities. The first run
/// starts on a chord that a pass over the rim maps to itself (the root with
/// the least height growth is used); the comparison run starts on the axis.
pub fn run_caustic_height(spec: &ExperimentSpec, tol: Option<(f64, f64)>) -> AppResult<Vec<CausticRun>> {
    let cfg = integrator(tol);
    let eta = *spec.etas.first().ok_or_else(|| AppError::Parse("experiment.etas: one value needed".into()))?;
    let sys = Cylinder4::new(Domain2::disc(spec.size)?, spec.ball_radius, InertiaParams::from_eta(eta)?, spec.g, cfg)?;
    let merge = 1e-3 * spec.size;
    let finish = |label: &'static str, offset: f64, run: RollRun| {
        let chords = leg_chords(&run);
        CausticRun { label, offset, height: height_series(offset, &run, spec.bounded_tol), clusters: cluster_values(&chords, merge), chords }
    };
    let roots = single_caustic_offsets(&sys, spec, spec.velocity);
    let mut candidates: Vec<CausticRun> = roots
        .par_iter()
        .map(|&d| disc_run(&sys, spec, spec.velocity, d, spec.horizon).map(|r| finish("single", d, r)))
        .collect::<AppResult<_>>()?;
    candidates.sort_by(|a, b| {
        let g = |c: &CausticRun| c.height.report.range_second / c.height.report.range_first.max(1e-300);
        g(a).total_cmp(&g(b))
    });
    let mut out = Vec::new();
    if let Some(best) = candidates.into_iter().next() {
        out.push(best);
    }
    let run = disc_run(&sys, spec, spec.perturbed_velocity, 0.0, spec.horizon)?;
    out.push(finish("perturbed", 0.0, run));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZigzagRun {
    pub label: String,
    pub scale: f64,
    pub rolling_start: bool,
    /// `(t, x3)` after each collision within the horizon.
    pub heights: Vec<(f64, f64)>,
    /// `-(x3(T) - x3(0)) / T` at the last collision.
    pub descent_rate: f64,
    pub range: f64,
}

/// The no-slip ball in the vertical cylinder over the disc, started on the
/// wall with normal speed scaled by each factor, plus a rolling-impact start.
pub fn run_zigzag(spec: &ExperimentSpec) -> AppResult<Vec<ZigzagRun>> {
    let gamma = *spec.gammas.first().ok_or_else(|| AppError::Parse("experiment.gammas: one value needed".into()))?;
    let p = InertiaParams::from_gamma(gamma)?;
    let disc = Domain2::disc(spec.size)?;
    let dom = Domain3::Cylinder(disc.clone());
    let start = disc.locate(&[spec.position[0], spec.position[1]]).map(|(p, _)| p);
    let mut cases: Vec<(f64, bool)> = spec.scales.iter().map(|s| (*s, false)).collect();
    cases.push((spec.scales.first().copied().unwrap_or(1.0), true));
    cases
        .par_iter()
        .map(|&(scale, rolling)| {
            let u = [spec.velocity[0] * scale, spec.velocity[1], spec.velocity[2]];
            let mut spin = [[0.0; 3]; 3];
            spin[0][1] = spec.spin[0];
            spin[0][2] = spec.spin[1];
            spin[1][2] = spec.spin[2];
            if rolling {
                let hit = dom
                    .first_hit(&spec.position, &u, spec.g, spec.horizon, start)?
                    .ok_or(noslip_core::Error::Timeout { t: spec.horizon })?;
                let nu = dom.inward_normal(hit.piece, &hit.position);
                let tau = [-nu[1], nu[0]];
                let s = p.gamma() * (u[0] * tau[0] + u[1] * tau[1]);
                spin = [[0.0; 3]; 3];
                spin[0][1] = -s;
            }
            for i in 0..3 {
                for j in 0..i {
                    spin[i][j] = -spin[j][i];
                }
            }
            let st = NoSlipState { x: spec.position, u, spin };
            let opts = FlowOptions { g: spec.g, n_events: spec.events, max_flight: spec.horizon };
            let tr = billiard_trajectory(&st, start, &dom, &p, &opts)?;
            let heights: Vec<(f64, f64)> =
                tr.collisions.iter().take_while(|c| c.t <= spec.horizon).map(|c| (c.t, c.after.x[2])).collect();
            let (t_last, x_last) = heights.last().copied().unwrap_or((0.0, spec.position[2]));
            let descent_rate = if t_last > 0.0 { -(x_last - spec.position[2]) / t_last } else { 0.0 };
            let zs: Vec<f64> = heights.iter().map(|h| h.1).collect();
            Ok(ZigzagRun {
                label: if rolling { "rolling-impact".into() } else { format!("scale-{scale}") },
                scale,
                rolling_start: rolling,
                range: if zs.is_empty() { 0.0 } else { range(&zs) },
                heights,
                descent_rate,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscCaustic {
    pub gamma: f64,
    pub chords: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub termination: Option<String>,
}

/// Chord distances of a planar no-slip disc trajectory per γ.
pub fn run_disc_caustic(spec: &ExperimentSpec) -> AppResult<Vec<DiscCaustic>> {
    let disc = Domain2::disc(spec.size)?;
    spec.gammas
        .par_iter()
        .map(|&gamma| {
            let p = InertiaParams::from_gamma(gamma)?;
            let st = NoSlipState2D {
                x: [spec.position[0], spec.position[1]],
                u: [spec.velocity[0], spec.velocity[1]],
                s: -spec.spin[0],
            };
            let opts = FlowOptions { g: 0.0, n_events: spec.events, max_flight: 1e6 };
            let tr = billiard_trajectory_2d(&st, None, &disc, &p, &opts)?;
            let chords: Vec<f64> =
                tr.collisions.iter().map(|c| chord_distance(&c.after.x, &c.after.u, &[0.0, 0.0])).collect();
            Ok(DiscCaustic {
                gamma,
                clusters: cluster_values(&chords, 1e-3 * spec.size),
                chords,
                termination: tr.termination.map(|e| e.to_string()),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCheck {
    pub rows: Vec<LimitRow>,
    /// Slope of `log(deviation)` against `log(r)` over non-friendly rows.
    pub order: Option<f64>,
    pub decreasing: bool,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Edge passes over the rim of the disc against the matched collision map.
pub fn run_limit_check(spec: &ExperimentSpec, tol: Option<(f64, f64)>) -> AppResult<LimitCheck> {
    let cfg = integrator(tol);
    let eta = *spec.etas.first().ok_or_else(|| AppError::Parse("experiment.etas: one value needed".into()))?;
    let entry = EdgeParts {
        v_n: spec.velocity[0],
        v_bar: [spec.velocity[1], spec.velocity[2]],
        w: [spec.spin[0], spec.spin[1]],
        s_bar: spec.spin[2],
    };
    let disc = Domain2::disc(spec.size)?;
    let rows = noslip_limit_check(&disc, PieceId { curve: 0, segment: 0 }, 0.0, &entry, eta, &spec.radii, &cfg)?;
    let kept: Vec<&LimitRow> = rows.iter().filter(|r| !r.friendly_roll).collect();
    let order = loglog_slope(&kept.iter().map(|r| r.r).collect::<Vec<_>>(), &kept.iter().map(|r| r.deviation).collect::<Vec<_>>());
    let decreasing = kept.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok(LimitCheck { rows, order, decreasing })
}

// ---------------------------------------------------------------------------
// Output

/// Files written by an experiment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Written {
    pub series: Option<PathBuf>,
    pub summary: PathBuf,
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn cols(c: &[&str]) -> Vec<String> {
    c.iter().map(|s| s.to_string()).collect()
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Bounded => "bounded",
        Verdict::Unbounded => "unbounded",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn write_heights(dir: &Path, spec: &ExperimentSpec, key: &str, series: &[HeightSeries]) -> AppResult<Written> {
    let name = spec.name.as_str();
    let head = spec.header();
    let mut rows = Vec::new();
    for s in series {
        for (t, x) in s.times.iter().zip(&s.heights) {
            rows.push(vec![fmt_f64(s.key), fmt_f64(*t), fmt_f64(*x)]);
        }
    }
    let series_path = dir.join(format!("{name}.csv"));
    write_table(&series_path, &head, &cols(&[key, "t", "x3"]), &rows)?;
    let summary: Vec<Vec<String>> = series
        .iter()
        .map(|s| {
            vec![
                fmt_f64(s.key),
                verdict_str(s.report.verdict).into(),
                opt(s.report.period),
                fmt_f64(s.report.range_first),
                fmt_f64(s.report.range_second),
                s.report.extrema.to_string(),
                s.passes.to_string(),
            ]
        })
        .collect();
    let summary_path = dir.join(format!("{name}_summary.csv"));
    write_table(
        &summary_path,
        &head,
        &cols(&[key, "verdict", "period", "range_first_half", "range_second_half", "extrema", "edge_passes"]),
        &summary,
    )?;
    Ok(Written { series: Some(series_path), summary: summary_path })
}

/// Runs the named experiment and writes its CSV files into `dir`.
pub fn run_and_write(spec: &ExperimentSpec, dir: &Path, tol: Option<(f64, f64)>) -> AppResult<Written> {
    let name = spec.name.as_str();
    let head = spec.header();
    let summary_path = dir.join(format!("{name}_summary.csv"));
    match spec.name {
        ExperimentName::TwoPlates => write_heights(dir, spec, "eta", &run_two_plates(spec, tol)?),
        ExperimentName::RadiusLimit => {
            let res = run_radius_limit(spec, tol)?;
            let mut w = write_heights(dir, spec, "r", &res.series)?;
            let rows: Vec<Vec<String>> = res
                .differences
                .iter()
                .enumerate()
                .map(|(i, d)| vec![fmt_f64(spec.radii[i]), fmt_f64(spec.radii[i + 1]), fmt_f64(*d), res.monotone.to_string()])
                .collect();
            let diff_path = dir.join(format!("{name}_differences.csv"));
            write_table(&diff_path, &head, &cols(&["r_a", "r_b", "sup_difference", "monotone"]), &rows)?;
            w.summary = diff_path;
            Ok(w)
        }
        ExperimentName::EdgePortrait => {
            let cells = run_edge_portrait(spec, tol)?;
            let region = |r: Option<Region>| match r {
                Some(Region::FlatPlus) => "flat+",
                Some(Region::FlatMinus) => "flat-",
                Some(Region::Curved) => "curved",
                None => "",
            };
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        fmt_f64(c.v2),
                        fmt_f64(c.s),
                        opt(c.dwell),
                        opt(c.arc_distance),
                        region(c.exit).into(),
                        c.flag.unwrap_or("").into(),
                    ]
                })
                .collect();
            write_table(&summary_path, &head, &cols(&["v2", "s", "dwell", "arc_distance", "exit", "flag"]), &rows)?;
            Ok(Written { series: None, summary: summary_path })
        }
        ExperimentName::CausticHeight => {
            let runs = run_caustic_height(spec, tol)?;
            let mut series = Vec::new();
            for r in &runs {
                for (t, x) in r.height.times.iter().zip(&r.height.heights) {
                    series.push(vec![r.label.into(), fmt_f64(*t), fmt_f64(*x)]);
                }
            }
            let series_path = dir.join(format!("{name}.csv"));
            write_table(&series_path, &head, &cols(&["run", "t", "x3"]), &series)?;
            let rows: Vec<Vec<String>> = runs
                .iter()
                .map(|r| {
                    let c = |i: usize| r.clusters.get(i).map(|c| (c.center, c.spread));
                    vec![
                        r.label.into(),
                        fmt_f64(r.offset),
                        r.clusters.len().to_string(),
                        opt(c(0).map(|c| c.0)),
                        opt(c(0).map(|c| c.1)),
                        opt(c(1).map(|c| c.0)),
                        opt(c(1).map(|c| c.1)),
                        verdict_str(r.height.report.verdict).into(),
                        opt(r.height.report.period),
                        fmt_f64(r.height.report.range_first),
                        fmt_f64(r.height.report.range_second),
                    ]
                })
                .collect();
            write_table(
                &summary_path,
                &head,
                &cols(&[
                    "run",
                    "offset",
                    "caustics",
                    "caustic_1",
                    "spread_1",
                    "caustic_2",
                    "spread_2",
                    "verdict",
                    "period",
                    "range_first_half",
                    "range_second_half",
                ]),
                &rows,
            )?;
            Ok(Written { series: Some(series_path), summary: summary_path })
        }
        ExperimentName::Zigzag => {
            let runs = run_zigzag(spec)?;
            let mut series = Vec::new();
            for r in &runs {
                for (t, x) in &r.heights {
                    series.push(vec![r.label.clone(), fmt_f64(*t), fmt_f64(*x)]);
                }
            }
            let series_path = dir.join(format!("{name}.csv"));
            write_table(&series_path, &head, &cols(&["run", "t", "x3"]), &series)?;
            let rows: Vec<Vec<String>> = runs
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        fmt_f64(r.scale),
                        r.rolling_start.to_string(),
                        r.heights.len().to_string(),
                        fmt_f64(r.descent_rate),
                        fmt_f64(r.range),
                    ]
                })
                .collect();
            write_table(&summary_path, &head, &cols(&["run", "scale", "rolling_start", "collisions", "descent_rate", "range"]), &rows)?;
            Ok(Written { series: Some(series_path), summary: summary_path })
        }
        ExperimentName::DiscCaustic => {
            let runs = run_disc_caustic(spec)?;
            let mut series = Vec::new();
            for r in &runs {
                for (k, c) in r.chords.iter().enumerate() {
                    series.push(vec![fmt_f64(r.gamma), (k + 1).to_string(), fmt_f64(*c)]);
                }
            }
            let series_path = dir.join(format!("{name}.csv"));
            write_table(&series_path, &head, &cols(&["gamma", "collision", "chord_distance"]), &series)?;
            let rows: Vec<Vec<String>> = runs
                .iter()
                .map(|r| {
                    let c = |i: usize| r.clusters.get(i).map(|c| (c.center, c.spread));
                    vec![
                        fmt_f64(r.gamma),
                        r.clusters.len().to_string(),
                        opt(c(0).map(|c| c.0)),
                        opt(c(0).map(|c| c.1)),
                        opt(c(1).map(|c| c.0)),
                        opt(c(1).map(|c| c.1)),
                    ]
                })
                .collect();
            write_table(&summary_path, &head, &cols(&["gamma", "caustics", "caustic_1", "spread_1", "caustic_2", "spread_2"]), &rows)?;
            Ok(Written { series: Some(series_path), summary: summary_path })
        }
        ExperimentName::LimitCheck => {
            let res = run_limit_check(spec, tol)?;
            let rows: Vec<Vec<String>> = res
                .rows
                .iter()
                .map(|r| vec![fmt_f64(r.r), fmt_f64(r.deviation), fmt_f64(r.dwell), r.friendly_roll.to_string()])
                .collect();
            let mut head = head;
            head.push(format!("# order = {}", res.order.map(fmt_f64).unwrap_or_default()));
            write_table(&summary_path, &head, &cols(&["r", "deviation", "dwell", "friendly_roll"]), &rows)?;
            Ok(Written { series: None, summary: summary_path })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_is_unbounded_and_sine_is_periodic() {
        let t: Vec<f64> = (0..2000).map(|i| i as f64 * 0.01).collect();
        let p: Vec<f64> = t.iter().map(|t| -t * t).collect();
        assert_eq!(detect_bounded(&t, &p, 0.05).verdict, Verdict::Unbounded);
        let t: Vec<f64> = (0..20000).map(|i| i as f64 * 0.01).collect();
        let s: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let r = detect_bounded(&t, &s, 0.05);
        assert_eq!(r.verdict, Verdict::Bounded);
        let per = r.period.unwrap();
        assert!((per - 2.0 * std::f64::consts::PI).abs() < 0.01 * 2.0 * std::f64::consts::PI);
        assert_eq!(detect_bounded(&t[..3], &s[..3], 0.05).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn clusters() {
        let v = [1.0, 1.0 + 1e-12, 2.0, 2.0 - 1e-12, 1.0];
        let c = cluster_values(&v, 1e-3);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].count, 3);
        assert!(c[0].spread < 1e-11);
        assert_eq!(cluster_values(&[0.5, 0.5 + 1e-6], 1e-3).len(), 1);
        assert!(cluster_values(&[], 1e-3).is_empty());
    }

    #[test]
    fn spec_round_trips_through_overrides() {
        for n in ExperimentName::ALL {
            let s = ExperimentSpec::defaults(n);
            assert_eq!(ExperimentSpec::from_overrides(&s.to_overrides()).unwrap(), s);
            assert_eq!(n.as_str().parse::<ExperimentName>().unwrap(), n);
        }
    }

    #[test]
    fn slope() {
        let xs = [1.0, 2.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
    }
}
