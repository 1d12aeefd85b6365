//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use noslip::experiments::{
    run_caustic_height, run_disc_caustic, run_limit_check, run_radius_limit, run_two_plates, ExperimentName,
    ExperimentSpec, Verdict,
};
use noslip::run::{collision_residuals, Sampler};
use noslip_core::geometry::{BilliardDomain, Domain2, Domain3, PieceId, Region};
use noslip_core::integrate::{energy_monitor, IntegratorConfig};
use noslip_core::math::{dot, mat_max_abs_diff, max_abs_diff, norm, scale, Matrix, Vector};
use noslip_core::noslip::{
    billiard_trajectory, collide_2d, collide_3d, collide_general, collision_map, FlowOptions, NoSlipState,
    NoSlipState2D, Trajectory,
};
use noslip_core::rolling::{simulate_stadium, strip_closed_form, Cylinder4, RollState, Stadium};
use noslip_core::InertiaParams;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng() -> StdRng {
    StdRng::seed_from_u64(20_240_917)
}

fn unit<const N: usize>(r: &mut StdRng) -> Vector<N> {
    loop {
        let v: Vector<N> = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let n = norm(&v);
        if n > 0.1 {
            return scale(&v, 1.0 / n);
        }
    }
}

fn skew<const N: usize>(r: &mut StdRng) -> Matrix<N> {
    let mut m = [[0.0; N]; N];
    for i in 0..N {
        for j in i + 1..N {
            m[i][j] = r.gen_range(-1.0..1.0);
            m[j][i] = -m[i][j];
        }
    }
    m
}

/// (ū, W) block measured by applying the map to unit tangential inputs.
fn block_residuals<const N: usize>(p: &InertiaParams, r: &mut StdRng) -> (f64, f64) {
    let nu: Vector<N> = unit(r);
    let mut e: Vector<N> = unit(r);
    e = noslip_core::math::axpy(&e, -dot(&e, &nu), &nu);
    let e = scale(&e, 1.0 / norm(&e));
    let zero_s = [[0.0; N]; N];
    let zero_u = [0.0; N];
    // ū = e, W = 0
    let (s1, u1) = collision_map(&zero_s, &e, &nu, p);
    // ū = 0, W = e  (S = ν ∧ e has S ν = e for unit ν ⟂ e)
    let w_state = noslip_core::math::wedge(&nu, &e);
    debug_assert!(max_abs_diff(&noslip_core::math::mat_vec(&w_state, &nu), &e) < 1e-14);
    let (s2, u2) = collision_map(&w_state, &zero_u, &nu, p);
    let comp = |s: &Matrix<N>, u: &Vector<N>| (dot(u, &e), dot(&noslip_core::math::mat_vec(s, &nu), &e));
    let (a, c) = comp(&s1, &u1);
    let (b, d) = comp(&s2, &u2);
    let orth = [a * a + c * c - 1.0, b * b + d * d - 1.0, a * b + c * d].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (orth, (a * d - b * c + 1.0).abs())
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut r = rng();
    let mut s = Sampler::new(false);
    let mut worst = [0.0f64; 5];
    let per_dim = 10_000 / 3 + 1;
    for k in 0..3 {
        let gamma = r.gen_range(0.0..3.0);
        let p = InertiaParams::from_gamma(gamma).unwrap();
        let (w, (o, d)) = match k {
            0 => (collision_residuals::<2>(&p, per_dim, &mut s), block_residuals::<2>(&p, &mut r)),
            1 => (collision_residuals::<3>(&p, per_dim, &mut s), block_residuals::<3>(&p, &mut r)),
            _ => (collision_residuals::<4>(&p, per_dim, &mut s), block_residuals::<4>(&p, &mut r)),
        };
        for (i, v) in w.iter().chain([o, d].iter()).enumerate() {
            worst[i] = worst[i].max(*v);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst.iter().all(|v| *v < 1e-12) && secs < 1.0;
    outcome(
        pass,
        format!(
            "involution {:.1e}, energy {:.1e}, rolling {:.1e}, block orth {:.1e}, det+1 {:.1e}, {:.3}s",
            worst[0], worst[1], worst[2], worst[3], worst[4], secs
        ),
    )
}

fn c2() -> Outcome {
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = InertiaParams::from_gamma(r.gen_range(0.0..3.0)).unwrap();
        let nu2: Vector<2> = unit(&mut r);
        let st2 = NoSlipState2D { x: [0.0; 2], u: [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)], s: r.gen_range(-1.0..1.0) };
        if dot(&st2.u, &nu2).abs() < 1e-6 {
            continue;
        }
        let a = collide_2d(&st2, &nu2, &p).unwrap();
        let (gs, gu) = collide_general(&st2.general().spin, &st2.u, &nu2, &p).unwrap();
        worst = worst.max(max_abs_diff(&a.u, &gu)).max((a.s - gs[1][0]).abs());
        let nu3: Vector<3> = unit(&mut r);
        let st3 = NoSlipState { x: [0.0; 3], u: std::array::from_fn(|_| r.gen_range(-1.0..1.0)), spin: skew::<3>(&mut r) };
        if dot(&st3.u, &nu3).abs() < 1e-6 {
            continue;
        }
        let b = collide_3d(&st3, &nu3, &p).unwrap();
        let (gs, gu) = collide_general(&st3.spin, &st3.u, &nu3, &p).unwrap();
        worst = worst.max(max_abs_diff(&b.u, &gu)).max(mat_max_abs_diff(&b.spin, &gs));
    }
    outcome(worst < 1e-12, format!("max deviation {worst:.1e}"))
}

fn c3() -> Outcome {
    let p = InertiaParams::from_gamma(FRAC_1_SQRT_2).unwrap();
    let disc = Domain2::disc(1.0).unwrap();
    let cyl = Domain3::Cylinder(disc.clone());
    let mut spin = [[0.0, -0.4, 0.7], [0.4, 0.0, -0.3], [-0.7, 0.3, 0.0]];
    spin[1][0] = 0.4;
    let st3 = NoSlipState { x: [0.2, -0.1, 0.5], u: [0.6, 0.9, 0.4], spin };
    let st2 = NoSlipState { x: [0.2, -0.1], u: [0.6, 0.9], spin: [[0.0, -0.4], [0.4, 0.0]] };
    let mut worst = 0.0f64;
    let mut n = usize::MAX;
    for g in [0.0, 1.0] {
        let opts = FlowOptions { g, n_events: 50, max_flight: 100.0 };
        let t3 = billiard_trajectory(&st3, None, &cyl, &p, &opts).unwrap();
        let t2 = billiard_trajectory(&st2, None, &disc, &p, &FlowOptions { g: 0.0, ..opts }).unwrap();
        n = n.min(t3.collisions.len().min(t2.collisions.len()));
        for (a, b) in t3.collisions.iter().zip(&t2.collisions) {
            let d = [
                (a.t - b.t).abs(),
                (a.after.x[0] - b.after.x[0]).abs(),
                (a.after.x[1] - b.after.x[1]).abs(),
                (a.after.u[0] - b.after.u[0]).abs(),
                (a.after.u[1] - b.after.u[1]).abs(),
                (a.after.spin[1][0] - b.after.spin[1][0]).abs(),
            ];
            worst = d.iter().fold(worst, |m, x| m.max(*x));
        }
    }
    outcome(worst < 1e-9 && n == 50, format!("{n} collisions per run, max deviation {worst:.1e}"))
}

fn rot(th: f64, reflect: bool) -> Matrix<2> {
    let (c, s) = (th.cos(), th.sin());
    if reflect {
        [[c, s], [s, -c]]
    } else {
        [[c, -s], [s, c]]
    }
}

fn conj(m: &Matrix<2>, s: &Matrix<2>) -> Matrix<2> {
    use noslip_core::math::{mat_mul, transpose};
    mat_mul(&mat_mul(m, s), &transpose(m))
}

fn c4() -> Outcome {
    use noslip_core::math::mat_vec;
    let mut r = rng();
    let disc = Domain2::disc(1.0).unwrap();
    let strip = Domain2::strip(1.0).unwrap();
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let p = InertiaParams::from_gamma(r.gen_range(0.0..3.0)).unwrap();
        let s = skew::<2>(&mut r);
        let u: Vector<2> = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let reflect = k % 2 == 1;
        let (a, fa, m, piece_a, piece_fa, dom) = if k % 4 < 2 {
            let th = r.gen_range(0.0..2.0 * PI);
            let a = [th.cos(), th.sin()];
            let m = rot(r.gen_range(0.0..2.0 * PI), reflect);
            let fa = mat_vec(&m, &a);
            let pc = PieceId { curve: 0, segment: 0 };
            (a, fa, m, pc, pc, &disc)
        } else {
            // translation along the walls, optionally composed with x1 ↦ -x1
            let (left, right) = (PieceId { curve: 1, segment: 0 }, PieceId { curve: 0, segment: 0 });
            let a = [0.5, r.gen_range(-5.0..5.0)];
            let shift = r.gen_range(-5.0..5.0);
            let m = if reflect { [[-1.0, 0.0], [0.0, 1.0]] } else { [[1.0, 0.0], [0.0, 1.0]] };
            let fa = [m[0][0] * a[0], a[1] + shift];
            (a, fa, m, right, if reflect { left } else { right }, &strip)
        };
        let nu = dom.inward_normal(piece_a, &a);
        let nu_f = dom.inward_normal(piece_fa, &fa);
        if dot(&u, &nu).abs() < 1e-6 {
            continue;
        }
        let (s1, u1) = collide_general(&s, &u, &nu, &p).unwrap();
        let (s2, u2) = collide_general(&conj(&m, &s), &mat_vec(&m, &u), &nu_f, &p).unwrap();
        worst = worst.max(max_abs_diff(&mat_vec(&m, &u1), &u2)).max(mat_max_abs_diff(&conj(&m, &s1), &s2));
    }
    outcome(worst < 1e-12, format!("max deviation {worst:.1e}"))
}

fn c5() -> Outcome {
    let st = Stadium::new(1.0, 0.5).unwrap();
    let (eta, u, g) = (0.45, 1.0, 1.0);
    let x0 = [0.3, -0.2];
    let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.1).collect();
    let ys = simulate_stadium(eta, g, &st, &[0.25, 0.0, u, x0[0], x0[1]], &times, &IntegratorConfig::default()).unwrap();
    let mut worst = 0.0f64;
    for (t, y) in times.iter().zip(&ys) {
        let c = strip_closed_form(eta, u, g, &st, 0.25, x0, *t).unwrap();
        worst = worst.max((c[0] - y[3]).abs()).max((c[1] - y[4]).abs());
    }
    // homogeneous part over one half circle
    let t_arc = PI * st.r / u;
    let c = strip_closed_form(eta, u, 0.0, &st, st.width, x0, t_arc).unwrap();
    let th = PI * eta;
    let rot_err = (c[0] - (th.cos() * x0[0] + th.sin() * x0[1])).abs().max((c[1] - (-th.sin() * x0[0] + th.cos() * x0[1])).abs());
    outcome(worst < 1e-8 && rot_err < 1e-12, format!("sup error {worst:.1e} on [0,50], arc rotation error {rot_err:.1e}"))
}

fn c6() -> Outcome {
    // A slow start on the rim of the disc and a 10-unit run of the full flow,
    // both under gravity; monitors are compared at every sample.
    let g = 1.0;
    let sys = Cylinder4::new(Domain2::disc(1.0).unwrap(), 0.3, InertiaParams::from_eta(0.5).unwrap(), g, IntegratorConfig::default())
        .unwrap();
    let entry = RollState {
        region: Region::Curved,
        v: [0.02, 0.8, 0.3],
        s12: 0.2,
        s13: -0.4,
        s23: 0.5,
        ..Default::default()
    };
    let run = sys.simulate(&entry, 0.0, 10.0, Some(0.01), usize::MAX, None).unwrap();
    let mut curved = run.samples.iter().filter(|(_, s)| s.region == Region::Curved).count();
    let m0 = energy_monitor(&entry, g);
    let (mut d1, mut dt) = (0.0f64, 0.0f64);
    for (_, s) in &run.samples {
        let m = energy_monitor(s, g);
        d1 = d1.max((m[0] - m0[0]).abs());
        dt = dt.max((m[3] - m0[3]).abs());
    }
    let st = Cylinder4::flat_state([0.1, 0.2], 0.0, [-0.2, 1.0, 0.0], 0.61, 0.0, -1.0);
    let sys2 = Cylinder4::new(Domain2::disc(1.0).unwrap(), 0.1, InertiaParams::from_eta(0.39183).unwrap(), g, IntegratorConfig::default())
        .unwrap();
    let full = sys2.simulate(&st, 0.0, 10.0, Some(0.01), usize::MAX, None).unwrap();
    let m0 = energy_monitor(&st, g);
    curved += full.samples.iter().filter(|(_, s)| s.region == Region::Curved).count();
    for (_, s) in &full.samples {
        let m = energy_monitor(s, g);
        d1 = d1.max((m[0] - m0[0]).abs());
        dt = dt.max((m[3] - m0[3]).abs());
    }
    outcome(
        curved > 0 && d1 < 1e-9 && dt < 1e-9,
        format!("|dE1| {d1:.1e}, |d(E+g x3)| {dt:.1e} over 20 time units ({curved} samples on curved parts)"),
    )
}

fn flight_to<const N: usize>(tr: &Trajectory<N>, t: f64, g: f64) -> NoSlipState<N> {
    let (t0, st) = tr.collisions.iter().take_while(|c| c.t <= t).last().map_or((0.0, tr.initial), |c| (c.t, c.after));
    let tau = t - t0;
    let mut x = st.x;
    let mut u = st.u;
    for i in 0..N {
        x[i] += u[i] * tau;
    }
    x[N - 1] -= 0.5 * g * tau * tau;
    u[N - 1] -= g * tau;
    NoSlipState { x, u, spin: st.spin }
}

fn c7() -> Outcome {
    let p = InertiaParams::from_gamma(FRAC_1_SQRT_2).unwrap();
    let cyl = Domain3::Cylinder(Domain2::disc(1.0).unwrap());
    let g = 1.0;
    let spin = [[0.0, 0.3, -0.2], [-0.3, 0.0, 0.5], [0.2, -0.5, 0.0]];
    let st = NoSlipState { x: [0.1, 0.3, 0.0], u: [0.7, -0.4, 0.2], spin };
    let opts = FlowOptions { g, n_events: 1000, max_flight: 100.0 };
    let fwd = billiard_trajectory(&st, None, &cyl, &p, &opts).unwrap();
    let mid = flight_to(&fwd, 10.0, g);
    let back_start = NoSlipState { x: mid.x, u: scale(&mid.u, -1.0), spin: noslip_core::math::mat_scale(&mid.spin, -1.0) };
    let back = billiard_trajectory(&back_start, None, &cyl, &p, &opts).unwrap();
    let end = flight_to(&back, 10.0, g);
    let e_ns = max_abs_diff(&end.x, &st.x)
        .max(max_abs_diff(&end.u, &scale(&st.u, -1.0)))
        .max(mat_max_abs_diff(&end.spin, &noslip_core::math::mat_scale(&st.spin, -1.0)));

    let sys = Cylinder4::new(Domain2::disc(1.0).unwrap(), 0.1, InertiaParams::from_eta(0.39183).unwrap(), g, IntegratorConfig::default())
        .unwrap();
    let r0 = Cylinder4::flat_state([0.1, 0.2], 0.0, [-0.2, 1.0, 0.3], 0.61, 0.1, -1.0);
    let a = sys.simulate(&r0, 0.0, 10.0, None, usize::MAX, None).unwrap();
    let b = sys.simulate(&a.end.reversed(), 0.0, 10.0, None, usize::MAX, None).unwrap();
    let e = b.end.reversed();
    let (p0, v0) = (sys.position(&r0), sys.ambient(&r0));
    let (p1, v1) = (sys.position(&e), sys.ambient(&e));
    let e_roll = max_abs_diff(&p0, &p1).max(max_abs_diff(&v0.0, &v1.0)).max(mat_max_abs_diff(&v0.1, &v1.1));
    outcome(
        e_ns < 1e-7 && e_roll < 1e-7,
        format!("no-slip {e_ns:.1e} ({} collisions), rolling {e_roll:.1e} ({} passes)", fwd.collisions.iter().filter(|c| c.t <= 10.0).count(), a.passes.len()),
    )
}

fn c8() -> Outcome {
    let start = Instant::now();
    let spec = ExperimentSpec::defaults(ExperimentName::LimitCheck);
    let res = run_limit_check(&spec, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let gamma = noslip_core::inertia::match_inertia(spec.etas[0]).unwrap();
    let order = res.order.unwrap_or(0.0);
    let devs: Vec<String> = res.rows.iter().map(|r| format!("{:.2e}", r.deviation)).collect();
    outcome(
        res.decreasing && order >= 0.8 && secs < 60.0 && (gamma - FRAC_1_SQRT_2).abs() < 1e-4,
        format!("errors [{}], order {order:.3}, matched gamma {gamma:.5}, {secs:.2}s", devs.join(", ")),
    )
}

fn c9() -> Outcome {
    let spec = ExperimentSpec::defaults(ExperimentName::TwoPlates);
    let series = run_two_plates(&spec, None).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for s in &series {
        if s.key == 0.0 {
            let err = s
                .times
                .iter()
                .zip(&s.heights)
                .map(|(t, x)| {
                    let exact = spec.position[2] + spec.velocity[2] * t - 0.5 * spec.g * t * t;
                    (x - exact).abs() / exact.abs().max(1.0)
                })
                .fold(0.0, f64::max);
            pass &= err < 1e-12;
            parts.push(format!("eta=0 parabola rel err {err:.1e}"));
        } else {
            let ok = s.report.verdict == Verdict::Bounded && s.report.period.is_some_and(f64::is_finite);
            pass &= ok;
            parts.push(format!("eta={} {:?} period {:.3}", s.key, s.report.verdict, s.report.period.unwrap_or(f64::NAN)));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c10() -> Outcome {
    let spec = ExperimentSpec::defaults(ExperimentName::RadiusLimit);
    let res = run_radius_limit(&spec, None).unwrap();
    let d: Vec<String> = res.differences.iter().map(|d| format!("{d:.3}")).collect();
    outcome(res.monotone, format!("sup differences [{}]", d.join(", ")))
}

fn c11() -> Outcome {
    let spec = ExperimentSpec::defaults(ExperimentName::CausticHeight);
    let runs = run_caustic_height(&spec, None).unwrap();
    let single = runs.iter().find(|r| r.label == "single");
    let pert = runs.iter().find(|r| r.label == "perturbed");
    let (Some(a), Some(b)) = (single, pert) else {
        return outcome(false, "no single-caustic start found".into());
    };
    let pass = a.clusters.len() == 1
        && a.height.report.verdict == Verdict::Bounded
        && b.clusters.len() == 2
        && b.height.report.verdict == Verdict::Unbounded;
    outcome(
        pass,
        format!(
            "(-0.2,1,0,0) from offset {:.6}: {} caustic(s), {:?}; (-2,1,0,0) from axis: {} caustic(s), {:?}",
            a.offset,
            a.clusters.len(),
            a.height.report.verdict,
            b.clusters.len(),
            b.height.report.verdict
        ),
    )
}

fn c12() -> Outcome {
    let spec = ExperimentSpec::defaults(ExperimentName::DiscCaustic);
    let runs = run_disc_caustic(&spec).unwrap();
    let (a, b) = (&runs[0], &runs[1]);
    let spread = a.clusters.iter().map(|c| c.spread).fold(0.0, f64::max);
    let pass = a.chords.len() == 200 && a.clusters.len() == 2 && spread < 1e-8 && b.gamma == 0.0 && b.clusters.len() == 1;
    outcome(
        pass,
        format!(
            "gamma={:.4}: {} clusters (spread {:.1e}); gamma=0: {} cluster(s)",
            a.gamma,
            a.clusters.len(),
            spread,
            b.clusters.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("collision-map algebra", c1),
        ("dimensional consistency", c2),
        ("cylinder projection", c3),
        ("equivariance", c4),
        ("closed form vs numeric", c5),
        ("energy conservation", c6),
        ("time reversibility", c7),
        ("radius limit of edge passes", c8),
        ("two plates", c9),
        ("radius-limit self-convergence", c10),
        ("circular cylinder regimes", c11),
        ("disc double caustic", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {} [{:.2}s]", i + 1, o.detail, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
