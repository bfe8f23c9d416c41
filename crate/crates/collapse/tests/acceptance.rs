//! Acceptance gate: nine numbered checks over the whole laboratory, each
//! printing one `criterion N: PASS/FAIL [...]` line with its measured
//! numbers. Cargo echoes the line for failing checks; run with
//! `cargo test --test acceptance -- --nocapture` to see all nine.
//!
//! Every tolerance is pinned here, next to the check that uses it.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use collapse::functionals;
use collapse::lagrangian::{
    self, DetectionThresholds, DivergenceTrace, FluidState, SimulationReport,
};
use collapse::model::{
    build_profile, unit_sphere_area, ForceSign, ModelParams, ProfileFamily, ProfileSpec,
    RadialProfile,
};
use collapse::riccati::{self, RiccatiBound};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: usize, ok: bool, detail: &str) {
    let word = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {word} [{detail}]");
    assert!(ok, "criterion {criterion}: {detail}");
}

fn uniform_ball(amplitude: f64) -> ProfileSpec {
    ProfileSpec {
        family: ProfileFamily::Uniform { amplitude },
        radius: 1.0,
    }
}

/// Unit ball of unit density, everything initially at rest, 3-D.
fn ball_initial(shells: usize) -> FluidState {
    let density = build_profile(&uniform_ball(1.0), 2001).unwrap();
    let velocity = build_profile(&uniform_ball(0.0), 2001).unwrap();
    lagrangian::init_shells(&density, &velocity, shells, 3).unwrap()
}

/// Force-free unit ball with the linearly contracting field u = -r, which
/// focuses every shell into the origin at t = 1.
fn free_streaming_run(shells: usize, dt: f64) -> (DivergenceTrace, SimulationReport) {
    let params = ModelParams::pressureless(3, ForceSign::Free).unwrap();
    let density = build_profile(&uniform_ball(1.0), 2001).unwrap();
    let velocity = build_profile(
        &ProfileSpec {
            family: ProfileFamily::PiecewiseLinear {
                points: vec![(0.0, 0.0), (1.0, -1.0)],
            },
            radius: 1.0,
        },
        2001,
    )
    .unwrap();
    let initial = lagrangian::init_shells(&density, &velocity, shells, 3).unwrap();
    lagrangian::run_simulation(&initial, &params, dt, 2.0, &DetectionThresholds::default()).unwrap()
}

/// Shared by criteria 3, 8 and 9 (the criterion-3 budget covers its cost).
fn force_free_sim() -> &'static (DivergenceTrace, SimulationReport) {
    static SIM: OnceLock<(DivergenceTrace, SimulationReport)> = OnceLock::new();
    SIM.get_or_init(|| free_streaming_run(200, 1e-4))
}

/// Shared by criteria 4 and 8 (the criterion-4 budget covers its cost).
fn ball_sim() -> &'static (FluidState, DivergenceTrace, SimulationReport) {
    static SIM: OnceLock<(FluidState, DivergenceTrace, SimulationReport)> = OnceLock::new();
    SIM.get_or_init(|| {
        let initial = ball_initial(200);
        let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
        let (trace, report) = lagrangian::run_simulation(
            &initial,
            &params,
            1e-4,
            1.0,
            &DetectionThresholds::default(),
        )
        .unwrap();
        (initial, trace, report)
    })
}

/// Time for `R'' = -M/R^2` released from rest at `r0` to fall to `r_stop`,
/// by Simpson quadrature of the energy integral after the substitution
/// `R = r0 cos^2(theta)`, which removes the endpoint singularity. With 4096
/// panels on a smooth integrand the quadrature error is far below every
/// tolerance it is compared against.
fn freefall_oracle(r0: f64, mass: f64, r_stop: f64) -> f64 {
    let theta_c = (r_stop / r0).sqrt().acos();
    let n = 4096usize;
    let h = theta_c / n as f64;
    let f = |theta: f64| 2.0 * theta.cos().powi(2);
    let mut sum = f(0.0) + f(theta_c);
    for k in 1..n {
        sum += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    (r0.powi(3) / (2.0 * mass)).sqrt() * sum * h / 3.0
}

#[test]
fn criterion_1_comparison_curve_tracks_its_closed_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &h0 in &[0.0, -1.0, 1.0] {
        for &volume in &[1.0, 4.0] {
            for &forcing in &[1.0, 4.0 * PI] {
                let bound = RiccatiBound::integration(h0, volume, forcing).unwrap();
                let t_star = bound.blowup_time().expect("this family always blows up");
                let trace =
                    riccati::integrate_comparison(&bound, None, 1e-4, 0.99 * t_star, 1e12).unwrap();
                assert!(trace.escape_time.is_none(), "escaped inside the window");
                for (&t, &numeric) in trace.times.iter().zip(&trace.values) {
                    let closed = bound.eval(t).unwrap();
                    if numeric == closed {
                        continue; // shared initial sample
                    }
                    worst = worst.max(((numeric - closed) / closed).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-6 && elapsed < Duration::from_secs(1);
    verdict(
        1,
        ok,
        &format!(
            "12 initial-data combos, dt 1e-4, window 0.99 of each blowup time: \
             worst relative error {worst:.3e} (tol 1e-6); {elapsed:.2?} (budget 1 s)"
        ),
    );
}

#[test]
fn criterion_2_blowup_time_stays_strictly_under_the_cap() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tightest = f64::INFINITY;
    let mut ok = true;
    for _ in 0..100 {
        let h0 = rng.gen_range(-10.0..=10.0);
        let volume = rng.gen_range(0.5..4.0);
        let forcing = rng.gen_range(0.5..13.0);
        let bound = RiccatiBound::integration(h0, volume, forcing).unwrap();
        let t_star = bound.blowup_time().expect("this family always blows up");
        let cap = riccati::universal_cap(volume, forcing).unwrap();
        ok &= t_star > 0.0 && t_star < cap;
        tightest = tightest.min(cap - t_star);
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_millis(100);
    verdict(
        2,
        ok,
        &format!(
            "100 seeded draws of (H0, volume, forcing): every blowup time strictly \
             below its cap, smallest margin {tightest:.3e}; {elapsed:.2?} (budget 0.1 s)"
        ),
    );
}

#[test]
fn criterion_3_free_streaming_collapse_and_center_divergence() {
    let start = Instant::now();
    let (trace, report) = force_free_sim();
    let t_blow = report.blowup_time.expect("contracting ball must collapse");
    let time_ok = (t_blow - 1.0).abs() <= 0.01;

    // along u = -r/(1-t) the center divergence is exactly -3/(1-t)
    let mut worst = 0.0f64;
    for (&t, &h) in trace.times.iter().zip(&trace.h_pointwise_center) {
        if t > 0.95 {
            continue;
        }
        let exact = -3.0 / (1.0 - t);
        worst = worst.max(((h - exact) / exact).abs());
    }
    let elapsed = start.elapsed();
    let ok = time_ok && worst <= 1e-3 && elapsed < Duration::from_secs(5);
    verdict(
        3,
        ok,
        &format!(
            "200 shells, dt 1e-4: collapse at t={t_blow:.7} (exact 1, tol 1%); worst \
             center-divergence relative error {worst:.3e} up to t=0.95 (tol 1e-3); \
             {elapsed:.2?} (budget 5 s)"
        ),
    );
}

#[test]
fn criterion_4_ball_collapse_oracle_and_tangent_curve_ordering() {
    let start = Instant::now();
    let (initial, trace, report) = ball_sim();
    let t_blow = report.blowup_time.expect("attractive ball must collapse");

    // per-shell oracle: the same force law integrated by the independent
    // boundary routine; in 3-D coupling/area = 1, so the driving constant
    // is the enclosed mass itself
    let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
    let total: f64 = initial.shell_mass.iter().sum();
    let n = initial.shell_count();
    let mut shell_times: Vec<f64> = (0..n)
        .map(|j| {
            let enclosed = total * (j as f64 + 0.5) / n as f64;
            lagrangian::emden_boundary(initial.shell_radius[j], 0.0, enclosed, &params, 1e-4, 1.0)
                .unwrap()
                .collapse_time
                .expect("every shell of the uniform ball collapses")
        })
        .collect();
    shell_times.sort_by(f64::total_cmp);
    let oracle = shell_times[n / 2];
    let time_ok = (t_blow - oracle).abs() <= 0.01 * oracle;

    // ordering clause: the recorded volume-averaged divergence must stay at
    // or below the frozen-volume tangent curve wherever that curve is
    // finite, with slack 1e-3 * (1 + |curve|)
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_t = f64::NAN;
    for k in 0..trace.len() {
        let bound = trace.tan_bound[k];
        if !bound.is_finite() {
            continue;
        }
        let excess = trace.h_integrated[k] - bound - 1e-3 * (1.0 + bound.abs());
        if excess > worst_excess {
            worst_excess = excess;
            worst_t = trace.times[k];
        }
    }
    let order_ok = worst_excess <= 0.0;

    let elapsed = start.elapsed();
    let ok = time_ok && order_ok && elapsed < Duration::from_secs(30);
    verdict(
        4,
        ok,
        &format!(
            "200 shells, dt 1e-4: collapse at t={t_blow:.7} vs median shell oracle \
             {oracle:.7} ({time_clause}); tangent-curve ordering {order_clause} \
             (worst excess beyond slack {worst_excess:.3e} at t={worst_t:.4}; the \
             frozen-volume curve diverges at its own singularity while the flow is \
             still finite, so every sample just below that time violates the \
             ordering); {elapsed:.2?} (budget 30 s)",
            time_clause = if time_ok {
                "within 1%"
            } else {
                "off by more than 1%"
            },
            order_clause = if order_ok { "holds" } else { "violated" },
        ),
    );
}

#[test]
fn criterion_5_boundary_collapse_times_match_their_oracles() {
    let start = Instant::now();
    // constant inward pull of 2 on a unit support halts it exactly at t = 1
    let p1 = ModelParams::pressureless(1, ForceSign::Attractive).unwrap();
    let t1 = lagrangian::emden_boundary(1.0, 0.0, 2.0, &p1, 1e-4, 2.0)
        .unwrap()
        .collapse_time
        .expect("constant pull collapses");
    let e1 = (t1 - 1.0).abs();

    // inverse-square pull from rest: energy-integral quadrature oracle
    let p3 = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
    let t3 = lagrangian::emden_boundary(1.0, 0.0, 1.0, &p3, 1e-4, 2.0)
        .unwrap()
        .collapse_time
        .expect("inverse-square pull collapses");
    let oracle = freefall_oracle(1.0, 1.0, 1e-6);
    let e3 = (t3 - oracle).abs();

    let elapsed = start.elapsed();
    let ok = e1 <= 1e-6 && e3 <= 1e-4 && elapsed < Duration::from_secs(1);
    verdict(
        5,
        ok,
        &format!(
            "unit-time collapse error {e1:.3e} (tol 1e-6); inverse-square collapse \
             error {e3:.3e} vs quadrature oracle {oracle:.10} (tol 1e-4; the ideal \
             plunge time is pi/(2 sqrt 2) = {ideal:.10}); {elapsed:.2?} (budget 1 s)",
            ideal = PI / (2.0 * 2f64.sqrt()),
        ),
    );
}

#[test]
fn criterion_6_pressure_functional_telescopes_and_matches_its_flux_form() {
    let start = Instant::now();

    // (a) full support: the integrand is a pure divergence and the profile's
    // boundary flux vanishes, so only quadrature roundoff remains
    let parabola = build_profile(
        &ProfileSpec {
            family: ProfileFamily::Parabolic { amplitude: 1.0 },
            radius: 1.0,
        },
        10_001,
    )
    .unwrap();
    let full = functionals::pressure_functional(&parabola, 1.0, 2.0, (0.0, 1.0), 1).unwrap();

    // (b) stopping inside the support leaves exactly the boundary flux -3
    let part = functionals::pressure_functional(&parabola, 1.0, 2.0, (0.0, 0.5), 1).unwrap();

    // (c) seeded smooth positive profiles with closed-form flux: the value
    // must equal the flux difference across the domain ends
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dim = rng.gen_range(1..=3usize);
        let gamma = [1.5, 2.0, 3.0][rng.gen_range(0..3usize)];
        let k = rng.gen_range(0.5..2.0);
        let c0 = rng.gen_range(1.0..2.0);
        let c1 = rng.gen_range(-0.4..0.4);
        let c2 = rng.gen_range(-0.2..0.2);

        let count = 20_001usize;
        let xs: Vec<f64> = (0..count).map(|i| i as f64 / (count - 1) as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&r| c0 + c1 * r * r + c2 * r * r * r)
            .collect();
        let profile = RadialProfile::new(xs, ys).unwrap();

        // domain ends on exact node values, comfortably inside the support
        let ia = rng.gen_range(400..2000usize);
        let ib = rng.gen_range(12_000..19_600usize);
        let (a, b) = (profile.nodes()[ia], profile.nodes()[ib]);
        let value = functionals::pressure_functional(&profile, k, gamma, (a, b), dim).unwrap();

        let flux = |r: f64| {
            let rho = c0 + c1 * r * r + c2 * r * r * r;
            let drho = 2.0 * c1 * r + 3.0 * c2 * r * r;
            let weight = if dim == 1 {
                2.0
            } else {
                unit_sphere_area(dim).unwrap() * r.powi(dim as i32 - 1)
            };
            k * gamma * rho.powf(gamma - 1.0) * drho * weight
        };
        let expected = flux(b) - flux(a);
        worst = worst.max((value - expected).abs() / expected.abs().max(1.0));
    }

    let elapsed = start.elapsed();
    let ok = full.abs() <= 1e-8
        && (part + 3.0).abs() <= 1e-6
        && worst <= 1e-6
        && elapsed < Duration::from_secs(1);
    verdict(
        6,
        ok,
        &format!(
            "full-support value {full:.3e} (tol 1e-8); interior-domain value \
             {part:.10} vs exact -3 (tol 1e-6); worst flux-identity error over 20 \
             seeded profiles {worst:.3e} (tol 1e-6); {elapsed:.2?} (budget 1 s)"
        ),
    );
}

#[test]
fn criterion_7_quadrature_inequalities_hold_on_random_fields() {
    let start = Instant::now();
    let base = ball_initial(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst_cs = f64::NEG_INFINITY;
    let mut worst_flux = 0.0f64;
    for _ in 0..100 {
        let a0 = rng.gen_range(-2.0..2.0);
        let a1 = rng.gen_range(-2.0..2.0);
        let a2 = rng.gen_range(-2.0..2.0);
        let mut state = base.clone();
        for (v, &r) in state.shell_velocity.iter_mut().zip(&state.shell_radius) {
            *v = a0 * r + a1 * r * r + a2 * r * r * r;
        }

        let pair = functionals::cauchy_schwarz_gap(&state).unwrap();
        worst_cs = worst_cs.max(pair.lhs - pair.rhs - 1e-10 * pair.rhs.abs().max(1.0));

        let volume_route = functionals::divergence_integral(&state).unwrap();
        let flux_route = functionals::boundary_flux(&state).unwrap();
        // the signed routes can nearly cancel for unlucky coefficients, so
        // "relative" is measured against the unsigned integral of the same
        // field, never against the cancelled value
        let div = functionals::divergence_field(&state).unwrap();
        let volumes = state.annulus_volumes().unwrap();
        let norm: f64 = div.iter().zip(&volumes).map(|(d, v)| d.abs() * v).sum();
        worst_flux = worst_flux.max((volume_route - flux_route).abs() / norm.max(1.0));
    }
    let elapsed = start.elapsed();
    let ok = worst_cs <= 0.0 && worst_flux <= 1e-4 && elapsed < Duration::from_secs(5);
    verdict(
        7,
        ok,
        &format!(
            "100 seeded velocity fields on 1000 shells: mean-square inequality slack \
             never exceeded (worst signed excess {worst_cs:.3e}); volume vs flux \
             divergence integral worst scaled gap {worst_flux:.3e} (tol 1e-4); \
             {elapsed:.2?} (budget 5 s)"
        ),
    );
}

#[test]
fn criterion_8_conservation_and_positivity_along_both_simulations() {
    let free = &force_free_sim().0;
    let ball = &ball_sim().1;
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, trace) in [("free streaming", free), ("attractive ball", ball)] {
        let m0 = trace.mass[0];
        let drift = trace
            .mass
            .iter()
            .map(|m| (m - m0).abs() / m0)
            .fold(0.0, f64::max);
        let min_rho = trace
            .min_density
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        ok &= drift <= 1e-12 && min_rho > 0.0;
        notes.push(format!(
            "{name}: mass drift {drift:.2e} (tol 1e-12), smallest density {min_rho:.3e}"
        ));
    }
    verdict(8, ok, &notes.join("; "));
}

#[test]
fn criterion_9_halving_the_step_contracts_the_errors() {
    let start = Instant::now();

    // leg A: free-streaming collapse against the exact blowup at t = 1 with
    // both the step halved and the shell count doubled. The detected time
    // can never sit closer to the truth than the collapse-threshold offset
    // (the run stops when the support reaches 1e-6 of its initial radius,
    // i.e. 1e-6 before the true focus time), so once both errors are at
    // that floor the ratio carries no convergence information and the leg
    // is judged by the floor instead.
    let base = &force_free_sim().1;
    let fine = free_streaming_run(400, 5e-5).1;
    let e_a1 = (base.blowup_time.unwrap() - 1.0).abs();
    let e_a2 = (fine.blowup_time.unwrap() - 1.0).abs();
    let floor_a = 2e-6;
    let ratio_a = e_a1 / e_a2;
    let leg_a_at_floor = e_a1 <= floor_a && e_a2 <= floor_a;
    let leg_a = ratio_a >= 3.5 || leg_a_at_floor;

    // leg B: boundary-collapse time against the quadrature oracle evaluated
    // at the collapse radius itself, which removes the threshold offset.
    // The residual error is dominated by event localization inside the
    // final plunge step, so the same floor reasoning applies below 1e-7.
    let params = ModelParams::pressureless(3, ForceSign::Attractive).unwrap();
    let exact = freefall_oracle(1.0, 1.0, 1e-6);
    let collapse_at = |dt: f64| {
        lagrangian::emden_boundary(1.0, 0.0, 1.0, &params, dt, 2.0)
            .unwrap()
            .collapse_time
            .unwrap()
    };
    let e_b1 = (collapse_at(1e-4) - exact).abs();
    let e_b2 = (collapse_at(5e-5) - exact).abs();
    let floor_b = 1e-7;
    let ratio_b = e_b1 / e_b2;
    let leg_b_at_floor = e_b1 <= floor_b && e_b2 <= floor_b;
    let leg_b = ratio_b >= 3.5 || leg_b_at_floor;

    let elapsed = start.elapsed();
    verdict(
        9,
        leg_a && leg_b,
        &format!(
            "shell collapse errors {e_a1:.3e} -> {e_a2:.3e} (ratio {ratio_a:.2}{a_note}); \
             boundary collapse errors {e_b1:.3e} -> {e_b2:.3e} (ratio {ratio_b:.2}{b_note}); \
             {elapsed:.2?}",
            a_note = if leg_a_at_floor {
                ", both at the 2e-6 detection-offset floor"
            } else {
                ""
            },
            b_note = if leg_b_at_floor {
                ", both under the 1e-7 event-localization floor"
            } else {
                ""
            },
        ),
    );
}
