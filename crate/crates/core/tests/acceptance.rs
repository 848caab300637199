//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line, in order.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use radscat::diagnostics::{
    classify_initial_data, coercivity_report, gn_audit, sample_fields, scattering_profile_cauchy, tm_audit, tm_family,
};
use radscat::evolve::{evolve, linear_propagate, EvolveConfig, Trajectory};
use radscat::functionals::{virial_k, EvolutionState};
use radscat::ground_state::{solve_ground_state, GroundState, ShootingConfig};
use radscat::morawetz::{
    build_cutoff, identity_residual, identity_terms, virial_morawetz_audit, weighted_decay_integral, weighted_f_l1,
    DEFAULT_DELTA,
};
use radscat::radial::{make_grid, GridKind, RadialField, RadialGrid};
use radscat::Nonlinearity;

type Check = Result<String, String>;

fn gb(r_max: f64, n: usize) -> Arc<RadialGrid> {
    make_grid(r_max, n, GridKind::GaussBessel).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn focusing_power(p: f64) -> GroundState {
    solve_ground_state(&Nonlinearity::power(p, 1.0).unwrap(), 1.0, &ShootingConfig::default()).unwrap()
}

fn ground_state_identities() -> Check {
    let mut worst = 0.0_f64;
    let mut slowest = 0.0_f64;
    let mut lines = Vec::new();
    for p in [2.5, 3.0, 4.0, 6.0] {
        let t0 = Instant::now();
        let q = focusing_power(p);
        let r_grad = rel(q.grad_sq / q.mass_sq, p / 2.0);
        let r_lp = rel(q.lp_norm / q.mass_sq, (p + 2.0) / 2.0);
        let k = virial_k(&q.profile, &q.nl).abs() / q.grad_sq;
        // includes the grid operators built on first use
        let secs = t0.elapsed().as_secs_f64();
        worst = worst.max(r_grad).max(r_lp).max(k);
        slowest = slowest.max(secs);
        lines.push(format!("p={p}: {r_grad:.1e}/{r_lp:.1e}/{k:.1e} in {secs:.2}s"));
    }
    ensure(
        worst < 1e-4 && slowest < 5.0,
        format!("worst relative defect {worst:.2e}, slowest solve {slowest:.2}s [{}]", lines.join("; ")),
    )
}

fn gn_sharpness(q4: &GroundState) -> Check {
    let grid = gb(30.0, 256);
    let fields = sample_fields(&grid, 120, 2024).unwrap();
    let rep = gn_audit(&fields, 4.0, q4).unwrap();
    let evaluated = rep.entries.iter().filter(|e| e.ratio.is_some()).count();
    ensure(
        (rep.ground_state_ratio - 1.0).abs() < 1e-3 && rep.max_ratio <= 1.0 + 1e-6 && evaluated >= 100,
        format!(
            "ratio at Q0 = {:.10}, max over {evaluated} sampled fields = {:.6}, route discrepancy {:.1e}",
            rep.ground_state_ratio, rep.max_ratio, rep.route_discrepancy
        ),
    )
}

fn drift_run(state: &EvolutionState, nl: &Nonlinearity, dt: f64) -> (f64, f64) {
    let cfg = EvolveConfig {
        dt,
        snapshot_stride: 1000,
        monitor_stride: 10,
        ..Default::default()
    };
    evolve(state, nl, 5.0, &cfg).unwrap().drifts()
}

fn conservation() -> Check {
    let grid = gb(96.0, 512);
    let nl = Nonlinearity::power(4.0, -1.0).unwrap();
    let u = RadialField::gaussian(grid.clone(), 1.0, 1.0).unwrap();
    let nls = EvolutionState::nls(u.clone(), 0.0);
    let kg = EvolutionState::nlkg(u, RadialField::zeros(grid), 0.0).unwrap();
    let (m1, e1) = drift_run(&nls, &nl, 1e-3);
    let (m2, e2) = drift_run(&nls, &nl, 5e-4);
    let (_, k1) = drift_run(&kg, &nl, 1e-3);
    let (_, k2) = drift_run(&kg, &nl, 5e-4);
    ensure(
        m1 < 1e-10 && m2 < 1e-10 && e1 < 1e-6 && k1 < 1e-5 && e1 / e2 >= 3.0 && k1 / k2 >= 3.0,
        format!(
            "NLS mass {m1:.1e}, energy {e1:.2e} (halved dt: {e2:.2e}, ratio {:.2}); NLKG energy {k1:.2e} (halved: {k2:.2e}, ratio {:.2})",
            e1 / e2,
            k1 / k2
        ),
    )
}

fn identity_run(dt: f64, n: usize) -> (f64, bool) {
    let grid = gb(48.0, n);
    let nl = Nonlinearity::power(4.0, -1.0).unwrap();
    let u = RadialField::gaussian(grid.clone(), 1.0, 1.0).unwrap();
    let cfg = EvolveConfig {
        dt,
        snapshot_stride: 1,
        monitor_stride: 1,
        ..Default::default()
    };
    let traj = evolve(&EvolutionState::nls(u, 0.0), &nl, 1.0, &cfg).unwrap();
    let cw = build_cutoff(3.0, &grid).unwrap();
    let rep = identity_residual(&traj, &cw, (0.0, 1.0)).unwrap();
    let null = traj
        .states
        .iter()
        .all(|s| identity_terms(s, &cw, &nl).unwrap().radial_null == 0.0)
        && rep.rows.iter().all(|r| r.radial_null == 0.0);
    (rep.relative_residual(), null)
}

fn morawetz_identity() -> Check {
    let (fine, null_fine) = identity_run(5e-3, 256);
    let (coarse, null_coarse) = identity_run(1e-2, 128);
    ensure(
        fine < 1e-3 && coarse / fine >= 3.0 && null_fine && null_coarse,
        format!(
            "relative residual {fine:.2e} (dt=5e-3, n=256), {coarse:.2e} at (2dt, n/2), ratio {:.2}; radial-null term identically zero: {}",
            coarse / fine,
            null_fine && null_coarse
        ),
    )
}

struct LongRuns {
    power: Trajectory,
    exponential: Trajectory,
    free: Trajectory,
}

fn long_runs() -> LongRuns {
    let grid = gb(400.0, 850);
    let u = RadialField::gaussian(grid.clone(), 1.0, 0.1).unwrap();
    let cfg = EvolveConfig {
        dt: 5e-3,
        snapshot_stride: 50,
        monitor_stride: 5,
        ..Default::default()
    };
    let state = EvolutionState::nls(u, 0.0);
    let power = evolve(&state, &Nonlinearity::power(4.0, -1.0).unwrap(), 50.0, &cfg).unwrap();
    let exponential = evolve(&state, &Nonlinearity::exponential(1.0, -1.0).unwrap(), 50.0, &cfg).unwrap();
    let free = evolve(&state, &Nonlinearity::Free, 50.0, &cfg).unwrap();
    LongRuns {
        power,
        exponential,
        free,
    }
}

fn windows() -> Vec<(f64, f64)> {
    (0..8).map(|j| (1.0 + 5.0 * j as f64, 15.0 + 5.0 * j as f64)).collect()
}

fn virial_morawetz(runs: &LongRuns) -> Check {
    let radii = [2.0, 4.0, 8.0, 16.0];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, traj) in [("power p=4", &runs.power), ("exponential", &runs.exponential)] {
        let a = virial_morawetz_audit(traj, &radii, &windows(), None).unwrap();
        ok &= a.stable && a.gamma == 2.0;
        parts.push(format!(
            "{name}: gamma={} C* first window {:.4}, final {:.4} (x{:.2})",
            a.gamma,
            a.running_max[0],
            a.c_star,
            a.c_star / a.running_max[0]
        ));
    }
    ensure(ok, parts.join("; "))
}

fn weighted_decay(runs: &LongRuns) -> Check {
    let horizons = [1.0, 2.0, 4.0, 8.0];
    let series = |f: &dyn Fn(f64) -> f64| horizons.iter().map(|&t| f(t)).collect::<Vec<f64>>();
    let bounded = |r: &[f64]| {
        let max = r.iter().cloned().fold(0.0, f64::max);
        max <= 1.5 * r[0] && r[r.len() - 1] <= r[0]
    };
    let pw = series(&|t| weighted_decay_integral(&runs.power, t, DEFAULT_DELTA).unwrap().ratio);
    let ex = series(&|t| weighted_decay_integral(&runs.exponential, t, DEFAULT_DELTA).unwrap().ratio);
    let fx = series(&|t| weighted_f_l1(&runs.exponential, t, DEFAULT_DELTA).unwrap().ratio);
    let fmt = |r: &[f64]| r.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    ensure(
        bounded(&pw) && bounded(&ex) && bounded(&fx),
        format!(
            "ratio to T^-delta at T=1,2,4,8: power [{}]; exponential [{}]; exponential force [{}]",
            fmt(&pw),
            fmt(&ex),
            fmt(&fx)
        ),
    )
}

fn free_decay() -> Check {
    let grid = gb(160.0, 1024);
    let u = RadialField::gaussian(grid, 1.0, 1.0).unwrap();
    let state = EvolutionState::nls(u, 0.0);
    let mut worst = 0.0_f64;
    for i in 0..=40 {
        let t = 0.25 * i as f64;
        let s = linear_propagate(&state, t).unwrap();
        let exact = 1.0 / (1.0 + 16.0 * t * t).sqrt();
        // the sup sits at the origin, which is not a node
        let sup = s.u.value_at_origin().norm().max(s.u.sup_norm());
        worst = worst.max((sup - exact).abs());
    }
    ensure(worst < 1e-3, format!("max |sup|u| - (1+16t^2)^(-1/2)| on [0, 10] = {worst:.2e}"))
}

fn trudinger_moser() -> Check {
    let grid = make_grid(12.0, 24_000, GridKind::Uniform).unwrap();
    let mu = [0.5, 1.0, 2.0];
    let rho = [0.3, 0.1];
    let mut parts = Vec::new();
    let mut ok = true;
    for a in [1.0, 2.0] {
        let coarse = [0.2, 0.5, 0.8, 0.95];
        let mut with_bad = coarse.to_vec();
        with_bad.push(1.05);
        let fam = tm_family(&grid, a, 1.0, &mu, &rho, &with_bad).unwrap();
        let rep = tm_audit(&fam, a, 1.0).unwrap();
        let fine = [0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95, 0.99];
        let refined = tm_audit(&tm_family(&grid, a, 1.0, &mu, &rho, &fine).unwrap(), a, 1.0).unwrap();
        let finite = rep.entries.iter().filter_map(|e| e.lhs).all(f64::is_finite);
        let dominated = rep.entries.iter().filter_map(|e| e.ratio).all(|r| r <= rep.fitted_constant);
        let rejected_ok = rep.rejected == 5
            && rep
                .entries
                .iter()
                .filter(|e| e.name.ends_with("@1.05"))
                .all(|e| e.lhs.is_none());
        let stable = refined.fitted_constant <= 2.0 * rep.fitted_constant;
        ok &= rep.evaluated == 20 && finite && dominated && rejected_ok && stable;
        parts.push(format!(
            "a={a}: {} evaluated, {} rejected, fitted C = {:.4} (refined family {:.4})",
            rep.evaluated, rep.rejected, rep.fitted_constant, refined.fitted_constant
        ));
    }
    ensure(ok, parts.join("; "))
}

fn coercivity(q4: &GroundState) -> Check {
    let grid = gb(250.0, 1024);
    let cfg = EvolveConfig {
        dt: 5e-3,
        snapshot_stride: 20,
        monitor_stride: 20,
        boundary_tolerance: 1e-2,
        ..Default::default()
    };
    let mut parts = Vec::new();
    let mut ok = true;

    let u = q4.profile_on(&grid).scale(0.5);
    let state = EvolutionState::nls(u, 0.0);
    let v = classify_initial_data(&state, &q4.nl, Some(q4)).unwrap();
    let traj = evolve(&state, &q4.nl, 20.0, &cfg).unwrap();
    let rep = coercivity_report(&traj, Some(q4)).unwrap();
    let outer = traj.states.iter().map(|s| s.u.outer_mass_fraction(0.9)).fold(0.0, f64::max);
    ok &= rep.fitted_constant > 0.0 && rep.regime_constant && v.regime.to_string() == "focusing-below-threshold-K-positive";
    parts.push(format!(
        "p=4 from 0.5 Q0: min K/|grad u|^2 = {:.4} over {} snapshots, verdict constant: {}, max outer-band mass {outer:.1e}",
        rep.fitted_constant,
        rep.times.len(),
        rep.regime_constant
    ));

    let nl = Nonlinearity::exponential(1.0, 1.0).unwrap();
    let qe = solve_ground_state(&nl, 1.0, &ShootingConfig::default()).unwrap();
    let state = EvolutionState::nls(qe.profile_on(&grid).scale(0.5), 0.0);
    let ve = classify_initial_data(&state, &nl, Some(&qe)).unwrap();
    ok &= ve.regime.to_string() == "focusing-below-threshold-K-positive";
    let traj = evolve(&state, &nl, 20.0, &cfg).unwrap();
    let rep = coercivity_report(&traj, Some(&qe)).unwrap();
    let g = rep.max_scaled_gradient.unwrap();
    ok &= rep.gradient_below_cap == Some(true);
    parts.push(format!(
        "exponential from 0.5 Q ({}): max kappa0 |grad u|^2 = {g:.4} < 4 pi = {:.4}",
        ve.regime,
        4.0 * PI
    ));
    ensure(ok, parts.join("; "))
}

fn scattering(runs: &LongRuns) -> Check {
    let rep = scattering_profile_cauchy(&runs.power, &[5.0, 10.0, 20.0]).unwrap();
    let d = &rep.deltas;
    let lin = scattering_profile_cauchy(&runs.free, &[5.0, 10.0, 20.0]).unwrap();
    let lin_max = lin.deltas.iter().cloned().fold(0.0, f64::max);
    ensure(
        d[0] > d[1] && d[1] > d[2] && d[2] / d[0] < 0.5 && lin_max < 1e-10,
        format!(
            "delta(5)={:.3e}, delta(10)={:.3e}, delta(20)={:.3e}, delta(20)/delta(5)={:.3}; linear run max delta {lin_max:.1e}; {}",
            d[0],
            d[1],
            d[2],
            d[2] / d[0],
            rep.verdict
        ),
    )
}

fn classification(q4: &GroundState) -> Check {
    let grid = gb(30.0, 256);
    let m = q4.threshold().m;
    let (mut below, mut agree) = (0, 0);
    for (_, u) in sample_fields(&grid, 60, 99).unwrap() {
        for s in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
            let v = classify_initial_data(&EvolutionState::nls(u.scale(s), 0.0), &q4.nl, Some(q4)).unwrap();
            if v.level < m {
                below += 1;
                let k_pos = v.k_virial > 0.0;
                if v.norm_product.unwrap().below == k_pos {
                    agree += 1;
                }
            }
        }
    }
    ensure(
        below >= 50 && agree == below,
        format!("{agree}/{below} sampled fields with J < m agree"),
    )
}

fn main() {
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {n:>2} [{name}]: PASS ({secs:.1}s) {d}"),
            Err(d) => {
                failures += 1;
                println!("criterion {n:>2} [{name}]: FAIL ({secs:.1}s) {d}");
            }
        }
    };
    let q4 = focusing_power(4.0);
    report(1, "ground-state identities", &mut ground_state_identities);
    report(2, "G-N sharpness", &mut || gn_sharpness(&q4));
    report(3, "conservation", &mut conservation);
    report(4, "Morawetz identity", &mut morawetz_identity);
    let runs = long_runs();
    report(5, "virial-Morawetz bound", &mut || virial_morawetz(&runs));
    report(6, "weighted decay", &mut || weighted_decay(&runs));
    report(7, "free dispersive decay", &mut free_decay);
    report(8, "Trudinger-Moser", &mut trudinger_moser);
    report(9, "below-threshold coercivity", &mut || coercivity(&q4));
    report(10, "scattering consistency", &mut || scattering(&runs));
    report(11, "classification equivalence", &mut || classification(&q4));
    println!("acceptance: {} of 11 passed in {:.0}s", 11 - failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
