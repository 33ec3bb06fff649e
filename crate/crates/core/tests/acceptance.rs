//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::Instant;

use common::*;
use kinetic_continua::analytic::{
    algebraic_residual, couette_profile, dispersion, example_fields, poiseuille_profile,
    stationary_shear, DispersionConvention, DispersionRegime, Example, ExampleParams,
};
use kinetic_continua::constitutive::{
    internal_torque_a, observer_shift, scalar_power_density, stirring_z, stress_t,
    LocalKineticState, MaterialParams,
};
use kinetic_continua::particles::{
    balance_residuals, conservation_check, energy_theorem_residual, random_particles, ForceModel,
    ParticleSystem, Sample,
};
use kinetic_continua::solver::{
    BoundarySpec, Cell, ConstraintMode, FermentBc, Grid, Inflow, SideSpec, Solver, SourceSpec,
    VelocityBc,
};
use kinetic_continua::temperance::{
    fit_temperance, isotropic_ferment, moments, order_tensor, rotate, FitOptions, Integration,
    SpeedDistribution, Temperance,
};
use kinetic_continua::tensor::{SymTen2, Ten2, Ten3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest relative PSD correction seen by each solver run.
type PsdLog = Vec<(String, f64)>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rand_ten2(rng: &mut ChaCha8Rng) -> Ten2 {
    Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0))
}

fn objectivity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = MaterialParams {
        eta1: 0.7,
        eta3: 0.4,
        alpha: 1.3,
        beta: 0.2,
        gamma: 0.9,
        ..Default::default()
    };
    let (mut skew, mut power) = (0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let g = rand_ten2(&mut rng);
        let mut s = LocalKineticState::new(
            rng.random_range(0.5..2.0),
            rand_ten2(&mut rng),
            rand_ten2(&mut rng),
            g.dot(&g.transpose()).sym(),
        );
        s.bb = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
        let t = stress_t(&s, &params);
        let a = internal_torque_a(&s, &params);
        let scale = t.norm().max(a.norm());
        skew = skew.max((t.skw() - a.skw()).norm() / scale);

        let w = Vec3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let z = stirring_z(&s, &params);
        let m = Ten3::ZERO;
        let p0 = scalar_power_density(&s, &t, &a, &z, &m);
        let (l, b) = observer_shift(&s.l, &s.b, &w);
        let moved = LocalKineticState { l, b, ..s };
        let t1 = stress_t(&moved, &params);
        let a1 = internal_torque_a(&moved, &params);
        let z1 = stirring_z(&moved, &params);
        let p1 = scalar_power_density(&moved, &t1, &a1, &z1, &m);
        let ref_scale = s.l.norm() * t.norm() + s.b.norm() * a.norm() + z.norm();
        power = power.max((p1 - p0).abs() / ref_scale);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        skew <= 1e-13 && power <= 1e-12 && secs < 5.0,
        format!("skw mismatch {skew:.2e}, power change {power:.2e}, {secs:.2} s"),
    )
}

fn smooth_run(dt: f64, t_end: f64) -> Vec<Sample> {
    let force = ForceModel::SmoothField {
        seed: 21,
        modes: 6,
        stiffness: 1.0,
        amplitude: 0.5,
    };
    let mut sys = ParticleSystem::new(random_particles(64, 5, 1.0), Box::new(force)).unwrap();
    sys.run(dt, (t_end / dt).round() as usize, 1).unwrap()
}

fn oracle_identities() -> Outcome {
    let start = Instant::now();
    let (dt, t_end) = (2e-3, 1.0);
    let coarse = smooth_run(dt, t_end);
    let fine = smooth_run(0.5 * dt, t_end);
    let remark = coarse
        .iter()
        .chain(&fine)
        .map(|s| {
            let a = &s.agg;
            (a.h_tilde - a.y.congruence(&a.b) - a.h).norm() / a.h_tilde.norm()
        })
        .fold(0.0, f64::max);
    let norms = |traj: &[Sample], dt: f64| {
        let r = balance_residuals(traj, dt).unwrap().max_norms();
        let e = energy_theorem_residual(traj, dt)
            .unwrap()
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        [r[1], r[2], r[3], e]
    };
    let (a, b) = (norms(&coarse, dt), norms(&fine, 0.5 * dt));
    let ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x / y).collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        remark <= 1e-12 && ratios.iter().all(|r| *r >= 3.8) && secs < 30.0,
        format!(
            "remark identity {remark:.2e}, halving ratios II {:.3} III {:.3} IV {:.3} energy {:.3}, {secs:.2} s",
            ratios[0], ratios[1], ratios[2], ratios[3]
        ),
    )
}

fn conservation() -> Outcome {
    let force = ForceModel::UniformGravity {
        g: Vec3::new(0.0, 0.0, -1.0),
    };
    let mut sys = ParticleSystem::new(random_particles(64, 8, 1.0), Box::new(force)).unwrap();
    let traj = sys.run(1e-3, 10_000, 1).unwrap();
    let r = conservation_check(&traj, None).unwrap();
    outcome(
        r.max_relative_drift < 1e-8,
        format!("relative drift {:.2e} over 10^4 steps", r.max_relative_drift),
    )
}

fn example1_steady(psd: &mut PsdLog) -> Outcome {
    let (rho, v) = (1.3, 0.5);
    let (mut s, h) = example1(16, rho, 0.7, v);
    let initial = s.state().clone();
    for _ in 0..1000 {
        let dt = s.stable_dt();
        s.step(dt).unwrap();
    }
    let mut drift: f64 = 0.0;
    for (a, b) in s.state().cells.iter().zip(&initial.cells) {
        drift = drift.max(a.axpy(-1.0, b).max_abs()).max((a.h - h).max_abs());
        drift = drift.max(a.b.max_abs());
    }
    let d = s.diagnostics().unwrap();
    let expected = rho * v * v;
    let pressure = [2, 3].map(|k| d.wall_pressure[k].unwrap());
    psd.push(("example 1".into(), s.max_psd_correction()));
    outcome(
        drift < 1e-12 && pressure.iter().all(|p| (p - expected).abs() <= 1e-15 * expected),
        format!(
            "max change {drift:.2e} over 1000 steps, wall pressure {:.17} vs {expected:.17}",
            pressure[0]
        ),
    )
}

fn spatial_error(n: usize, u: f64, psd: &mut PsdLog) -> f64 {
    let (alpha, length) = (1.0, 2.0);
    let mut s = example2_spatial(n, length, alpha, u, 1.0);
    s.advance_to(12.0 * length / u).unwrap();
    psd.push((format!("example 2 spatial n={n} u={u}"), s.max_psd_correction()));
    let g = s.problem().grid;
    let h0 = Vec3::new(0.0, 1.0, 0.0).outer_self();
    s.state()
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let z = g.centre(g.coords(k).0, g.coords(k).1)[0];
            (c.h - h0.scale((-alpha * z / u).exp())).max_abs()
        })
        .fold(0.0, f64::max)
}

fn example2(psd: &mut PsdLog) -> Outcome {
    let alpha = 2.0;
    let v0 = 0.8;
    let mut s = example2_temporal(alpha, v0, 1e-3 / alpha);
    s.advance_to(1.0 / alpha).unwrap();
    let exact = Vec3::new(0.0, v0, 0.0).outer_self().scale((-1.0_f64).exp());
    let temporal = s
        .state()
        .cells
        .iter()
        .map(|c| rel_err(&c.h, &exact))
        .fold(0.0, f64::max);
    psd.push(("example 2 temporal".into(), s.max_psd_correction()));
    let e = [32, 64, 128].map(|n| spatial_error(n, 1.0, psd));
    let orders = [(e[0] / e[1]).log2(), (e[1] / e[2]).log2()];
    outcome(
        temporal < 1e-6 && orders.iter().all(|o| *o >= 1.8),
        format!(
            "temporal rel error {temporal:.2e}; spatial |u| = 1 errors {:.2e} {:.2e} {:.2e}, orders {:.2} {:.2}",
            e[0], e[1], e[2], orders[0], orders[1]
        ),
    )
}

fn example3(psd: &mut PsdLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_root: f64 = 0.0;
    for _ in 0..1000 {
        let beta = rng.random_range(0.01..2.0);
        let u = rng.random_range(0.0..3.0);
        let gh = rng.random_range(0.0..2.0);
        let alpha = rng.random_range(0.0..(gh + u * u / (4.0 * beta)) * 1.5);
        let d = dispersion(beta, u, alpha, gh);
        let scale = beta * d.roots.iter().fold(0.0_f64, |m, r| m.max(r * r)) + u * u / beta + (alpha - gh).abs();
        for r in &d.roots {
            let printed = beta * r * r - u * r + alpha - gh;
            worst_root = worst_root.max(printed.abs() / scale);
        }
    }
    let (beta, u, gh) = (0.3, 1.2, 0.4);
    let d = dispersion(beta, u, gh + u * u / (4.0 * beta), gh);
    let double = d.regime == DispersionRegime::DoubleRoot
        && d.roots.iter().all(|r| (r - u / (2.0 * beta)).abs() <= 1e-12 * u / beta);

    let (beta, u, alpha, gamma_hat) = (0.2, 1.0, 0.5, 0.8);
    let p = ExampleParams {
        beta,
        u,
        alpha,
        gamma_hat,
        v: 1.0,
        chi0: 1.0,
        convention: DispersionConvention::Diffusive,
        ..Default::default()
    };
    let ex = example_fields(Example::Three, &p).unwrap();
    let (n, length) = (128, 2.0);
    let grid = Grid::new([n, 4], [length / n as f64, 0.25]).unwrap();
    let loss = FermentBc::Loss { gamma_hat: None };
    let inlet = SideSpec::new(
        VelocityBc::VelocityDirichlet {
            value: Vec3::new(-u, 0.0, 0.0),
        },
        loss,
    )
    .with_inflow(Inflow {
        rho: 1.0,
        y: SymTen2::ZERO,
        b: Ten2::ZERO,
        eps: 0.0,
    });
    let side = SideSpec::new(VelocityBc::FreeSlip, loss);
    let bc = BoundarySpec {
        x_low: SideSpec::new(VelocityBc::Outflow, loss),
        x_high: inlet,
        y_low: side,
        y_high: side,
    };
    let params = MaterialParams {
        alpha,
        beta,
        gamma_hat,
        ..Default::default()
    };
    let mut state = ex.sample(&grid, &bc, 0.0);
    for s in 0..4 {
        let d = s / 2;
        for (m, w) in state.walls[s].iter_mut().enumerate() {
            let mut z = [0.0; 2];
            z[d] = if s % 2 == 1 { grid.length(d) } else { 0.0 };
            z[1 - d] = (m as f64 + 0.5) * grid.h[1 - d];
            *w = ex.at(z, 0.0).h;
        }
    }
    let mut s = Solver::new(problem(grid, params, bc), state).unwrap();
    let t = 1.0;
    s.advance_to(t).unwrap();
    let mut worst: f64 = 0.0;
    for (k, c) in s.state().cells.iter().enumerate() {
        let (i, j) = grid.coords(k);
        let e = ex.at(grid.centre(i, j), t).h;
        worst = worst.max((c.h - e).max_abs() / e.max_abs());
    }
    psd.push(("example 3".into(), s.max_psd_correction()));
    outcome(
        worst_root <= 1e-12 && double && worst < 0.01,
        format!(
            "root residual {worst_root:.2e}, double root {}, solver mode error {:.2e} relative at tau = {t} on {n} cells",
            if double { "ok" } else { "wrong" },
            worst
        ),
    )
}

fn stationary(psd: &mut PsdLog) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut residual, mut printed, mut coeff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let rho = rng.random_range(0.2..3.0);
        let alpha = rng.random_range(0.2..3.0);
        let gamma = rng.random_range(0.0..2.0);
        let eta3 = rng.random_range(0.0..1.0);
        let (u, delta) = (rng.random_range(0.1..2.0), rng.random_range(0.5..2.0));
        let l = u / delta;
        let s = stationary_shear(rho, alpha, gamma, eta3, l).unwrap();
        let scale = gamma * l * l / (alpha * rho) * (1.0 + l * l / (alpha * alpha)) + l * l;
        residual = residual.max(algebraic_residual(&s.candidate()) / scale.max(1e-300));
        let h22 = gamma * l * l / (4.0 * alpha * rho);
        let h12 = -gamma * l.powi(3) / (4.0 * alpha * alpha * rho);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        if gamma > 0.0 {
            printed = printed.max(rel(s.h.get(1, 1), h22)).max(rel(s.h.get(0, 1), h12));
            let c = -(gamma / (4.0 * alpha)) * (u * u / (delta * delta))
                * (1.0 + 2.0 * u * u / (alpha * alpha * delta * delta));
            coeff = coeff.max(rel(s.extra_stress().get(0, 0), c));
        }
    }

    let (alpha, gamma, u, delta) = (1.0, 0.5, 1.0, 1.0);
    // weakly viscous shear is unstable to density clustering
    let params = MaterialParams {
        alpha,
        gamma,
        eta1: 0.5,
        ..Default::default()
    };
    let mut p = channel_1d(16, delta, params, ConstraintMode::BEqualsL, 0.0, u);
    p.config.cfl = 0.5;
    let mut s = Solver::from_fn(p, |z| Cell {
        rho: 1.0,
        v: Vec3::new(u * z[1] / delta, 0.0, 0.0),
        y: SymTen2::diag(0.0, 0.0, 1.0),
        ..Default::default()
    })
    .unwrap();
    s.advance_to(20.0 / alpha).unwrap();
    let exact = stationary_shear(1.0, alpha, gamma, 0.0, u / delta).unwrap();
    let marched = s
        .state()
        .cells
        .iter()
        .map(|c| rel_err(&c.h, &exact.h))
        .fold(0.0, f64::max);
    psd.push(("stationary Couette".into(), s.max_psd_correction()));
    outcome(
        residual < 1e-12 && printed < 1e-12 && coeff < 1e-12 && marched < 1e-6,
        format!(
            "algebraic residual {residual:.2e}, printed H22/H12 {printed:.2e}, extra-stress coefficient {coeff:.2e}, Couette H rel error {marched:.2e}"
        ),
    )
}

fn viscous_channel(mode: ConstraintMode, eta1: f64, eta3: f64, force: f64, u_high: f64) -> Solver {
    let params = MaterialParams {
        eta1,
        eta3,
        ..Default::default()
    };
    let mut p = channel_1d(64, 1.0, params, mode, 0.0, u_high);
    p.sources = SourceSpec::body_force(Vec3::new(force, 0.0, 0.0));
    p.config.cfl = 0.9;
    Solver::from_fn(p, at_rest(1.0)).unwrap()
}

fn velocity_profile(s: &Solver) -> Vec<(f64, f64)> {
    let g = s.problem().grid;
    s.state()
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| (g.centre(g.coords(k).0, g.coords(k).1)[1], c.v.0[0]))
        .collect()
}

fn standard_reduction(psd: &mut PsdLog) -> Outcome {
    let eta = 0.5;
    let linf = |s: &Solver, f: &dyn Fn(f64) -> f64| {
        velocity_profile(s)
            .iter()
            .map(|(z, v)| (v - f(*z)).abs())
            .fold(0.0, f64::max)
    };
    let mut s = viscous_channel(ConstraintMode::BEqualsL, eta, 0.0, 0.0, 1.0);
    s.advance_to(2.0 / eta).unwrap();
    let couette = linf(&s, &|z| couette_profile(1.0, 1.0, z));
    psd.push(("Couette".into(), s.max_psd_correction()));

    let f = 2.0;
    let mut s = viscous_channel(ConstraintMode::BEqualsL, eta, 0.0, f, 0.0);
    s.advance_to(2.0 / eta).unwrap();
    let poiseuille = linf(&s, &|z| poiseuille_profile(1.0, f, eta, 1.0, z));
    psd.push(("Poiseuille".into(), s.max_psd_correction()));

    let (eta1, eta3) = (0.3, 0.2);
    let mut s = viscous_channel(ConstraintMode::BEqualsSkwL, eta1, eta3, f, 0.0);
    s.advance_to(2.0 / (eta1 + eta3)).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (z, v) in velocity_profile(&s) {
        let q = z * (1.0 - z);
        num += q * v;
        den += q * q;
    }
    let eta_fit = f / (2.0 * num / den);
    let skew = ((eta_fit - (eta1 + eta3)) / (eta1 + eta3)).abs();
    psd.push(("skew Poiseuille".into(), s.max_psd_correction()));
    outcome(
        couette < 1e-6 && poiseuille < 1e-6 && skew < 1e-3,
        format!(
            "Couette L∞ {couette:.2e}, Poiseuille L∞ {poiseuille:.2e}, skew-mode viscosity fit off by {:.4}%",
            100.0 * skew
        ),
    )
}

fn smooth_problem(n: usize) -> Solver {
    let grid = Grid::new([n, n], [1.0 / n as f64; 2]).unwrap();
    let params = MaterialParams {
        eta1: 0.1,
        eta2: 0.02,
        eta3: 0.05,
        alpha: 0.4,
        beta: 0.03,
        gamma: 0.2,
        ..Default::default()
    };
    let tau = 2.0 * std::f64::consts::PI;
    Solver::from_fn(problem(grid, params, BoundarySpec::periodic()), |z| {
        let (s1, c1) = (tau * z[0]).sin_cos();
        let (s2, c2) = (tau * z[1]).sin_cos();
        let mut h = SymTen2::diag(0.4 + 0.1 * s1, 0.3 + 0.1 * c2, 0.2);
        h.set(0, 1, 0.05 * s1 * c2);
        let mut y = SymTen2::diag(1.0 + 0.2 * c1, 0.8 + 0.1 * s2, 0.5);
        y.set(0, 1, 0.1 * s2);
        let mut b = Ten2::ZERO;
        b.0[0][0] = 0.1 * c1 * s2;
        b.0[0][1] = 0.2 * s1;
        b.0[1][0] = -0.1 * c2;
        b.0[1][1] = 0.05 * s1 * s2;
        Cell {
            rho: 1.0 + 0.2 * s1 * c2,
            v: Vec3::new(0.3 * s2 + 0.1, 0.2 * c1, 0.0),
            y,
            b,
            h,
            eps: 0.0,
        }
    })
    .unwrap()
}

fn energy_theorem() -> Outcome {
    let r = [32, 64, 128].map(|n| smooth_problem(n).diagnostics().unwrap().residual.norm());
    let orders = [(r[0] / r[1]).log2(), (r[1] / r[2]).log2()];
    outcome(
        orders.iter().all(|o| *o >= 1.8),
        format!(
            "residuals {:.2e} {:.2e} {:.2e}, orders {:.2} {:.2}",
            r[0], r[1], r[2], orders[0], orders[1]
        ),
    )
}

fn rotation(axis: Vec3, angle: f64) -> Ten2 {
    let k = axis.scale(1.0 / axis.norm());
    let (s, c) = angle.sin_cos();
    Ten2::from_fn(|i, j| {
        let kk = k.0[i] * k.0[j];
        let delta = if i == j { 1.0 } else { 0.0 };
        let cross = match (i, j) {
            (0, 1) => -k.0[2],
            (1, 0) => k.0[2],
            (0, 2) => k.0[1],
            (2, 0) => -k.0[1],
            (1, 2) => -k.0[0],
            (2, 1) => k.0[0],
            _ => 0.0,
        };
        c * delta + s * cross + (1.0 - c) * kk
    })
}

fn temperance() -> Outcome {
    let start = Instant::now();
    let v = 1.7;
    let m = moments(&SpeedDistribution::uniform_sphere(v), &Integration::default()).unwrap();
    let sphere = (m.h - SymTen2::IDENTITY.scale(v * v / 3.0)).max_abs();

    let t = Temperance::new(SymTen2::IDENTITY.scale(-1.0)).unwrap();
    let mc = Integration::MonteCarlo {
        samples: 1_000_000,
        seed: 17,
        blocks: 64,
    };
    let m = moments(&SpeedDistribution::Canonical(t), &mc).unwrap();
    let q = order_tensor(&m.h).unwrap();
    let se = m.std_err.unwrap().q;
    let q_sigma = (0..6).map(|k| q.0[k].abs() / se.0[k]).fold(0.0, f64::max);
    let h_iso = (m.h.get(0, 0) - isotropic_ferment(1.0)).abs() / m.std_err.unwrap().h.get(0, 0);

    let mut theta = SymTen2::diag(-1.2, -0.6, -2.0);
    theta.set(0, 1, 0.3);
    theta.set(1, 2, -0.2);
    let t = Temperance::new(theta).unwrap();
    let h = t.ferment();
    let opts = FitOptions::default();
    let fit = fit_temperance(&h, &opts).unwrap();
    let round_trip = (fit.temperance.theta - theta).norm() / theta.norm();

    let r = rotation(Vec3::new(1.0, -2.0, 0.5), 0.9);
    let rotated = fit_temperance(&rotate(&h, &r), &opts).unwrap();
    let equivariance =
        (rotated.temperance.theta - rotate(&fit.temperance.theta, &r)).norm() / theta.norm();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        sphere <= 1e-10 && q_sigma <= 3.0 && round_trip < 0.02 && equivariance < 0.02 && secs < 60.0,
        format!(
            "sphere error {sphere:.2e}, isotropic |Q|/SE max {q_sigma:.2} (H11 {h_iso:.2} SE), round trip {round_trip:.2e}, rotation {equivariance:.2e}, {secs:.2} s"
        ),
    )
}

fn psd_health(psd: &PsdLog) -> Outcome {
    let (name, worst) = psd
        .iter()
        .cloned()
        .fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        worst < 1e-12,
        format!(
            "largest relative projection {worst:.2e} over {} runs{}",
            psd.len(),
            if name.is_empty() { String::new() } else { format!(" ({name})") }
        ),
    )
}

fn main() {
    let mut psd = PsdLog::new();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "objectivity", objectivity());
    report(2, "oracle identities", oracle_identities());
    report(3, "tensor energy conservation", conservation());
    report(4, "example 1", example1_steady(&mut psd));
    report(5, "example 2", example2(&mut psd));
    report(6, "example 3", example3(&mut psd));
    report(7, "stationary shear", stationary(&mut psd));
    report(8, "standard reduction", standard_reduction(&mut psd));
    report(9, "kinetic energy theorem", energy_theorem());
    report(10, "temperance", temperance());
    report(11, "PSD health", psd_health(&psd));
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
