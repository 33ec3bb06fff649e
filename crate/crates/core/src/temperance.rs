//! Velocity-distribution moments, the order tensor and the canonical
//! distribution parameterised by a tensorial temperance `Θ`.
//!
//! The canonical density is `ϑ(v) = θ₀⁻¹ exp[Θ·(|v|² v⊗v − ⅓I)]`; with
//! `a(n) = −n·Θn` its exponent is `−a(n)|v|⁴ − ⅓tr Θ`, so radial integrals are
//! done in closed form, `∫₀^∞ e^{−a r⁴} r^{2+k} dr = Γ((3+k)/4) / (4 a^{(3+k)/4})`,
//! leaving a quadrature over directions only.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::tensor::{eig_sym, SymTen2, Ten2, Vec3};

/// `Γ(3/4)`.
pub const GAMMA_3_4: f64 = 1.225_416_702_465_177_6;
/// `Γ(5/4)`.
pub const GAMMA_5_4: f64 = 0.906_402_477_055_477;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemperanceError {
    #[error("order tensor undefined: tr H = {trace}")]
    ZeroFerment { trace: f64 },
    #[error("canonical density not normalizable: Θ has eigenvalue {max_eigenvalue} ≥ 0")]
    NotNormalizable { max_eigenvalue: f64 },
    #[error("fit did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),
    #[error("quadrature failure: normalization {norm} deviates from 1 by more than 5%")]
    QuadratureFailure { norm: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type DensityFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// A distribution of peculiar velocities.
#[derive(Clone)]
pub enum SpeedDistribution {
    /// All grains at speed `speed`; `density(n)` on the unit sphere.
    Sphere { speed: f64, density: DensityFn },
    /// `density(v)` on the ball `|v| ≤ radius`, taken as zero outside.
    Full { density: DensityFn, radius: f64 },
    /// Point masses `(weight, velocity)`.
    Discrete { atoms: Vec<(f64, Vec3)> },
    /// The canonical density of a temperance.
    Canonical(Temperance),
}

impl fmt::Debug for SpeedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeedDistribution::Sphere { speed, .. } => write!(f, "Sphere {{ speed: {speed} }}"),
            SpeedDistribution::Full { radius, .. } => write!(f, "Full {{ radius: {radius} }}"),
            SpeedDistribution::Discrete { atoms } => write!(f, "Discrete {{ atoms: {atoms:?} }}"),
            SpeedDistribution::Canonical(t) => write!(f, "Canonical({t:?})"),
        }
    }
}

impl SpeedDistribution {
    /// Uniform directions at speed `v`, `ϑ = (4π)⁻¹`.
    pub fn uniform_sphere(v: f64) -> Self {
        SpeedDistribution::Sphere {
            speed: v,
            density: Arc::new(|_| 1.0 / (4.0 * PI)),
        }
    }

    fn validate(&self) -> Result<(), TemperanceError> {
        let bad = |m: &str| Err(TemperanceError::InvalidSpec(m.to_string()));
        match self {
            SpeedDistribution::Sphere { speed, .. } if !(speed.is_finite() && *speed >= 0.0) => {
                bad("speed must be finite and non-negative")
            }
            SpeedDistribution::Full { radius, .. } if !(radius.is_finite() && *radius > 0.0) => {
                bad("radius must be finite and positive")
            }
            SpeedDistribution::Discrete { atoms } if atoms.is_empty() => bad("no atoms"),
            SpeedDistribution::Discrete { atoms } if atoms.iter().any(|(w, _)| !(*w >= 0.0)) => {
                bad("atom weights must be non-negative")
            }
            _ => Ok(()),
        }
    }
}

/// How integrals over velocity space are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Integration {
    /// Gauss–Legendre in `cos θ` and radius, trapezoid in `φ`.
    Quadrature {
        n_theta: usize,
        n_phi: usize,
        n_radial: usize,
    },
    /// `samples` draws split into `blocks` independently seeded streams.
    MonteCarlo { samples: u64, seed: u64, blocks: usize },
}

impl Default for Integration {
    fn default() -> Self {
        Integration::Quadrature {
            n_theta: 48,
            n_phi: 96,
            n_radial: 64,
        }
    }
}

/// Standard errors from batch means.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MomentErrors {
    pub norm: f64,
    pub mean: Vec3,
    pub h: SymTen2,
    pub q: SymTen2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub norm: f64,
    pub mean: Vec3,
    pub h: SymTen2,
    /// Present for Monte Carlo estimates.
    pub std_err: Option<MomentErrors>,
}

/// `Q = H / tr H − I/3`, traceless by construction.
pub fn order_tensor(h: &SymTen2) -> Result<SymTen2, TemperanceError> {
    let tr = h.trace();
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(TemperanceError::ZeroFerment { trace: tr });
    }
    let mut q = h.scale(1.0 / tr);
    let third = 1.0 / 3.0;
    q.0[0] -= third;
    q.0[1] -= third;
    q.0[2] = -(q.0[0] + q.0[1]);
    Ok(q)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Directions and weights of the product rule on the unit sphere.
fn sphere_rule(n_theta: usize, n_phi: usize) -> Vec<(Vec3, f64)> {
    let gl = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for &(c, w) in &gl {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            out.push((Vec3::new(s * phi.cos(), s * phi.sin(), c), w * dphi));
        }
    }
    out
}

fn check_rule(n_theta: usize, n_phi: usize, n_radial: usize) -> Result<(), TemperanceError> {
    if n_theta < 2 || n_phi < 3 || n_radial < 2 {
        return Err(TemperanceError::InvalidSpec(
            "quadrature needs n_theta ≥ 2, n_phi ≥ 3, n_radial ≥ 2".into(),
        ));
    }
    Ok(())
}

/// Moments of `dist`.
pub fn moments(dist: &SpeedDistribution, integration: &Integration) -> Result<Moments, TemperanceError> {
    moments_with(dist, integration, Exec::default())
}

pub fn moments_with(
    dist: &SpeedDistribution,
    integration: &Integration,
    exec: Exec,
) -> Result<Moments, TemperanceError> {
    dist.validate()?;
    let m = match (dist, integration) {
        (SpeedDistribution::Discrete { atoms }, _) => {
            let mut m = Moments {
                norm: 0.0,
                mean: Vec3::ZERO,
                h: SymTen2::ZERO,
                std_err: None,
            };
            for (w, v) in atoms {
                m.norm += w;
                m.mean += v.scale(*w);
                m.h += v.outer_self().scale(*w);
            }
            m
        }
        (
            _,
            Integration::Quadrature {
                n_theta,
                n_phi,
                n_radial,
            },
        ) => {
            check_rule(*n_theta, *n_phi, *n_radial)?;
            quadrature_moments(dist, *n_theta, *n_phi, *n_radial)
        }
        (
            _,
            Integration::MonteCarlo {
                samples,
                seed,
                blocks,
            },
        ) => monte_carlo_moments(dist, *samples, *seed, *blocks, exec)?,
    };
    if (m.norm - 1.0).abs() > 0.05 || !m.norm.is_finite() {
        return Err(TemperanceError::QuadratureFailure { norm: m.norm });
    }
    Ok(m)
}

fn quadrature_moments(dist: &SpeedDistribution, n_theta: usize, n_phi: usize, n_radial: usize) -> Moments {
    let rule = sphere_rule(n_theta, n_phi);
    let mut norm = 0.0;
    let mut mean = Vec3::ZERO;
    let mut h = SymTen2::ZERO;
    match dist {
        SpeedDistribution::Sphere { speed, density } => {
            for (n, w) in &rule {
                let f = density(n) * w;
                norm += f;
                mean += n.scale(f * speed);
                h += n.outer_self().scale(f * speed * speed);
            }
        }
        SpeedDistribution::Full { density, radius } => {
            let radial = gauss_legendre(n_radial);
            for (n, w) in &rule {
                for &(x, wr) in &radial {
                    let r = 0.5 * radius * (x + 1.0);
                    let v = n.scale(r);
                    let f = density(&v) * w * wr * 0.5 * radius * r * r;
                    norm += f;
                    mean += v.scale(f);
                    h += v.outer_self().scale(f);
                }
            }
        }
        SpeedDistribution::Canonical(t) => {
            let (z, hz) = canonical_integrals(&t.theta, &rule);
            norm = z * (-t.theta.trace() / 3.0).exp() / t.theta0;
            h = hz.scale(1.0 / z);
        }
        SpeedDistribution::Discrete { .. } => unreachable!(),
    }
    Moments {
        norm,
        mean,
        h,
        std_err: None,
    }
}

/// `∫dΩ Γ(3/4)/(4a^{3/4})` and `∫dΩ n⊗n Γ(5/4)/(4a^{5/4})`, `a = −n·Θn`.
fn canonical_integrals(theta: &SymTen2, rule: &[(Vec3, f64)]) -> (f64, SymTen2) {
    let mut z = 0.0;
    let mut h = SymTen2::ZERO;
    for (n, w) in rule {
        let a = -n.dot(&theta.apply(n));
        z += w * GAMMA_3_4 / (4.0 * a.powf(0.75));
        h += n.outer_self().scale(w * GAMMA_5_4 / (4.0 * a.powf(1.25)));
    }
    (z, h)
}

fn uniform_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let c: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - c * c).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), c)
}

#[derive(Clone, Copy, Default)]
struct BlockSums {
    norm: f64,
    mean: Vec3,
    h: SymTen2,
}

fn monte_carlo_moments(
    dist: &SpeedDistribution,
    samples: u64,
    seed: u64,
    blocks: usize,
    exec: Exec,
) -> Result<Moments, TemperanceError> {
    if blocks < 2 || samples < blocks as u64 {
        return Err(TemperanceError::InvalidSpec(
            "Monte Carlo needs at least 2 blocks and one sample per block".into(),
        ));
    }
    let per_block = samples / blocks as u64;
    let envelope = match dist {
        SpeedDistribution::Canonical(t) => Some(t.envelope_rate()),
        _ => None,
    };
    let gamma = Gamma::new(0.75, 1.0).expect("valid shape");
    let sums = exec.map(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut acc = BlockSums::default();
        match dist {
            SpeedDistribution::Sphere { speed, density } => {
                for _ in 0..per_block {
                    let n = uniform_direction(&mut rng);
                    let f = 4.0 * PI * density(&n);
                    acc.norm += f;
                    acc.mean += n.scale(f * speed);
                    acc.h += n.outer_self().scale(f * speed * speed);
                }
            }
            SpeedDistribution::Full { density, radius } => {
                let vol = 4.0 / 3.0 * PI * radius.powi(3);
                for _ in 0..per_block {
                    let n = uniform_direction(&mut rng);
                    let r = radius * rng.random::<f64>().cbrt();
                    let v = n.scale(r);
                    let f = vol * density(&v);
                    acc.norm += f;
                    acc.mean += v.scale(f);
                    acc.h += v.outer_self().scale(f);
                }
            }
            SpeedDistribution::Canonical(t) => {
                let a_min = envelope.unwrap_or(1.0);
                let mut accepted = 0;
                while accepted < per_block {
                    let n = uniform_direction(&mut rng);
                    let u: f64 = gamma.sample(&mut rng);
                    let r4 = u / a_min;
                    let a = -n.dot(&t.theta.apply(&n));
                    if rng.random::<f64>() < (-(a - a_min) * r4).exp() {
                        let v = n.scale(r4.powf(0.25));
                        acc.norm += 1.0;
                        acc.mean += v;
                        acc.h += v.outer_self();
                        accepted += 1;
                    }
                }
            }
            SpeedDistribution::Discrete { .. } => unreachable!(),
        }
        let inv = 1.0 / per_block as f64;
        BlockSums {
            norm: acc.norm * inv,
            mean: acc.mean.scale(inv),
            h: acc.h.scale(inv),
        }
    });
    let nb = blocks as f64;
    let mut mean = BlockSums::default();
    for s in &sums {
        mean.norm += s.norm / nb;
        mean.mean += s.mean.scale(1.0 / nb);
        mean.h += s.h.scale(1.0 / nb);
    }
    let q_of = |s: &BlockSums| order_tensor(&s.h).unwrap_or(SymTen2::ZERO);
    let q_mean = order_tensor(&mean.h).unwrap_or(SymTen2::ZERO);
    let mut var = BlockSums::default();
    let mut var_q = SymTen2::ZERO;
    for s in &sums {
        let dn = s.norm - mean.norm;
        var.norm += dn * dn;
        let dm = s.mean - mean.mean;
        var.mean += Vec3::new(dm.0[0] * dm.0[0], dm.0[1] * dm.0[1], dm.0[2] * dm.0[2]);
        let dh = s.h - mean.h;
        var.h += SymTen2(dh.0.map(|x| x * x));
        let dq = q_of(s) - q_mean;
        var_q += SymTen2(dq.0.map(|x| x * x));
    }
    let se = |x: f64| (x / (nb * (nb - 1.0))).sqrt();
    Ok(Moments {
        norm: mean.norm,
        mean: mean.mean,
        h: mean.h,
        std_err: Some(MomentErrors {
            norm: se(var.norm),
            mean: Vec3(var.mean.0.map(se)),
            h: SymTen2(var.h.0.map(se)),
            q: SymTen2(var_q.0.map(se)),
        }),
    })
}

/// A tensorial temperance with its normalization constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Temperance {
    pub theta: SymTen2,
    pub theta0: f64,
}

impl Temperance {
    /// Computes `θ₀` with the default angular rule.
    pub fn new(theta: SymTen2) -> Result<Self, TemperanceError> {
        Ok(Temperance {
            theta,
            theta0: compute_theta0(&theta)?,
        })
    }

    /// Smallest `a(n) = −n·Θn`, the rate of the isotropic sampling envelope.
    fn envelope_rate(&self) -> f64 {
        -eig_sym(&self.theta)[0].value
    }

    /// `H(Θ)` by angular quadrature with exact radial integrals.
    pub fn ferment(&self) -> SymTen2 {
        canonical_ferment(&self.theta, DEFAULT_RULE.0, DEFAULT_RULE.1)
    }
}

const DEFAULT_RULE: (usize, usize) = (48, 96);

fn require_negative_definite(theta: &SymTen2) -> Result<(), TemperanceError> {
    let max = eig_sym(theta)[0].value;
    if !(max < 0.0) || !theta.is_finite() {
        return Err(TemperanceError::NotNormalizable { max_eigenvalue: max });
    }
    Ok(())
}

/// `θ₀ = ∫ exp[Θ·(|v|² v⊗v − ⅓I)] d(vol)`.
pub fn compute_theta0(theta: &SymTen2) -> Result<f64, TemperanceError> {
    require_negative_definite(theta)?;
    let rule = sphere_rule(DEFAULT_RULE.0, DEFAULT_RULE.1);
    let (z, _) = canonical_integrals(theta, &rule);
    Ok(z * (-theta.trace() / 3.0).exp())
}

/// `ϑ(v) = θ₀⁻¹ exp[Θ·(|v|² v⊗v − ⅓I)]`.
pub fn canonical_density(t: &Temperance, v: &Vec3) -> f64 {
    let exponent = v.norm_sq() * v.dot(&t.theta.apply(v)) - t.theta.trace() / 3.0;
    exponent.exp() / t.theta0
}

fn canonical_ferment(theta: &SymTen2, n_theta: usize, n_phi: usize) -> SymTen2 {
    let rule = sphere_rule(n_theta, n_phi);
    let (z, h) = canonical_integrals(theta, &rule);
    h.scale(1.0 / z)
}

/// `H` of the isotropic temperance `Θ = −aI`.
pub fn isotropic_ferment(a: f64) -> f64 {
    GAMMA_5_4 / (3.0 * GAMMA_3_4) / a.sqrt()
}

/// Settings of the moment-matching fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Target relative residual `‖H(Θ) − H*‖ / ‖H*‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-10,
            max_iterations: 60,
            n_theta: DEFAULT_RULE.0,
            n_phi: DEFAULT_RULE.1,
        }
    }
}

/// Report of a successful fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub temperance: Temperance,
    pub h: SymTen2,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `H(Θ) = H*` by damped Newton with a finite-difference Jacobian.
pub fn fit_temperance(target: &SymTen2, options: &FitOptions) -> Result<Fit, TemperanceError> {
    if !target.is_finite() {
        return Err(TemperanceError::InfeasibleTarget("non-finite components".into()));
    }
    let pairs = eig_sym(target);
    if !(pairs[2].value > 1e-12 * pairs[0].value.abs().max(f64::MIN_POSITIVE)) {
        return Err(TemperanceError::InfeasibleTarget(format!(
            "target must be positive definite; smallest eigenvalue {:e}",
            pairs[2].value
        )));
    }
    let h_of = |t: &SymTen2| canonical_ferment(t, options.n_theta, options.n_phi);
    let scale = target.norm();
    let residual_of = |t: &SymTen2| (h_of(t) - *target).norm() / scale;

    // H ∝ a^{-1/2} for isotropic Θ: match each principal value separately.
    let c = GAMMA_5_4 / (3.0 * GAMMA_3_4);
    let mut theta = SymTen2::ZERO;
    for p in &pairs {
        theta += p.vector.outer_self().scale(-(c / p.value).powi(2));
    }
    let mut res = residual_of(&theta);
    for it in 0..options.max_iterations {
        if res <= options.tolerance {
            return Ok(Fit {
                temperance: Temperance::new(theta)?,
                h: h_of(&theta),
                residual: res,
                iterations: it,
            });
        }
        let h0 = h_of(&theta);
        let f0 = h0 - *target;
        let step = 1e-6 * theta.norm();
        let mut jac = [[0.0; 6]; 6];
        for (col, unit) in basis().iter().enumerate() {
            let dh = (h_of(&(theta + unit.scale(step))) - h0).scale(1.0 / step);
            for row in 0..6 {
                jac[row][col] = dh.0[row];
            }
        }
        let delta = solve6(jac, f0.0.map(|x| -x)).ok_or(TemperanceError::NoConvergence {
            iterations: it,
            residual: res,
        })?;
        let delta = SymTen2(delta);
        let mut lambda = 1.0;
        loop {
            let trial = theta + delta.scale(lambda);
            if eig_sym(&trial)[0].value < 0.0 {
                let r = residual_of(&trial);
                if r < res {
                    theta = trial;
                    res = r;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(TemperanceError::NoConvergence {
                    iterations: it,
                    residual: res,
                });
            }
        }
    }
    if res <= options.tolerance {
        return Ok(Fit {
            temperance: Temperance::new(theta)?,
            h: h_of(&theta),
            residual: res,
            iterations: options.max_iterations,
        });
    }
    Err(TemperanceError::NoConvergence {
        iterations: options.max_iterations,
        residual: res,
    })
}

/// Symmetric unit perturbations in storage order 11, 22, 33, 12, 13, 23.
fn basis() -> [SymTen2; 6] {
    std::array::from_fn(|k| {
        let mut s = SymTen2::ZERO;
        s.0[k] = 1.0;
        s
    })
}

/// Gaussian elimination with partial pivoting.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for col in 0..6 {
        let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// One row of a `H(Θ)` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub theta: SymTen2,
    pub theta0: f64,
    pub h: SymTen2,
    pub q: SymTen2,
    pub std_err: Option<MomentErrors>,
}

/// `H(Θ)`, `Q` and `θ₀` for each temperance.
pub fn tabulate(thetas: &[SymTen2], integration: &Integration) -> Result<Vec<TableRow>, TemperanceError> {
    thetas
        .iter()
        .map(|theta| {
            let t = Temperance::new(*theta)?;
            let m = moments(&SpeedDistribution::Canonical(t), integration)?;
            Ok(TableRow {
                theta: *theta,
                theta0: t.theta0,
                h: m.h,
                q: order_tensor(&m.h)?,
                std_err: m.std_err,
            })
        })
        .collect()
}

/// `R S Rᵀ`.
pub fn rotate(s: &SymTen2, r: &Ten2) -> SymTen2 {
    s.congruence(r)
}
