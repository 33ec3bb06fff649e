//! Discrete mass-point system and its aggregate tensors.
//!
//! The motion of each particle is split into the centre-of-mass motion, an
//! affine part `B (x⁽ⁱ⁾ - x)` and a peculiar velocity `G ṡ⁽ⁱ⁾`. The affine rate
//! is the mass-weighted least-squares fit of relative velocities against
//! relative positions, which makes the position–peculiar-velocity cross moment
//! vanish on the range of the inertia tensor `Y`. With that choice the
//! aggregates obey the balance set
//!
//! ```text
//! μ ẍ = f̂
//! μ (K̇ - BK - H) = M̂
//! Ẏ = Y Bᵀ + B Y
//! μ (Ḣ + BH + HBᵀ) = Ŝ
//! ```
//!
//! identically, and [`balance_residuals`] measures how well a discrete
//! trajectory satisfies them.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::tensor::pseudo_inverse;
use crate::tensor::{SymTen2, Ten2, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParticleError {
    #[error("a particle system needs at least two particles, got {0}")]
    TooFewParticles(usize),
    #[error("particle {index} has non-positive mass {mass}")]
    NonPositiveMass { index: usize, mass: f64 },
    #[error("degenerate configuration: all particles coincide in position and velocity")]
    DegenerateConfiguration,
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("trajectory too short: need at least {needed} samples, got {got}")]
    TrajectoryTooShort { needed: usize, got: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

/// External force on every particle as a function of positions and time.
pub trait ForceLaw: Send + Sync {
    fn forces(&self, masses: &[f64], positions: &[Vec3], t: f64) -> Vec<Vec3>;

    /// Potential energy, when the law is conservative.
    fn potential(&self, _masses: &[f64], _positions: &[Vec3], _t: f64) -> Option<f64> {
        None
    }
}

/// Built-in force laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceModel {
    Free,
    /// `f⁽ⁱ⁾ = μ⁽ⁱ⁾ g`.
    UniformGravity { g: Vec3 },
    /// Linear springs of stiffness `k` between consecutive particles `(0,1), (2,3), …`.
    HarmonicPairs { k: f64 },
    /// Centripetal pull toward the axis through the mass centre,
    /// `f⁽ⁱ⁾ = -μ⁽ⁱ⁾ ω² Π (x⁽ⁱ⁾ - x)` with `Π` the projector normal to `axis`.
    Centripetal { omega: f64, axis: Vec3 },
    /// A fixed constant force per particle (cycled if shorter than the system).
    Constant { forces: Vec<Vec3> },
    /// Smooth random external acceleration field
    /// `a(x, t) = -k x + Σ_m A_m sin(q_m · x + ω_m t + φ_m)`.
    SmoothField {
        seed: u64,
        modes: usize,
        stiffness: f64,
        amplitude: f64,
    },
}

#[derive(Clone, Debug)]
struct FieldMode {
    amp: Vec3,
    wave: Vec3,
    freq: f64,
    phase: f64,
}

fn smooth_modes(seed: u64, modes: usize, amplitude: f64) -> Vec<FieldMode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..modes)
        .map(|_| {
            let mut r = |a: f64| rng.random_range(-a..a);
            FieldMode {
                amp: Vec3::new(r(amplitude), r(amplitude), r(amplitude)),
                wave: Vec3::new(r(1.5), r(1.5), r(1.5)),
                freq: r(1.0),
                phase: r(std::f64::consts::PI),
            }
        })
        .collect()
}

fn centre(masses: &[f64], positions: &[Vec3]) -> Vec3 {
    let mu: f64 = masses.iter().sum();
    let mut c = Vec3::ZERO;
    for (m, x) in masses.iter().zip(positions) {
        c += x.scale(*m);
    }
    c.scale(1.0 / mu)
}

impl ForceLaw for ForceModel {
    fn forces(&self, masses: &[f64], positions: &[Vec3], t: f64) -> Vec<Vec3> {
        match self {
            ForceModel::Free => vec![Vec3::ZERO; positions.len()],
            ForceModel::UniformGravity { g } => masses.iter().map(|m| g.scale(*m)).collect(),
            ForceModel::HarmonicPairs { k } => {
                let mut f = vec![Vec3::ZERO; positions.len()];
                for p in (0..positions.len().saturating_sub(1)).step_by(2) {
                    let d = positions[p + 1] - positions[p];
                    f[p] += d.scale(*k);
                    f[p + 1] -= d.scale(*k);
                }
                f
            }
            ForceModel::Centripetal { omega, axis } => {
                let c = centre(masses, positions);
                let a = axis.scale(1.0 / axis.norm());
                masses
                    .iter()
                    .zip(positions)
                    .map(|(m, x)| {
                        let dx = *x - c;
                        let perp = dx - a.scale(a.dot(&dx));
                        perp.scale(-m * omega * omega)
                    })
                    .collect()
            }
            ForceModel::Constant { forces } => (0..positions.len())
                .map(|i| forces[i % forces.len()])
                .collect(),
            ForceModel::SmoothField {
                seed,
                modes,
                stiffness,
                amplitude,
            } => {
                let field = smooth_modes(*seed, *modes, *amplitude);
                masses
                    .iter()
                    .zip(positions)
                    .map(|(m, x)| {
                        let mut a = x.scale(-stiffness);
                        for md in &field {
                            a += md.amp.scale((md.wave.dot(x) + md.freq * t + md.phase).sin());
                        }
                        a.scale(*m)
                    })
                    .collect()
            }
        }
    }

    fn potential(&self, masses: &[f64], positions: &[Vec3], _t: f64) -> Option<f64> {
        match self {
            ForceModel::Free => Some(0.0),
            ForceModel::UniformGravity { g } => Some(
                -masses
                    .iter()
                    .zip(positions)
                    .map(|(m, x)| m * g.dot(x))
                    .sum::<f64>(),
            ),
            ForceModel::HarmonicPairs { k } => Some(
                (0..positions.len().saturating_sub(1))
                    .step_by(2)
                    .map(|p| 0.5 * k * (positions[p + 1] - positions[p]).norm_sq())
                    .sum(),
            ),
            _ => None,
        }
    }
}

/// Centre of mass, its velocity, the frame deformation `G` and the affine rate `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFrame {
    pub x: Vec3,
    pub x_dot: Vec3,
    pub g: Ten2,
    pub b: Ten2,
}

/// Aggregate tensors of a particle system at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateState {
    pub mu: f64,
    pub x: Vec3,
    pub x_dot: Vec3,
    /// Euler inertia tensor per unit mass.
    pub y: SymTen2,
    /// Tensor moment of momentum per unit mass, `K = Y Bᵀ`.
    pub k: Ten2,
    pub b: Ten2,
    /// Reynolds tensor of the peculiar velocities.
    pub h: SymTen2,
    /// Stirring tensor.
    pub s_hat: SymTen2,
    /// Tensor moment of external forces.
    pub m_hat: Ten2,
    /// Resultant external force.
    pub f_hat: Vec3,
    /// Kinetic energy tensor per unit mass.
    pub w: SymTen2,
    /// Reynolds tensor of the relative velocities, `BYBᵀ + H` when the fit is exact.
    pub h_tilde: SymTen2,
}

struct Moments {
    mu: f64,
    x: Vec3,
    x_dot: Vec3,
    y: SymTen2,
    /// `(1/μ) Σ μ Δx ⊗ Δẋ`
    cross: Ten2,
    h_tilde: SymTen2,
}

fn moments(particles: &[Particle]) -> Moments {
    let mu: f64 = particles.iter().map(|p| p.mass).sum();
    let mut x = Vec3::ZERO;
    let mut x_dot = Vec3::ZERO;
    for p in particles {
        x += p.position.scale(p.mass);
        x_dot += p.velocity.scale(p.mass);
    }
    let x = x.scale(1.0 / mu);
    let x_dot = x_dot.scale(1.0 / mu);
    let mut y = SymTen2::ZERO;
    let mut cross = Ten2::ZERO;
    let mut h_tilde = SymTen2::ZERO;
    for p in particles {
        let dx = p.position - x;
        let dv = p.velocity - x_dot;
        y += dx.outer_self().scale(p.mass);
        cross += dx.outer(&dv).scale(p.mass);
        h_tilde += dv.outer_self().scale(p.mass);
    }
    Moments {
        mu,
        x,
        x_dot,
        y: y.scale(1.0 / mu),
        cross: cross.scale(1.0 / mu),
        h_tilde: h_tilde.scale(1.0 / mu),
    }
}

fn validate(particles: &[Particle]) -> Result<(), ParticleError> {
    if particles.len() < 2 {
        return Err(ParticleError::TooFewParticles(particles.len()));
    }
    for (index, p) in particles.iter().enumerate() {
        if !(p.mass > 0.0) {
            return Err(ParticleError::NonPositiveMass {
                index,
                mass: p.mass,
            });
        }
    }
    Ok(())
}

/// Least-squares affine rate `B = K̃ᵀ Y⁺`, zero on the null space of `Y`.
pub fn fit_affine_rate(particles: &[Particle]) -> Result<Ten2, ParticleError> {
    validate(particles)?;
    let m = moments(particles);
    if m.y.trace() == 0.0 && m.h_tilde.trace() == 0.0 {
        return Err(ParticleError::DegenerateConfiguration);
    }
    Ok(affine_rate(&m))
}

fn affine_rate(m: &Moments) -> Ten2 {
    m.cross.transpose().dot(&pseudo_inverse(&m.y).to_ten2())
}

/// Aggregate tensors for given particle states, forces and frame deformation.
pub fn aggregates(particles: &[Particle], forces: &[Vec3], g: &Ten2) -> AggregateState {
    let _ = g; // the stirring tensor is frame-independent once Gṡ is the peculiar velocity
    let m = moments(particles);
    let b = affine_rate(&m);
    let mut h = SymTen2::ZERO;
    let mut s_hat = Ten2::ZERO;
    let mut m_hat = Ten2::ZERO;
    let mut f_hat = Vec3::ZERO;
    for (p, f) in particles.iter().zip(forces) {
        let dx = p.position - m.x;
        let peculiar = (p.velocity - m.x_dot) - b.apply(&dx);
        h += peculiar.outer_self().scale(p.mass);
        s_hat += peculiar.outer(f) + f.outer(&peculiar);
        m_hat += dx.outer(f);
        f_hat += *f;
    }
    let h = h.scale(1.0 / m.mu);
    let k = m.y.to_ten2().dot(&b.transpose());
    let w = m.x_dot.outer_self().scale(0.5) + m.y.congruence(&b).scale(0.5) + h.scale(0.5);
    AggregateState {
        mu: m.mu,
        x: m.x,
        x_dot: m.x_dot,
        y: m.y,
        k,
        b,
        h,
        s_hat: s_hat.sym(),
        m_hat,
        f_hat,
        w,
        h_tilde: m.h_tilde,
    }
}

/// A particle system with its time, force law and tracked affine frame.
pub struct ParticleSystem {
    particles: Vec<Particle>,
    force: Box<dyn ForceLaw>,
    time: f64,
    g: Ten2,
    forces: Vec<Vec3>,
}

impl std::fmt::Debug for ParticleSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParticleSystem")
            .field("particles", &self.particles.len())
            .field("time", &self.time)
            .field("g", &self.g)
            .finish()
    }
}

/// One sample of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub g: Ten2,
    pub agg: AggregateState,
}

impl ParticleSystem {
    pub fn new(particles: Vec<Particle>, force: Box<dyn ForceLaw>) -> Result<Self, ParticleError> {
        validate(&particles)?;
        fit_affine_rate(&particles)?;
        let masses: Vec<f64> = particles.iter().map(|p| p.mass).collect();
        let positions: Vec<Vec3> = particles.iter().map(|p| p.position).collect();
        let forces = force.forces(&masses, &positions, 0.0);
        Ok(ParticleSystem {
            particles,
            force,
            time: 0.0,
            g: Ten2::IDENTITY,
            forces,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn forces(&self) -> &[Vec3] {
        &self.forces
    }

    pub fn frame(&self) -> AffineFrame {
        let m = moments(&self.particles);
        AffineFrame {
            x: m.x,
            x_dot: m.x_dot,
            g: self.g,
            b: affine_rate(&m),
        }
    }

    pub fn aggregates(&self) -> AggregateState {
        aggregates(&self.particles, &self.forces, &self.g)
    }

    pub fn sample(&self) -> Sample {
        Sample {
            t: self.time,
            g: self.g,
            agg: self.aggregates(),
        }
    }

    /// Total kinetic plus potential energy, when the force law has a potential.
    pub fn total_energy(&self) -> Option<f64> {
        let kinetic: f64 = self
            .particles
            .iter()
            .map(|p| 0.5 * p.mass * p.velocity.norm_sq())
            .sum();
        let (masses, positions) = self.split();
        self.force
            .potential(&masses, &positions, self.time)
            .map(|v| v + kinetic)
    }

    fn split(&self) -> (Vec<f64>, Vec<Vec3>) {
        (
            self.particles.iter().map(|p| p.mass).collect(),
            self.particles.iter().map(|p| p.position).collect(),
        )
    }

    /// Velocity-Verlet step for the particles; the frame follows `Ġ = BG`
    /// with a Cayley (implicit midpoint) update using the mean of the fitted
    /// rates before and after the step.
    pub fn step(&mut self, dt: f64) -> Result<(), ParticleError> {
        if !(dt > 0.0) {
            return Err(ParticleError::NonPositiveStep(dt));
        }
        let b_old = self.frame().b;
        for (p, f) in self.particles.iter_mut().zip(&self.forces) {
            let a = f.scale(1.0 / p.mass);
            p.velocity += a.scale(0.5 * dt);
            p.position += p.velocity.scale(dt);
        }
        self.time += dt;
        let (masses, positions) = self.split();
        self.forces = self.force.forces(&masses, &positions, self.time);
        for (p, f) in self.particles.iter_mut().zip(&self.forces) {
            p.velocity += f.scale(0.5 * dt / p.mass);
        }
        let b_new = self.frame().b;
        let b_mid = (b_old + b_new).scale(0.5);
        let lhs = Ten2::IDENTITY - b_mid.scale(0.5 * dt);
        let rhs = Ten2::IDENTITY + b_mid.scale(0.5 * dt);
        if let Some(inv) = lhs.inverse() {
            self.g = inv.dot(&rhs).dot(&self.g);
        }
        Ok(())
    }

    /// Runs `steps` steps of size `dt`, sampling every `every` steps (and at t = 0).
    pub fn run(&mut self, dt: f64, steps: usize, every: usize) -> Result<Vec<Sample>, ParticleError> {
        let every = every.max(1);
        let mut out = vec![self.sample()];
        for n in 1..=steps {
            self.step(dt)?;
            if n % every == 0 {
                out.push(self.sample());
            }
        }
        Ok(out)
    }
}

/// Residual series of the four balance rows at interior samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BalanceResiduals {
    pub times: Vec<f64>,
    /// `μẍ - f̂`
    pub momentum: Vec<Vec3>,
    /// `μ(K̇ - BK - H) - M̂`
    pub moment_of_momentum: Vec<Ten2>,
    /// `Ẏ - YBᵀ - BY`
    pub inertia: Vec<Ten2>,
    /// `μ(Ḣ + BH + HBᵀ) - Ŝ`
    pub ferment: Vec<Ten2>,
}

impl BalanceResiduals {
    /// Max norms of the four rows.
    pub fn max_norms(&self) -> [f64; 4] {
        let vmax = |v: &[Ten2]| v.iter().fold(0.0_f64, |m, t| m.max(t.norm()));
        [
            self.momentum.iter().fold(0.0_f64, |m, v| m.max(v.norm())),
            vmax(&self.moment_of_momentum),
            vmax(&self.inertia),
            vmax(&self.ferment),
        ]
    }
}

fn check_len(traj: &[Sample]) -> Result<(), ParticleError> {
    if traj.len() < 3 {
        return Err(ParticleError::TrajectoryTooShort {
            needed: 3,
            got: traj.len(),
        });
    }
    Ok(())
}

/// Central-difference residuals of the balance set along a trajectory sampled every `dt`.
pub fn balance_residuals(traj: &[Sample], dt: f64) -> Result<BalanceResiduals, ParticleError> {
    check_len(traj)?;
    let mut r = BalanceResiduals::default();
    for w in traj.windows(3) {
        let (prev, cur, next) = (&w[0].agg, &w[1].agg, &w[2].agg);
        let mu = cur.mu;
        let x_dd = (next.x - cur.x.scale(2.0) + prev.x).scale(1.0 / (dt * dt));
        let k_dot = (next.k - prev.k).scale(0.5 / dt);
        let y_dot = (next.y - prev.y).to_ten2().scale(0.5 / dt);
        let h_dot = (next.h - prev.h).to_ten2().scale(0.5 / dt);
        let b = cur.b;
        let h = cur.h.to_ten2();
        let y = cur.y.to_ten2();
        r.times.push(w[1].t);
        r.momentum.push(x_dd.scale(mu) - cur.f_hat);
        r.moment_of_momentum
            .push((k_dot - b.dot(&cur.k) - h).scale(mu) - cur.m_hat);
        r.inertia
            .push(y_dot - y.dot(&b.transpose()) - b.dot(&y));
        r.ferment.push(
            (h_dot + b.dot(&h) + h.dot(&b.transpose())).scale(mu) - cur.s_hat.to_ten2(),
        );
    }
    Ok(r)
}

/// Residual of the kinetic energy theorem, `μẆ - ½Ŝ - sym(ẋ⊗f̂ + BM̂)`.
pub fn energy_theorem_residual(traj: &[Sample], dt: f64) -> Result<Vec<SymTen2>, ParticleError> {
    check_len(traj)?;
    Ok(traj
        .windows(3)
        .map(|w| {
            let (prev, cur, next) = (&w[0].agg, &w[1].agg, &w[2].agg);
            let w_dot = (next.w - prev.w).scale(0.5 / dt);
            let power = cur.s_hat.scale(0.5)
                + (cur.x_dot.outer(&cur.f_hat) + cur.b.dot(&cur.m_hat)).sym();
            w_dot.scale(cur.mu) - power
        })
        .collect())
}

/// Drift of the tensor energy invariant along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    /// `μW - ½P - sym(x ⊗ f̂ + M̂)` at each sample.
    pub invariant: Vec<SymTen2>,
    /// Norm of the invariant minus its initial value.
    pub drift: Vec<f64>,
    /// Largest drift over the largest norm among the invariant's terms.
    pub max_relative_drift: f64,
}

/// Checks conservation of tensor energy when `f̂` and `G⁻¹M̂` are constant and
/// `Ŝ = Ṗ`. Pass `None` for `potential` when `Ŝ` vanishes.
pub fn conservation_check(
    traj: &[Sample],
    potential: Option<&[SymTen2]>,
) -> Result<ConservationReport, ParticleError> {
    if traj.is_empty() {
        return Err(ParticleError::TrajectoryTooShort { needed: 1, got: 0 });
    }
    if let Some(p) = potential {
        if p.len() != traj.len() {
            return Err(ParticleError::PreconditionViolated(format!(
                "potential series has {} entries for {} samples",
                p.len(),
                traj.len()
            )));
        }
    }
    let first = &traj[0];
    let f0 = first.agg.f_hat;
    let frame_moment = |s: &Sample| {
        s.g.inverse()
            .map(|gi| gi.dot(&s.agg.m_hat))
            .unwrap_or(Ten2::ZERO)
    };
    let c0 = frame_moment(first);
    let f_scale = f0.norm().max(1e-300);
    let c_scale = first.agg.m_hat.norm().max(f_scale * first.agg.y.trace().sqrt());
    let tol = 1e-8;
    let mut terms_scale: f64 = 0.0;
    let mut invariant = Vec::with_capacity(traj.len());
    for (n, s) in traj.iter().enumerate() {
        if (s.agg.f_hat - f0).norm() > tol * f_scale {
            return Err(ParticleError::PreconditionViolated(format!(
                "resultant force varies at t = {}",
                s.t
            )));
        }
        if (frame_moment(s) - c0).norm() > tol * c_scale.max(1e-300) {
            return Err(ParticleError::PreconditionViolated(format!(
                "frame moment G⁻¹M̂ varies at t = {}",
                s.t
            )));
        }
        let p = match potential {
            Some(p) => p[n],
            None => {
                if s.agg.s_hat.norm() > tol * (s.agg.mu * s.agg.w.norm()).max(1e-300) {
                    return Err(ParticleError::PreconditionViolated(format!(
                        "stirring tensor is nonzero at t = {} and no potential was supplied",
                        s.t
                    )));
                }
                SymTen2::ZERO
            }
        };
        let kinetic = s.agg.w.scale(s.agg.mu);
        let work = (s.agg.x.outer(&s.agg.f_hat) + s.agg.m_hat).sym();
        terms_scale = terms_scale.max(kinetic.norm()).max(work.norm()).max(p.norm());
        invariant.push(kinetic - p.scale(0.5) - work);
    }
    let drift: Vec<f64> = invariant.iter().map(|i| (*i - invariant[0]).norm()).collect();
    let max_drift = drift.iter().cloned().fold(0.0, f64::max);
    Ok(ConservationReport {
        invariant,
        drift,
        max_relative_drift: max_drift / terms_scale.max(1e-300),
    })
}

/// `k` particles with random masses, positions in a unit box and velocities in `[-v, v]³`.
pub fn random_particles(k: usize, seed: u64, speed: f64) -> Vec<Particle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| Particle {
            mass: rng.random_range(0.5..1.5),
            position: Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
            velocity: Vec3::new(
                rng.random_range(-speed..speed),
                rng.random_range(-speed..speed),
                rng.random_range(-speed..speed),
            ),
        })
        .collect()
}

/// `k` equal masses on a ring of radius `r` in the 1–2 plane, spinning rigidly at `omega` about `c₃`.
pub fn rigid_ring(k: usize, r: f64, omega: f64) -> Vec<Particle> {
    (0..k)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            let x = Vec3::new(r * phi.cos(), r * phi.sin(), 0.0);
            Particle {
                mass: 1.0,
                position: x,
                velocity: Vec3::axis(2).cross(&x).scale(omega),
            }
        })
        .collect()
}

pub const TRAJECTORY_HEADER: &str = "tau,x1,x2,x3,xdot1,xdot2,xdot3,\
Y11,Y22,Y33,Y12,Y13,Y23,\
B11,B12,B13,B21,B22,B23,B31,B32,B33,\
H11,H22,H33,H12,H13,H23,\
W11,W22,W33,W12,W13,W23,\
res_momentum,res_moment,res_inertia,res_ferment,res_energy";

/// One CSV row per sample; residual columns are empty at the two end samples.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    traj: &[Sample],
    residuals: Option<(&BalanceResiduals, &[SymTen2])>,
) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (n, s) in traj.iter().enumerate() {
        let a = &s.agg;
        let mut cols: Vec<f64> = vec![s.t];
        cols.extend(a.x.0);
        cols.extend(a.x_dot.0);
        cols.extend(a.y.0);
        cols.extend(a.b.to_row_major());
        cols.extend(a.h.0);
        cols.extend(a.w.0);
        let mut line: Vec<String> = cols.iter().map(|v| format!("{v:.12e}")).collect();
        let interior = n >= 1 && n + 1 < traj.len();
        match residuals {
            Some((r, e)) if interior => {
                let i = n - 1;
                line.push(format!("{:.6e}", r.momentum[i].norm()));
                line.push(format!("{:.6e}", r.moment_of_momentum[i].norm()));
                line.push(format!("{:.6e}", r.inertia[i].norm()));
                line.push(format!("{:.6e}", r.ferment[i].norm()));
                line.push(format!("{:.6e}", e[i].norm()));
            }
            _ => line.extend(std::iter::repeat_n(String::new(), 5)),
        }
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
