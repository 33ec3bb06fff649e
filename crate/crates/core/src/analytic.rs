//! Closed-form stationary shear, the elementary channel flows and residual
//! checks against the local balance laws.
//!
//! Conventions: `ζ₁` runs along the channel, the walls sit at `ζ₂ = 0` and
//! `ζ₂ = δ`; the flow velocity `u` is along `c₁` and the bounce velocity `v`
//! along `c₂`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::{BoundarySpec, Cell, FieldState, Grid};
use crate::tensor::{SymTen2, Ten2, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("the stationary shear system is degenerate for alpha = 0; see example4_alpha_zero")]
    AlphaZero,
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

fn positive(name: &'static str, value: f64) -> Result<(), AnalyticError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::NonPositive { name, value })
    }
}

/// Stationary solution with `L = L₁₂ c₁⊗c₂`, `B = L` and `Y = Y₃₃ c₃⊗c₃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryShear {
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub eta3: f64,
    pub l12: f64,
    pub b12: f64,
    /// Free parameter of the solution.
    pub y33: f64,
    pub h: SymTen2,
}

impl StationaryShear {
    pub fn with_y33(mut self, y33: f64) -> Self {
        self.y33 = y33;
        self
    }

    pub fn candidate(&self) -> StationaryCandidate {
        StationaryCandidate {
            rho: self.rho,
            alpha: self.alpha,
            gamma: self.gamma,
            eta3: self.eta3,
            l: shear(self.l12),
            b: shear(self.b12),
            y: SymTen2::diag(0.0, 0.0, self.y33),
            h: self.h,
        }
    }

    /// Stress added to the viscous one, `-ρH`.
    pub fn extra_stress(&self) -> SymTen2 {
        self.h.scale(-self.rho)
    }
}

fn shear(g: f64) -> Ten2 {
    let mut t = Ten2::ZERO;
    t.0[0][1] = g;
    t
}

/// Solves the stationary algebraic system for the single-component shear ansatz.
pub fn stationary_shear(
    rho: f64,
    alpha: f64,
    gamma: f64,
    eta3: f64,
    l12: f64,
) -> Result<StationaryShear, AnalyticError> {
    positive("rho", rho)?;
    if alpha == 0.0 {
        return Err(AnalyticError::AlphaZero);
    }
    positive("alpha", alpha)?;
    let h22 = gamma * l12 * l12 / (4.0 * alpha * rho);
    let h12 = -gamma * l12.powi(3) / (4.0 * alpha * alpha * rho);
    let h11 = h22 * (1.0 + 2.0 * l12 * l12 / (alpha * alpha));
    let mut h = SymTen2::ZERO;
    h.set(0, 0, h11);
    h.set(1, 1, h22);
    h.set(0, 1, h12);
    Ok(StationaryShear {
        rho,
        alpha,
        gamma,
        eta3,
        l12,
        b12: l12,
        y33: 1.0,
        h,
    })
}

/// `H₁₁` in the form `(γL₁₂²/(4αρ))(1 + L₁₂²/α²)`, which leaves a residual of
/// `γL₁₂⁴/(4α²)` in the (1,1) stationary equation. Kept for comparison only.
pub fn printed_h11(rho: f64, alpha: f64, gamma: f64, l12: f64) -> f64 {
    gamma / (4.0 * alpha * rho) * (1.0 + l12 * l12 / (alpha * alpha)) * l12 * l12
}

/// A trial constant state for the stationary algebraic system.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StationaryCandidate {
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub eta3: f64,
    pub l: Ten2,
    pub b: Ten2,
    pub y: SymTen2,
    pub h: SymTen2,
}

/// Individual residuals of the stationary conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryResiduals {
    /// `ρ(LH + HLᵀ) + αρH - γD²`
    pub ferment: SymTen2,
    pub trace_l: f64,
    /// `BY + YBᵀ`
    pub inertia: SymTen2,
    /// `ρB²Y - 2η₃(L - B)`
    pub affine: Ten2,
    /// `L²`
    pub l_squared: Ten2,
    /// `ρB²Y - 2η₃ sym(L - B)`
    pub affine_sym: Ten2,
    /// `skw L - skw B`
    pub spin: Ten2,
}

impl StationaryResiduals {
    pub fn max_norm(&self) -> f64 {
        [
            self.ferment.max_abs(),
            self.trace_l.abs(),
            self.inertia.max_abs(),
            self.affine.max_abs(),
            self.l_squared.max_abs(),
            self.affine_sym.max_abs(),
            self.spin.max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn stationary_residuals(c: &StationaryCandidate) -> StationaryResiduals {
    let l = c.l;
    let h = c.h.to_ten2();
    let d = l.sym().to_ten2();
    let y = c.y.to_ten2();
    let b2y = c.b.dot(&c.b).dot(&y).scale(c.rho);
    StationaryResiduals {
        ferment: (l.dot(&h) + h.dot(&l.transpose())).sym().scale(c.rho) + c.h.scale(c.alpha * c.rho)
            - d.dot(&d).sym().scale(c.gamma),
        trace_l: l.trace(),
        inertia: (c.b.dot(&y) + y.dot(&c.b.transpose())).sym(),
        affine: b2y - (l - c.b).scale(2.0 * c.eta3),
        l_squared: l.dot(&l),
        affine_sym: b2y - (l - c.b).sym().to_ten2().scale(2.0 * c.eta3),
        spin: l.skw() - c.b.skw(),
    }
}

/// Max norm over all stationary conditions.
pub fn algebraic_residual(c: &StationaryCandidate) -> f64 {
    stationary_residuals(c).max_norm()
}

/// Which reading of the ferment-loss dispersion relation to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionConvention {
    /// `βζ² - |u|ζ + α - γ̂ = 0` as printed, with `u` along `+c₁`.
    Printed,
    /// `βζ² - |u|ζ + γ̂ - α = 0`: the separable mode of the diffusive ferment
    /// balance, with the flow along `-c₁`.
    #[default]
    Diffusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionRegime {
    /// Constant term in `(0, |u|²/4β)`: two positive roots.
    TwoDecayModes,
    /// Discriminant zero: double root `|u|/(2β)`.
    DoubleRoot,
    /// Constant term zero: roots `0` and `|u|/β`.
    ZeroRoot,
    /// Negative constant term: roots of opposite sign, one decaying mode.
    OneDecayMode,
    /// Complex roots: no real decay mode.
    NoRealMode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionResult {
    pub beta: f64,
    pub u_mag: f64,
    pub alpha: f64,
    pub gamma_hat: f64,
    pub convention: DispersionConvention,
    /// Real roots in increasing order.
    pub roots: Vec<f64>,
    pub regime: DispersionRegime,
    /// Whether `α ∈ (γ̂, γ̂ + |u|²/4β)`.
    pub alpha_in_interval: bool,
}

impl DispersionResult {
    pub fn constant_term(&self) -> f64 {
        match self.convention {
            DispersionConvention::Printed => self.alpha - self.gamma_hat,
            DispersionConvention::Diffusive => self.gamma_hat - self.alpha,
        }
    }

    pub fn residual(&self, zeta: f64) -> f64 {
        self.beta * zeta * zeta - self.u_mag * zeta + self.constant_term()
    }

    /// Smallest positive root, the slowest decaying mode.
    pub fn decay_root(&self) -> Option<f64> {
        self.roots.iter().copied().find(|r| *r > 0.0)
    }
}

/// Roots of the printed relation `βζ² - |u|ζ + α - γ̂ = 0`.
pub fn dispersion(beta: f64, u_mag: f64, alpha: f64, gamma_hat: f64) -> DispersionResult {
    dispersion_with(DispersionConvention::Printed, beta, u_mag, alpha, gamma_hat)
}

pub fn dispersion_with(
    convention: DispersionConvention,
    beta: f64,
    u_mag: f64,
    alpha: f64,
    gamma_hat: f64,
) -> DispersionResult {
    let c = match convention {
        DispersionConvention::Printed => alpha - gamma_hat,
        DispersionConvention::Diffusive => gamma_hat - alpha,
    };
    let b = -u_mag.abs();
    let a = beta;
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + (4.0 * a * c).abs();
    let (roots, regime) = if disc.abs() <= 1e-13 * scale {
        (vec![-b / (2.0 * a)], DispersionRegime::DoubleRoot)
    } else if disc < 0.0 {
        (Vec::new(), DispersionRegime::NoRealMode)
    } else if c == 0.0 {
        (vec![0.0, -b / a], DispersionRegime::ZeroRoot)
    } else {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / a, c / q)
        };
        let mut r = vec![r1.min(r2), r1.max(r2)];
        r.dedup();
        let regime = if c < 0.0 {
            DispersionRegime::OneDecayMode
        } else {
            DispersionRegime::TwoDecayModes
        };
        (r, regime)
    };
    DispersionResult {
        beta,
        u_mag: u_mag.abs(),
        alpha,
        gamma_hat,
        convention,
        roots,
        regime,
        alpha_in_interval: alpha > gamma_hat && alpha < gamma_hat + u_mag * u_mag / (4.0 * beta),
    }
}

/// Couette flow with `α = 0`: what the (1,1) stationary equation gives and
/// what the (2,2) equation fails to balance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Example4AlphaZero {
    pub l12: f64,
    /// `γL₁₂/(8ρ)` from `2ρL₁₂H₁₂ = γL₁₂²/4`.
    pub h12: f64,
    /// The printed value `γ|u|²/(8ρδ)`, for comparison.
    pub h12_printed: f64,
    /// Left-over of the (2,2) equation, `γL₁₂²/4`.
    pub residual_22: f64,
    /// Whether the stationary system can be balanced.
    pub consistent: bool,
}

pub fn example4_alpha_zero(rho: f64, gamma: f64, u_mag: f64, delta: f64) -> Example4AlphaZero {
    let l12 = u_mag / delta;
    let residual_22 = gamma * l12 * l12 / 4.0;
    Example4AlphaZero {
        l12,
        h12: gamma * l12 / (8.0 * rho),
        h12_printed: gamma * u_mag * u_mag / (8.0 * rho * delta),
        residual_22,
        consistent: residual_22 == 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    /// Steady bounce between the walls.
    One,
    /// Stationary decay along the channel.
    TwoSpatial,
    /// Decay in time without mean flow.
    TwoTemporal,
    /// Wall ferment loss with ferment transfer.
    Three,
    /// Plane Couette flow.
    Four,
}

impl std::str::FromStr for Example {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" | "one" => Ok(Example::One),
            "2s" | "2_spatial" | "two_spatial" => Ok(Example::TwoSpatial),
            "2t" | "2_temporal" | "two_temporal" => Ok(Example::TwoTemporal),
            "3" | "three" => Ok(Example::Three),
            "4" | "four" => Ok(Example::Four),
            _ => Err(format!(
                "unknown example `{s}` (expected 1, 2_spatial, 2_temporal, 3 or 4)"
            )),
        }
    }
}

/// Parameters shared by the example generators; unused ones are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleParams {
    pub rho: f64,
    /// Flow speed `|u|` along the channel.
    pub u: f64,
    /// Bounce speed `|v|` across the channel (`v₀` in the decaying examples).
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_hat: f64,
    pub eta3: f64,
    /// Channel width.
    pub delta: f64,
    /// Amplitude of the ferment-loss mode.
    pub chi0: f64,
    pub convention: DispersionConvention,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            rho: 1.0,
            u: 1.0,
            v: 0.5,
            alpha: 1.0,
            beta: 0.1,
            gamma: 0.5,
            gamma_hat: 0.5,
            eta3: 0.0,
            delta: 1.0,
            chi0: 1.0,
            convention: DispersionConvention::Diffusive,
        }
    }
}

/// Closed-form fields `H = H₀ e^{-k₁ζ₁ - k_τ τ}` plus a uniform flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExampleFields {
    pub which: Example,
    pub rho: f64,
    /// `ẋ = u₀ + ζ₂ u₁`, both along `c₁`.
    pub velocity: Vec3,
    pub shear: f64,
    pub h0: SymTen2,
    pub k_space: f64,
    pub k_time: f64,
    pub y: SymTen2,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Wall pressure `ρ|v|²` where the example states one.
    pub wall_pressure: Option<f64>,
    /// Stress in addition to the viscous one, where the example states one.
    pub extra_stress: Option<SymTen2>,
    /// Unbalanced part of the ferment equation (ρ-weighted), nonzero only for
    /// Couette flow with `α = 0`.
    pub known_residual: f64,
}

pub fn example_fields(which: Example, p: &ExampleParams) -> Result<ExampleFields, AnalyticError> {
    positive("rho", p.rho)?;
    let v_axis = Vec3::new(0.0, p.v, 0.0);
    let bounce = v_axis.outer_self();
    let mut f = ExampleFields {
        which,
        rho: p.rho,
        velocity: Vec3::new(p.u, 0.0, 0.0),
        shear: 0.0,
        h0: bounce,
        k_space: 0.0,
        k_time: 0.0,
        y: SymTen2::ZERO,
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        wall_pressure: None,
        extra_stress: None,
        known_residual: 0.0,
    };
    match which {
        Example::One => {
            f.wall_pressure = Some(p.rho * p.v * p.v);
        }
        Example::TwoSpatial => {
            positive("alpha", p.alpha)?;
            positive("u", p.u.abs())?;
            f.alpha = p.alpha;
            f.k_space = p.alpha / p.u.abs();
            f.velocity = Vec3::new(p.u.abs(), 0.0, 0.0);
        }
        Example::TwoTemporal => {
            positive("alpha", p.alpha)?;
            f.alpha = p.alpha;
            f.velocity = Vec3::ZERO;
            f.k_time = p.alpha;
        }
        Example::Three => {
            positive("beta", p.beta)?;
            f.alpha = p.alpha;
            f.beta = p.beta;
            let d = dispersion_with(p.convention, p.beta, p.u, p.alpha, p.gamma_hat);
            let zeta = d.decay_root().ok_or(AnalyticError::NonPositive {
                name: "decay root",
                value: d.roots.last().copied().unwrap_or(f64::NAN),
            })?;
            f.k_space = zeta;
            f.k_time = p.gamma_hat;
            f.h0 = bounce.scale(p.chi0);
            let sign = match p.convention {
                DispersionConvention::Printed => 1.0,
                DispersionConvention::Diffusive => -1.0,
            };
            f.velocity = Vec3::new(sign * p.u.abs(), 0.0, 0.0);
        }
        Example::Four => {
            positive("delta", p.delta)?;
            let l12 = p.u / p.delta;
            f.velocity = Vec3::ZERO;
            f.shear = l12;
            f.gamma = p.gamma;
            f.alpha = p.alpha;
            f.y = SymTen2::diag(0.0, 0.0, 1.0);
            if p.alpha == 0.0 {
                let a0 = example4_alpha_zero(p.rho, p.gamma, p.u, p.delta);
                let mut h = SymTen2::ZERO;
                h.set(0, 1, a0.h12);
                f.h0 = h;
                f.known_residual = a0.residual_22;
            } else {
                let s = stationary_shear(p.rho, p.alpha, p.gamma, p.eta3, l12)?;
                f.h0 = s.h;
                f.extra_stress = Some(s.extra_stress());
            }
        }
    }
    Ok(f)
}

impl ExampleFields {
    fn decay(&self, zeta: [f64; 2], tau: f64) -> f64 {
        (-self.k_space * zeta[0] - self.k_time * tau).exp()
    }

    pub fn l(&self) -> Ten2 {
        shear(self.shear)
    }

    pub fn at(&self, zeta: [f64; 2], tau: f64) -> Cell {
        Cell {
            rho: self.rho,
            v: self.velocity + Vec3::new(self.shear * zeta[1], 0.0, 0.0),
            y: self.y,
            b: self.l(),
            h: self.h0.scale(self.decay(zeta, tau)),
            eps: 0.0,
        }
    }

    /// Residuals of the five local balances with analytic derivatives,
    /// ρ-weighted, max norm per row: mass, inertia, momentum, affine rate, ferment.
    pub fn pde_residual(&self, zeta: [f64; 2], tau: f64) -> [f64; 5] {
        let c = self.at(zeta, tau);
        let l = self.l();
        let rho = self.rho;
        let h = c.h;
        let dh_dtau = h.scale(-self.k_time);
        let dh_d1 = h.scale(-self.k_space);
        let d2h_d1 = h.scale(self.k_space * self.k_space);
        // div(-ρH)_i = -ρ ∂₁H_i1 (fields vary along ζ₁ only, H constant in ζ₂)
        let div_t = Vec3::new(dh_d1.get(0, 0), dh_d1.get(1, 0), dh_d1.get(2, 0)).scale(-rho);
        let momentum = l.apply(&c.v).scale(rho) - div_t;
        let inertia = (c.b.dot(&c.y.to_ten2()) + c.y.to_ten2().dot(&c.b.transpose())).sym();
        let affine = c.b.dot(&c.b).dot(&c.y.to_ten2()).scale(rho);
        let d = l.sym().to_ten2();
        let ferment = (dh_dtau + dh_d1.scale(c.v.0[0])).scale(rho)
            + (l.dot(&h.to_ten2()) + h.to_ten2().dot(&l.transpose()))
                .sym()
                .scale(rho)
            - d2h_d1.scale(self.beta * rho)
            + h.scale(self.alpha * rho)
            - d.dot(&d).sym().scale(self.gamma);
        [
            0.0,
            inertia.max_abs(),
            momentum.max_abs(),
            affine.max_abs(),
            ferment.max_abs(),
        ]
    }

    /// Samples the fields on a grid at time `tau`.
    pub fn sample(&self, grid: &Grid, boundary: &BoundarySpec, tau: f64) -> FieldState {
        FieldState::from_fn(grid, boundary, |z| self.at(z, tau))
    }
}

/// `u(ζ₂) = u_wall ζ₂/δ`.
pub fn couette_profile(u_wall: f64, delta: f64, zeta2: f64) -> f64 {
    u_wall * zeta2 / delta
}

/// `u(ζ₂) = (ρf/2η) ζ₂(δ - ζ₂)` for a body force `f` along the channel.
pub fn poiseuille_profile(rho: f64, force: f64, eta: f64, delta: f64, zeta2: f64) -> f64 {
    rho * force / (2.0 * eta) * zeta2 * (delta - zeta2)
}

/// Error norms of one field at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FieldError {
    pub linf: f64,
    /// Root mean square over cells.
    pub l2: f64,
}

/// Error norms of every field at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub t: f64,
    pub rho: FieldError,
    pub v: FieldError,
    pub y: FieldError,
    pub b: FieldError,
    pub h: FieldError,
}

/// Compares closed-form and numeric snapshots pairwise.
pub fn verify_against_solver(
    expected: &[(f64, FieldState)],
    numeric: &[(f64, FieldState)],
) -> Result<Vec<ErrorNorms>, AnalyticError> {
    if expected.len() != numeric.len() {
        return Err(AnalyticError::ShapeMismatch(format!(
            "{} reference snapshots against {} numeric ones",
            expected.len(),
            numeric.len()
        )));
    }
    let mut out = Vec::with_capacity(expected.len());
    for ((te, se), (tn, sn)) in expected.iter().zip(numeric) {
        if (te - tn).abs() > 1e-12 * te.abs().max(1.0) {
            return Err(AnalyticError::ShapeMismatch(format!(
                "snapshot times differ: {te} vs {tn}"
            )));
        }
        if se.cells.len() != sn.cells.len() {
            return Err(AnalyticError::ShapeMismatch(format!(
                "{} reference cells against {} numeric ones",
                se.cells.len(),
                sn.cells.len()
            )));
        }
        let n = se.cells.len().max(1) as f64;
        let norm = |f: &dyn Fn(&Cell, &Cell) -> f64| {
            let mut e = FieldError::default();
            let mut sq = 0.0;
            for (a, b) in se.cells.iter().zip(&sn.cells) {
                let d = f(a, b);
                e.linf = e.linf.max(d);
                sq += d * d;
            }
            e.l2 = (sq / n).sqrt();
            e
        };
        out.push(ErrorNorms {
            t: *tn,
            rho: norm(&|a, b| (a.rho - b.rho).abs()),
            v: norm(&|a, b| (a.v - b.v).max_abs()),
            y: norm(&|a, b| (a.y - b.y).max_abs()),
            b: norm(&|a, b| (a.b - b.b).max_abs()),
            h: norm(&|a, b| (a.h - b.h).max_abs()),
        });
    }
    Ok(out)
}
