//! Constitutive closure for the internal actions of a kinetic continuum.
//!
//! Stress `T`, internal tensor torque `A`, stirring `Z`, stirring
//! hyperstress `s` (the twisting hyperstress `m` vanishes in this law), the
//! internal power densities and the thermal energy balance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{
    skew_from_axial, sqrt_psd, ten3_grad_contract, SymTen2, Ten2, Ten3, TensorError, Vec3,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("material parameter `{name}` must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("material parameter `{name}` is not finite")]
    NotFinite { name: &'static str },
}

/// Density-independent material coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    /// Shear viscosity multiplying `2D`.
    pub eta1: f64,
    /// Coefficient of `2 sym B`; only used when `include_sym_b` is set.
    pub eta2: f64,
    /// Macro–micro coupling viscosity multiplying `2(L - B)`.
    pub eta3: f64,
    /// Collision-loss rate.
    pub alpha: f64,
    /// Ferment transfer coefficient.
    pub beta: f64,
    /// Gross-motion stimulus coefficient.
    pub gamma: f64,
    /// Wall ferment-loss rate.
    pub gamma_hat: f64,
    /// Heat conduction coefficient, `q = -kappa grad eps`.
    pub kappa: f64,
    /// Grain number density over mean free path, for the collision density tensor.
    pub nu_over_lambda: f64,
    pub include_sym_b: bool,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            eta1: 0.0,
            eta2: 0.0,
            eta3: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            gamma_hat: 0.0,
            kappa: 0.0,
            nu_over_lambda: 1.0,
            include_sym_b: false,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let all = [
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("eta3", self.eta3),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("gamma_hat", self.gamma_hat),
            ("kappa", self.kappa),
            ("nu_over_lambda", self.nu_over_lambda),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(ParamsError::NotFinite { name });
            }
        }
        let non_negative = [
            ("eta1", self.eta1),
            ("eta3", self.eta3),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma_hat", self.gamma_hat),
            ("kappa", self.kappa),
        ];
        for (name, value) in non_negative {
            if value < 0.0 {
                return Err(ParamsError::Negative { name, value });
            }
        }
        Ok(())
    }
}

/// Kinematic and ferment data at one material point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalKineticState {
    pub rho: f64,
    /// Velocity gradient `L = grad ẋ`.
    pub l: Ten2,
    /// Affine rate.
    pub b: Ten2,
    /// Ferment (Reynolds) tensor.
    pub h: SymTen2,
    /// `grad(ρH)`, last index the gradient direction.
    pub grad_rho_h: Ten3,
    /// `grad B`, last index the gradient direction.
    pub bb: Ten3,
}

impl LocalKineticState {
    pub fn new(rho: f64, l: Ten2, b: Ten2, h: SymTen2) -> Self {
        LocalKineticState {
            rho,
            l,
            b,
            h,
            grad_rho_h: Ten3::ZERO,
            bb: Ten3::ZERO,
        }
    }

    /// Stretching `D = sym L`.
    pub fn d(&self) -> SymTen2 {
        self.l.sym()
    }

    pub fn rho_h(&self) -> SymTen2 {
        self.h.scale(self.rho)
    }
}

/// `T = -ρH + 2η₁D + 2η₃(L - B)` (plus `2η₂ sym B` when enabled).
pub fn stress_t(state: &LocalKineticState, params: &MaterialParams) -> Ten2 {
    let mut t = -state.rho_h().to_ten2()
        + state.d().to_ten2().scale(2.0 * params.eta1)
        + (state.l - state.b).scale(2.0 * params.eta3);
    if params.include_sym_b {
        t += state.b.sym().to_ten2().scale(2.0 * params.eta2);
    }
    t
}

/// `A = ρH - 2η₃(L - B)ᵀ`.
pub fn internal_torque_a(state: &LocalKineticState, params: &MaterialParams) -> Ten2 {
    state.rho_h().to_ten2() - (state.l - state.b).transpose().scale(2.0 * params.eta3)
}

/// `Z = 2 sym[(L - B)ρH] + αρH - γD²`, symmetric by construction.
pub fn stirring_z(state: &LocalKineticState, params: &MaterialParams) -> SymTen2 {
    let rho_h = state.rho_h();
    let d = state.d().to_ten2();
    let coupling = (state.l - state.b).dot(&rho_h.to_ten2()).sym().scale(2.0);
    coupling + rho_h.scale(params.alpha) - d.dot(&d).sym().scale(params.gamma)
}

/// `s = -β grad(ρH)`, minor-left symmetric.
pub fn hyperstress_s(state: &LocalKineticState, params: &MaterialParams) -> Ten3 {
    let g = &state.grad_rho_h;
    let slices = [0, 1, 2].map(|k| g.slice(k).sym().scale(-params.beta));
    Ten3::from_sym_slices(slices)
}

/// Density of the tensor power of internal actions, `-sym(½Z + LTᵀ + BA + b mᵗ)`.
pub fn tensor_power_density(
    state: &LocalKineticState,
    t: &Ten2,
    a: &Ten2,
    z: &SymTen2,
    m: &Ten3,
) -> SymTen2 {
    let inner = state.l.dot(&t.transpose()) + state.b.dot(a) + ten3_grad_contract(&state.bb, m);
    -(z.scale(0.5) + inner.sym())
}

/// Scalar internal power density, `-[L·T + B·Aᵀ + b·(mᵗ)ᵀ + ½ tr Z]`.
pub fn scalar_power_density(
    state: &LocalKineticState,
    t: &Ten2,
    a: &Ten2,
    z: &SymTen2,
    m: &Ten3,
) -> f64 {
    -mechanical_power(state, t, a, z, m)
}

fn mechanical_power(state: &LocalKineticState, t: &Ten2, a: &Ten2, z: &SymTen2, m: &Ten3) -> f64 {
    state.l.ddot(t)
        + state.b.ddot(&a.transpose())
        + ten3_grad_contract(&state.bb, m).trace()
        + 0.5 * z.trace()
}

/// Stirring that makes the tensor power of the conservative actions
/// `Tᶜ = -ρH`, `Aᶜ = ρH` vanish: `Z = -2 sym(L Tᶜᵀ + B Aᶜ)`.
pub fn conservative_z(state: &LocalKineticState) -> SymTen2 {
    let rho_h = state.rho_h().to_ten2();
    let tc = -rho_h;
    let ac = rho_h;
    (state.l.dot(&tc.transpose()) + state.b.dot(&ac)).sym().scale(-2.0)
}

/// Velocity gradient and affine rate seen by an observer spinning at `w`.
pub fn observer_shift(l: &Ten2, b: &Ten2, w: &Vec3) -> (Ten2, Ten2) {
    let spin = skew_from_axial(w);
    (*l + spin, *b + spin)
}

/// Heat flux `q = -κ grad ε`.
pub fn heat_flux(params: &MaterialParams, grad_eps: &Vec3) -> Vec3 {
    grad_eps.scale(-params.kappa)
}

/// `ρ ε̇ = L·T + B·Aᵀ + b·(mᵗ)ᵀ + ½ tr Z - div q + ρλ`, with `λ` the heat
/// generation per unit mass.
#[allow(clippy::too_many_arguments)]
pub fn energy_rhs_scalar(
    state: &LocalKineticState,
    t: &Ten2,
    a: &Ten2,
    z: &SymTen2,
    m: &Ten3,
    div_q: f64,
    lambda_heat: f64,
) -> f64 {
    mechanical_power(state, t, a, z, m) - div_q + state.rho * lambda_heat
}

/// Right side of the tensorial thermal balance,
/// `sym(LTᵀ + BA + b mᵗ + ½Z - grad q) + ⅓ρλ I`.
#[allow(clippy::too_many_arguments)]
pub fn energy_rhs_tensor(
    state: &LocalKineticState,
    t: &Ten2,
    a: &Ten2,
    z: &SymTen2,
    m: &Ten3,
    grad_q: &Ten2,
    lambda_heat: f64,
) -> SymTen2 {
    let inner = state.l.dot(&t.transpose()) + state.b.dot(a) + ten3_grad_contract(&state.bb, m)
        - *grad_q;
    inner.sym() + z.scale(0.5) + SymTen2::IDENTITY.scale(state.rho * lambda_heat / 3.0)
}

/// Norm of the deviatoric part of [`energy_rhs_tensor`]; zero exactly when
/// the tensorial balance is compatible with a spherical thermal energy `⅓εI`.
#[allow(clippy::too_many_arguments)]
pub fn energy_rhs_tensor_residual(
    state: &LocalKineticState,
    t: &Ten2,
    a: &Ten2,
    z: &SymTen2,
    m: &Ten3,
    grad_q: &Ten2,
    lambda_heat: f64,
) -> f64 {
    energy_rhs_tensor(state, t, a, z, m, grad_q, lambda_heat)
        .deviator()
        .norm()
}

/// Collision density tensor `(ν/λ) H^{1/2}`.
pub fn collision_density(h: &SymTen2, params: &MaterialParams) -> Result<SymTen2, TensorError> {
    Ok(sqrt_psd(h)?.scale(params.nu_over_lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Vec3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> MaterialParams {
        MaterialParams {
            eta1: 0.7,
            eta3: 0.4,
            alpha: 1.3,
            beta: 0.2,
            gamma: 0.9,
            ..MaterialParams::default()
        }
    }

    fn random_state(rng: &mut impl Rng) -> LocalKineticState {
        let l = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let b = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let g = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let h = g.dot(&g.transpose()).sym();
        let mut s = LocalKineticState::new(rng.random_range(0.5..2.0), l, b, h);
        s.bb = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
        s.grad_rho_h = Ten3::from_sym_slices([0, 1, 2].map(|_| {
            Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0)).sym()
        }));
        s
    }

    #[test]
    fn zero_ferment_and_viscosity_gives_zero_stress() {
        let s = LocalKineticState::new(1.0, Ten2::IDENTITY, Ten2::ZERO, SymTen2::ZERO);
        let p = MaterialParams::default();
        assert_eq!(stress_t(&s, &p), Ten2::ZERO);
    }

    #[test]
    fn bounce_state_wall_pressure() {
        let rho = 1.7;
        let v = Vec3::new(0.0, 2.5, 0.0);
        let s = LocalKineticState::new(rho, Ten2::ZERO, Ten2::ZERO, v.outer_self());
        let t = stress_t(&s, &MaterialParams::default());
        let n = Vec3::axis(1);
        let traction = t.apply(&n);
        assert_eq!(-traction.dot(&n), rho * v.norm_sq());
    }

    #[test]
    fn stress_matches_term_by_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = params();
        for _ in 0..100 {
            let s = random_state(&mut rng);
            let t = stress_t(&s, &p);
            for i in 0..3 {
                for j in 0..3 {
                    let d = 0.5 * (s.l.0[i][j] + s.l.0[j][i]);
                    let e = -s.rho * s.h.get(i, j)
                        + 2.0 * p.eta1 * d
                        + 2.0 * p.eta3 * (s.l.0[i][j] - s.b.0[i][j]);
                    assert!((t.0[i][j] - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sym_b_term_only_when_enabled() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = random_state(&mut rng);
        let mut p = params();
        p.eta2 = 0.5;
        let off = stress_t(&s, &p);
        p.include_sym_b = true;
        let on = stress_t(&s, &p);
        assert!(((on - off) - s.b.sym().to_ten2().scale(1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn torque_reduces_to_rho_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = random_state(&mut rng);
        let mut p = params();
        p.eta3 = 0.0;
        assert_eq!(internal_torque_a(&s, &p), s.rho_h().to_ten2());
        let mut s2 = s;
        s2.b = s2.l;
        assert_eq!(internal_torque_a(&s2, &params()), s2.rho_h().to_ten2());
    }

    #[test]
    fn skew_parts_of_stress_and_torque_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = params();
        for _ in 0..1000 {
            let s = random_state(&mut rng);
            let t = stress_t(&s, &p);
            let a = internal_torque_a(&s, &p);
            let scale = t.norm().max(a.norm());
            assert!((t.skw() - a.skw()).max_abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn stirring_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut s = random_state(&mut rng);
        s.b = s.l;
        let mut p = params();
        p.alpha = 0.0;
        p.gamma = 0.0;
        assert!(stirring_z(&s, &p).max_abs() < 1e-15);

        let mut s = random_state(&mut rng);
        s.l = Ten2::ZERO;
        s.b = Ten2::ZERO;
        let p = params();
        assert!((stirring_z(&s, &p) - s.rho_h().scale(p.alpha)).max_abs() < 1e-15);
    }

    #[test]
    fn stirring_pure_shear() {
        let l12 = 0.8;
        let mut l = Ten2::ZERO;
        l.0[0][1] = l12;
        let h = SymTen2([0.3, 0.2, 0.1, 0.05, 0.0, 0.0]);
        let s = LocalKineticState::new(1.2, l, l, h);
        let p = params();
        let d2 = SymTen2::diag(l12 * l12 / 4.0, l12 * l12 / 4.0, 0.0);
        let expected = s.rho_h().scale(p.alpha) - d2.scale(p.gamma);
        assert!((stirring_z(&s, &p) - expected).max_abs() < 1e-15);
    }

    #[test]
    fn hyperstress_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let mut s = random_state(&mut rng);
        let p = params();
        let hs = hyperstress_s(&s, &p);
        assert!(hs.is_minor_left_symmetric());
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(hs.get(i, j, k), hs.get(j, i, k));
                }
            }
        }
        let mut p0 = p;
        p0.beta = 0.0;
        assert!(hyperstress_s(&s, &p0).norm() == 0.0);
        s.grad_rho_h = Ten3::ZERO;
        assert!(hyperstress_s(&s, &p).norm() == 0.0);

        // ρH = ζ₁ M₀ has gradient M₀ along the first direction only
        let m0 = SymTen2([1.0, 2.0, 3.0, 0.4, 0.5, 0.6]);
        s.grad_rho_h = Ten3::from_sym_slices([m0, SymTen2::ZERO, SymTen2::ZERO]);
        let hs = hyperstress_s(&s, &p);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(hs.get(i, j, 0), -p.beta * m0.get(i, j));
                assert_eq!(hs.get(i, j, 1), 0.0);
                assert_eq!(hs.get(i, j, 2), 0.0);
            }
        }
    }

    #[test]
    fn power_density_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let s = random_state(&mut rng);
            let t = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let a = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let z = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0)).sym();
            let m = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
            let tensor = tensor_power_density(&s, &t, &a, &z, &m);
            let scalar = scalar_power_density(&s, &t, &a, &z, &m);
            assert!((tensor.trace() - scalar).abs() <= 1e-13 * (1.0 + scalar.abs()));

            // independent index loops
            let mut naive = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    naive += s.l.0[i][j] * t.0[i][j] + s.b.0[i][j] * a.0[j][i];
                    for k in 0..3 {
                        naive += s.bb.get(i, j, k) * m.get(j, i, k);
                    }
                }
            }
            naive += 0.5 * z.trace();
            assert!((scalar + naive).abs() <= 1e-13 * (1.0 + naive.abs()));
        }
    }

    #[test]
    fn zero_actions_zero_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let s = random_state(&mut rng);
        let p = tensor_power_density(&s, &Ten2::ZERO, &Ten2::ZERO, &SymTen2::ZERO, &Ten3::ZERO);
        assert_eq!(p, SymTen2::ZERO);
        assert_eq!(
            scalar_power_density(&s, &Ten2::ZERO, &Ten2::ZERO, &SymTen2::ZERO, &Ten3::ZERO),
            0.0
        );
    }

    #[test]
    fn conservative_stirring_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut p = params();
        p.alpha = 0.0;
        p.gamma = 0.0;
        for _ in 0..500 {
            let s = random_state(&mut rng);
            let zc = conservative_z(&s);
            assert!((zc - stirring_z(&s, &p)).max_abs() <= 1e-13 * (1.0 + zc.max_abs()));
            let tc = -s.rho_h().to_ten2();
            let ac = s.rho_h().to_ten2();
            // T = -Aᵀ holds for the conservative pair
            assert_eq!(tc, -ac.transpose());
            let pw = tensor_power_density(&s, &tc, &ac, &zc, &Ten3::ZERO);
            assert!(pw.max_abs() <= 1e-13 * (1.0 + zc.max_abs()));
        }
        let mut s = random_state(&mut rng);
        s.b = s.l;
        assert!(conservative_z(&s).max_abs() < 1e-15);
    }

    #[test]
    fn observer_shift_keeps_relative_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let s = random_state(&mut rng);
        let (l, b) = observer_shift(&s.l, &s.b, &Vec3::ZERO);
        assert_eq!((l, b), (s.l, s.b));
        let w = Vec3::new(0.3, -2.0, 1.1);
        let (l, b) = observer_shift(&s.l, &s.b, &w);
        assert!(((l - b) - (s.l - s.b)).max_abs() < 1e-15);
    }

    #[test]
    fn scalar_power_is_objective_for_the_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = params();
        for _ in 0..500 {
            let s = random_state(&mut rng);
            let eval = |st: &LocalKineticState| {
                let t = stress_t(st, &p);
                let a = internal_torque_a(st, &p);
                let z = stirring_z(st, &p);
                scalar_power_density(st, &t, &a, &z, &Ten3::ZERO)
            };
            let w = Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let (l, b) = observer_shift(&s.l, &s.b, &w);
            let mut shifted = s;
            shifted.l = l;
            shifted.b = b;
            let (p0, p1) = (eval(&s), eval(&shifted));
            assert!((p0 - p1).abs() <= 1e-12 * (1.0 + p0.abs()));
        }
    }

    #[test]
    fn energy_rhs_cases() {
        let static_state = LocalKineticState::new(1.0, Ten2::ZERO, Ten2::ZERO, SymTen2::ZERO);
        let zero = |_: ()| {
            energy_rhs_scalar(
                &static_state,
                &Ten2::ZERO,
                &Ten2::ZERO,
                &SymTen2::ZERO,
                &Ten3::ZERO,
                0.0,
                0.0,
            )
        };
        assert_eq!(zero(()), 0.0);
        let heated = energy_rhs_scalar(
            &static_state,
            &Ten2::ZERO,
            &Ten2::ZERO,
            &SymTen2::ZERO,
            &Ten3::ZERO,
            0.0,
            7.0,
        );
        assert_eq!(heated, 7.0);
        let mut dense = static_state;
        dense.rho = 2.0;
        let heated = energy_rhs_scalar(
            &dense,
            &Ten2::ZERO,
            &Ten2::ZERO,
            &SymTen2::ZERO,
            &Ten3::ZERO,
            0.0,
            7.0,
        );
        assert_eq!(heated, 14.0);
    }

    #[test]
    fn energy_scalar_is_trace_of_tensor_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = params();
        for _ in 0..300 {
            let s = random_state(&mut rng);
            let t = stress_t(&s, &p);
            let a = internal_torque_a(&s, &p);
            let z = stirring_z(&s, &p);
            let m = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
            let grad_q = Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let lambda = rng.random_range(-1.0..1.0);
            let scalar = energy_rhs_scalar(&s, &t, &a, &z, &m, grad_q.trace(), lambda);
            let tensor = energy_rhs_tensor(&s, &t, &a, &z, &m, &grad_q, lambda);
            assert!((tensor.trace() - scalar).abs() <= 1e-12 * (1.0 + scalar.abs()));
        }
    }

    #[test]
    fn tensor_residual_cases() {
        let zero = LocalKineticState::new(1.0, Ten2::ZERO, Ten2::ZERO, SymTen2::ZERO);
        let r = energy_rhs_tensor_residual(
            &zero,
            &Ten2::ZERO,
            &Ten2::ZERO,
            &SymTen2::ZERO,
            &Ten3::ZERO,
            &Ten2::ZERO,
            0.0,
        );
        assert_eq!(r, 0.0);

        // spherical: dilatation with isotropic stress, isotropic heat flux gradient
        let spherical = LocalKineticState::new(1.0, Ten2::IDENTITY.scale(0.3), Ten2::ZERO, SymTen2::ZERO);
        let r = energy_rhs_tensor_residual(
            &spherical,
            &Ten2::IDENTITY.scale(-2.0),
            &Ten2::ZERO,
            &SymTen2::IDENTITY.scale(0.5),
            &Ten3::ZERO,
            &Ten2::IDENTITY.scale(0.1),
            4.0,
        );
        assert!(r < 1e-15);

        let mut l = Ten2::ZERO;
        l.0[0][1] = 1.0;
        let shear = LocalKineticState::new(1.0, l, Ten2::ZERO, SymTen2::diag(1.0, 0.5, 0.2));
        let p = params();
        let t = stress_t(&shear, &p);
        let a = internal_torque_a(&shear, &p);
        let z = stirring_z(&shear, &p);
        let r = energy_rhs_tensor_residual(&shear, &t, &a, &z, &Ten3::ZERO, &Ten2::ZERO, 0.0);
        assert!(r > 1e-3);
    }

    #[test]
    fn collision_density_scales_root() {
        let p = MaterialParams {
            nu_over_lambda: 3.0,
            ..MaterialParams::default()
        };
        let c = collision_density(&SymTen2::diag(4.0, 1.0, 0.0), &p).unwrap();
        assert!((c - SymTen2::diag(6.0, 3.0, 0.0)).max_abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.alpha = -1.0;
        assert_eq!(
            p.validate(),
            Err(ParamsError::Negative {
                name: "alpha",
                value: -1.0
            })
        );
        let mut p = params();
        p.gamma = -1.0;
        assert!(p.validate().is_ok());
    }
}
