use crate::constitutive::{
    collision_density, internal_torque_a, stirring_z, stress_t, tensor_power_density,
    LocalKineticState,
};
use crate::exec::Exec;
use crate::tensor::{min_eigenvalue, project_psd, SymTen2, Ten3, Vec3};

use super::rhs::Model;
use super::state::{Cell, FieldState};
use super::stencil::Stencil;
use super::ConstraintMode;

/// Global record of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    /// `∫ρW`, `W = ½ẋ⊗ẋ + ½BYBᵀ + ½H`.
    pub kinetic_energy: SymTen2,
    /// `d/dτ ∫ρW` evaluated from the discrete right side.
    pub energy_rate: SymTen2,
    /// Volume power: external actions plus internal power density.
    pub power: SymTen2,
    /// Power entering through walls plus convected energy.
    pub boundary_flux: SymTen2,
    /// `energy_rate - power - boundary_flux`.
    pub residual: SymTen2,
    pub residual_relative: f64,
    /// Mean collision density tensor.
    pub collision_density: SymTen2,
    pub min_eig_h: f64,
    pub min_eig_y: f64,
    /// Mean traction `Tn` on each wall, `n` the outward normal of the body.
    pub wall_traction: [Option<Vec3>; 4],
    /// Mean pressure `-n·Tn` on each wall.
    pub wall_pressure: [Option<f64>; 4],
    /// Largest PSD correction of `H` relative to `‖H‖` since the previous record.
    pub psd_correction: f64,
}

#[derive(Clone, Copy, Default)]
struct CellTerms {
    energy: SymTen2,
    rate: SymTen2,
    power: SymTen2,
    collision: SymTen2,
    min_h: f64,
    min_y: f64,
}

fn energy_density(c: &Cell, b: &crate::tensor::Ten2) -> SymTen2 {
    (c.v.outer_self() + c.y.congruence(b) + c.h).scale(0.5)
}

pub(crate) fn compute(
    model: &Model,
    state: &FieldState,
    rate: &FieldState,
    t: f64,
    psd_correction: f64,
    exec: Exec,
) -> Diagnostics {
    let grid = model.grid;
    let p = model.params;
    let st = Stencil::new(grid, model.boundary, state);
    let vol = grid.cell_volume();
    let terms = exec.map(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        let (i, j) = (i as isize, j as isize);
        let c = st.at(i, j);
        let dc = &rate.cells[k];
        let (l, b) = model.cell_rates(&st, i, j);
        let src = model.source(k);
        let w = energy_density(c, &b);
        let db = if model.mode == ConstraintMode::IndependentB {
            dc.b
        } else {
            crate::tensor::Ten2::ZERO
        };
        let bt = b.transpose();
        let dw = c.v.outer(&dc.v).sym()
            + db.dot(&c.y.to_ten2()).dot(&bt).sym()
            + dc.y.congruence(&b).scale(0.5)
            + dc.h.scale(0.5);
        let ks = LocalKineticState::new(c.rho, l, b, c.h);
        let tt = stress_t(&ks, p);
        let a = internal_torque_a(&ks, p);
        let z = stirring_z(&ks, p);
        let internal = tensor_power_density(&ks, &tt, &a, &z, &Ten3::ZERO);
        let external = (c.v.outer(&src.f) + b.dot(&src.m)).sym().scale(c.rho)
            + src.s.scale(0.5 * c.rho);
        let (h_psd, _) = project_psd(&c.h);
        CellTerms {
            energy: w.scale(c.rho),
            rate: w.scale(dc.rho) + dw.scale(c.rho),
            power: internal + external,
            collision: collision_density(&h_psd, p).unwrap_or(SymTen2::ZERO),
            min_h: min_eigenvalue(&c.h),
            min_y: min_eigenvalue(&c.y),
        }
    });
    let mut sum = CellTerms {
        min_h: f64::INFINITY,
        min_y: f64::INFINITY,
        ..Default::default()
    };
    for tm in &terms {
        sum.energy += tm.energy;
        sum.rate += tm.rate;
        sum.power += tm.power;
        sum.collision += tm.collision;
        sum.min_h = sum.min_h.min(tm.min_h);
        sum.min_y = sum.min_y.min(tm.min_y);
    }

    let mut flux = SymTen2::ZERO;
    let mut traction = [None; 4];
    let mut pressure = [None; 4];
    for s in 0..4 {
        if !model.boundary.is_wall(grid, s) {
            continue;
        }
        let d = s / 2;
        let high = s % 2 == 1;
        let other = 1 - d;
        let sign = if high { 1.0 } else { -1.0 };
        let mut normal = Vec3::ZERO;
        normal.0[d] = sign;
        let area = vol / grid.h[d];
        let pos = if high { grid.n[d] as isize - 1 } else { -1 };
        let mut tr_sum = Vec3::ZERO;
        let count = grid.n[other];
        for m in 0..count as isize {
            let (i, j) = if d == 0 { (pos, m) } else { (m, pos) };
            let f = model.face(&st, i, j, d);
            let ks = f.kinetic();
            let tt = stress_t(&ks, p);
            let tn = tt.apply(&normal);
            let w = (f.v.outer_self() + f.y.congruence(&f.b) + f.h).scale(0.5);
            let dn_rho_h = st.face_derivative(i, j, d, |c| c.h.scale(c.rho)).scale(sign);
            flux += (f.v.outer(&tn).sym() + dn_rho_h.scale(0.5 * p.beta)
                - w.scale(f.rho * f.v.dot(&normal)))
            .scale(area);
            tr_sum += tn;
        }
        let mean = tr_sum.scale(1.0 / count as f64);
        traction[s] = Some(mean);
        pressure[s] = Some(-normal.dot(&mean));
    }

    let energy_rate = sum.rate.scale(vol);
    let power = sum.power.scale(vol);
    let residual = energy_rate - power - flux;
    let scale = energy_rate.norm() + power.norm() + flux.norm();
    Diagnostics {
        t,
        mass: state.total_mass(grid),
        kinetic_energy: sum.energy.scale(vol),
        energy_rate,
        power,
        boundary_flux: flux,
        residual,
        residual_relative: if scale > 0.0 {
            residual.norm() / scale
        } else {
            0.0
        },
        collision_density: sum.collision.scale(1.0 / grid.len() as f64),
        min_eig_h: sum.min_h,
        min_eig_y: sum.min_y,
        wall_traction: traction,
        wall_pressure: pressure,
        psd_correction,
    }
}
