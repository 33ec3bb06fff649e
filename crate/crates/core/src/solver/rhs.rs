//! Right sides of the local balance laws.

use crate::constitutive::{
    internal_torque_a, stirring_z, stress_t, LocalKineticState, MaterialParams,
};
use crate::exec::Exec;
use crate::tensor::{pseudo_inverse, SymTen2, Ten2, Vec3};

use super::boundary::{BoundarySpec, VelocityBc};
use super::grid::Grid;
use super::state::{Cell, FieldState};
use super::stencil::Stencil;
use super::{CellSource, ConstraintMode, SolverError, SourceSpec};

/// Everything the right side depends on besides the state.
#[derive(Clone, Copy, Debug)]
pub struct Model<'a> {
    pub grid: &'a Grid,
    pub params: &'a MaterialParams,
    pub boundary: &'a BoundarySpec,
    pub sources: &'a SourceSpec,
    pub mode: ConstraintMode,
    pub plane_flow: bool,
    pub evolve_energy: bool,
}

/// Stress columns and mass fluxes on every face, per direction.
#[derive(Clone, Debug, Default)]
pub struct FaceFluxes {
    faces: [Vec<(Vec3, f64)>; 2],
}

impl FaceFluxes {
    /// Index of the face above `(i, j)` along `d`, for `i` or `j` from `-1`.
    fn index(grid: &Grid, i: isize, j: isize, d: usize) -> usize {
        if d == 0 {
            (i + 1) as usize + (grid.n[0] + 1) * j as usize
        } else {
            i as usize + grid.n[0] * (j + 1) as usize
        }
    }
}

/// Field values on a face.
#[derive(Clone, Copy, Debug)]
pub struct FaceState {
    pub rho: f64,
    pub v: Vec3,
    pub y: SymTen2,
    pub b: Ten2,
    pub h: SymTen2,
    pub l: Ten2,
}

impl FaceState {
    pub fn kinetic(&self) -> LocalKineticState {
        LocalKineticState::new(self.rho, self.l, self.b, self.h)
    }
}

impl<'a> Model<'a> {
    /// `B` implied by the constraint mode, or the stored field.
    pub fn constrained_b(&self, stored: &Ten2, l: &Ten2) -> Ten2 {
        match self.mode {
            ConstraintMode::IndependentB => *stored,
            ConstraintMode::BEqualsL => *l,
            ConstraintMode::BEqualsSkwL => l.skw(),
        }
    }

    /// Face between `(i, j)` and its upper neighbour along `d`.
    pub fn face(&self, st: &Stencil, i: isize, j: isize, d: usize) -> FaceState {
        let l = st.face_velocity_gradient(i, j, d);
        let mut v = st.face_average(i, j, d, |c| c.v);
        let pos = if d == 0 { i } else { j };
        let n = self.grid.n[d] as isize;
        let side = if pos == -1 {
            Some(2 * d)
        } else if pos == n - 1 {
            Some(2 * d + 1)
        } else {
            None
        };
        if let Some(s) = side.filter(|s| self.boundary.is_wall(self.grid, *s)) {
            match self.boundary.side(s).velocity {
                VelocityBc::VelocityDirichlet { value } => v = value,
                VelocityBc::FreeSlip => v.0[d] = 0.0,
                _ => {}
            }
        }
        FaceState {
            rho: st.face_average(i, j, d, |c| c.rho),
            v,
            y: st.face_average(i, j, d, |c| c.y),
            b: self.constrained_b(&st.face_average(i, j, d, |c| c.b), &l),
            h: st.face_average(i, j, d, |c| c.h),
            l,
        }
    }

    /// Stress on a face and the mass flux through it (along `+e_d`).
    fn face_fluxes(&self, st: &Stencil, i: isize, j: isize, d: usize) -> (Vec3, f64) {
        let f = self.face(st, i, j, d);
        let t = stress_t(&f.kinetic(), self.params);
        let col = Vec3::new(t.0[0][d], t.0[1][d], t.0[2][d]);
        (col, f.rho * f.v.0[d])
    }

    /// `L` and the effective `B` at a cell centre.
    pub fn cell_rates(&self, st: &Stencil, i: isize, j: isize) -> (Ten2, Ten2) {
        let l = st.velocity_gradient(i, j);
        (l, self.constrained_b(&st.at(i, j).b, &l))
    }

    pub fn source(&self, k: usize) -> CellSource {
        self.sources.at(k)
    }

    /// Stress and mass flux on all faces, each face evaluated once.
    pub fn face_fluxes_all(&self, st: &Stencil, exec: Exec) -> FaceFluxes {
        let g = self.grid;
        let faces = std::array::from_fn(|d| {
            if !g.is_active(d) {
                return Vec::new();
            }
            let (w, h) = if d == 0 {
                (g.n[0] + 1, g.n[1])
            } else {
                (g.n[0], g.n[1] + 1)
            };
            exec.map(w * h, |f| {
                let (a, b) = ((f % w) as isize, (f / w) as isize);
                let (i, j) = if d == 0 { (a - 1, b) } else { (a, b - 1) };
                self.face_fluxes(st, i, j, d)
            })
        });
        FaceFluxes { faces }
    }

    pub fn cell_rhs(&self, st: &Stencil, fluxes: &FaceFluxes, k: usize) -> Result<Cell, SolverError> {
        let (iu, ju) = self.grid.coords(k);
        let (i, j) = (iu as isize, ju as isize);
        let c = st.at(i, j);
        let p = self.params;
        let src = self.source(k);
        let (l, b) = self.cell_rates(st, i, j);
        let adv = st.advection(i, j);

        let mut div_t = Vec3::ZERO;
        let mut div_mass = 0.0;
        for d in 0..2 {
            if !self.grid.is_active(d) {
                continue;
            }
            let (im, jm) = if d == 0 { (i - 1, j) } else { (i, j - 1) };
            let (tp, mp) = fluxes.faces[d][FaceFluxes::index(self.grid, i, j, d)];
            let (tm, mm) = fluxes.faces[d][FaceFluxes::index(self.grid, im, jm, d)];
            let inv = 1.0 / self.grid.h[d];
            div_t += (tp - tm).scale(inv);
            div_mass += (mp - mm) * inv;
        }

        let rho = c.rho;
        let d_sym = l.sym();
        let mut out = Cell::ZERO;
        out.rho = -div_mass;
        out.v = -adv.v + div_t.scale(1.0 / rho) + src.f;
        out.y = -adv.y + b.dot(&c.y.to_ten2()).sym().scale(2.0);
        if self.mode == ConstraintMode::IndependentB {
            out.b = self.affine_rate_derivative(c, &l, &b, &adv.b, &src.m, k)?;
        }
        let lap_rho_h = st.laplacian(i, j, |c| c.h.scale(c.rho));
        let d2 = d_sym.to_ten2().dot(&d_sym.to_ten2()).sym();
        out.h = -adv.h - l.dot(&c.h.to_ten2()).sym().scale(2.0)
            + src.s
            + lap_rho_h.scale(p.beta / rho)
            - c.h.scale(p.alpha)
            + d2.scale(p.gamma / rho);
        if self.evolve_energy {
            let ks = LocalKineticState::new(rho, l, b, c.h);
            let t = stress_t(&ks, p);
            let a = internal_torque_a(&ks, p);
            let z = stirring_z(&ks, p);
            let power = l.ddot(&t) + b.ddot(&a.transpose()) + 0.5 * z.trace();
            let lap_eps = st.laplacian(i, j, |c| c.eps);
            out.eps = -adv.eps + (power + p.kappa * lap_eps) / rho + src.lambda_heat;
        }
        if self.plane_flow {
            out.project_plane();
        }
        Ok(out)
    }

    /// `∂B/∂τ` from `(∂B/∂τ + (grad B)ẋ + B²) Y = Mᵀ + (2η₃/ρ)(L - B)`.
    fn affine_rate_derivative(
        &self,
        c: &Cell,
        l: &Ten2,
        b: &Ten2,
        adv_b: &Ten2,
        m: &Ten2,
        k: usize,
    ) -> Result<Ten2, SolverError> {
        let forcing = m.transpose() + (*l - *b).scale(2.0 * self.params.eta3 / c.rho);
        let y = c.y.to_ten2();
        let y_plus = pseudo_inverse(&c.y).to_ten2();
        let null = Ten2::IDENTITY - y.dot(&y_plus);
        let scale = m.norm() + 2.0 * self.params.eta3 / c.rho * (l.norm() + b.norm());
        let leak = forcing.dot(&null).norm();
        if leak > 1e-9 * scale {
            return Err(SolverError::DegenerateY {
                cell: self.grid.coords(k),
                time: f64::NAN,
                leak,
            });
        }
        Ok((forcing - (*adv_b + b.dot(b)).dot(&y)).dot(&y_plus))
    }

    /// Time derivative of the whole state, including wall ferments.
    pub fn rhs(&self, state: &FieldState, exec: Exec) -> Result<FieldState, SolverError> {
        let st = Stencil::new(self.grid, self.boundary, state);
        let fluxes = self.face_fluxes_all(&st, exec);
        let results = exec.map(self.grid.len(), |k| self.cell_rhs(&st, &fluxes, k));
        let mut cells = Vec::with_capacity(results.len());
        for r in results {
            cells.push(r?);
        }
        let walls = std::array::from_fn(|s| {
            let rate = self.boundary.wall_loss_rate(s, self.params.gamma_hat);
            state.walls[s].iter().map(|w| w.scale(-rate)).collect()
        });
        Ok(FieldState { cells, walls })
    }
}
