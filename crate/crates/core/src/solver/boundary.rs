use serde::{Deserialize, Serialize};

use crate::tensor::{SymTen2, Ten2, Vec3};

use super::grid::Grid;
use super::state::{Cell, FieldState};
use super::SolverError;

/// Velocity condition on one side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityBc {
    Periodic,
    /// Prescribed wall or inflow velocity.
    VelocityDirichlet { value: Vec3 },
    /// No normal flow, no tangential traction imposed.
    FreeSlip,
    /// Values extrapolated from the interior.
    Outflow,
}

/// Ferment condition on one side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FermentBc {
    /// Zero normal gradient of `H` (extrapolation on outflow sides).
    FluxFree,
    /// Wall ferment decays as `∂H/∂τ = -γ̂H`; `gamma_hat` defaults to the material value.
    Loss {
        #[serde(default)]
        gamma_hat: Option<f64>,
    },
    /// Fixed wall ferment.
    Dirichlet { value: SymTen2 },
}

/// Values of `ρ`, `Y`, `B`, `ε` imposed on an inflow side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inflow {
    pub rho: f64,
    #[serde(default)]
    pub y: SymTen2,
    #[serde(default)]
    pub b: Ten2,
    #[serde(default)]
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    pub velocity: VelocityBc,
    #[serde(default = "flux_free")]
    pub ferment: FermentBc,
    #[serde(default)]
    pub inflow: Option<Inflow>,
}

fn flux_free() -> FermentBc {
    FermentBc::FluxFree
}

impl SideSpec {
    pub const PERIODIC: SideSpec = SideSpec {
        velocity: VelocityBc::Periodic,
        ferment: FermentBc::FluxFree,
        inflow: None,
    };

    pub fn new(velocity: VelocityBc, ferment: FermentBc) -> Self {
        SideSpec {
            velocity,
            ferment,
            inflow: None,
        }
    }

    pub fn with_inflow(mut self, inflow: Inflow) -> Self {
        self.inflow = Some(inflow);
        self
    }
}

/// Side order used throughout: `x_low, x_high, y_low, y_high`
/// (lower and upper ends along `ζ₁`, then along `ζ₂`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub x_low: SideSpec,
    pub x_high: SideSpec,
    pub y_low: SideSpec,
    pub y_high: SideSpec,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec::periodic()
    }
}

impl BoundarySpec {
    pub fn periodic() -> Self {
        BoundarySpec {
            x_low: SideSpec::PERIODIC,
            x_high: SideSpec::PERIODIC,
            y_low: SideSpec::PERIODIC,
            y_high: SideSpec::PERIODIC,
        }
    }

    /// Periodic along `ζ₁`, the given sides across the channel.
    pub fn channel(y_low: SideSpec, y_high: SideSpec) -> Self {
        BoundarySpec {
            y_low,
            y_high,
            ..BoundarySpec::periodic()
        }
    }

    pub fn side(&self, s: usize) -> &SideSpec {
        match s {
            0 => &self.x_low,
            1 => &self.x_high,
            2 => &self.y_low,
            _ => &self.y_high,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), SolverError> {
        for axis in 0..2 {
            if !grid.is_active(axis) {
                continue;
            }
            let lo = self.side(2 * axis).velocity == VelocityBc::Periodic;
            let hi = self.side(2 * axis + 1).velocity == VelocityBc::Periodic;
            if lo != hi {
                return Err(SolverError::InvalidBoundary(format!(
                    "periodic sides must come in pairs (direction {})",
                    axis + 1
                )));
            }
            for s in [2 * axis, 2 * axis + 1] {
                let side = self.side(s);
                if let FermentBc::Loss {
                    gamma_hat: Some(g),
                } = side.ferment
                {
                    if !(g >= 0.0) {
                        return Err(SolverError::InvalidBoundary(format!(
                            "ferment loss rate on side {} must be non-negative",
                            SIDE_NAMES[s]
                        )));
                    }
                }
                if let Some(inflow) = side.inflow {
                    if !(inflow.rho > 0.0) {
                        return Err(SolverError::InvalidBoundary(format!(
                            "inflow density on side {} must be positive",
                            SIDE_NAMES[s]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether side `s` is a real (non-periodic) boundary of an active direction.
    pub fn is_wall(&self, grid: &Grid, s: usize) -> bool {
        grid.is_active(s / 2) && self.side(s).velocity != VelocityBc::Periodic
    }

    /// `None` when side `s` carries no wall ferment; otherwise the fixed value
    /// for a prescribed ferment, or `Some(None)` when it starts from the field.
    pub fn wall_ferment_init(&self, grid: &Grid, s: usize) -> Option<Option<SymTen2>> {
        if !self.is_wall(grid, s) {
            return None;
        }
        match self.side(s).ferment {
            FermentBc::FluxFree => None,
            FermentBc::Loss { .. } => Some(None),
            FermentBc::Dirichlet { value } => Some(Some(value)),
        }
    }

    /// Decay rate of the wall ferment on side `s`.
    pub fn wall_loss_rate(&self, s: usize, material_gamma_hat: f64) -> f64 {
        match self.side(s).ferment {
            FermentBc::Loss { gamma_hat } => gamma_hat.unwrap_or(material_gamma_hat),
            _ => 0.0,
        }
    }
}

pub const SIDE_NAMES: [&str; 4] = ["x_low", "x_high", "y_low", "y_high"];

// Quadratic through the wall value and the two nearest cell centres,
// evaluated at the first and second ghost centres.
const DIRICHLET: [[f64; 3]; 2] = [[8.0 / 3.0, -2.0, 1.0 / 3.0], [8.0, -9.0, 2.0]];
// Quadratic through the three nearest cell centres.
const EXTRAPOLATE: [[f64; 3]; 2] = [[3.0, -3.0, 1.0], [6.0, -8.0, 3.0]];

fn reflect_vec(v: Vec3, axis: usize) -> Vec3 {
    let mut r = v;
    r.0[axis] = -r.0[axis];
    r
}

fn reflect_sym(s: SymTen2, axis: usize) -> SymTen2 {
    let mut r = s;
    for i in 0..3 {
        if i != axis {
            let v = r.get(i, axis);
            r.set(i, axis, -v);
        }
    }
    r
}

fn reflect_ten(t: Ten2, axis: usize) -> Ten2 {
    let mut r = t;
    for i in 0..3 {
        for j in 0..3 {
            if (i == axis) != (j == axis) {
                r.0[i][j] = -r.0[i][j];
            }
        }
    }
    r
}

/// Ghost cell `k` (1 or 2) beyond a wall whose nearest interior cells are
/// `near[0..3]`, with wall ferment `wall_h` when the side carries one.
fn ghost_cell(
    side: &SideSpec,
    axis: usize,
    k: usize,
    near: [&Cell; 3],
    wall_h: Option<SymTen2>,
) -> Cell {
    let mirror = near[k - 1];
    let d = DIRICHLET[k - 1];
    let e = EXTRAPOLATE[k - 1];
    let quad = |w: f64, a: f64, b: f64| d[0] * w + d[1] * a + d[2] * b;
    let extrap = |c: [&Cell; 3]| Cell::combine(&[(e[0], c[0]), (e[1], c[1]), (e[2], c[2])]);
    let ex = extrap(near);

    let mut g = match side.velocity {
        VelocityBc::Outflow => ex,
        VelocityBc::FreeSlip => Cell {
            rho: mirror.rho,
            v: reflect_vec(mirror.v, axis),
            y: reflect_sym(mirror.y, axis),
            b: reflect_ten(mirror.b, axis),
            h: mirror.h,
            eps: mirror.eps,
        },
        _ => Cell {
            v: Vec3::ZERO,
            ..*mirror
        },
    };
    if let VelocityBc::VelocityDirichlet { value } = side.velocity {
        g.v = value.scale(d[0]) + near[0].v.scale(d[1]) + near[1].v.scale(d[2]);
    }
    if let Some(inflow) = side.inflow {
        g.rho = quad(inflow.rho, near[0].rho, near[1].rho);
        g.y = inflow.y.scale(d[0]) + near[0].y.scale(d[1]) + near[1].y.scale(d[2]);
        g.b = inflow.b.scale(d[0]) + near[0].b.scale(d[1]) + near[1].b.scale(d[2]);
        g.eps = quad(inflow.eps, near[0].eps, near[1].eps);
    }
    g.h = match wall_h {
        Some(w) => w.scale(d[0]) + near[0].h.scale(d[1]) + near[1].h.scale(d[2]),
        None if side.velocity == VelocityBc::Outflow => ex.h,
        None => mirror.h,
    };
    g
}

/// Interior cells plus two ghost layers realising the boundary conditions.
pub(crate) fn fill_ghosts(grid: &Grid, boundary: &BoundarySpec, state: &FieldState) -> Vec<Cell> {
    let [w, hgt] = grid.ext_dims();
    let mut ext = vec![Cell::ZERO; w * hgt];
    let (n1, n2) = (grid.n[0] as isize, grid.n[1] as isize);
    for j in 0..n2 {
        for i in 0..n1 {
            ext[grid.ext(i, j)] = state.cells[grid.index(i as usize, j as usize)];
        }
    }
    // ζ₁ ghosts on interior rows, then ζ₂ ghosts on full (extended) rows so
    // that corners are filled.
    for axis in 0..2 {
        let n = grid.n[axis] as isize;
        let span: Vec<isize> = if axis == 0 {
            (0..n2).collect()
        } else {
            (-2..n1 + 2).collect()
        };
        let at = |a: isize, t: isize| {
            if axis == 0 {
                grid.ext(a, t)
            } else {
                grid.ext(t, a)
            }
        };
        for &t in &span {
            for k in 1..=2isize {
                for high in [false, true] {
                    let s = 2 * axis + high as usize;
                    let target = if high { n - 1 + k } else { -k };
                    let value = if !boundary.is_wall(grid, s) {
                        ext[at(target.rem_euclid(n), t)]
                    } else {
                        let inward = |m: isize| if high { n - 1 - m } else { m };
                        let near = [
                            &ext[at(inward(0), t)],
                            &ext[at(inward(1), t)],
                            &ext[at(inward(2), t)],
                        ];
                        let wall_h = if state.walls[s].is_empty() {
                            None
                        } else {
                            let len = state.walls[s].len() as isize;
                            let other_periodic = !boundary.is_wall(grid, 2 * (1 - axis));
                            let m = if other_periodic {
                                t.rem_euclid(len)
                            } else {
                                t.clamp(0, len - 1)
                            };
                            Some(state.walls[s][m as usize])
                        };
                        ghost_cell(boundary.side(s), axis, k as usize, near, wall_h)
                    };
                    ext[at(target, t)] = value;
                }
            }
        }
    }
    ext
}
