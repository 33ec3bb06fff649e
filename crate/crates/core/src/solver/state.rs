use crate::tensor::{SymTen2, Ten2, Vec3};

use super::boundary::BoundarySpec;
use super::grid::Grid;

/// Field values in one cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cell {
    pub rho: f64,
    pub v: Vec3,
    pub y: SymTen2,
    pub b: Ten2,
    pub h: SymTen2,
    pub eps: f64,
}

impl Cell {
    pub const ZERO: Cell = Cell {
        rho: 0.0,
        v: Vec3::ZERO,
        y: SymTen2::ZERO,
        b: Ten2::ZERO,
        h: SymTen2::ZERO,
        eps: 0.0,
    };

    pub fn scale(&self, s: f64) -> Cell {
        Cell {
            rho: self.rho * s,
            v: self.v.scale(s),
            y: self.y.scale(s),
            b: self.b.scale(s),
            h: self.h.scale(s),
            eps: self.eps * s,
        }
    }

    /// `self + a·d`.
    pub fn axpy(&self, a: f64, d: &Cell) -> Cell {
        Cell {
            rho: self.rho + a * d.rho,
            v: self.v + d.v.scale(a),
            y: self.y + d.y.scale(a),
            b: self.b + d.b.scale(a),
            h: self.h + d.h.scale(a),
            eps: self.eps + a * d.eps,
        }
    }

    /// `Σ wₖ cₖ`.
    pub fn combine(terms: &[(f64, &Cell)]) -> Cell {
        terms
            .iter()
            .fold(Cell::ZERO, |acc, (w, c)| acc.axpy(*w, c))
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite()
            && self.v.is_finite()
            && self.y.is_finite()
            && self.b.is_finite()
            && self.h.is_finite()
            && self.eps.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.rho
            .abs()
            .max(self.v.max_abs())
            .max(self.y.max_abs())
            .max(self.b.max_abs())
            .max(self.h.max_abs())
            .max(self.eps.abs())
    }

    /// Drops the components that leave the 1–2 plane, keeping `Y₃₃` and `H₃₃`.
    pub fn project_plane(&mut self) {
        self.v.0[2] = 0.0;
        for s in [&mut self.y, &mut self.h] {
            s.0[4] = 0.0;
            s.0[5] = 0.0;
        }
        for k in 0..3 {
            self.b.0[2][k] = 0.0;
            self.b.0[k][2] = 0.0;
        }
    }
}

/// Cell fields plus the ferment values carried on walls with a loss or
/// prescribed-ferment condition.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    /// Interior cells, `i + n₁ j`.
    pub cells: Vec<Cell>,
    /// Wall ferment per side (`x_low, x_high, y_low, y_high`), one entry per
    /// boundary face; empty for sides that do not carry one.
    pub walls: [Vec<SymTen2>; 4],
}

impl FieldState {
    /// Samples `f` at cell centres, and at wall faces for sides carrying a wall ferment.
    pub fn from_fn(grid: &Grid, boundary: &BoundarySpec, f: impl Fn([f64; 2]) -> Cell) -> Self {
        let cells = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                f(grid.centre(i, j))
            })
            .collect();
        let walls = std::array::from_fn(|side| {
            let Some(value) = boundary.wall_ferment_init(grid, side) else {
                return Vec::new();
            };
            let (axis, high) = (side / 2, side % 2 == 1);
            let other = 1 - axis;
            (0..grid.n[other])
                .map(|m| {
                    if let Some(v) = value {
                        return v;
                    }
                    let mut p = [0.0; 2];
                    p[axis] = if high { grid.length(axis) } else { 0.0 };
                    p[other] = (m as f64 + 0.5) * grid.h[other];
                    f(p).h
                })
                .collect()
        });
        FieldState { cells, walls }
    }

    pub fn uniform(grid: &Grid, boundary: &BoundarySpec, cell: Cell) -> Self {
        FieldState::from_fn(grid, boundary, |_| cell)
    }

    pub fn axpy(&self, a: f64, d: &FieldState) -> FieldState {
        FieldState {
            cells: self
                .cells
                .iter()
                .zip(&d.cells)
                .map(|(c, dc)| c.axpy(a, dc))
                .collect(),
            walls: std::array::from_fn(|s| {
                self.walls[s]
                    .iter()
                    .zip(&d.walls[s])
                    .map(|(w, dw)| *w + dw.scale(a))
                    .collect()
            }),
        }
    }

    pub fn total_mass(&self, grid: &Grid) -> f64 {
        self.cells.iter().map(|c| c.rho).sum::<f64>() * grid.cell_volume()
    }
}
