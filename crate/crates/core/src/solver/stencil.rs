//! Finite-difference operators on a ghost-extended cell array.

use std::ops::{Add, Mul, Sub};

use crate::tensor::{Ten2, Vec3};

use super::boundary::{fill_ghosts, BoundarySpec};
use super::grid::Grid;
use super::state::{Cell, FieldState};

/// Values that can be combined linearly by the difference formulas.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>> Linear for T {}

/// Ghost-filled view of a field state.
#[derive(Clone, Debug)]
pub struct Stencil<'g> {
    grid: &'g Grid,
    ext: Vec<Cell>,
}

impl<'g> Stencil<'g> {
    pub fn new(grid: &'g Grid, boundary: &BoundarySpec, state: &FieldState) -> Self {
        Stencil {
            grid,
            ext: fill_ghosts(grid, boundary, state),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    /// Cell `(i, j)`; indices down to `-2` and up to `n + 1` reach ghosts.
    pub fn at(&self, i: isize, j: isize) -> &Cell {
        &self.ext[self.grid.ext(i, j)]
    }

    fn neighbour(&self, i: isize, j: isize, d: usize, off: isize) -> &Cell {
        if d == 0 {
            self.at(i + off, j)
        } else {
            self.at(i, j + off)
        }
    }

    /// Central first derivative of `f` along grid direction `d`.
    pub fn central<T: Linear>(&self, i: isize, j: isize, d: usize, f: impl Fn(&Cell) -> T) -> T {
        (f(self.neighbour(i, j, d, 1)) - f(self.neighbour(i, j, d, -1))) * (0.5 / self.grid.h[d])
    }

    /// Compact second difference of `f`, summed over directions.
    pub fn laplacian<T: Linear>(&self, i: isize, j: isize, f: impl Fn(&Cell) -> T) -> T {
        let c = f(self.at(i, j));
        let mut out = c * 0.0;
        for d in 0..2 {
            let h2 = self.grid.h[d] * self.grid.h[d];
            let s = f(self.neighbour(i, j, d, 1)) + f(self.neighbour(i, j, d, -1)) - c * 2.0;
            out = out + s * (1.0 / h2);
        }
        out
    }

    /// Gradient of a scalar, `(∂₁f, ∂₂f, 0)`.
    pub fn gradient(&self, i: isize, j: isize, f: impl Fn(&Cell) -> f64) -> Vec3 {
        Vec3::new(self.central(i, j, 0, &f), self.central(i, j, 1, &f), 0.0)
    }

    /// `L_ab = ∂v_a/∂ζ_b` by central differences.
    pub fn velocity_gradient(&self, i: isize, j: isize) -> Ten2 {
        let mut l = Ten2::ZERO;
        for d in 0..2 {
            let col = self.central(i, j, d, |c| c.v);
            for a in 0..3 {
                l.0[a][d] = col.0[a];
            }
        }
        l
    }

    /// `(grad φ) ẋ` for every field of the cell at once, second-order upwind.
    pub fn advection(&self, i: isize, j: isize) -> Cell {
        let c = self.at(i, j);
        let mut out = Cell::ZERO;
        for d in 0..2 {
            if !self.grid.is_active(d) {
                continue;
            }
            let u = c.v.0[d];
            if u == 0.0 {
                continue;
            }
            let s = if u > 0.0 { -1 } else { 1 };
            let c1 = self.neighbour(i, j, d, s);
            let c2 = self.neighbour(i, j, d, 2 * s);
            let w = -(s as f64) * u / (2.0 * self.grid.h[d]);
            out = out.axpy(3.0 * w, c).axpy(-4.0 * w, c1).axpy(w, c2);
        }
        out
    }

    /// Velocity gradient on the face between `(i, j)` and its upper neighbour
    /// along `d`: compact normal derivative, averaged tangential derivatives.
    pub fn face_velocity_gradient(&self, i: isize, j: isize, d: usize) -> Ten2 {
        let lo = self.at(i, j);
        let hi = self.neighbour(i, j, d, 1);
        let (ih, jh) = if d == 0 { (i + 1, j) } else { (i, j + 1) };
        let mut l = Ten2::ZERO;
        for e in 0..2 {
            let col = if e == d {
                (hi.v - lo.v).scale(1.0 / self.grid.h[d])
            } else {
                (self.central(i, j, e, |c| c.v) + self.central(ih, jh, e, |c| c.v)).scale(0.5)
            };
            for a in 0..3 {
                l.0[a][e] = col.0[a];
            }
        }
        l
    }

    /// Average of `f` over the two cells sharing a face.
    pub fn face_average<T: Linear>(&self, i: isize, j: isize, d: usize, f: impl Fn(&Cell) -> T) -> T {
        (f(self.at(i, j)) + f(self.neighbour(i, j, d, 1))) * 0.5
    }

    /// Compact normal derivative of `f` across a face.
    pub fn face_derivative<T: Linear>(&self, i: isize, j: isize, d: usize, f: impl Fn(&Cell) -> T) -> T {
        (f(self.neighbour(i, j, d, 1)) - f(self.at(i, j))) * (1.0 / self.grid.h[d])
    }
}
