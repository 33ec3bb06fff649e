use serde::{Deserialize, Serialize};

use super::SolverError;

/// Ghost layers on each side of an active direction.
pub const GHOSTS: usize = 2;

/// Cell-centred structured grid on `[0, n₁h₁] × [0, n₂h₂]`.
///
/// A direction with a single cell is inactive: fields do not vary along it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: [usize; 2],
    pub h: [f64; 2],
}

impl Grid {
    pub fn new(n: [usize; 2], h: [f64; 2]) -> Result<Self, SolverError> {
        let g = Grid { n, h };
        g.validate()?;
        Ok(g)
    }

    /// Grid of `n` cells over `[0, length]` along `axis`, inactive across.
    pub fn line(axis: usize, n: usize, length: f64) -> Result<Self, SolverError> {
        let mut cells = [1, 1];
        let mut h = [1.0, 1.0];
        cells[axis] = n;
        h[axis] = length / n as f64;
        Grid::new(cells, h)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for d in 0..2 {
            if self.n[d] == 0 || (self.n[d] > 1 && self.n[d] < 4) {
                return Err(SolverError::InvalidGrid(format!(
                    "direction {} has {} cells; active directions need at least 4",
                    d + 1,
                    self.n[d]
                )));
            }
            if !(self.h[d] > 0.0 && self.h[d].is_finite()) {
                return Err(SolverError::InvalidGrid(format!(
                    "spacing h{} = {} must be positive",
                    d + 1,
                    self.h[d]
                )));
            }
        }
        if self.dimension() == 0 {
            return Err(SolverError::InvalidGrid("no active direction".into()));
        }
        Ok(())
    }

    pub fn is_active(&self, d: usize) -> bool {
        self.n[d] > 1
    }

    pub fn dimension(&self) -> usize {
        (0..2).filter(|d| self.is_active(*d)).count()
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Channel width `δ = n₂h₂`.
    pub fn width(&self) -> f64 {
        self.n[1] as f64 * self.h[1]
    }

    pub fn length(&self, d: usize) -> f64 {
        self.n[d] as f64 * self.h[d]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1]
    }

    /// Linear index of interior cell `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n[0] * j
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.n[0], k / self.n[0])
    }

    pub fn centre(&self, i: usize, j: usize) -> [f64; 2] {
        [
            (i as f64 + 0.5) * self.h[0],
            (j as f64 + 0.5) * self.h[1],
        ]
    }

    pub(crate) fn ext_dims(&self) -> [usize; 2] {
        [self.n[0] + 2 * GHOSTS, self.n[1] + 2 * GHOSTS]
    }

    /// Index into the ghost-extended array; `i`, `j` may be negative.
    pub(crate) fn ext(&self, i: isize, j: isize) -> usize {
        let w = self.n[0] + 2 * GHOSTS;
        (i + GHOSTS as isize) as usize + w * (j + GHOSTS as isize) as usize
    }
}
