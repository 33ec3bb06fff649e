//! Small fixed-size tensor algebra in three dimensions.
//!
//! [`Vec3`], [`Ten2`] (general 3×3), [`SymTen2`] (symmetric, six stored
//! components) and [`Ten3`] (third order, optionally minor-left symmetric).
//! Second-order tensors are indexed `(i, j)` row-major; third-order tensors
//! `(i, j, k)` where, for gradient fields, the last index is the
//! differentiation direction.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("tensor is not skew: symmetric part has norm {sym_norm:e}")]
    NotSkew { sym_norm: f64 },
}

/// PSD clamp tolerance `1e-10 (1 + |s|)`.
pub fn psd_tolerance(norm: f64) -> f64 {
    1e-10 * (1.0 + norm)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Coordinate unit vector `c_{axis+1}`.
    pub fn axis(axis: usize) -> Self {
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Dyadic product `self ⊗ o`.
    pub fn outer(&self, o: &Vec3) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i] * o.0[j])
    }

    /// `self ⊗ self` as a symmetric tensor.
    pub fn outer_self(&self) -> SymTen2 {
        let v = &self.0;
        SymTen2([
            v[0] * v[0],
            v[1] * v[1],
            v[2] * v[2],
            v[0] * v[1],
            v[0] * v[2],
            v[1] * v[2],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        for i in 0..3 {
            self.0[i] += o.0[i];
        }
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        for i in 0..3 {
            self.0[i] -= o.0[i];
        }
    }
}

/// General second-order tensor, components `(i, j)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ten2(pub [[f64; 3]; 3]);

impl Ten2 {
    pub const ZERO: Ten2 = Ten2([[0.0; 3]; 3]);
    pub const IDENTITY: Ten2 = Ten2([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = f(i, j);
            }
        }
        Ten2(m)
    }

    /// Row-major flat array of the nine components.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_row_major(c: [f64; 9]) -> Self {
        Ten2::from_fn(|i, j| c[3 * i + j])
    }

    pub fn transpose(&self) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Option<Ten2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        let cof = |a: usize, b: usize, c: usize, e: usize| m[a][b] * m[c][e] - m[a][e] * m[c][b];
        let adj = Ten2([
            [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
            [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
            [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
        ]);
        Some(adj.scale(1.0 / d))
    }

    pub fn scale(&self, s: f64) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i][j] * s)
    }

    /// Matrix product `self · o`.
    pub fn dot(&self, o: &Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    /// Full contraction `self · o = Σ self_ij o_ij`.
    pub fn ddot(&self, o: &Ten2) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * o.0[i][j];
            }
        }
        s
    }

    pub fn sym(&self) -> SymTen2 {
        let m = &self.0;
        SymTen2([
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1]),
        ])
    }

    pub fn skw(&self) -> Ten2 {
        Ten2::from_fn(|i, j| 0.5 * (self.0[i][j] - self.0[j][i]))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Ten2 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Ten2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Ten2 {
    type Output = Ten2;
    fn add(self, o: Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl Sub for Ten2 {
    type Output = Ten2;
    fn sub(self, o: Ten2) -> Ten2 {
        Ten2::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl Neg for Ten2 {
    type Output = Ten2;
    fn neg(self) -> Ten2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Ten2 {
    type Output = Ten2;
    fn mul(self, s: f64) -> Ten2 {
        self.scale(s)
    }
}

impl Mul for Ten2 {
    type Output = Ten2;
    fn mul(self, o: Ten2) -> Ten2 {
        self.dot(&o)
    }
}

impl AddAssign for Ten2 {
    fn add_assign(&mut self, o: Ten2) {
        *self = *self + o;
    }
}

impl SubAssign for Ten2 {
    fn sub_assign(&mut self, o: Ten2) {
        *self = *self - o;
    }
}

impl fmt::Display for Ten2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            writeln!(f, "[{:>14.6e} {:>14.6e} {:>14.6e}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// Symmetric second-order tensor stored as `(11, 22, 33, 12, 13, 23)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTen2(pub [f64; 6]);

const SYM_INDEX: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];

impl SymTen2 {
    pub const ZERO: SymTen2 = SymTen2([0.0; 6]);
    pub const IDENTITY: SymTen2 = SymTen2([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTen2([a, b, c, 0.0, 0.0, 0.0])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[SYM_INDEX[i][j]]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.0[SYM_INDEX[i][j]] = value;
    }

    pub fn to_ten2(&self) -> Ten2 {
        Ten2::from_fn(|i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn scale(&self, s: f64) -> SymTen2 {
        let mut c = self.0;
        c.iter_mut().for_each(|x| *x *= s);
        SymTen2(c)
    }

    /// Frobenius norm of the full 3×3 tensor.
    pub fn norm(&self) -> f64 {
        let c = &self.0;
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + 2.0 * (c[3] * c[3] + c[4] * c[4] + c[5] * c[5]))
            .sqrt()
    }

    pub fn ddot(&self, o: &SymTen2) -> f64 {
        let (a, b) = (&self.0, &o.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.to_ten2().apply(v)
    }

    pub fn det(&self) -> f64 {
        self.to_ten2().det()
    }

    /// Deviatoric part `s - (tr s / 3) I`.
    pub fn deviator(&self) -> SymTen2 {
        let m = self.trace() / 3.0;
        let mut c = self.0;
        c[0] -= m;
        c[1] -= m;
        c[2] -= m;
        SymTen2(c)
    }

    /// `A · self · Aᵀ`.
    pub fn congruence(&self, a: &Ten2) -> SymTen2 {
        a.dot(&self.to_ten2()).dot(&a.transpose()).sym()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for SymTen2 {
    type Output = SymTen2;
    fn add(self, o: SymTen2) -> SymTen2 {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0) {
            *x += y;
        }
        SymTen2(c)
    }
}

impl Sub for SymTen2 {
    type Output = SymTen2;
    fn sub(self, o: SymTen2) -> SymTen2 {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(o.0) {
            *x -= y;
        }
        SymTen2(c)
    }
}

impl Neg for SymTen2 {
    type Output = SymTen2;
    fn neg(self) -> SymTen2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for SymTen2 {
    type Output = SymTen2;
    fn mul(self, s: f64) -> SymTen2 {
        self.scale(s)
    }
}

impl AddAssign for SymTen2 {
    fn add_assign(&mut self, o: SymTen2) {
        *self = *self + o;
    }
}

impl SubAssign for SymTen2 {
    fn sub_assign(&mut self, o: SymTen2) {
        *self = *self - o;
    }
}

impl From<SymTen2> for Ten2 {
    fn from(s: SymTen2) -> Ten2 {
        s.to_ten2()
    }
}

/// Third-order tensor with components `(i, j, k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ten3 {
    data: [f64; 27],
    minor_left_symmetric: bool,
}

impl Default for Ten3 {
    fn default() -> Self {
        Ten3::ZERO
    }
}

impl Ten3 {
    pub const ZERO: Ten3 = Ten3 {
        data: [0.0; 27],
        minor_left_symmetric: false,
    };

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = [0.0; 27];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    data[9 * i + 3 * j + k] = f(i, j, k);
                }
            }
        }
        Ten3 {
            data,
            minor_left_symmetric: false,
        }
    }

    /// Builds a tensor with `(i,j,k) = s_k(i,j)` from three symmetric slices;
    /// the result carries the minor-left symmetry flag.
    pub fn from_sym_slices(slices: [SymTen2; 3]) -> Self {
        let mut t = Ten3::from_fn(|i, j, k| slices[k].get(i, j));
        t.minor_left_symmetric = true;
        t
    }

    /// Builds a tensor with `(i,j,k) = s_k(i,j)` from three general slices.
    pub fn from_slices(slices: [Ten2; 3]) -> Self {
        Ten3::from_fn(|i, j, k| slices[k].0[i][j])
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[9 * i + 3 * j + k]
    }

    /// Sets a component; on a minor-left symmetric tensor `(j,i,k)` is set too.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.data[9 * i + 3 * j + k] = value;
        if self.minor_left_symmetric {
            self.data[9 * j + 3 * i + k] = value;
        }
    }

    pub fn is_minor_left_symmetric(&self) -> bool {
        self.minor_left_symmetric
    }

    /// The `(·,·,k)` slice.
    pub fn slice(&self, k: usize) -> Ten2 {
        Ten2::from_fn(|i, j| self.get(i, j, k))
    }

    pub fn scale(&self, s: f64) -> Ten3 {
        let mut t = *self;
        t.data.iter_mut().for_each(|x| *x *= s);
        t
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn components(&self) -> &[f64; 27] {
        &self.data
    }
}

impl Add for Ten3 {
    type Output = Ten3;
    fn add(self, o: Ten3) -> Ten3 {
        let mut t = self;
        for (x, y) in t.data.iter_mut().zip(o.data) {
            *x += y;
        }
        t.minor_left_symmetric = self.minor_left_symmetric && o.minor_left_symmetric;
        t
    }
}

/// Symmetric part, skew part, trace and deviator of a tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub sym: SymTen2,
    pub skw: Ten2,
    pub trace: f64,
    pub dev: Ten2,
}

pub fn decompose(t: &Ten2) -> Decomposition {
    let trace = t.trace();
    let third = trace / 3.0;
    let dev = Ten2::from_fn(|i, j| t.0[i][j] - if i == j { third } else { 0.0 });
    Decomposition {
        sym: t.sym(),
        skw: t.skw(),
        trace,
        dev,
    }
}

/// One eigenpair of a symmetric tensor, `χ² h ⊗ h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec3,
}

/// Eigen-decomposition of a symmetric tensor, eigenvalues in descending order.
///
/// Cyclic Jacobi rotations. Within a cluster of equal eigenvalues the basis is
/// rebuilt by Gram–Schmidt from the coordinate axes, and every eigenvector is
/// oriented so that its largest-magnitude component is positive.
pub fn eig_sym(s: &SymTen2) -> [EigenPair; 3] {
    let mut a = s.to_ten2().0;
    let mut v = Ten2::IDENTITY.0;
    let scale = s.max_abs();
    if scale > 0.0 && scale.is_finite() {
        for _sweep in 0..64 {
            let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
            if off <= (f64::EPSILON * scale * 1e-3).powi(2) {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q].abs() <= 1e-3 * f64::EPSILON * scale {
                    a[p][q] = 0.0;
                    a[q][p] = 0.0;
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A' = Jᵀ A J with J the (p,q) rotation
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - sn * vq;
                    row[q] = sn * vp + c * vq;
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair> = (0..3)
        .map(|k| EigenPair {
            value: a[k][k],
            vector: Vec3([v[0][k], v[1][k], v[2][k]]),
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));

    // rebuild degenerate eigenspaces deterministically
    let tie = 1e-12 * s.norm().max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && (pairs[end - 1].value - pairs[end].value).abs() <= tie {
            end += 1;
        }
        if end - start > 1 {
            let mut proj = Ten2::ZERO;
            for p in &pairs[start..end] {
                proj += p.vector.outer(&p.vector);
            }
            let chosen = gram_schmidt_axes(&proj, end - start);
            for (slot, vec) in (start..end).zip(chosen) {
                pairs[slot].vector = vec;
            }
        }
        start = end;
    }

    for p in pairs.iter_mut() {
        p.vector = orient(p.vector);
    }
    [pairs[0], pairs[1], pairs[2]]
}

fn gram_schmidt_axes(proj: &Ten2, count: usize) -> Vec<Vec3> {
    let mut chosen: Vec<Vec3> = Vec::with_capacity(count);
    let mut used = [false; 3];
    for _ in 0..count {
        let mut best: Option<(usize, Vec3, f64)> = None;
        for (k, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut r = proj.apply(&Vec3::axis(k));
            for c in &chosen {
                r -= c.scale(c.dot(&r));
            }
            let n = r.norm();
            if best.is_none_or(|(_, _, bn)| n > bn * (1.0 + 1e-12)) {
                best = Some((k, r, n));
            }
        }
        let (k, r, n) = best.expect("eigenspace dimension exceeds 3");
        used[k] = true;
        chosen.push(r.scale(1.0 / n));
    }
    chosen
}

fn orient(v: Vec3) -> Vec3 {
    let mut idx = 0;
    for k in 1..3 {
        if v.0[k].abs() > v.0[idx].abs() * (1.0 + 1e-12) {
            idx = k;
        }
    }
    if v.0[idx] < 0.0 {
        -v
    } else {
        v
    }
}

/// Reassembles `Σ value · h ⊗ h`.
pub fn from_eigen(pairs: &[EigenPair; 3]) -> SymTen2 {
    let mut s = SymTen2::ZERO;
    for p in pairs {
        s += p.vector.outer_self().scale(p.value);
    }
    s
}

pub fn min_eigenvalue(s: &SymTen2) -> f64 {
    eig_sym(s)[2].value
}

/// Moore–Penrose inverse of a symmetric PSD tensor; eigenvalues below
/// `1e-12 tr(Y)` count as zero.
pub fn pseudo_inverse(y: &SymTen2) -> SymTen2 {
    if *y == SymTen2::ZERO {
        return SymTen2::ZERO;
    }
    let cutoff = 1e-12 * y.trace().abs();
    let mut inv = SymTen2::ZERO;
    for p in eig_sym(y) {
        if p.value > cutoff && p.value > 0.0 {
            inv += p.vector.outer_self().scale(1.0 / p.value);
        }
    }
    inv
}

/// Square root of a positive semidefinite tensor.
///
/// Eigenvalues in `(-tol, 0)` with `tol = psd_tolerance(|s|)` are clamped to 0.
pub fn sqrt_psd(s: &SymTen2) -> Result<SymTen2, TensorError> {
    let pairs = eig_sym(s);
    let tol = psd_tolerance(s.norm());
    if pairs[2].value < -tol {
        return Err(TensorError::NotPsd {
            min_eigenvalue: pairs[2].value,
            tolerance: tol,
        });
    }
    let mut r = SymTen2::ZERO;
    for p in &pairs {
        r += p.vector.outer_self().scale(p.value.max(0.0).sqrt());
    }
    Ok(r)
}

/// Nearest PSD tensor (negative eigenvalues set to zero) and the Frobenius
/// norm of the correction. Tensors already PSD are returned untouched.
pub fn project_psd(s: &SymTen2) -> (SymTen2, f64) {
    if is_positive_definite(s) || principal_minors_nonnegative(s) {
        return (*s, 0.0);
    }
    let pairs = eig_sym(s);
    if pairs[2].value >= 0.0 {
        return (*s, 0.0);
    }
    let mut correction = SymTen2::ZERO;
    for p in &pairs {
        if p.value < 0.0 {
            correction += p.vector.outer_self().scale(-p.value);
        }
    }
    (*s + correction, correction.norm())
}

/// Exact PSD test when every principal minor evaluates non-negative.
fn principal_minors_nonnegative(s: &SymTen2) -> bool {
    let c = &s.0;
    c[0] >= 0.0
        && c[1] >= 0.0
        && c[2] >= 0.0
        && c[0] * c[1] - c[3] * c[3] >= 0.0
        && c[0] * c[2] - c[4] * c[4] >= 0.0
        && c[1] * c[2] - c[5] * c[5] >= 0.0
        && s.det() >= 0.0
}

/// Cheap positive-definiteness test through leading principal minors.
fn is_positive_definite(s: &SymTen2) -> bool {
    let c = &s.0;
    let m1 = c[0];
    let m2 = c[0] * c[1] - c[3] * c[3];
    let m3 = s.det();
    let scale = s.max_abs();
    m1 > 1e-8 * scale && m2 > 1e-8 * scale * scale && m3 > 1e-8 * scale * scale * scale
}

/// `(m n)_ij = m_ijl n_l`.
pub fn ten3_apply_normal(m: &Ten3, n: &Vec3) -> Ten2 {
    Ten2::from_fn(|i, j| (0..3).map(|l| m.get(i, j, l) * n.0[l]).sum())
}

/// `(b mᵗ)_ij = b_irk m_rjk`.
pub fn ten3_grad_contract(b: &Ten3, m: &Ten3) -> Ten2 {
    Ten2::from_fn(|i, j| {
        let mut s = 0.0;
        for r in 0..3 {
            for k in 0..3 {
                s += b.get(i, r, k) * m.get(r, j, k);
            }
        }
        s
    })
}

/// Skew tensor `W` with `W u = w × u`.
pub fn skew_from_axial(w: &Vec3) -> Ten2 {
    let [a, b, c] = w.0;
    Ten2([[0.0, -c, b], [c, 0.0, -a], [-b, a, 0.0]])
}

/// Axial vector of a skew tensor; rejects inputs whose symmetric part exceeds 1e-12.
pub fn axial_from_skew(w: &Ten2) -> Result<Vec3, TensorError> {
    let sym_norm = w.sym().norm();
    if sym_norm > 1e-12 {
        return Err(TensorError::NotSkew { sym_norm });
    }
    Ok(Vec3([w.0[2][1], w.0[0][2], w.0[1][0]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ten2(rng: &mut impl Rng) -> Ten2 {
        Ten2::from_fn(|_, _| rng.random_range(-1.0..1.0))
    }

    fn random_sym(rng: &mut impl Rng) -> SymTen2 {
        random_ten2(rng).sym()
    }

    fn rotation(axis: Vec3, angle: f64) -> Ten2 {
        let k = axis.scale(1.0 / axis.norm());
        let kk = skew_from_axial(&k);
        Ten2::IDENTITY + kk.scale(angle.sin()) + kk.dot(&kk).scale(1.0 - angle.cos())
    }

    #[test]
    fn decompose_identity_and_skew() {
        let d = decompose(&Ten2::IDENTITY);
        assert_eq!(d.sym, SymTen2::IDENTITY);
        assert_eq!(d.skw, Ten2::ZERO);
        assert_eq!(d.trace, 3.0);
        assert_eq!(d.dev, Ten2::ZERO);

        let w = skew_from_axial(&Vec3::new(0.3, -1.2, 2.0));
        let d = decompose(&w);
        assert_eq!(d.sym, SymTen2::ZERO);
        assert_eq!(d.skw, w);
        assert_eq!(d.trace, 0.0);
        assert_eq!(d.dev, w);
    }

    #[test]
    fn decompose_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let t = random_ten2(&mut rng);
            let d = decompose(&t);
            let back = d.sym.to_ten2() + d.skw;
            assert!((back - t).max_abs() < 1e-15);
            assert!(d.dev.trace().abs() < 1e-15);
        }
    }

    #[test]
    fn eig_diagonal_case() {
        let pairs = eig_sym(&SymTen2::diag(4.0, 1.0, 0.0));
        assert_eq!(pairs.map(|p| p.value), [4.0, 1.0, 0.0]);
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!(p.vector, Vec3::axis(k));
        }
    }

    #[test]
    fn eig_rank_one() {
        let v = Vec3::new(3.0, 4.0, 0.0);
        let pairs = eig_sym(&v.outer_self());
        assert!((pairs[0].value - 25.0).abs() < 1e-13);
        assert!(pairs[1].value.abs() < 1e-13 && pairs[2].value.abs() < 1e-13);
        assert!((pairs[0].vector - v.scale(0.2)).norm() < 1e-14);
    }

    #[test]
    fn eig_conjugated_diagonal() {
        let r = rotation(Vec3::new(1.0, 2.0, -0.5), 0.7);
        let s = SymTen2::diag(2.0, 1.0, 0.0).congruence(&r);
        let pairs = eig_sym(&s);
        for (k, expected) in [2.0, 1.0, 0.0].iter().enumerate() {
            assert!((pairs[k].value - expected).abs() < 1e-13);
            let axis = r.apply(&Vec3::axis(k));
            assert!((pairs[k].vector.dot(&axis).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_degenerate_uses_coordinate_axes() {
        let pairs = eig_sym(&SymTen2::IDENTITY.scale(2.0));
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!(p.vector, Vec3::axis(k));
        }
        let pairs = eig_sym(&SymTen2::ZERO);
        assert_eq!(pairs.map(|p| p.value), [0.0; 3]);
    }

    #[test]
    fn eig_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let s = random_sym(&mut rng);
            let pairs = eig_sym(&s);
            let back = from_eigen(&pairs);
            assert!((back - s).norm() <= 1e-12 * s.norm().max(1e-300));
            for a in 0..3 {
                for b in 0..3 {
                    let g = pairs[a].vector.dot(&pairs[b].vector);
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-12);
                }
            }
            assert!(pairs[0].value >= pairs[1].value && pairs[1].value >= pairs[2].value);
        }
    }

    #[test]
    fn sqrt_psd_cases() {
        assert_eq!(sqrt_psd(&SymTen2::IDENTITY).unwrap(), SymTen2::IDENTITY);
        let r = sqrt_psd(&SymTen2::diag(4.0, 9.0, 16.0)).unwrap();
        assert!((r - SymTen2::diag(2.0, 3.0, 4.0)).norm() < 1e-14);
        assert!(matches!(
            sqrt_psd(&SymTen2::diag(1.0, -0.1, 0.0)),
            Err(TensorError::NotPsd { .. })
        ));
        // round-off negatives are clamped
        assert!(sqrt_psd(&SymTen2::diag(1.0, -1e-14, 0.0)).is_ok());
    }

    #[test]
    fn sqrt_psd_squaring_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let a = random_ten2(&mut rng);
            let m = a.dot(&a.transpose()).sym();
            let r = sqrt_psd(&m).unwrap();
            let sq = r.to_ten2().dot(&r.to_ten2()).sym();
            assert!((sq - m).norm() <= 1e-10 * m.norm());
            assert!(min_eigenvalue(&r) >= -1e-12);
            // sqrt(M²) = M; small eigenvalues of M² lose half their digits
            let m2 = m.to_ten2().dot(&m.to_ten2()).sym();
            assert!((sqrt_psd(&m2).unwrap() - m).norm() <= 1e-7 * m.norm());
        }
    }

    #[test]
    fn project_psd_only_touches_negative_part() {
        let (p, mag) = project_psd(&SymTen2::diag(1.0, 2.0, 3.0));
        assert_eq!(mag, 0.0);
        assert_eq!(p, SymTen2::diag(1.0, 2.0, 3.0));
        let (p, mag) = project_psd(&SymTen2::diag(1.0, -0.5, 0.0));
        assert!((mag - 0.5).abs() < 1e-15);
        assert!((p - SymTen2::diag(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ten3_apply_normal_cases() {
        let n = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(ten3_apply_normal(&Ten3::ZERO, &n), Ten2::ZERO);
        let m = Ten3::from_fn(|i, j, k| (i * 9 + j * 3 + k) as f64);
        assert_eq!(ten3_apply_normal(&m, &Vec3::axis(2)), m.slice(2));
        let mut single = Ten3::ZERO;
        single.set(1, 0, 2, 5.0);
        let r = ten3_apply_normal(&single, &Vec3::axis(2));
        let mut expected = Ten2::ZERO;
        expected.0[1][0] = 5.0;
        assert_eq!(r, expected);
    }

    #[test]
    fn ten3_grad_contract_cases() {
        let m = Ten3::from_fn(|i, j, k| (i + 2 * j + 3 * k) as f64);
        assert_eq!(ten3_grad_contract(&Ten3::ZERO, &m), Ten2::ZERO);
        assert_eq!(ten3_grad_contract(&m, &Ten3::ZERO), Ten2::ZERO);
        let mut b = Ten3::ZERO;
        b.set(0, 1, 2, 2.0);
        let mut mm = Ten3::ZERO;
        mm.set(1, 0, 2, 3.0);
        let r = ten3_grad_contract(&b, &mm);
        let mut expected = Ten2::ZERO;
        expected.0[0][0] = 6.0;
        assert_eq!(r, expected);
    }

    #[test]
    fn ten3_contractions_match_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let b = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
            let m = Ten3::from_fn(|_, _, _| rng.random_range(-1.0..1.0));
            let n = Vec3::new(rng.random(), rng.random(), rng.random());
            let c = b.components();
            let d = m.components();
            let mut naive = [[0.0; 3]; 3];
            let mut naive_n = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        naive_n[i][j] += d[i * 9 + j * 3 + k] * n.0[k];
                        for r in 0..3 {
                            naive[i][j] += c[i * 9 + r * 3 + k] * d[r * 9 + j * 3 + k];
                        }
                    }
                }
            }
            assert!((ten3_grad_contract(&b, &m) - Ten2(naive)).max_abs() < 1e-14);
            assert!((ten3_apply_normal(&m, &n) - Ten2(naive_n)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn minor_left_symmetric_set() {
        let mut t = Ten3::from_sym_slices([SymTen2::ZERO; 3]);
        t.set(0, 2, 1, 4.0);
        assert_eq!(t.get(2, 0, 1), 4.0);
        assert!(t.is_minor_left_symmetric());
    }

    #[test]
    fn axial_round_trip_and_cross_product() {
        assert_eq!(skew_from_axial(&Vec3::ZERO), Ten2::ZERO);
        let w3 = skew_from_axial(&Vec3::axis(2));
        assert_eq!(w3, Ten2([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w = Vec3::new(rng.random(), rng.random(), rng.random());
            let u = Vec3::new(rng.random(), rng.random(), rng.random());
            let lhs = skew_from_axial(&w).apply(&u);
            assert!((lhs - w.cross(&u)).norm() < 1e-15);
            assert_eq!(axial_from_skew(&skew_from_axial(&w)).unwrap(), w);
        }
        assert!(matches!(
            axial_from_skew(&Ten2::IDENTITY),
            Err(TensorError::NotSkew { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn sym_plus_skw_is_input(c in proptest::array::uniform9(-1e3f64..1e3)) {
            let t = Ten2::from_row_major(c);
            let d = decompose(&t);
            let back = d.sym.to_ten2() + d.skw;
            proptest::prop_assert!((back - t).max_abs() <= 1e-12 * t.max_abs().max(1.0));
        }
    }
}
