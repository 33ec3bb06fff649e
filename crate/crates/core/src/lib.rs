//! Kinetic continua: continua whose elements carry, besides a velocity, an
//! affine rate `B` and a ferment tensor `H`.
//!
//! - [`tensor`]: small 3×3 and third-order tensor algebra.
//! - [`constitutive`]: the closure for stress, tensor torque, stirring and hyperstress.
//! - [`particles`]: the discrete mass-point system the balance laws generalise.
//! - [`solver`]: structured-grid integrator for the local balance laws.
//! - [`analytic`]: stationary shear algebra and elementary channel flows.
//! - [`temperance`]: velocity distributions, order tensor and canonical temperance.
//!
//! Data-parallel loops go through [`exec::Exec`]; the `parallel` feature
//! (on by default) enables the rayon backend.

// `!(x > 0.0)` is used deliberately so that NaN is rejected; index loops mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod constitutive;
pub mod exec;
pub mod particles;
pub mod solver;
pub mod temperance;
pub mod tensor;

pub use constitutive::{LocalKineticState, MaterialParams};
pub use exec::Exec;
pub use tensor::{SymTen2, Ten2, Ten3, Vec3};
