//! Linear integrals of motion, multivariable Hermite polynomials and
//! symplectic tomograms for multimode systems with time-dependent quadratic
//! Hamiltonians.
//!
//! All matrices are dense `nalgebra` matrices; complex scalars are
//! [`num_complex::Complex64`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod hamiltonian_dynamics;
pub mod hermite;
pub mod linalg;
pub mod model_library;
pub mod quadrature;
pub mod quantum_states;
pub mod tomography;
pub mod transitions;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex dense matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Complex dense vector.
pub type CVector = nalgebra::DVector<Complex64>;
/// Real dense matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
/// Real dense vector.
pub type RVector = nalgebra::DVector<f64>;

/// Time-dependent scalar coefficient.
pub type ScalarFn = std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wrap a closure as a [`ScalarFn`].
pub fn scalar_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarFn {
    std::sync::Arc::new(f)
}

/// Constant [`ScalarFn`].
pub fn constant_fn(v: f64) -> ScalarFn {
    std::sync::Arc::new(move |_| v)
}
