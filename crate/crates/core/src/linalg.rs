//! Small dense linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{CMatrix, Error, RMatrix, Result};

/// The 2N×2N form `[[0, -E], [E, 0]]` used for every symplectic check.
pub fn symplectic_form(n: usize) -> RMatrix {
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        s[(k, n + k)] = -1.0;
        s[(n + k, k)] = 1.0;
    }
    s
}

pub fn max_abs(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn max_abs_c(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn identity_c(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Ratio of the smallest to the largest singular value (0 for the zero matrix).
pub fn singular_ratio(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

pub fn singular_ratio_r(m: &RMatrix) -> f64 {
    singular_ratio(&to_complex(m))
}

/// Inverse of a complex matrix, `None` when the singular-value ratio is below `1e-13`.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    if singular_ratio(m) < 1e-13 {
        return None;
    }
    m.clone().try_inverse()
}

pub fn inverse_r(m: &RMatrix) -> Option<RMatrix> {
    if singular_ratio_r(m) < 1e-13 {
        return None;
    }
    m.clone().try_inverse()
}

pub fn asymmetry(m: &RMatrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn asymmetry_c(m: &CMatrix) -> f64 {
    max_abs_c(&(m - m.transpose()))
}

/// Apply `f` to the spectrum of a symmetric positive-definite matrix.
pub fn spd_function(m: &RMatrix, f: impl Fn(f64) -> f64) -> Result<RMatrix> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(&bad) = eig
        .eigenvalues
        .iter()
        .find(|&&v| v <= 1e-14 * scale.max(f64::MIN_POSITIVE))
    {
        return Err(Error::NegativeSpectrum(bad));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Max-norm of `AB - BA`.
pub fn commutator_norm(a: &RMatrix, b: &RMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Eigenvalues of a complex square matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

/// `det(A)^(-1/2)` as the product of principal roots of the eigenvalues.
///
/// For `Re A > 0` every eigenvalue has positive real part, so this is the
/// branch obtained by continuation from a positive-definite matrix.
pub fn inv_sqrt_det_principal(m: &CMatrix) -> Complex64 {
    eigenvalues(m)
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, l| acc / l.sqrt())
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

pub fn multi_factorial(m: &[usize]) -> f64 {
    m.iter().map(|&k| factorial(k)).product()
}
