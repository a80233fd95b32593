//! Symplectic tomograms `w(X, μ, ν)` of the observables `X_k = μ_k x_k + ν_k p_k`.
//!
//! Coherent states give a Gaussian with `Σ = ħ²Ξ†Ξ` and
//! `X₀ = ħΞ†Ξ(Ξ⁻¹(α−δ) + (Ξ*)⁻¹(α*−δ*))`, where `Ξ = iΛ_x N − iΛ_p M`.
//! Fock states carry the factor `|H_n^{R}(y)|²/n!` with `R = (Ξᵀ)⁻¹Ξ†` and
//! `y = (1/ħ)(Ξ†)⁻¹X + (Ξ†)⁻¹(Ξ†δ + Ξᵀδ*)`.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::hamiltonian_dynamics::ModeInvariants;
use crate::hermite::HermiteTable;
use crate::linalg::{inverse, max_abs_c};
use crate::quadrature::{composite_points, gauss_legendre};
use crate::{CMatrix, CVector, Error, RMatrix, RVector, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Reference frame `(μ, ν)`, one pair per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramFrame {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl TomogramFrame {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if mu.len() != nu.len() || mu.is_empty() {
            return Err(Error::InvalidFrame(format!(
                "mu has {} entries, nu has {}",
                mu.len(),
                nu.len()
            )));
        }
        for (k, (m, n)) in mu.iter().zip(&nu).enumerate() {
            if !m.is_finite() || !n.is_finite() {
                return Err(Error::InvalidFrame(format!("mode {k}: non-finite entry")));
            }
            if *m == 0.0 && *n == 0.0 {
                return Err(Error::InvalidFrame(format!("mode {k}: (mu, nu) = (0, 0)")));
            }
        }
        Ok(Self { mu, nu })
    }

    /// Position frame `μ = 1`, `ν = 0`.
    pub fn position(n: usize) -> Self {
        Self {
            mu: vec![1.0; n],
            nu: vec![0.0; n],
        }
    }

    /// Momentum frame `μ = 0`, `ν = 1`.
    pub fn momentum(n: usize) -> Self {
        Self {
            mu: vec![0.0; n],
            nu: vec![1.0; n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mu.len()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            mu: self.mu.iter().map(|v| v * lambda).collect(),
            nu: self.nu.iter().map(|v| v * lambda).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiMatrix {
    pub xi: CMatrix,
    pub singular: bool,
}

/// `Ξ = iΛ_x N − iΛ_p M`.
pub fn xi_matrix(inv: &ModeInvariants, frame: &TomogramFrame) -> Result<XiMatrix> {
    let n = inv.n_modes();
    if frame.n_modes() != n {
        return Err(Error::Dimension(format!(
            "frame has {} modes, state has {n}",
            frame.n_modes()
        )));
    }
    let mut xi = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            xi[(j, k)] = I * inv.lambda_x[(j, k)] * frame.nu[k] - I * inv.lambda_p[(j, k)] * frame.mu[k];
        }
    }
    let singular = inverse(&xi).is_none();
    Ok(XiMatrix { xi, singular })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTomogram {
    pub x0: RVector,
    pub sigma: RMatrix,
    /// Largest imaginary part discarded from `X₀` or `Σ`.
    pub imag_residue: f64,
}

pub fn coherent_tomogram(inv: &ModeInvariants, frame: &TomogramFrame, alpha: &CVector) -> Result<GaussianTomogram> {
    let XiMatrix { xi, singular } = xi_matrix(inv, frame)?;
    if singular {
        return Err(Error::DegenerateFrame);
    }
    if alpha.len() != inv.n_modes() {
        return Err(Error::Dimension("coherent label length".into()));
    }
    let hbar = inv.hbar;
    let gram = xi.adjoint() * &xi;
    let sigma_c = &gram * Complex64::new(hbar * hbar, 0.0);
    let xi_inv = inverse(&xi).ok_or(Error::DegenerateFrame)?;
    let shift = alpha - &inv.delta;
    let x0_c = &gram * (&xi_inv * &shift + xi_inv.conjugate() * shift.conjugate()) * Complex64::new(hbar, 0.0);
    let scale = max_abs_c(&sigma_c).max(1.0);
    let imag_residue = (x0_c.iter().fold(0.0f64, |a, v| a.max(v.im.abs())))
        .max(sigma_c.iter().fold(0.0f64, |a, v| a.max(v.im.abs())) / scale);
    let sigma = sigma_c.map(|v| v.re);
    Ok(GaussianTomogram {
        x0: x0_c.map(|v| v.re),
        sigma: (&sigma + sigma.transpose()) * 0.5,
        imag_residue,
    })
}

/// Prepared Gaussian density.
#[derive(Debug, Clone)]
pub struct GaussianDensity {
    x0: RVector,
    chol: Cholesky<f64, nalgebra::Dyn>,
    norm: f64,
}

impl GaussianDensity {
    pub fn new(g: &GaussianTomogram) -> Result<Self> {
        let n = g.x0.len();
        let chol = Cholesky::new(g.sigma.clone()).ok_or(Error::NonPositiveDispersion)?;
        let det: f64 = chol.l().diagonal().iter().map(|v| v * v).product();
        if !(det > 0.0) {
            return Err(Error::NonPositiveDispersion);
        }
        let norm = ((2.0 * PI).powi(n as i32) * det).sqrt().recip();
        Ok(Self {
            x0: g.x0.clone(),
            chol,
            norm,
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = RVector::from_column_slice(x) - &self.x0;
        let q = d.dot(&self.chol.solve(&d));
        self.norm * (-0.5 * q).exp()
    }
}

pub fn tomogram_density(g: &GaussianTomogram, x: &[f64]) -> Result<f64> {
    if x.len() != g.x0.len() {
        return Err(Error::Dimension("X length".into()));
    }
    Ok(GaussianDensity::new(g)?.eval(x))
}

/// Fock tomograms of one state in one frame, prepared for many `X`.
#[derive(Debug, Clone)]
pub struct FockTomogram {
    ground: GaussianDensity,
    r: CMatrix,
    y_map: CMatrix,
    y_shift: CVector,
}

impl FockTomogram {
    pub fn new(inv: &ModeInvariants, frame: &TomogramFrame) -> Result<Self> {
        let n = inv.n_modes();
        let g = coherent_tomogram(inv, frame, &CVector::zeros(n))?;
        let xi = xi_matrix(inv, frame)?.xi;
        let xi_h_inv = inverse(&xi.adjoint()).ok_or(Error::DegenerateFrame)?;
        let xi_t_inv = inverse(&xi.transpose()).ok_or(Error::DegenerateFrame)?;
        let r = xi_t_inv * xi.adjoint();
        let r = (&r + r.transpose()) * Complex64::new(0.5, 0.0);
        let d = &inv.delta;
        let y_shift = &xi_h_inv * (xi.adjoint() * d + xi.transpose() * d.conjugate());
        Ok(Self {
            ground: GaussianDensity::new(&g)?,
            r,
            y_map: xi_h_inv * Complex64::new(1.0 / inv.hbar, 0.0),
            y_shift,
        })
    }

    pub fn argument(&self, x: &[f64]) -> CVector {
        let xv = CVector::from_iterator(x.len(), x.iter().map(|&v| Complex64::new(v, 0.0)));
        &self.y_map * xv + &self.y_shift
    }

    pub fn parameter(&self) -> &CMatrix {
        &self.r
    }

    pub fn eval(&self, n: &[usize], x: &[f64]) -> Result<f64> {
        if n.len() != self.r.nrows() || x.len() != self.r.nrows() {
            return Err(Error::Dimension("Fock label or X length".into()));
        }
        let y = self.argument(x);
        let h = &self.r * y;
        let k = HermiteTable::new(&self.r, &h, n)?.normalized(n);
        Ok(self.ground.eval(x) * k.norm_sqr())
    }
}

pub fn fock_tomogram(inv: &ModeInvariants, frame: &TomogramFrame, n: &[usize], x: &[f64]) -> Result<f64> {
    FockTomogram::new(inv, frame)?.eval(n, x)
}

/// Integration box and resolution hints for [`tomogram_quadrature`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWindow {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    /// Largest local wavenumber of `ψ` itself inside the window, per mode.
    pub wavenumber: Vec<f64>,
    /// Shortest length scale of `|ψ|`, per mode.
    pub envelope: Vec<f64>,
}

impl QuadratureWindow {
    /// Window of `n_sigma` standard deviations around the position mean,
    /// widened by `√(2|n|+1)` for Fock excitations of total order `order`.
    pub fn for_state(inv: &ModeInvariants, alpha: &CVector, order: usize, n_sigma: f64) -> Result<Self> {
        let n = inv.n_modes();
        let pos = coherent_tomogram(inv, &TomogramFrame::position(n), alpha)?;
        let mom = coherent_tomogram(inv, &TomogramFrame::momentum(n), alpha)?;
        let spread = (2.0 * order as f64 + 1.0).sqrt();
        let mut w = Self {
            center: vec![],
            half_width: vec![],
            wavenumber: vec![],
            envelope: vec![],
        };
        for k in 0..n {
            let sx = pos.sigma[(k, k)].sqrt();
            let sp = mom.sigma[(k, k)].sqrt();
            w.center.push(pos.x0[k]);
            w.half_width.push(n_sigma * sx * spread);
            w.wavenumber.push((mom.x0[k].abs() + n_sigma * sp * spread) / inv.hbar);
            w.envelope.push(sx / spread);
        }
        Ok(w)
    }
}

/// The defining integral
/// `w = (2πħ)^{−N} |ν₁⋯ν_N|^{−1} |∫ψ(y) exp{(i/2ħ) Σ μ_k y_k²/ν_k − (i/ħ) Σ y_k X_k/ν_k} dy|²`,
/// evaluated by composite Gauss–Legendre on the window.
pub fn tomogram_quadrature<F>(
    mut psi: F,
    frame: &TomogramFrame,
    x: &[f64],
    hbar: f64,
    window: &QuadratureWindow,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Complex64>,
{
    let n = frame.n_modes();
    if x.len() != n || window.center.len() != n {
        return Err(Error::Dimension("X or window length".into()));
    }
    if let Some(k) = frame.nu.iter().position(|&v| v == 0.0) {
        return Err(Error::FrameRequiresNu(k));
    }
    let base = gauss_legendre(8);
    let mut axes = Vec::with_capacity(n);
    for k in 0..n {
        let (c, hw) = (window.center[k], window.half_width[k]);
        let ratio = frame.mu[k] / frame.nu[k];
        let rate = (ratio.abs() * (c.abs() + hw) + (x[k] / frame.nu[k]).abs()) / hbar + window.wavenumber[k];
        let panels = ((2.0 * hw * rate / 1.0).ceil() as usize)
            .max((2.0 * hw / (0.5 * window.envelope[k])).ceil() as usize)
            .max(8);
        if panels > 200_000 {
            return Err(Error::QuadratureFailure(format!("mode {k} needs {panels} panels")));
        }
        axes.push(composite_points(&base, c - hw, c + hw, panels));
    }
    let mut idx = vec![0usize; n];
    let mut y = vec![0.0; n];
    let mut acc = Complex64::new(0.0, 0.0);
    'outer: loop {
        let mut weight = 1.0;
        let mut phase = 0.0;
        for k in 0..n {
            y[k] = axes[k].nodes[idx[k]];
            weight *= axes[k].weights[idx[k]];
            phase += (0.5 * frame.mu[k] * y[k] * y[k] - y[k] * x[k]) / (frame.nu[k] * hbar);
        }
        acc += psi(&y)? * Complex64::from_polar(weight, phase);
        for k in 0..n {
            idx[k] += 1;
            if idx[k] < axes[k].nodes.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let nu_prod: f64 = frame.nu.iter().product::<f64>().abs();
    Ok(acc.norm_sqr() / ((2.0 * PI * hbar).powi(n as i32) * nu_prod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian_dynamics::LadderFrame;
    use approx::assert_relative_eq;

    fn unit_inv() -> ModeInvariants {
        LadderFrame::decoupled(1, 1.0).initial_invariants()
    }

    #[test]
    fn frame_validation() {
        assert!(matches!(
            TomogramFrame::new(vec![0.0], vec![0.0]),
            Err(Error::InvalidFrame(_))
        ));
        assert!(TomogramFrame::new(vec![1.0], vec![0.0]).is_ok());
    }

    #[test]
    fn xi_position_frame() {
        let inv = unit_inv();
        let xi = xi_matrix(&inv, &TomogramFrame::position(1)).unwrap();
        assert_eq!(xi.xi[(0, 0)], -I * inv.lambda_p[(0, 0)]);
        assert!(!xi.singular);
    }

    #[test]
    fn xi_momentum_frame() {
        let xi = xi_matrix(&unit_inv(), &TomogramFrame::momentum(1)).unwrap().xi[(0, 0)];
        assert_relative_eq!(xi.re, 0.0, epsilon = 1e-16);
        assert_relative_eq!(xi.im, 0.5f64.sqrt(), epsilon = 1e-16);
        assert_relative_eq!(xi.norm_sqr(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn density_closed_forms() {
        let g = GaussianTomogram {
            x0: RVector::from_element(1, 0.3),
            sigma: RMatrix::from_element(1, 1, 0.5),
            imag_residue: 0.0,
        };
        assert_relative_eq!(tomogram_density(&g, &[0.3]).unwrap(), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(
            tomogram_density(&g, &[1.3]).unwrap(),
            (-1.0f64).exp() / PI.sqrt(),
            epsilon = 1e-15
        );
        let bad = GaussianTomogram {
            sigma: RMatrix::from_element(1, 1, -1.0),
            ..g
        };
        assert_eq!(tomogram_density(&bad, &[0.0]), Err(Error::NonPositiveDispersion));
    }

    #[test]
    fn quadrature_needs_nu() {
        let w = QuadratureWindow {
            center: vec![0.0],
            half_width: vec![5.0],
            wavenumber: vec![1.0],
            envelope: vec![1.0],
        };
        let r = tomogram_quadrature(
            |_| Ok(Complex64::new(1.0, 0.0)),
            &TomogramFrame::position(1),
            &[0.0],
            1.0,
            &w,
        );
        assert_eq!(r, Err(Error::FrameRequiresNu(0)));
    }

    #[test]
    fn vacuum_position_and_momentum() {
        let inv = unit_inv();
        for frame in [TomogramFrame::position(1), TomogramFrame::momentum(1)] {
            let g = coherent_tomogram(&inv, &frame, &CVector::zeros(1)).unwrap();
            assert_relative_eq!(g.sigma[(0, 0)], 0.5, epsilon = 1e-15);
            assert_eq!(g.x0[0], 0.0);
        }
    }
}
