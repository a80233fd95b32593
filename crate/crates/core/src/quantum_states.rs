//! Coherent and Fock wavefunctions built from the integrals of motion.
//!
//! With `G = Λ_p⁻¹Λ_x` and `C = Λ_p*Λ_p⁻¹` the coherent state is
//!
//! `ψ_α(x) = P exp{ −(i/2ħ) xᵀGx + (i/ħ) xᵀΛ_p⁻¹(α−δ) + ½αᵀCα + αᵀ(δ* − Cδ)
//!           − ½|α|² + ½δᵀCδ − ½|δ|² + iΦ }`,
//!
//! `P = (2πħ²)^{−N/4} |det A_p|^{−1/2} (det Λ_p / det A_p)^{−1/2}` and
//! `Φ = ∫₀ᵗ Im(δ̇ᵀδ*) dτ`. Fock states are
//! `ψ_n = ψ_0 H_n^{−C}(y) / √(n!)` with
//! `y = −(i/ħ)(Λ_p†)⁻¹x + δ − Λ_p(Λ_p*)⁻¹δ*`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::hamiltonian_dynamics::{LadderFrame, ModeInvariants, ModeSample};
use crate::hermite::{all_indices, HermiteTable, DEFAULT_MAX_ORDER};
use crate::linalg::{inverse, multi_factorial};
use crate::{CMatrix, CVector, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Everything a wavefunction needs at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateContext {
    pub invariants: ModeInvariants,
    pub phase_integral: f64,
    /// `√(det Λ_p / det A_p)`, continuous in `t` from `1`.
    pub sqrt_det_ratio: Complex64,
    /// `|det A_p|` of the ladder frame.
    pub frame_abs_det: f64,
}

impl StateContext {
    pub fn initial(frame: &LadderFrame) -> Self {
        Self {
            invariants: frame.initial_invariants(),
            phase_integral: 0.0,
            sqrt_det_ratio: Complex64::new(1.0, 0.0),
            frame_abs_det: frame.a_p.determinant().norm(),
        }
    }

    pub fn from_sample(sample: &ModeSample, frame: &LadderFrame) -> Self {
        Self {
            invariants: sample.invariants.clone(),
            phase_integral: sample.phase_integral,
            sqrt_det_ratio: sample.sqrt_det_ratio,
            frame_abs_det: frame.a_p.determinant().norm(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.invariants.n_modes()
    }

    pub fn hbar(&self) -> f64 {
        self.invariants.hbar
    }

    pub fn prepare(&self) -> Result<PreparedState> {
        PreparedState::new(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentLabel {
    pub alpha: CVector,
}

impl CoherentLabel {
    pub fn new(alpha: CVector) -> Result<Self> {
        if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("coherent label must be finite".into()));
        }
        Ok(Self { alpha })
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            alpha: CVector::zeros(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockLabel {
    pub n: Vec<usize>,
}

impl FockLabel {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        let order: usize = n.iter().sum();
        if order > DEFAULT_MAX_ORDER {
            return Err(Error::OrderOverflow {
                order,
                max: DEFAULT_MAX_ORDER,
            });
        }
        Ok(Self { n })
    }
}

/// Matrices derived once per instant and reused for every `x`.
#[derive(Debug, Clone)]
pub struct PreparedState {
    hbar: f64,
    lp_inv: CMatrix,
    g: CMatrix,
    c: CMatrix,
    delta: CVector,
    prefactor: Complex64,
    kappa: Complex64,
    y_map: CMatrix,
    y_shift: CVector,
}

impl PreparedState {
    fn new(ctx: &StateContext) -> Result<Self> {
        let inv = &ctx.invariants;
        let n = inv.n_modes();
        let hbar = inv.hbar;
        let lp_inv = inverse(&inv.lambda_p).ok_or(Error::SingularLambdaP(inv.t))?;
        let lp_conj_inv = lp_inv.conjugate();
        let g = &lp_inv * &inv.lambda_x;
        let g = (&g + g.transpose()) * Complex64::new(0.5, 0.0);
        let c = inv.lambda_p.conjugate() * &lp_inv;
        let c = (&c + c.transpose()) * Complex64::new(0.5, 0.0);
        let delta = inv.delta.clone();
        let d_conj = delta.conjugate();
        let kappa = 0.5 * (delta.transpose() * &c * &delta)[0] - 0.5 * delta.norm_squared() + I * ctx.phase_integral;
        let prefactor =
            (2.0 * PI * hbar * hbar).powf(-(n as f64) / 4.0) * ctx.frame_abs_det.powf(-0.5) / ctx.sqrt_det_ratio;
        let y_map = lp_inv.adjoint() * (-I / hbar);
        let y_shift = &delta - &inv.lambda_p * (&lp_conj_inv * d_conj);
        Ok(Self {
            hbar,
            lp_inv,
            g,
            c,
            delta,
            prefactor,
            kappa,
            y_map,
            y_shift,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.delta.len()
    }

    fn check(&self, x: &[f64]) -> Result<CVector> {
        if x.len() != self.n_modes() {
            return Err(Error::Dimension(format!(
                "x has length {}, expected {}",
                x.len(),
                self.n_modes()
            )));
        }
        Ok(CVector::from_iterator(
            x.len(),
            x.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    /// `ψ_α(x)`.
    pub fn coherent(&self, alpha: &CVector, x: &[f64]) -> Result<Complex64> {
        let xv = self.check(x)?;
        if alpha.len() != self.n_modes() {
            return Err(Error::Dimension("coherent label length".into()));
        }
        let ih = I / self.hbar;
        let shift = alpha - &self.delta;
        let quad = (xv.transpose() * &self.g * &xv)[0];
        let lin = (xv.transpose() * (&self.lp_inv * shift))[0];
        let alpha_part = 0.5 * (alpha.transpose() * &self.c * alpha)[0]
            + (alpha.transpose() * (self.delta.conjugate() - &self.c * &self.delta))[0]
            - 0.5 * alpha.norm_squared();
        let e = -0.5 * ih * quad + ih * lin + alpha_part + self.kappa;
        Ok(self.prefactor * e.exp())
    }

    /// Hermite argument `y(x)` of the Fock states.
    pub fn fock_argument(&self, x: &[f64]) -> Result<CVector> {
        let xv = self.check(x)?;
        Ok(&self.y_map * xv + &self.y_shift)
    }

    /// `H_n^{−C}(y) / √(n!)`.
    fn fock_factor(&self, n: &[usize], y: &CVector) -> Result<Complex64> {
        let r = -&self.c;
        let h = &r * y;
        Ok(HermiteTable::new(&r, &h, n)?.normalized(n))
    }

    /// `ψ_n(x)`.
    pub fn fock(&self, n: &[usize], x: &[f64]) -> Result<Complex64> {
        if n.len() != self.n_modes() {
            return Err(Error::Dimension("Fock label length".into()));
        }
        let psi0 = self.coherent(&CVector::zeros(self.n_modes()), x)?;
        let y = self.fock_argument(x)?;
        Ok(psi0 * self.fock_factor(n, &y)?)
    }

    /// `ψ_0(x)` and the table of `H_m^{−C}(y)/√(m!)`, so that `ψ_m = ψ_0 · table.normalized(m)`.
    pub fn fock_table(&self, max_index: &[usize], x: &[f64]) -> Result<(Complex64, HermiteTable)> {
        let psi0 = self.coherent(&CVector::zeros(self.n_modes()), x)?;
        let y = self.fock_argument(x)?;
        let r = -&self.c;
        let h = &r * y;
        Ok((psi0, HermiteTable::new(&r, &h, max_index)?))
    }
}

pub fn coherent_psi(ctx: &StateContext, label: &CoherentLabel, x: &[f64]) -> Result<Complex64> {
    ctx.prepare()?.coherent(&label.alpha, x)
}

pub fn fock_psi(ctx: &StateContext, label: &FockLabel, x: &[f64]) -> Result<Complex64> {
    ctx.prepare()?.fock(&label.n, x)
}

/// `|ψ_α(x) − e^{−|α|²/2} Σ_{|m| ≤ K} ψ_m(x) α^m / √(m!)|`.
pub fn coherent_expansion_check(ctx: &StateContext, alpha: &CVector, x: &[f64], max_order: usize) -> Result<f64> {
    let st = ctx.prepare()?;
    let n = st.n_modes();
    let exact = st.coherent(alpha, x)?;
    let (psi0, table) = st.fock_table(&vec![max_order; n], x)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in all_indices(n, max_order) {
        let pow = m
            .iter()
            .zip(alpha.iter())
            .fold(Complex64::new(1.0, 0.0), |a, (&k, v)| a * v.powu(k as u32));
        sum += table.normalized(&m) * pow / multi_factorial(&m).sqrt();
    }
    let series = (-0.5 * alpha.norm_squared()).exp() * psi0 * sum;
    Ok((exact - series).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_ctx() -> StateContext {
        let s = 0.5f64.sqrt();
        let f = LadderFrame::new(
            CMatrix::from_element(1, 1, Complex64::new(0.0, s)),
            CMatrix::from_element(1, 1, Complex64::new(s, 0.0)),
            1.0,
        )
        .unwrap();
        StateContext::initial(&f)
    }

    #[test]
    fn ground_state_peak() {
        let v = coherent_psi(&unit_ctx(), &CoherentLabel::vacuum(1), &[0.0]).unwrap();
        assert_relative_eq!(v.re, PI.powf(-0.25), epsilon = 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn displaced_state_at_origin() {
        let label = CoherentLabel::new(CVector::from_element(1, Complex64::new(1.0, 0.0))).unwrap();
        let v = coherent_psi(&unit_ctx(), &label, &[0.0]).unwrap();
        assert_relative_eq!(v.re, PI.powf(-0.25) * (-1.0f64).exp(), epsilon = 1e-15);
        let ratio = coherent_psi(&unit_ctx(), &label, &[0.7]).unwrap()
            / coherent_psi(&unit_ctx(), &CoherentLabel::vacuum(1), &[0.7]).unwrap();
        assert_relative_eq!(ratio.re, (2f64.sqrt() * 0.7 - 1.0).exp(), max_relative = 1e-14);
    }

    #[test]
    fn first_excited_state() {
        let ctx = unit_ctx();
        let label = FockLabel::new(vec![1]).unwrap();
        assert_eq!(fock_psi(&ctx, &label, &[0.0]).unwrap().norm(), 0.0);
        let x = 0.9f64;
        let expect = PI.powf(-0.25) / 2f64.sqrt() * 2.0 * x * (-x * x / 2.0).exp();
        let v = fock_psi(&ctx, &label, &[x]).unwrap();
        assert_relative_eq!(v.norm(), expect, max_relative = 1e-14);
    }

    #[test]
    fn expansion_of_vacuum_is_exact() {
        let r = coherent_expansion_check(&unit_ctx(), &CVector::zeros(1), &[0.4], 0).unwrap();
        assert_eq!(r, 0.0);
    }
}
