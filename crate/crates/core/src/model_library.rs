//! Ready-made one-mode systems: the driven parametric oscillator and a charged
//! particle in a homogeneous time-dependent field.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::hamiltonian_dynamics::{LadderFrame, ModeInvariants, PropagationOptions, QuadraticHamiltonian};
use crate::quadrature::adaptive_simpson;
use crate::quantum_states::StateContext;
use crate::tomography::TomogramFrame;
use crate::{constant_fn, CMatrix, CVector, Error, RMatrix, RVector, Result, ScalarFn};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn scalar(v: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, v)
}

/// `H = p²/2m + mω(t)²x²/2 + f(t)x`.
#[derive(Clone)]
pub struct ParametricOscillator {
    mass: f64,
    omega: ScalarFn,
    force: ScalarFn,
    hbar: f64,
    constant_omega: Option<f64>,
    unforced: bool,
}

impl fmt::Debug for ParametricOscillator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricOscillator")
            .field("mass", &self.mass)
            .field("omega(0)", &(self.omega)(0.0))
            .field("hbar", &self.hbar)
            .field("constant_omega", &self.constant_omega)
            .finish()
    }
}

impl ParametricOscillator {
    pub fn new(mass: f64, omega: ScalarFn, force: ScalarFn, hbar: f64) -> Result<Self> {
        Self::build(mass, omega, force, hbar, None, false)
    }

    /// Constant frequency, so that `ε = e^{iωt}` exactly.
    pub fn with_constant_omega(mass: f64, omega: f64, force: ScalarFn, hbar: f64) -> Result<Self> {
        Self::build(mass, constant_fn(omega), force, hbar, Some(omega), false)
    }

    pub fn harmonic(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        Self::build(mass, constant_fn(omega), constant_fn(0.0), hbar, Some(omega), true)
    }

    fn build(
        mass: f64,
        omega: ScalarFn,
        force: ScalarFn,
        hbar: f64,
        constant_omega: Option<f64>,
        unforced: bool,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass {mass} and hbar {hbar} must be positive"
            )));
        }
        let w0 = omega(0.0);
        if !(w0 > 0.0 && w0.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega(0) = {w0} must be positive")));
        }
        Ok(Self {
            mass,
            omega,
            force,
            hbar,
            constant_omega,
            unforced,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn omega0(&self) -> f64 {
        (self.omega)(0.0)
    }

    fn norm(&self) -> f64 {
        1.0 / (2.0 * self.mass * self.omega0() * self.hbar).sqrt()
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        let m = self.mass;
        let (omega, force) = (self.omega.clone(), self.force.clone());
        QuadraticHamiltonian::from_blocks(
            1,
            self.hbar,
            Arc::new(move |_| RMatrix::from_element(1, 1, 1.0 / m)),
            Arc::new(|_| RMatrix::zeros(1, 1)),
            Arc::new(move |t| RMatrix::from_element(1, 1, m * omega(t).powi(2))),
            Arc::new(|_| RVector::zeros(1)),
            Arc::new(move |t| RVector::from_element(1, force(t))),
        )
    }

    /// `A_p = i/√(2mω(0)ħ)`, `A_x = √(mω(0)/2ħ)`.
    pub fn frame(&self) -> LadderFrame {
        let s = self.norm();
        LadderFrame {
            a_p: scalar(I * s),
            a_x: scalar(Complex64::new(self.mass * self.omega0() * s, 0.0)),
            hbar: self.hbar,
        }
    }
}

/// Classical solution `ε(t)`, `ε̇(t)` with `ε̈ + ω²ε = 0`, `ε(0) = 1`, `ε̇(0) = iω(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon {
    pub t: f64,
    pub eps: Complex64,
    pub eps_dot: Complex64,
}

impl Epsilon {
    /// `Im(ε̇ ε*)`, equal to `ω(0)` for all `t`.
    pub fn wronskian(&self) -> f64 {
        (self.eps_dot * self.eps.conj()).im
    }
}

#[derive(Clone, Copy)]
struct OscState {
    eps: Complex64,
    eps_dot: Complex64,
    delta: Complex64,
    phase: f64,
}

impl OscState {
    fn axpy(&self, k: &OscState, h: f64) -> OscState {
        OscState {
            eps: self.eps + k.eps * h,
            eps_dot: self.eps_dot + k.eps_dot * h,
            delta: self.delta + k.delta * h,
            phase: self.phase + k.phase * h,
        }
    }
}

fn osc_rhs(sys: &ParametricOscillator, t: f64, y: &OscState) -> Result<OscState> {
    let w = (sys.omega)(t);
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega({t}) = {w} must be positive")));
    }
    let (eps, eps_dot) = match sys.constant_omega {
        Some(w0) => (
            Complex64::from_polar(1.0, w0 * t),
            I * w0 * Complex64::from_polar(1.0, w0 * t),
        ),
        None => (y.eps, y.eps_dot),
    };
    let d_delta = if sys.unforced {
        Complex64::new(0.0, 0.0)
    } else {
        I * sys.norm() * eps * (sys.force)(t)
    };
    Ok(OscState {
        eps: eps_dot,
        eps_dot: -w * w * eps,
        delta: d_delta,
        phase: (d_delta * y.delta.conj()).im,
    })
}

/// States of the oscillator at the ascending `times`.
pub fn oscillator_states(
    sys: &ParametricOscillator,
    times: &[f64],
    opts: PropagationOptions,
) -> Result<Vec<StateContext>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter(
            "sample times must be non-negative and ascending".into(),
        ));
    }
    let w0 = sys.omega0();
    let mut y = OscState {
        eps: Complex64::new(1.0, 0.0),
        eps_dot: I * w0,
        delta: Complex64::new(0.0, 0.0),
        phase: 0.0,
    };
    let mut root = Complex64::new(1.0, 0.0);
    let mut t = 0.0;
    let frame = sys.frame();
    let mut out = vec![];
    for &target in times {
        let span = target - t;
        let steps = (span / opts.dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = osc_rhs(sys, t, &y)?;
                let k2 = osc_rhs(sys, t + 0.5 * h, &y.axpy(&k1, 0.5 * h))?;
                let k3 = osc_rhs(sys, t + 0.5 * h, &y.axpy(&k2, 0.5 * h))?;
                let k4 = osc_rhs(sys, t + h, &y.axpy(&k3, h))?;
                y = OscState {
                    eps: y.eps + (k1.eps + 2.0 * k2.eps + 2.0 * k3.eps + k4.eps) * (h / 6.0),
                    eps_dot: y.eps_dot + (k1.eps_dot + 2.0 * k2.eps_dot + 2.0 * k3.eps_dot + k4.eps_dot) * (h / 6.0),
                    delta: y.delta + (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta) * (h / 6.0),
                    phase: y.phase + (k1.phase + 2.0 * k2.phase + 2.0 * k3.phase + k4.phase) * (h / 6.0),
                };
                t += h;
                let r = y.eps.sqrt();
                root = if (r - root).norm() <= (r + root).norm() { r } else { -r };
            }
        }
        t = target;
        let (eps, eps_dot) = match sys.constant_omega {
            Some(w) => {
                root = Complex64::from_polar(1.0, 0.5 * w * t);
                (
                    Complex64::from_polar(1.0, w * t),
                    I * w * Complex64::from_polar(1.0, w * t),
                )
            }
            None => (y.eps, y.eps_dot),
        };
        let s = sys.norm();
        out.push(StateContext {
            invariants: ModeInvariants {
                t,
                lambda_p: scalar(I * s * eps),
                lambda_x: scalar(-I * s * sys.mass * eps_dot),
                delta: CVector::from_element(1, y.delta),
                hbar: sys.hbar,
            },
            phase_integral: y.phase,
            sqrt_det_ratio: root,
            frame_abs_det: frame.a_p[(0, 0)].norm(),
        });
    }
    Ok(out)
}

/// `Λ_p = iε/√(2mω(0)ħ)`, `Λ_x = −imε̇/√(2mω(0)ħ)` and `δ` at time `t`.
pub fn oscillator_invariants(sys: &ParametricOscillator, t: f64, opts: PropagationOptions) -> Result<ModeInvariants> {
    Ok(oscillator_states(sys, &[t], opts)?.remove(0).invariants)
}

/// `ε(t)` recovered from the invariants.
pub fn oscillator_epsilon(sys: &ParametricOscillator, t: f64, opts: PropagationOptions) -> Result<Epsilon> {
    let inv = oscillator_invariants(sys, t, opts)?;
    let s = sys.norm();
    Ok(Epsilon {
        t,
        eps: inv.lambda_p[(0, 0)] / (I * s),
        eps_dot: inv.lambda_x[(0, 0)] / (-I * s * sys.mass),
    })
}

/// Scalar tomogram ingredients of a one-mode system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomogramParts {
    pub xi: Complex64,
    /// `ħ²|Ξ|²`.
    pub sigma: f64,
    pub delta: Complex64,
    pub hbar: f64,
}

impl TomogramParts {
    /// `X₀ = ħ(Ξ*(α−δ) + Ξ(α−δ)*)`.
    pub fn x0(&self, alpha: Complex64) -> f64 {
        2.0 * self.hbar * (self.xi.conj() * (alpha - self.delta)).re
    }
}

fn scalar_frame(frame: &TomogramFrame) -> Result<(f64, f64)> {
    if frame.n_modes() != 1 {
        return Err(Error::Dimension("one-mode system needs a one-mode frame".into()));
    }
    Ok((frame.mu[0], frame.nu[0]))
}

/// `Ξ = (mε̇ν + εμ)/√(2mω(0)ħ)`, `Σ = (ħ/2mω(0))|mε̇ν + εμ|²`.
pub fn oscillator_tomogram_parts(
    sys: &ParametricOscillator,
    t: f64,
    frame: &TomogramFrame,
    opts: PropagationOptions,
) -> Result<TomogramParts> {
    let (mu, nu) = scalar_frame(frame)?;
    let st = oscillator_states(sys, &[t], opts)?.remove(0);
    let s = sys.norm();
    let eps = st.invariants.lambda_p[(0, 0)] / (I * s);
    let eps_dot = st.invariants.lambda_x[(0, 0)] / (-I * s * sys.mass);
    let b = sys.mass * eps_dot * nu + eps * mu;
    if b.norm() == 0.0 {
        return Err(Error::DegenerateFrame);
    }
    Ok(TomogramParts {
        xi: b * s,
        sigma: sys.hbar / (2.0 * sys.mass * sys.omega0()) * b.norm_sqr(),
        delta: st.invariants.delta[0],
        hbar: sys.hbar,
    })
}

/// `H = p²/2m + F(t)x` with a squeezing frame `(A_p, A_x)`.
#[derive(Clone)]
pub struct ChargedParticle {
    mass: f64,
    field: ScalarFn,
    hbar: f64,
    a_p: Complex64,
    a_x: Complex64,
}

impl fmt::Debug for ChargedParticle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChargedParticle")
            .field("mass", &self.mass)
            .field("hbar", &self.hbar)
            .field("a_p", &self.a_p)
            .field("a_x", &self.a_x)
            .finish()
    }
}

impl ChargedParticle {
    /// `A_x A_p* − A_p A_x* = −i/ħ` is required.
    pub fn new(mass: f64, field: ScalarFn, hbar: f64, a_p: Complex64, a_x: Complex64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass {mass} and hbar {hbar} must be positive"
            )));
        }
        let residual = (a_x * a_p.conj() - a_p * a_x.conj() + I / hbar).norm();
        if residual > 1e-12 * (1.0 / hbar).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "(A_p, A_x) violate the commutation relation (residual {residual:e})"
            )));
        }
        Ok(Self {
            mass,
            field,
            hbar,
            a_p,
            a_x,
        })
    }

    /// Unsqueezed frame `A_p = i/√(2ħ)`, `A_x = 1/√(2ħ)`.
    pub fn unsqueezed(mass: f64, field: ScalarFn, hbar: f64) -> Result<Self> {
        let s = 1.0 / (2.0 * hbar).sqrt();
        Self::new(mass, field, hbar, I * s, Complex64::new(s, 0.0))
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        let m = self.mass;
        let field = self.field.clone();
        QuadraticHamiltonian::from_blocks(
            1,
            self.hbar,
            Arc::new(move |_| RMatrix::from_element(1, 1, 1.0 / m)),
            Arc::new(|_| RMatrix::zeros(1, 1)),
            Arc::new(|_| RMatrix::zeros(1, 1)),
            Arc::new(|_| RVector::zeros(1)),
            Arc::new(move |t| RVector::from_element(1, field(t))),
        )
    }

    pub fn frame(&self) -> LadderFrame {
        LadderFrame {
            a_p: scalar(self.a_p),
            a_x: scalar(self.a_x),
            hbar: self.hbar,
        }
    }

    fn lambda_p(&self, t: f64) -> Complex64 {
        self.a_p - self.a_x * (t / self.mass)
    }

    /// `δ(t) = ∫₀ᵗ (A_p − A_x τ/m) F(τ) dτ`.
    fn delta(&self, t: f64) -> Result<Complex64> {
        adaptive_simpson(|tau| self.lambda_p(tau) * (self.field)(tau), 0.0, t, 1e-13)
    }
}

/// Closed-form state of the charged particle at time `t`.
///
/// `Λ_p/A_p = 1 − (A_x/A_p)t/m` never crosses the negative real axis (the
/// ratio `A_x/A_p` is not real for a valid frame), so the principal square
/// root is the continuous branch.
pub fn particle_state(sys: &ChargedParticle, t: f64) -> Result<StateContext> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let delta = sys.delta(t)?;
    let phase = adaptive_simpson(
        |tau| {
            let d = sys.delta(tau).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let dd = sys.lambda_p(tau) * (sys.field)(tau);
            Complex64::new((dd * d.conj()).im, 0.0)
        },
        0.0,
        t,
        1e-12,
    )?;
    if phase.re.is_nan() {
        return Err(Error::QuadratureFailure("inner displacement integral failed".into()));
    }
    let lp = sys.lambda_p(t);
    Ok(StateContext {
        invariants: ModeInvariants {
            t,
            lambda_p: scalar(lp),
            lambda_x: scalar(sys.a_x),
            delta: CVector::from_element(1, delta),
            hbar: sys.hbar,
        },
        phase_integral: phase.re,
        sqrt_det_ratio: (lp / sys.a_p).sqrt(),
        frame_abs_det: sys.a_p.norm(),
    })
}

/// `Λ_x = A_x`, `Λ_p = A_p − A_x t/m` and `δ(t)`.
pub fn particle_invariants(sys: &ChargedParticle, t: f64) -> Result<ModeInvariants> {
    Ok(particle_state(sys, t)?.invariants)
}

/// `Ξ = iA_xν − i(A_p − A_x t/m)μ`, `Σ = ħ²|Ξ|²`.
pub fn particle_tomogram_parts(sys: &ChargedParticle, t: f64, frame: &TomogramFrame) -> Result<TomogramParts> {
    let (mu, nu) = scalar_frame(frame)?;
    let xi = I * sys.a_x * nu - I * sys.lambda_p(t) * mu;
    if xi.norm() == 0.0 {
        return Err(Error::DegenerateFrame);
    }
    Ok(TomogramParts {
        xi,
        sigma: sys.hbar * sys.hbar * xi.norm_sqr(),
        delta: sys.delta(t)?,
        hbar: sys.hbar,
    })
}
