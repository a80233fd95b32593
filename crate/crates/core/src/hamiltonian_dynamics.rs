//! Quadratic Hamiltonians `H = ½ qᵀB(t)q + c(t)ᵀq` with `q = (p, x)`, ladder
//! frames, and propagation of the linear integrals of motion.
//!
//! The real invariants obey `Λ̇ = Λ Σᵀ B`, `Δ̇ = Λ Σᵀ c` with `Λ(0) = E`,
//! `Δ(0) = 0`, where `Σ` is [`symplectic_form`]. The complex invariants are
//! `Ω = [Λ_p, Λ_x] = [A_p, A_x] Λ` and `δ = [A_p, A_x] Δ`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{self, commutator_norm, inverse_r, max_abs, max_abs_c, spd_function, symplectic_form, to_complex};
use crate::{CMatrix, CVector, Error, RMatrix, RVector, Result};

pub type MatrixFn = Arc<dyn Fn(f64) -> RMatrix + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> RVector + Send + Sync>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The four N×N blocks of `B(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub pp: RMatrix,
    pub px: RMatrix,
    pub xp: RMatrix,
    pub xx: RMatrix,
}

#[derive(Clone)]
pub struct QuadraticHamiltonian {
    n_modes: usize,
    hbar: f64,
    b: MatrixFn,
    c: VectorFn,
}

impl fmt::Debug for QuadraticHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticHamiltonian")
            .field("n_modes", &self.n_modes)
            .field("hbar", &self.hbar)
            .field("b(0)", &(self.b)(0.0))
            .field("c(0)", &(self.c)(0.0))
            .finish()
    }
}

impl QuadraticHamiltonian {
    /// Build from the full 2N×2N generator and the 2N drive vector.
    pub fn new(
        n_modes: usize,
        hbar: f64,
        b: impl Fn(f64) -> RMatrix + Send + Sync + 'static,
        c: impl Fn(f64) -> RVector + Send + Sync + 'static,
    ) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be positive".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        let h = Self {
            n_modes,
            hbar,
            b: Arc::new(b),
            c: Arc::new(c),
        };
        h.check_at(0.0)?;
        Ok(h)
    }

    /// Build from block functions; `B_xp` is taken as `B_pxᵀ`.
    pub fn from_blocks(
        n_modes: usize,
        hbar: f64,
        b_pp: MatrixFn,
        b_px: MatrixFn,
        b_xx: MatrixFn,
        c_p: VectorFn,
        c_x: VectorFn,
    ) -> Result<Self> {
        let n = n_modes;
        Self::new(
            n,
            hbar,
            move |t| {
                let (pp, px, xx) = (b_pp(t), b_px(t), b_xx(t));
                let mut b = RMatrix::zeros(2 * n, 2 * n);
                if pp.shape() == (n, n) && px.shape() == (n, n) && xx.shape() == (n, n) {
                    b.view_mut((0, 0), (n, n)).copy_from(&pp);
                    b.view_mut((0, n), (n, n)).copy_from(&px);
                    b.view_mut((n, 0), (n, n)).copy_from(&px.transpose());
                    b.view_mut((n, n), (n, n)).copy_from(&xx);
                } else {
                    b = RMatrix::from_element(2 * n + 1, 2 * n + 1, f64::NAN);
                }
                b
            },
            move |t| {
                let (cp, cx) = (c_p(t), c_x(t));
                if cp.len() != n || cx.len() != n {
                    return RVector::from_element(2 * n + 1, f64::NAN);
                }
                RVector::from_iterator(2 * n, cp.iter().chain(cx.iter()).copied())
            },
        )
    }

    /// Time-independent Hamiltonian.
    pub fn constant(
        b_pp: RMatrix,
        b_px: RMatrix,
        b_xx: RMatrix,
        c_p: RVector,
        c_x: RVector,
        hbar: f64,
    ) -> Result<Self> {
        let n = b_pp.nrows();
        Self::from_blocks(
            n,
            hbar,
            Arc::new(move |_| b_pp.clone()),
            Arc::new(move |_| b_px.clone()),
            Arc::new(move |_| b_xx.clone()),
            Arc::new(move |_| c_p.clone()),
            Arc::new(move |_| c_x.clone()),
        )
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn b(&self, t: f64) -> RMatrix {
        (self.b)(t)
    }

    pub fn c(&self, t: f64) -> RVector {
        (self.c)(t)
    }

    pub fn blocks(&self, t: f64) -> Blocks {
        let b = self.b(t);
        let n = self.n_modes;
        Blocks {
            pp: b.view((0, 0), (n, n)).into_owned(),
            px: b.view((0, n), (n, n)).into_owned(),
            xp: b.view((n, 0), (n, n)).into_owned(),
            xx: b.view((n, n), (n, n)).into_owned(),
        }
    }

    /// Validate shapes, finiteness and symmetry of `B(t)`.
    pub fn check_at(&self, t: f64) -> Result<()> {
        let b = self.b(t);
        let c = self.c(t);
        let m = 2 * self.n_modes;
        if b.shape() != (m, m) || c.len() != m {
            return Err(Error::Dimension(format!(
                "expected {m}x{m} generator and length-{m} drive at t = {t}, got {:?} and {}",
                b.shape(),
                c.len()
            )));
        }
        if b.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coefficient at t = {t}")));
        }
        let residual = linalg::asymmetry(&b);
        if residual > 1e-12 * max_abs(&b) {
            return Err(Error::AsymmetricGenerator { t, residual });
        }
        Ok(())
    }
}

/// Constant matrices `A_p`, `A_x` of the annihilation operators `a = A_p p + A_x x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderFrame {
    pub a_p: CMatrix,
    pub a_x: CMatrix,
    pub hbar: f64,
}

impl LadderFrame {
    /// Build a frame without enforcing the commutator relations; use
    /// [`check_symplectic_properties`] or [`LadderFrame::validated`] for that.
    pub fn new(a_p: CMatrix, a_x: CMatrix, hbar: f64) -> Result<Self> {
        let n = a_p.nrows();
        if n == 0 || a_p.shape() != (n, n) || a_x.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "A_p {:?} and A_x {:?} must be equal square matrices",
                a_p.shape(),
                a_x.shape()
            )));
        }
        if !(hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { a_p, a_x, hbar })
    }

    pub fn validated(a_p: CMatrix, a_x: CMatrix, hbar: f64) -> Result<Self> {
        let f = Self::new(a_p, a_x, hbar)?;
        let report = check_symplectic_properties(&f);
        if !report.passes(1e-12) {
            return Err(Error::InvalidParameter(format!(
                "ladder frame violates commutation relations: {report:?}"
            )));
        }
        Ok(f)
    }

    /// `A_p = (i/√(2ħ)) E`, `A_x = (1/√(2ħ)) E`.
    pub fn decoupled(n: usize, hbar: f64) -> Self {
        let s = 1.0 / (2.0 * hbar).sqrt();
        let e = CMatrix::identity(n, n);
        Self {
            a_p: &e * (I * s),
            a_x: e * Complex64::new(s, 0.0),
            hbar,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a_p.nrows()
    }

    /// Invariants at `t = 0`.
    pub fn initial_invariants(&self) -> ModeInvariants {
        ModeInvariants {
            t: 0.0,
            lambda_p: self.a_p.clone(),
            lambda_x: self.a_x.clone(),
            delta: CVector::zeros(self.n_modes()),
            hbar: self.hbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameChoice {
    /// Normal-mode frame built from `B_pp(0)` and `B_xx(0)`.
    Spectral,
    /// `A_p ∝ iE`, `A_x ∝ E`.
    Decoupled,
    /// Spectral when its preconditions hold, decoupled otherwise.
    Auto,
}

/// Ladder frame for `H`.
///
/// The spectral choice is `A_p = (i/√(2ħ)) (B_pp B_xx⁻¹)^{1/4}`,
/// `A_x = (1/√(2ħ)) (B_pp⁻¹ B_xx)^{1/4}`, evaluated at `t = 0`.
pub fn default_ladder_frame(h: &QuadraticHamiltonian, choice: FrameChoice) -> Result<LadderFrame> {
    match choice {
        FrameChoice::Decoupled => Ok(LadderFrame::decoupled(h.n_modes(), h.hbar())),
        FrameChoice::Spectral => spectral_frame(h),
        FrameChoice::Auto => spectral_frame(h).or_else(|_| Ok(LadderFrame::decoupled(h.n_modes(), h.hbar()))),
    }
}

fn spectral_frame(h: &QuadraticHamiltonian) -> Result<LadderFrame> {
    let bl = h.blocks(0.0);
    let comm = commutator_norm(&bl.pp, &bl.xx);
    if comm > 1e-10 {
        return Err(Error::NonCommutingBlocks(comm));
    }
    inverse_r(&bl.pp).ok_or(Error::SingularBlock("B_pp"))?;
    let xx_inv = inverse_r(&bl.xx).ok_or(Error::SingularBlock("B_xx"))?;
    let ratio = &bl.pp * xx_inv;
    let k = spd_function(&ratio, |v| v.powf(0.25))?;
    let k_inv = spd_function(&ratio, |v| v.powf(-0.25))?;
    let s = 1.0 / (2.0 * h.hbar()).sqrt();
    LadderFrame::new(
        to_complex(&k) * (I * s),
        to_complex(&k_inv) * Complex64::new(s, 0.0),
        h.hbar(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealSymplectic {
    pub t: f64,
    pub lambda: RMatrix,
    pub delta: RVector,
}

impl RealSymplectic {
    /// `‖Λ Σ Λᵀ − Σ‖_max`.
    pub fn residual(&self) -> f64 {
        let s = symplectic_form(self.lambda.nrows() / 2);
        max_abs(&(&self.lambda * &s * self.lambda.transpose() - s))
    }

    /// Complex invariants `[A_p, A_x] Λ`, `[A_p, A_x] Δ`.
    pub fn apply_frame(&self, frame: &LadderFrame) -> (CMatrix, CMatrix, CVector) {
        let n = frame.n_modes();
        let mut a = CMatrix::zeros(n, 2 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&frame.a_p);
        a.view_mut((0, n), (n, n)).copy_from(&frame.a_x);
        let omega = &a * to_complex(&self.lambda);
        let delta = &a * self.delta.map(|v| Complex64::new(v, 0.0));
        (
            omega.view((0, 0), (n, n)).into_owned(),
            omega.view((0, n), (n, n)).into_owned(),
            delta,
        )
    }
}

/// `Λ_p(t)`, `Λ_x(t)`, `δ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeInvariants {
    pub t: f64,
    pub lambda_p: CMatrix,
    pub lambda_x: CMatrix,
    pub delta: CVector,
    pub hbar: f64,
}

impl ModeInvariants {
    pub fn n_modes(&self) -> usize {
        self.lambda_p.nrows()
    }
}

/// One propagated sample together with the quantities needed by the
/// wavefunction prefactor and phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSample {
    pub invariants: ModeInvariants,
    /// `∫₀ᵗ Im(δ̇ᵀ δ*) dτ`.
    pub phase_integral: f64,
    /// `√(det Λ_p(t) / det A_p)`, continued from `1` at `t = 0`.
    pub sqrt_det_ratio: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub dt: f64,
    /// Largest tolerated symplectic residual before [`Error::StepTooLarge`].
    pub residual_ceiling: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            residual_ceiling: 1e-6,
        }
    }
}

impl PropagationOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    fn steps(&self, span: f64) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(span >= 0.0 && span.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time span must be non-negative, got {span}"
            )));
        }
        Ok((span / self.dt - 1e-9).ceil().max(0.0) as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<T>,
    /// Largest invariant residual met along the way.
    pub max_residual: f64,
}

impl<T> Trajectory<T> {
    pub fn last(&self) -> &T {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

/// Integrate `Λ̇ = Λ Σᵀ B(t)`, `Δ̇ = Λ Σᵀ c(t)` with classical RK4 from `0` to `t_end`.
pub fn propagate_real(
    h: &QuadraticHamiltonian,
    t_end: f64,
    opts: PropagationOptions,
) -> Result<Trajectory<RealSymplectic>> {
    let n = h.n_modes();
    let steps = opts.steps(t_end)?;
    let st = symplectic_form(n).transpose();
    let rhs = |t: f64, lam: &RMatrix| -> Result<(RMatrix, RVector)> {
        h.check_at(t)?;
        Ok((lam * &st * h.b(t), lam * (&st * h.c(t))))
    };
    let mut cur = RealSymplectic {
        t: 0.0,
        lambda: RMatrix::identity(2 * n, 2 * n),
        delta: RVector::zeros(2 * n),
    };
    let mut samples = vec![cur.clone()];
    let mut max_residual = 0.0f64;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    for k in 0..steps {
        let t = k as f64 * dt;
        let (l1, d1) = rhs(t, &cur.lambda)?;
        let (l2, d2) = rhs(t + 0.5 * dt, &(&cur.lambda + &l1 * (0.5 * dt)))?;
        let (l3, d3) = rhs(t + 0.5 * dt, &(&cur.lambda + &l2 * (0.5 * dt)))?;
        let (l4, d4) = rhs(t + dt, &(&cur.lambda + &l3 * dt))?;
        cur.lambda += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (dt / 6.0);
        cur.delta += (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (dt / 6.0);
        cur.t = if k + 1 == steps { t_end } else { (k + 1) as f64 * dt };
        let residual = cur.residual();
        if !(residual <= opts.residual_ceiling) {
            return Err(Error::StepTooLarge {
                t: cur.t,
                residual,
                ceiling: opts.residual_ceiling,
            });
        }
        max_residual = max_residual.max(residual);
        samples.push(cur.clone());
    }
    Ok(Trajectory { samples, max_residual })
}

/// RK4 integrator for `Ω̇ = Ω Σᵀ B`, `δ̇ = Ω Σᵀ c` and the phase integral.
struct ModeStepper<'a> {
    h: &'a QuadraticHamiltonian,
    st: RMatrix,
    omega: CMatrix,
    delta: CVector,
    phase: f64,
    t: f64,
    sqrt_ratio: Complex64,
    det_a_p: Complex64,
    forms0: (CMatrix, CMatrix),
    max_residual: f64,
    ceiling: f64,
    hbar: f64,
}

impl<'a> ModeStepper<'a> {
    fn new(h: &'a QuadraticHamiltonian, frame: &LadderFrame, ceiling: f64) -> Result<Self> {
        let n = h.n_modes();
        if frame.n_modes() != n {
            return Err(Error::Dimension(format!(
                "frame has {} modes, Hamiltonian has {n}",
                frame.n_modes()
            )));
        }
        let det_a_p = frame.a_p.determinant();
        if det_a_p.norm() == 0.0 {
            return Err(Error::SingularLambdaP(0.0));
        }
        let mut omega = CMatrix::zeros(n, 2 * n);
        omega.view_mut((0, 0), (n, n)).copy_from(&frame.a_p);
        omega.view_mut((0, n), (n, n)).copy_from(&frame.a_x);
        Ok(Self {
            h,
            st: symplectic_form(n).transpose(),
            forms0: bilinear_forms(&frame.a_p, &frame.a_x),
            omega,
            delta: CVector::zeros(n),
            phase: 0.0,
            t: 0.0,
            sqrt_ratio: Complex64::new(1.0, 0.0),
            det_a_p,
            max_residual: 0.0,
            ceiling,
            hbar: frame.hbar,
        })
    }

    fn rhs(&self, t: f64, omega: &CMatrix, delta: &CVector) -> Result<(CMatrix, CVector, f64)> {
        self.h.check_at(t)?;
        let gen = to_complex(&(&self.st * self.h.b(t)));
        let drive = (&self.st * self.h.c(t)).map(|v| Complex64::new(v, 0.0));
        let d_delta = omega * drive;
        let d_phase = d_delta.iter().zip(delta.iter()).map(|(a, b)| (a * b.conj()).im).sum();
        Ok((omega * gen, d_delta, d_phase))
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let (t, o, d) = (self.t, &self.omega, &self.delta);
        let half = Complex64::new(0.5 * dt, 0.0);
        let full = Complex64::new(dt, 0.0);
        let (o1, d1, p1) = self.rhs(t, o, d)?;
        let (o2, d2, p2) = self.rhs(t + 0.5 * dt, &(o + &o1 * half), &(d + &d1 * half))?;
        let (o3, d3, p3) = self.rhs(t + 0.5 * dt, &(o + &o2 * half), &(d + &d2 * half))?;
        let (o4, d4, p4) = self.rhs(t + dt, &(o + &o3 * full), &(d + &d3 * full))?;
        let w = Complex64::new(dt / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        self.omega += (o1 + o2 * two + o3 * two + o4) * w;
        self.delta += (d1 + d2 * two + d3 * two + d4) * w;
        self.phase += (p1 + 2.0 * p2 + 2.0 * p3 + p4) * dt / 6.0;
        self.t += dt;

        let n = self.h.n_modes();
        let lp = self.omega.view((0, 0), (n, n)).into_owned();
        let lx = self.omega.view((0, n), (n, n)).into_owned();
        let root = (lp.determinant() / self.det_a_p).sqrt();
        self.sqrt_ratio = if (root - self.sqrt_ratio).norm() <= (root + self.sqrt_ratio).norm() {
            root
        } else {
            -root
        };
        let (s, hmt) = bilinear_forms(&lp, &lx);
        let residual = max_abs_c(&(s - &self.forms0.0)).max(max_abs_c(&(hmt - &self.forms0.1)));
        if !(residual <= self.ceiling) {
            return Err(Error::StepTooLarge {
                t: self.t,
                residual,
                ceiling: self.ceiling,
            });
        }
        self.max_residual = self.max_residual.max(residual);
        Ok(())
    }

    fn advance_to(&mut self, target: f64, opts: PropagationOptions) -> Result<()> {
        let steps = opts.steps(target - self.t)?;
        if steps == 0 {
            self.t = target;
            return Ok(());
        }
        let start = self.t;
        let dt = (target - start) / steps as f64;
        for k in 0..steps {
            self.step(dt)?;
            if k + 1 == steps {
                self.t = target;
            }
        }
        Ok(())
    }

    fn sample(&self) -> ModeSample {
        let n = self.h.n_modes();
        ModeSample {
            invariants: ModeInvariants {
                t: self.t,
                lambda_p: self.omega.view((0, 0), (n, n)).into_owned(),
                lambda_x: self.omega.view((0, n), (n, n)).into_owned(),
                delta: self.delta.clone(),
                hbar: self.hbar,
            },
            phase_integral: self.phase,
            sqrt_det_ratio: self.sqrt_ratio,
        }
    }
}

fn bilinear_forms(a_p: &CMatrix, a_x: &CMatrix) -> (CMatrix, CMatrix) {
    (
        a_x * a_p.transpose() - a_p * a_x.transpose(),
        a_x * a_p.adjoint() - a_p * a_x.adjoint(),
    )
}

/// Propagate the complex invariants on a uniform grid from `0` to `t_end`.
///
/// The flow conserves `Λ_xΛ_pᵀ − Λ_pΛ_xᵀ` and `Λ_xΛ_p† − Λ_pΛ_x†` for any
/// frame; their drift is checked against the residual ceiling.
pub fn propagate_modes(
    h: &QuadraticHamiltonian,
    frame: &LadderFrame,
    t_end: f64,
    opts: PropagationOptions,
) -> Result<Trajectory<ModeSample>> {
    let mut stepper = ModeStepper::new(h, frame, opts.residual_ceiling)?;
    let steps = opts.steps(t_end)?;
    let mut samples = vec![stepper.sample()];
    if steps > 0 {
        let dt = t_end / steps as f64;
        for k in 0..steps {
            stepper.step(dt)?;
            stepper.t = if k + 1 == steps { t_end } else { (k + 1) as f64 * dt };
            samples.push(stepper.sample());
        }
    }
    Ok(Trajectory {
        samples,
        max_residual: stepper.max_residual,
    })
}

/// Propagate the complex invariants and return samples at exactly `times`
/// (non-negative, ascending).
pub fn evolve_modes(
    h: &QuadraticHamiltonian,
    frame: &LadderFrame,
    times: &[f64],
    opts: PropagationOptions,
) -> Result<Trajectory<ModeSample>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("sample times must be ascending".into()));
    }
    let mut stepper = ModeStepper::new(h, frame, opts.residual_ceiling)?;
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance_to(t, opts)?;
        samples.push(stepper.sample());
    }
    Ok(Trajectory {
        samples,
        max_residual: stepper.max_residual,
    })
}

/// Block generator `[[0, −B_pp], [B_xx, 0]]`.
pub fn block_generator(b_pp: &RMatrix, b_xx: &RMatrix) -> RMatrix {
    let n = b_pp.nrows();
    let mut g = RMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, n), (n, n)).copy_from(&(-b_pp));
    g.view_mut((n, 0), (n, n)).copy_from(b_xx);
    g
}

/// `exp([[0, −B_pp], [B_xx, 0]] t)` for commuting `B_pp`, `B_xx` with
/// `B_pp B_xx` positive definite.
///
/// With `W = √(B_pp B_xx)` the blocks are `cos Wt`, `−√(B_pp B_xx⁻¹) sin Wt`,
/// `√(B_xx B_pp⁻¹) sin Wt`, `cos Wt`. The result maps `(A_pᵀ; A_xᵀ)` to
/// `(Λ_pᵀ(t); Λ_xᵀ(t))`, i.e. it equals the transpose of the real `Λ(t)` when
/// `B_px = 0`.
pub fn closed_form_propagator(b_pp: &RMatrix, b_xx: &RMatrix, t: f64) -> Result<RMatrix> {
    let n = b_pp.nrows();
    if b_pp.shape() != (n, n) || b_xx.shape() != (n, n) {
        return Err(Error::Dimension("B_pp and B_xx must be equal square matrices".into()));
    }
    for m in [b_pp, b_xx] {
        let r = linalg::asymmetry(m);
        if r > 1e-12 * max_abs(m).max(1.0) {
            return Err(Error::NotSymmetric(r));
        }
    }
    let comm = commutator_norm(b_pp, b_xx);
    if comm > 1e-10 {
        return Err(Error::NonCommutingBlocks(comm));
    }
    inverse_r(b_pp).ok_or(Error::SingularBlock("B_pp"))?;
    inverse_r(b_xx).ok_or(Error::SingularBlock("B_xx"))?;
    let prod = b_pp * b_xx;
    let cos = spd_function(&prod, |l| (l.sqrt() * t).cos())?;
    let sinc = spd_function(&prod, |l| (l.sqrt() * t).sin() / l.sqrt())?;
    let mut g = RMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&cos);
    g.view_mut((n, n), (n, n)).copy_from(&cos);
    g.view_mut((0, n), (n, n)).copy_from(&(-(b_pp * &sinc)));
    g.view_mut((n, 0), (n, n)).copy_from(&(b_xx * &sinc));
    Ok(g)
}

/// Anything carrying a `(A_p, A_x)`-like pair.
pub trait LadderPair {
    fn pair(&self) -> (&CMatrix, &CMatrix, f64);
}

impl LadderPair for LadderFrame {
    fn pair(&self) -> (&CMatrix, &CMatrix, f64) {
        (&self.a_p, &self.a_x, self.hbar)
    }
}

impl LadderPair for ModeInvariants {
    fn pair(&self) -> (&CMatrix, &CMatrix, f64) {
        (&self.lambda_p, &self.lambda_x, self.hbar)
    }
}

/// Residuals of the commutation relations and their consequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticReport {
    /// `‖A_x A_pᵀ − A_p A_xᵀ‖`.
    pub symmetric: f64,
    /// `‖A_x A_p† − A_p A_x† + (i/ħ) E‖`.
    pub hermitian: f64,
    /// Smallest over largest singular value of `A_p`.
    pub margin_p: f64,
    /// Smallest over largest singular value of `A_x`.
    pub margin_x: f64,
    /// `‖A_pᵀ A_p* − A_p† A_p‖`.
    pub real_gram_p: f64,
    /// `‖A_xᵀ A_x* − A_x† A_x‖`.
    pub real_gram_x: f64,
    /// `‖A_x† A_p − A_xᵀ A_p* − (i/ħ) E‖`.
    pub cross: f64,
}

impl SymplecticReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.symmetric,
            self.hermitian,
            self.real_gram_p,
            self.real_gram_x,
            self.cross,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.margin_p > 1e-10 && self.margin_x > 1e-10
    }
}

pub fn check_symplectic_properties<T: LadderPair + ?Sized>(x: &T) -> SymplecticReport {
    let (a_p, a_x, hbar) = x.pair();
    let n = a_p.nrows();
    let ie = CMatrix::identity(n, n) * Complex64::new(0.0, 1.0 / hbar);
    let (s, h) = bilinear_forms(a_p, a_x);
    SymplecticReport {
        symmetric: max_abs_c(&s),
        hermitian: max_abs_c(&(h + &ie)),
        margin_p: linalg::singular_ratio(a_p),
        margin_x: linalg::singular_ratio(a_x),
        real_gram_p: max_abs_c(&(a_p.transpose() * a_p.conjugate() - a_p.adjoint() * a_p)),
        real_gram_x: max_abs_c(&(a_x.transpose() * a_x.conjugate() - a_x.adjoint() * a_x)),
        cross: max_abs_c(&(a_x.adjoint() * a_p - a_x.transpose() * a_p.conjugate() - ie)),
    }
}

/// Scalar helper for building diagonal real matrices.
pub fn diag(v: &[f64]) -> RMatrix {
    RMatrix::from_diagonal(&DVector::from_column_slice(v))
}
