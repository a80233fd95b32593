//! Bogoliubov frame changes, Fock-basis transition amplitudes and overlaps
//! of Fock states taken at two different times.

use num_complex::Complex64;

use crate::hamiltonian_dynamics::{LadderFrame, ModeInvariants};
use crate::hermite::{HermiteTable, DEFAULT_MAX_ORDER};
use crate::linalg::{inv_sqrt_det_principal, inverse, max_abs_c};
use crate::quadrature::{composite_points, gauss_legendre};
use crate::quantum_states::StateContext;
use crate::tomography::QuadratureWindow;
use crate::{CMatrix, CVector, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `a' = S_p a + S_x a†`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovS {
    s_p: CMatrix,
    s_x: CMatrix,
}

pub fn make_bogoliubov(s_p: CMatrix, s_x: CMatrix) -> Result<BogoliubovS> {
    BogoliubovS::new(s_p, s_x)
}

impl BogoliubovS {
    pub fn new(s_p: CMatrix, s_x: CMatrix) -> Result<Self> {
        let n = s_p.nrows();
        if n == 0 || s_p.shape() != (n, n) || s_x.shape() != (n, n) {
            return Err(Error::Dimension("S_p and S_x must be equal square matrices".into()));
        }
        let residual_sym = max_abs_c(&(&s_p * s_x.transpose() - &s_x * s_p.transpose()));
        let residual_unit = max_abs_c(&(&s_p * s_p.adjoint() - &s_x * s_x.adjoint() - CMatrix::identity(n, n)));
        let scale = max_abs_c(&s_p).max(1.0).powi(2);
        if residual_sym > 1e-12 * scale || residual_unit > 1e-12 * scale {
            return Err(Error::NotSymplectic {
                residual_sym,
                residual_unit,
            });
        }
        if inverse(&s_p).is_none() {
            return Err(Error::SingularSp);
        }
        Ok(Self { s_p, s_x })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            s_p: CMatrix::identity(n, n),
            s_x: CMatrix::zeros(n, n),
        }
    }

    /// Single-mode squeeze `S_p = cosh θ`, `S_x = sinh θ`.
    pub fn squeeze(theta: f64) -> Self {
        Self {
            s_p: CMatrix::from_element(1, 1, Complex64::new(theta.cosh(), 0.0)),
            s_x: CMatrix::from_element(1, 1, Complex64::new(theta.sinh(), 0.0)),
        }
    }

    pub fn s_p(&self) -> &CMatrix {
        &self.s_p
    }

    pub fn s_x(&self) -> &CMatrix {
        &self.s_x
    }

    pub fn n_modes(&self) -> usize {
        self.s_p.nrows()
    }

    /// Invariants of the transformed operators `S_p A + S_x A†`.
    pub fn apply(&self, inv: &ModeInvariants) -> ModeInvariants {
        ModeInvariants {
            t: inv.t,
            lambda_p: &self.s_p * &inv.lambda_p + &self.s_x * inv.lambda_p.conjugate(),
            lambda_x: &self.s_p * &inv.lambda_x + &self.s_x * inv.lambda_x.conjugate(),
            delta: &self.s_p * &inv.delta + &self.s_x * inv.delta.conjugate(),
            hbar: inv.hbar,
        }
    }

    pub fn apply_frame(&self, frame: &LadderFrame) -> LadderFrame {
        LadderFrame {
            a_p: &self.s_p * &frame.a_p + &self.s_x * frame.a_p.conjugate(),
            a_x: &self.s_p * &frame.a_x + &self.s_x * frame.a_x.conjugate(),
            hbar: frame.hbar,
        }
    }

    /// `F = [[−S_x* S_p⁻¹, −(S_pᵀ)⁻¹], [−S_p⁻¹, S_p⁻¹ S_x]]`.
    pub fn hermite_parameter(&self) -> CMatrix {
        let n = self.n_modes();
        let sp_inv = inverse(&self.s_p).expect("validated at construction");
        let mut f = CMatrix::zeros(2 * n, 2 * n);
        f.view_mut((0, 0), (n, n))
            .copy_from(&(-(self.s_x.conjugate() * &sp_inv)));
        f.view_mut((0, n), (n, n)).copy_from(&(-sp_inv.transpose()));
        f.view_mut((n, 0), (n, n)).copy_from(&(-&sp_inv));
        f.view_mut((n, n), (n, n)).copy_from(&(&sp_inv * &self.s_x));
        (&f + f.transpose()) * Complex64::new(0.5, 0.0)
    }
}

/// `c_nm = (det S_p)^{−1/2} (n! m!)^{−1/2} H^{F}_{(n,m)}(0, 0)`.
pub fn amplitude_cnm(s: &BogoliubovS, n: &[usize], m: &[usize]) -> Result<Complex64> {
    let d = s.n_modes();
    if n.len() != d || m.len() != d {
        return Err(Error::Dimension("multi-index length".into()));
    }
    let order: usize = n.iter().chain(m).sum();
    if order > DEFAULT_MAX_ORDER {
        return Err(Error::OrderOverflow {
            order,
            max: DEFAULT_MAX_ORDER,
        });
    }
    let idx: Vec<usize> = n.iter().chain(m).copied().collect();
    let t = HermiteTable::new(&s.hermite_parameter(), &CVector::zeros(2 * d), &idx)?;
    Ok(t.normalized(&idx) * s.s_p.determinant().sqrt().inv())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumRuleReport {
    pub partial_sum: f64,
    /// `|det S_p|`.
    pub target: f64,
    pub residual: f64,
    /// Geometric extrapolation of the omitted shells.
    pub tail_estimate: f64,
    /// Running sums after each shell `|m| = 0, 1, …`.
    pub partials: Vec<f64>,
    /// Stopped early because ten consecutive shells were negligible.
    pub converged: bool,
}

/// `(1/n!) Σ_{|m| ≤ max_m} |H^{F}_{(n,m)}(0,0)|²/m!` against `|det S_p|`.
pub fn sum_rule_check(s: &BogoliubovS, n: &[usize], max_m: usize) -> Result<SumRuleReport> {
    let d = s.n_modes();
    if n.len() != d {
        return Err(Error::Dimension("multi-index length".into()));
    }
    let cells = n.iter().map(|&k| k + 1).product::<usize>() * (max_m + 1).pow(d as u32);
    if cells > 20_000_000 {
        return Err(Error::InvalidParameter(format!(
            "lattice of {cells} cells is too large"
        )));
    }
    let idx: Vec<usize> = n.iter().copied().chain(std::iter::repeat_n(max_m, d)).collect();
    let table = HermiteTable::new(&s.hermite_parameter(), &CVector::zeros(2 * d), &idx)?;
    let mut shells = vec![0.0; max_m + 1];
    for full in table.indices() {
        if full[..d] != *n {
            continue;
        }
        let order: usize = full[d..].iter().sum();
        if order <= max_m {
            shells[order] += table.normalized(&full).norm_sqr();
        }
    }
    let mut partials = vec![];
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut converged = false;
    for &c in &shells {
        sum += c;
        partials.push(sum);
        quiet = if c < 1e-14 * sum { quiet + 1 } else { 0 };
        if quiet >= 10 {
            converged = true;
            break;
        }
    }
    let used = partials.len();
    let pairs: Vec<f64> = shells[..used].chunks(2).map(|c| c.iter().sum()).collect();
    let tail_estimate = if converged {
        0.0
    } else {
        match pairs.as_slice() {
            [.., b] if *b == 0.0 => 0.0,
            [.., a, b] if b < a => b * (b / a) / (1.0 - b / a),
            _ => f64::INFINITY,
        }
    };
    let target = s.s_p.determinant().norm();
    Ok(SumRuleReport {
        partial_sum: sum,
        target,
        residual: (sum - target).abs(),
        tail_estimate,
        partials,
        converged,
    })
}

/// Ingredients of one state's generating function
/// `Σ_m ψ_m α^m/√(m!) = P exp(−½xᵀGx + xᵀM(α − δ) + ½αᵀCα + αᵀ(δ* − Cδ) + κ)`.
struct Generating {
    g: CMatrix,
    m: CMatrix,
    c: CMatrix,
    delta: CVector,
    prefactor: Complex64,
    kappa: Complex64,
}

impl Generating {
    fn new(ctx: &StateContext) -> Result<Self> {
        let inv = &ctx.invariants;
        let n = inv.n_modes();
        let hbar = inv.hbar;
        let lp_inv = inverse(&inv.lambda_p).ok_or(Error::SingularLambdaP(inv.t))?;
        let sym = |a: CMatrix| (&a + a.transpose()) * Complex64::new(0.5, 0.0);
        let c = sym(inv.lambda_p.conjugate() * &lp_inv);
        let d = &inv.delta;
        Ok(Self {
            g: sym(&lp_inv * &inv.lambda_x * (I / hbar)),
            m: lp_inv * (I / hbar),
            kappa: 0.5 * (d.transpose() * &c * d)[0] - 0.5 * d.norm_squared() + I * ctx.phase_integral,
            c,
            delta: d.clone(),
            prefactor: (2.0 * std::f64::consts::PI * hbar * hbar).powf(-(n as f64) / 4.0)
                * ctx.frame_abs_det.powf(-0.5)
                / ctx.sqrt_det_ratio,
        })
    }
}

/// Closed form of `⟨ψ_n(t₁)|ψ_m(t₂)⟩ = Z H^{R}_{(n,m)}` with the first
/// state conjugated, obtained by Gaussian integration of the two generating
/// functions.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapKernel {
    /// `Λ_x(t₂)Λ_p†(t₁) − Λ_p(t₂)Λ_x†(t₁)`; the Gaussian kernel is
    /// `A = (i/ħ)Λ_p(t₂)⁻¹ D (Λ_p†(t₁))⁻¹`.
    pub d: CMatrix,
    /// 2N×2N Hermite parameter.
    pub r: CMatrix,
    /// Linear coefficients `h = (u, v)` of the generating function in `(β, α)`.
    pub u: CVector,
    pub v: CVector,
    /// Overall factor; `⟨ψ_0|ψ_0⟩ = scale`.
    pub scale: Complex64,
}

impl OverlapKernel {
    pub fn new(ctx1: &StateContext, ctx2: &StateContext) -> Result<Self> {
        let n = ctx1.n_modes();
        if ctx2.n_modes() != n {
            return Err(Error::Dimension("states have different mode counts".into()));
        }
        let (i1, i2) = (&ctx1.invariants, &ctx2.invariants);
        let d = &i2.lambda_x * i1.lambda_p.adjoint() - &i2.lambda_p * i1.lambda_x.adjoint();
        if inverse(&d).is_none() {
            return Err(Error::SingularD);
        }
        let s1 = Generating::new(ctx1)?;
        let s2 = Generating::new(ctx2)?;
        let a = s1.g.conjugate() + &s2.g;
        let a_inv = inverse(&a).ok_or(Error::SingularD)?;
        let mut k = CMatrix::zeros(n, 2 * n);
        k.view_mut((0, 0), (n, n)).copy_from(&s1.m.conjugate());
        k.view_mut((0, n), (n, n)).copy_from(&s2.m);
        let j0 = -(s1.m.conjugate() * s1.delta.conjugate()) - &s2.m * &s2.delta;
        let mut q = k.transpose() * &a_inv * &k;
        let mut blk = q.view_mut((0, 0), (n, n));
        blk += s1.c.conjugate();
        let mut blk = q.view_mut((n, n), (n, n));
        blk += &s2.c;
        let h = k.transpose() * (&a_inv * &j0);
        let u = h.rows(0, n) + (&s1.delta - s1.c.conjugate() * s1.delta.conjugate());
        let v = h.rows(n, n) + (s2.delta.conjugate() - &s2.c * &s2.delta);
        let gauss = Complex64::new((2.0 * std::f64::consts::PI).powf(n as f64 / 2.0), 0.0) * inv_sqrt_det_principal(&a);
        let expo = 0.5 * (j0.transpose() * &a_inv * &j0)[0] + s1.kappa.conj() + s2.kappa;
        let r = -q;
        Ok(Self {
            d,
            r: (&r + r.transpose()) * Complex64::new(0.5, 0.0),
            u,
            v,
            scale: s1.prefactor.conj() * s2.prefactor * gauss * expo.exp(),
        })
    }

    fn linear(&self) -> CVector {
        let n = self.u.len();
        CVector::from_iterator(2 * n, self.u.iter().chain(self.v.iter()).copied())
    }

    /// Hermite table covering every `(n, m)` with `n ≤ max_n`, `m ≤ max_m` componentwise.
    pub fn table(&self, max_n: &[usize], max_m: &[usize]) -> Result<HermiteTable> {
        let idx: Vec<usize> = max_n.iter().chain(max_m).copied().collect();
        // the table solves H with linear term h = R y; pass h directly
        HermiteTable::new(&self.r, &self.linear(), &idx)
    }

    pub fn from_table(&self, table: &HermiteTable, n: &[usize], m: &[usize]) -> Complex64 {
        let idx: Vec<usize> = n.iter().chain(m).copied().collect();
        self.scale * table.normalized(&idx)
    }

    pub fn value(&self, n: &[usize], m: &[usize]) -> Result<Complex64> {
        let d = self.u.len();
        if n.len() != d || m.len() != d {
            return Err(Error::Dimension("multi-index length".into()));
        }
        Ok(self.from_table(&self.table(n, m)?, n, m))
    }
}

pub fn overlap_nm(ctx1: &StateContext, ctx2: &StateContext, n: &[usize], m: &[usize]) -> Result<Complex64> {
    OverlapKernel::new(ctx1, ctx2)?.value(n, m)
}

pub fn transition_probability(ctx1: &StateContext, ctx2: &StateContext, n: &[usize], m: &[usize]) -> Result<f64> {
    Ok(overlap_nm(ctx1, ctx2, n, m)?.norm_sqr())
}

/// Position-space quadrature of `∫ conj(ψ_n(x; t₁)) ψ_m(x; t₂) dx`, an
/// independent check on [`overlap_nm`].
pub fn overlap_quadrature(ctx1: &StateContext, ctx2: &StateContext, n: &[usize], m: &[usize]) -> Result<Complex64> {
    let d = ctx1.n_modes();
    let zero = CVector::zeros(d);
    let w1 = QuadratureWindow::for_state(&ctx1.invariants, &zero, n.iter().sum(), 10.0)?;
    let w2 = QuadratureWindow::for_state(&ctx2.invariants, &zero, m.iter().sum(), 10.0)?;
    let (p1, p2) = (ctx1.prepare()?, ctx2.prepare()?);
    let base = gauss_legendre(8);
    let mut axes = vec![];
    for k in 0..d {
        let lo = (w1.center[k] - w1.half_width[k]).min(w2.center[k] - w2.half_width[k]);
        let hi = (w1.center[k] + w1.half_width[k]).max(w2.center[k] + w2.half_width[k]);
        let rate = w1.wavenumber[k] + w2.wavenumber[k];
        let env = w1.envelope[k].min(w2.envelope[k]);
        let panels = ((hi - lo) * rate).ceil().max((hi - lo) / (0.5 * env)).max(8.0) as usize;
        axes.push(composite_points(&base, lo, hi, panels));
    }
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut acc = Complex64::new(0.0, 0.0);
    'outer: loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = axes[k].nodes[idx[k]];
            w *= axes[k].weights[idx[k]];
        }
        acc += p1.fock(n, &x)?.conj() * p2.fock(m, &x)? * w;
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < axes[k].nodes.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    Ok(acc)
}
