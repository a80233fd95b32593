//! Multivariable Hermite polynomials `H_m^{R}(x)`, defined by
//!
//! `exp(−½ aᵀRa + aᵀRx) = Σ_m H_m^{R}(x) a^m / m!`
//!
//! and evaluated with the lattice recurrence
//! `H_{m+e_k} = (Rx)_k H_m − Σ_j R_kj m_j H_{m−e_j}`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::linalg::{asymmetry_c, factorial, multi_factorial};
use crate::{CMatrix, CVector, Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 32;
const ORACLE_MAX_ORDER: usize = 12;

/// A symmetric complex parameter matrix and a multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpec {
    r: CMatrix,
    m: Vec<usize>,
}

impl HermiteSpec {
    pub fn new(r: CMatrix, m: Vec<usize>) -> Result<Self> {
        Self::with_max_order(r, m, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(r: CMatrix, m: Vec<usize>, max_order: usize) -> Result<Self> {
        check_parameter(&r, m.len())?;
        let order: usize = m.iter().sum();
        if order > max_order {
            return Err(Error::OrderOverflow { order, max: max_order });
        }
        Ok(Self { r, m })
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn index(&self) -> &[usize] {
        &self.m
    }
}

fn check_parameter(r: &CMatrix, d: usize) -> Result<()> {
    if r.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "R is {:?}, multi-index has length {d}",
            r.shape()
        )));
    }
    let asym = asymmetry_c(r);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// `H_m^{R}(x)`.
pub fn hermite_eval(spec: &HermiteSpec, x: &CVector) -> Result<Complex64> {
    if x.len() != spec.m.len() {
        return Err(Error::Dimension(format!(
            "x has length {}, expected {}",
            x.len(),
            spec.m.len()
        )));
    }
    let h = &spec.r * x;
    Ok(HermiteTable::new(&spec.r, &h, &spec.m)?.value(&spec.m))
}

/// Table of `H_m` for every `m` in the box `0 ≤ m_k ≤ max_index_k`, given
/// `R` and the linear coefficient `h = Rx` directly (so `R` may be singular).
///
/// Entries are stored as `H_m / √(m!)`, which stays finite for large orders.
#[derive(Debug, Clone)]
pub struct HermiteTable {
    extent: Vec<usize>,
    stride: Vec<usize>,
    data: Vec<Complex64>,
}

impl HermiteTable {
    pub fn new(r: &CMatrix, h: &CVector, max_index: &[usize]) -> Result<Self> {
        let d = max_index.len();
        check_parameter(r, d)?;
        if h.len() != d {
            return Err(Error::Dimension(format!(
                "linear term has length {}, expected {d}",
                h.len()
            )));
        }
        let extent: Vec<usize> = max_index.iter().map(|&k| k + 1).collect();
        let mut stride = vec![1usize; d];
        for k in 1..d {
            stride[k] = stride[k - 1] * extent[k - 1];
        }
        let size: usize = extent.iter().product();
        let mut data = vec![Complex64::new(0.0, 0.0); size];
        data[0] = Complex64::new(1.0, 0.0);
        let mut idx = vec![0usize; d];
        for lin in 1..size {
            // advance the mixed-radix counter (axis 0 fastest)
            for a in 0..d {
                idx[a] += 1;
                if idx[a] < extent[a] {
                    break;
                }
                idx[a] = 0;
            }
            let k = idx.iter().position(|&v| v > 0).expect("nonzero index");
            let prev = lin - stride[k];
            let mut acc = h[k] * data[prev];
            for j in 0..d {
                let mj = if j == k { idx[j] - 1 } else { idx[j] };
                if mj > 0 {
                    acc -= r[(k, j)] * (mj as f64).sqrt() * data[prev - stride[j]];
                }
            }
            data[lin] = acc / (idx[k] as f64).sqrt();
        }
        Ok(Self { extent, stride, data })
    }

    fn offset(&self, m: &[usize]) -> usize {
        assert_eq!(m.len(), self.extent.len(), "multi-index length");
        m.iter()
            .zip(&self.extent)
            .zip(&self.stride)
            .map(|((&v, &e), &s)| {
                assert!(v < e, "multi-index outside the table");
                v * s
            })
            .sum()
    }

    /// `H_m / √(m!)`.
    pub fn normalized(&self, m: &[usize]) -> Complex64 {
        self.data[self.offset(m)]
    }

    /// `H_m`.
    pub fn value(&self, m: &[usize]) -> Complex64 {
        self.normalized(m) * multi_factorial(m).sqrt()
    }

    /// All multi-indices in the box, axis 0 fastest.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.data.len()).map(move |mut lin| {
            self.extent
                .iter()
                .map(|&e| {
                    let v = lin % e;
                    lin /= e;
                    v
                })
                .collect()
        })
    }
}

/// Every `H_m^{R}(x)` with `|m| ≤ max_order`, by multiplying out the truncated
/// exponential series of the generating function.
pub fn hermite_series_oracle(r: &CMatrix, x: &CVector, max_order: usize) -> Result<BTreeMap<Vec<usize>, Complex64>> {
    if max_order > ORACLE_MAX_ORDER {
        return Err(Error::OrderOverflow {
            order: max_order,
            max: ORACLE_MAX_ORDER,
        });
    }
    let d = x.len();
    check_parameter(r, d)?;
    let h = r * x;
    let unit = |k: usize| -> Vec<usize> {
        let mut e = vec![0; d];
        e[k] = 1;
        e
    };
    let mut q: Poly = BTreeMap::new();
    for i in 0..d {
        add(&mut q, unit(i), h[i]);
        for j in 0..d {
            let mut e = unit(i);
            e[j] += 1;
            add(&mut q, e, -0.5 * r[(i, j)]);
        }
    }
    let mut term: Poly = BTreeMap::from([(vec![0; d], Complex64::new(1.0, 0.0))]);
    let mut sum = term.clone();
    for k in 1..=max_order {
        term = multiply(&term, &q, max_order);
        for v in term.values_mut() {
            *v /= k as f64;
        }
        for (e, v) in &term {
            add(&mut sum, e.clone(), *v);
        }
    }
    let mut out = BTreeMap::new();
    for m in all_indices(d, max_order) {
        let c = sum.get(&m).copied().unwrap_or_default();
        out.insert(m.clone(), c * multi_factorial(&m));
    }
    Ok(out)
}

type Poly = BTreeMap<Vec<usize>, Complex64>;

fn add(p: &mut Poly, e: Vec<usize>, v: Complex64) {
    *p.entry(e).or_default() += v;
}

fn multiply(a: &Poly, b: &Poly, max_degree: usize) -> Poly {
    let mut out = Poly::new();
    for (ea, va) in a {
        let da: usize = ea.iter().sum();
        for (eb, vb) in b {
            if da + eb.iter().sum::<usize>() > max_degree {
                continue;
            }
            let e: Vec<usize> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            add(&mut out, e, va * vb);
        }
    }
    out
}

/// Multi-indices of length `d` with total order `≤ max_order`.
pub fn all_indices(d: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![0; d];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(k + 1, left - v, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, max_order, &mut cur, &mut out);
    out
}

/// `H^{R}_{nm}(0,0)` through associated Legendre functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreBridge {
    /// `min(n,m)! (−1)^{max(n,m)} r^μ s^{(L−μ)/2} P^μ_L(z) / (1−z²)^{μ/2}` with
    /// `s = r₁₂² − r₁₁r₂₂`, `z = r₁₂/√s`, `L = (n+m)/2`, `μ = |n−m|/2` and
    /// `r = r₁₁` for `n ≥ m`, `r₂₂` otherwise. Evaluated as a polynomial in
    /// `r₁₂`, `s`, so no branch choice enters.
    pub value: Complex64,
    /// Recurrence value.
    pub direct: Complex64,
    /// The variant with argument `r₁₂/(r₁₂² − r₁₁r₂₂)`, prefactor
    /// `(−1)^{(n+m)/2} r₁₁^{n/2} r₂₂^{m/2} (r₁₂²/(r₁₁r₂₂) − 1)^{(n+m)/4}`, principal powers.
    pub printed: Complex64,
    /// `n + m` odd: every value is zero by parity.
    pub parity_zero: bool,
}

pub fn hermite2d_legendre(r: &CMatrix, n: usize, m: usize) -> Result<LegendreBridge> {
    check_parameter(r, 2)?;
    let zero = Complex64::new(0.0, 0.0);
    let direct = HermiteTable::new(r, &CVector::zeros(2), &[n, m])?.value(&[n, m]);
    if (n + m) % 2 == 1 {
        return Ok(LegendreBridge {
            value: zero,
            direct,
            printed: zero,
            parity_zero: true,
        });
    }
    let (r11, r12, r22) = (r[(0, 0)], r[(0, 1)], r[(1, 1)]);
    let l = (n + m) / 2;
    let mu = n.abs_diff(m) / 2;
    let s = r12 * r12 - r11 * r22;

    let mut q_prev = Complex64::new(0.0, 0.0);
    let mut q = Complex64::new(
        if mu.is_multiple_of(2) { 1.0 } else { -1.0 } * double_factorial(2 * mu as i64 - 1),
        0.0,
    );
    for k in mu + 1..=l {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * r12 * q - (kf + mu as f64 - 1.0) * s * q_prev) / (kf - mu as f64);
        q_prev = q;
        q = next;
    }
    let sign = if n.max(m).is_multiple_of(2) { 1.0 } else { -1.0 };
    let base = if n >= m { r11 } else { r22 };
    let value = factorial(n.min(m)) * sign * base.powu(mu as u32) * q;

    let z = r12 / s;
    let printed = factorial(n.min(m))
        * if l.is_multiple_of(2) { 1.0 } else { -1.0 }
        * r11.powf(n as f64 / 2.0)
        * r22.powf(m as f64 / 2.0)
        * (r12 * r12 / (r11 * r22) - 1.0).powf(l as f64 / 2.0)
        * legendre_assoc_complex(l, mu, z);
    Ok(LegendreBridge {
        value,
        direct,
        printed,
        parity_zero: false,
    })
}

fn double_factorial(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut v = k;
    while v > 1 {
        acc *= v as f64;
        v -= 2;
    }
    acc
}

/// Associated Legendre function `P^μ_l(z)` with the Condon–Shortley phase.
///
/// Degree and order must be integers with `0 ≤ μ ≤ l`. For `|z| > 1` the value
/// is real only for even `μ`.
pub fn legendre_assoc(l: f64, mu: f64, z: f64) -> Result<f64> {
    if l.fract() != 0.0 || mu.fract() != 0.0 || !(0.0..=l).contains(&mu) {
        return Err(Error::DomainError(format!(
            "need integers 0 <= mu <= l, got l = {l}, mu = {mu}"
        )));
    }
    let (l, mu) = (l as usize, mu as usize);
    if z.abs() > 1.0 && mu % 2 == 1 {
        return Err(Error::DomainError(format!("P^{mu}_{l}({z}) is not real")));
    }
    let v = legendre_assoc_complex(l, mu, Complex64::new(z, 0.0));
    Ok(v.re)
}

/// Complex-argument `P^μ_l(z)` with `(1−z²)^{μ/2}` on the principal branch.
pub fn legendre_assoc_complex(l: usize, mu: usize, z: Complex64) -> Complex64 {
    if mu > l {
        return Complex64::new(0.0, 0.0);
    }
    let w = (Complex64::new(1.0, 0.0) - z * z).powf(mu as f64 / 2.0);
    let sign = if mu.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut p_prev = Complex64::new(0.0, 0.0);
    let mut p = w * sign * double_factorial(2 * mu as i64 - 1);
    for k in mu + 1..=l {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * z * p - (kf + mu as f64 - 1.0) * p_prev) / (kf - mu as f64);
        p_prev = p;
        p = next;
    }
    p
}
