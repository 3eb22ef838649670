//! Finite-N correlation kernels.
//!
//! All kernels are evaluated in the angle variable φ with x = −cot φ. The
//! value returned by the `*_angle` functions is the kernel on the real line,
//! S(x, y); the scaled kernels multiply by dz/dX = 1/(L sin²φ) where φ = X/L
//! and L is N, or N + p for the tuned scaling.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{tanh_sinh, tanh_sinh_vec, DeOptions, Node};
use crate::routh_romanovski::{angle_values, rr_log_norm, AngleValues, EnsembleParams, RrRecurrence};
use crate::special_fns::log_gamma;

/// Angles closer than this (times the degree) use the confluent form.
const DIAG_SWITCH: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// φ = X/N.
    #[default]
    Standard,
    /// φ = X/(N + p).
    Tuned,
}

impl Scaling {
    pub fn length(self, params: &EnsembleParams) -> f64 {
        match self {
            Scaling::Standard => params.n as f64,
            Scaling::Tuned => params.n as f64 + params.p,
        }
    }
}

/// Recurrence coefficients up to a fixed degree m and log norms up to
/// degree m − 1, for one weight exponent. Immutable once built.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub c: C64,
    pub rec: RrRecurrence,
    pub log_h: Vec<f64>,
}

impl KernelTable {
    pub fn new(c: C64, max_degree: usize) -> Result<Self> {
        if max_degree > 0 && !(c.re < -(max_degree as f64) + 0.5) {
            return Err(Error::InvalidParams(format!(
                "degree {max_degree} not square integrable for c = {c}"
            )));
        }
        let log_h = (0..max_degree.max(1))
            .map(|n| rr_log_norm(n, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelTable {
            c,
            rec: RrRecurrence::new(c, max_degree),
            log_h,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.rec.max_degree()
    }

    pub fn h(&self, j: usize) -> f64 {
        self.log_h[j].exp()
    }

    /// γ_j = (−Re c − 1 − j)/h_j.
    pub fn gamma(&self, j: usize) -> f64 {
        (-self.c.re - 1.0 - j as f64) / self.h(j)
    }

    pub fn at(&self, phi: f64, sin_phi: f64, deriv: bool) -> AngleValues {
        angle_values(&self.rec, self.max_degree(), phi, sin_phi, deriv)
    }

    /// ∫_{−∞}^{x} Ĩ_k ω̃₁ dt = ∫_0^φ ω₂^{1/2} Ĩ_k(−cot u) / sin u du.
    pub fn partial_w1(&self, k: usize, phi: f64, opts: &DeOptions) -> Result<f64> {
        if phi <= 0.0 {
            return Ok(0.0);
        }
        let opts = DeOptions {
            abs_tol: 1e-15 * (0.5 * self.log_h[k.min(self.log_h.len() - 1)]).exp(),
            ..*opts
        };
        let v = tanh_sinh(
            |n: Node| {
                let s = if n.from_a < 0.5 { n.from_a.sin() } else { n.x.sin() };
                let av = angle_values(&self.rec, k, n.x, s, false);
                C64::new(av.single(k, -1), 0.0)
            },
            0.0,
            phi,
            &opts,
        )?;
        Ok(v.re)
    }

    /// ½∫ Ĩ_k ω̃₁ over the line, for every k up to the table degree.
    pub fn s_tilde_all(&self, opts: &DeOptions) -> Result<Vec<f64>> {
        let m = self.max_degree();
        let v = tanh_sinh_vec(
            |n: Node| {
                let s = if n.from_a <= n.to_b { n.from_a.sin() } else { n.to_b.sin() };
                let av = angle_values(&self.rec, m, n.x, s, false);
                (0..=m).map(|k| 0.5 * av.single(k, -1)).collect()
            },
            m + 1,
            0.0,
            PI,
            opts,
        )?;
        Ok(v)
    }
}

/// ∫ ω̃₁ over the line, with P = −Re c:
/// 2^{1−P} π Γ(P) / |Γ((P+1)/2 + i Im c/2)|².
pub fn w1_total(c: C64) -> Result<f64> {
    let pp = -c.re;
    let lg = log_gamma(C64::new(pp, 0.0))?.re - 2.0 * log_gamma(C64::new((pp + 1.0) / 2.0, c.im / 2.0))?.re;
    Ok(((1.0 - pp) * 2f64.ln() + lg).exp() * PI)
}

/// ∫ Ĩ_{2m} ω̃₁ over the line as ∫ω̃₁ · ∏_{j<m} γ_{2j}/γ_{2j+1}.
pub fn w1_even_total(t: &KernelTable, two_m: usize) -> Result<f64> {
    if two_m % 2 != 0 {
        return Err(Error::Domain(format!("degree {two_m} is odd")));
    }
    let mut v = w1_total(t.c)?;
    for j in 0..two_m / 2 {
        v *= t.gamma(2 * j) / t.gamma(2 * j + 1);
    }
    Ok(v)
}

/// Constants entering the β = 1 and β = 4 kernels.
#[derive(Debug, Clone)]
pub struct SkewConstants {
    pub gamma_j: Vec<f64>,
    pub eta1: f64,
    pub eta2: f64,
    pub s_tilde_k: Vec<f64>,
}

/// η₁ = 2√π Γ(p+2) Γ(p+5/2) / |Γ((p+3)/2 + iq)|².
pub fn eta1(p: f64, q: f64) -> Result<f64> {
    let lg = log_gamma(C64::new(p + 2.0, 0.0))?.re + log_gamma(C64::new(p + 2.5, 0.0))?.re
        - 2.0 * log_gamma(C64::new((p + 3.0) / 2.0, q))?.re;
    Ok(2.0 * PI.sqrt() * lg.exp())
}

/// η₂ = −(p+1) e^{−qπ} 2^{2p+2} |Γ(p+2−2iq)|² / (π Γ(2p+4) Γ(2p+3)).
pub fn eta2(p: f64, q: f64) -> Result<f64> {
    let lg = 2.0 * log_gamma(C64::new(p + 2.0, -2.0 * q))?.re
        - log_gamma(C64::new(2.0 * p + 4.0, 0.0))?.re
        - log_gamma(C64::new(2.0 * p + 3.0, 0.0))?.re;
    Ok(-(p + 1.0) * (-q * PI + (2.0 * p + 2.0) * 2f64.ln() + lg).exp() / PI)
}

impl SkewConstants {
    /// γ_j and s̃_k for the kernel weight of `params` (β = 1 or 4).
    pub fn new(params: &EnsembleParams, opts: &DeOptions) -> Result<Self> {
        let t = FiniteKernel::new(params)?.table;
        let top = t.max_degree();
        Ok(SkewConstants {
            gamma_j: (0..top).map(|j| t.gamma(j)).collect(),
            eta1: eta1(params.p, params.q)?,
            eta2: eta2(params.p, params.q)?,
            s_tilde_k: t.s_tilde_all(opts)?,
        })
    }
}

/// S_{n,2}(x, y) for the weight exponent of `t`, x = −cot φ, y = −cot ψ,
/// in Christoffel–Darboux form with a confluent switch near φ = ψ.
pub fn s2_angle(t: &KernelTable, n: usize, phi: f64, psi: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let lh = t.log_h[n - 1];
    if (phi - psi).abs() * (n as f64 + 1.0) < DIAG_SWITCH {
        // the antisymmetric numerator is (φ − ψ) g(m) + O((φ − ψ)³)
        let m = 0.5 * (phi + psi);
        let sm = m.sin();
        let av = angle_values(&t.rec, n, m, sm, true);
        let (da, la) = av.split_deriv(n);
        let (b, lb) = av.split(n - 1, 0);
        let (a, _) = av.split(n, 0);
        let (db, _) = av.split_deriv(n - 1);
        return (da * b - a * db) * (la + lb - lh).exp() * sm * sm;
    }
    let (sp, ss) = (phi.sin(), psi.sin());
    let u = angle_values(&t.rec, n, phi, sp, false);
    let v = angle_values(&t.rec, n, psi, ss, false);
    cd_numerator(&u, &v, n, lh) * sp * ss / (phi - psi).sin()
}

fn cd_numerator(u: &AngleValues, v: &AngleValues, n: usize, lh: f64) -> f64 {
    let (a1, la1) = u.split(n, 0);
    let (b0, lb0) = v.split(n - 1, 0);
    let (b1, lb1) = v.split(n, 0);
    let (a0, la0) = u.split(n - 1, 0);
    a1 * b0 * (la1 + lb0 - lh).exp() - b1 * a0 * (lb1 + la0 - lh).exp()
}

/// Σ_{k<n} ω₂^{1/2}Ĩ_k(x) ω₂^{1/2}Ĩ_k(y) / h_k.
pub fn s2_direct_sum(t: &KernelTable, n: usize, phi: f64, psi: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let u = angle_values(&t.rec, n - 1, phi, phi.sin(), false);
    let v = angle_values(&t.rec, n - 1, psi, psi.sin(), false);
    (0..n)
        .map(|k| {
            let (a, la) = u.split(k, 0);
            let (b, lb) = v.split(k, 0);
            a * b * (la + lb - t.log_h[k]).exp()
        })
        .sum()
}

/// Prepared finite-N kernel for one parameter set.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    pub params: EnsembleParams,
    pub table: KernelTable,
    pub opts: DeOptions,
    /// Full-line integrals used by the β = 1 kernels, indexed by degree.
    totals: Option<Vec<f64>>,
}

impl FiniteKernel {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        Self::with_options(params, DeOptions::default())
    }

    pub fn with_options(params: &EnsembleParams, opts: DeOptions) -> Result<Self> {
        params.validate()?;
        let c = params.kernel_c()?;
        let n = params.n;
        let top = match params.beta {
            1 | 2 => n,
            _ => 2 * n,
        };
        if params.beta != 2 && !(params.p > 0.0) {
            return Err(Error::InvalidParams(format!("beta = {} kernels need p > 0", params.beta)));
        }
        let table = KernelTable::new(c, top)?;
        let totals = if params.beta == 1 && n % 2 == 1 {
            Some(table.s_tilde_all(&opts)?.iter().map(|s| 2.0 * s).collect())
        } else {
            None
        };
        Ok(FiniteKernel {
            params: *params,
            table,
            opts,
            totals,
        })
    }

    /// Kernel on the line at x = −cot φ, y = −cot ψ.
    pub fn eval_angle(&self, phi: f64, psi: f64) -> Result<f64> {
        for a in [phi, psi] {
            if !(a > 0.0 && a < PI) {
                return Err(Error::Domain(format!("angle {a} outside (0, pi)")));
            }
        }
        match self.params.beta {
            2 => Ok(s2_angle(&self.table, self.params.n, phi, psi)),
            1 if self.params.n % 2 == 0 => self.s1_even(phi, psi),
            1 => self.s1_odd(phi, psi),
            4 => self.s4(phi, psi),
            b => Err(Error::Unsupported(format!("finite kernel for beta = {b}"))),
        }
    }

    pub fn eval_line(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_angle(1f64.atan2(-x), 1f64.atan2(-y))
    }

    /// S(z(X), z(Y)) dz/dX.
    pub fn eval_scaled(&self, x_big: f64, y_big: f64, scaling: Scaling) -> Result<f64> {
        let l = scaling.length(&self.params);
        let (phi, psi) = (x_big / l, y_big / l);
        let v = self.eval_angle(phi, psi)?;
        let s = phi.sin();
        Ok(v / (l * s * s))
    }

    fn s1_even(&self, phi: f64, psi: f64) -> Result<f64> {
        let n = self.params.n;
        let t = &self.table;
        let (sp, ss) = (phi.sin(), psi.sin());
        let tot = w1_even_total(t, n - 2)?;
        let part = t.partial_w1(n - 2, phi, &self.opts)?;
        let v = angle_values(&t.rec, n - 1, psi, ss, false);
        let t1 = ss / sp * s2_angle(t, n - 1, phi, psi);
        let t2 = 0.5 * t.gamma(n - 2) * v.single(n - 1, 1) * (2.0 * part - tot);
        Ok(t1 + t2)
    }

    fn s1_odd(&self, phi: f64, psi: f64) -> Result<f64> {
        let n = self.params.n;
        let t = &self.table;
        let tot = self.totals.as_ref().expect("odd totals");
        let st = |k: usize| 0.5 * tot[k];
        let ss = psi.sin();
        let v = angle_values(&t.rec, n - 1, psi, ss, false);
        let lead = v.single(n - 1, 1) / (2.0 * st(n - 1));
        if n == 1 {
            return Ok(lead);
        }
        let sp = phi.sin();
        // G_k(φ) = ∫ sgn(x − t) Ĩ_k ω̃₁ dt
        let g = |k: usize| -> Result<f64> { Ok(2.0 * t.partial_w1(k, phi, &self.opts)? - tot[k]) };
        let even = ss / sp * s2_angle(t, n - 2, phi, psi) + 0.5 * t.gamma(n - 3) * v.single(n - 2, 1) * g(n - 3)?;
        let cross = v.single(n - 2, 1) * g(n - 1)? - v.single(n - 1, 1) * g(n - 2)?;
        Ok(even + lead - 0.5 * t.gamma(n - 3) * st(n - 3) / st(n - 1) * cross)
    }

    fn s4(&self, phi: f64, psi: f64) -> Result<f64> {
        let m = 2 * self.params.n;
        let t = &self.table;
        let (sp, ss) = (phi.sin(), psi.sin());
        let v = angle_values(&t.rec, m, psi, ss, false);
        let part = t.partial_w1(m - 1, phi, &self.opts)?;
        let t1 = 0.5 * ss / sp * s2_angle(t, m, phi, psi);
        let t2 = 0.5 * t.gamma(m - 1) * v.single(m, 1) * part;
        Ok(t1 + t2)
    }

    /// ∫ S(x, x) dx over the line.
    pub fn trace(&self) -> Result<f64> {
        let err = std::cell::RefCell::new(None);
        let v = tanh_sinh(
            |n: Node| {
                let s = n.x.sin();
                if s < 1e-12 {
                    return C64::new(0.0, 0.0);
                }
                match self.eval_angle(n.x, n.x) {
                    Ok(v) => C64::new(v / (s * s), 0.0),
                    Err(e) => {
                        *err.borrow_mut() = Some(e);
                        C64::new(0.0, 0.0)
                    }
                }
            },
            0.0,
            PI,
            &DeOptions {
                rel_tol: 1e-10,
                ..self.opts
            },
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(v?.re)
    }
}

fn beta_params(params: &EnsembleParams, beta: u32) -> Result<EnsembleParams> {
    if params.beta != beta {
        return Err(Error::InvalidParams(format!("expected beta = {beta}, got {}", params.beta)));
    }
    Ok(*params)
}

/// S_{N,2}(x, y).
pub fn kernel_s2(x: f64, y: f64, params: &EnsembleParams) -> Result<f64> {
    FiniteKernel::new(&beta_params(params, 2)?)?.eval_line(x, y)
}

/// S_{N,2}(z(X), z(Y)) dz/dX with z(X) = −cot(X/N).
pub fn kernel_s2_scaled(x_big: f64, y_big: f64, params: &EnsembleParams) -> Result<f64> {
    FiniteKernel::new(&beta_params(params, 2)?)?.eval_scaled(x_big, y_big, Scaling::Standard)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// S_{N,1}(x, y); `parity` must match N.
pub fn kernel_s1(x: f64, y: f64, params: &EnsembleParams, parity: Parity) -> Result<f64> {
    let p = beta_params(params, 1)?;
    let actual = if p.n % 2 == 0 { Parity::Even } else { Parity::Odd };
    if actual != parity {
        return Err(Error::InvalidParams(format!("N = {} has parity {actual:?}", p.n)));
    }
    FiniteKernel::new(&p)?.eval_line(x, y)
}

/// S_{N,4}(x, y).
pub fn kernel_s4(x: f64, y: f64, params: &EnsembleParams) -> Result<f64> {
    FiniteKernel::new(&beta_params(params, 4)?)?.eval_line(x, y)
}

/// ∫_{−∞}^{z(X)} Ĩ_degree ω̃₁ dt for the kernel weight of `params`, with
/// z(X) = −cot(X/N).
pub fn tail_integral(degree: usize, upper_x: f64, params: &EnsembleParams, opts: &DeOptions) -> Result<C64> {
    let n = params.n as f64;
    let phi = upper_x / n;
    if !(phi >= 0.0 && phi < PI) {
        return Err(Error::Domain(format!("X/N = {phi} outside [0, pi)")));
    }
    let c = params.kernel_c()?;
    let t = KernelTable::new(c, degree)?;
    Ok(C64::new(t.partial_w1(degree, phi, opts)?, 0.0))
}

/// det[S_{N,2}(x_m, x_n)].
pub fn correlation_det(points: &[f64], params: &EnsembleParams) -> Result<f64> {
    let k = FiniteKernel::new(&beta_params(params, 2)?)?;
    let phis: Vec<f64> = points.iter().map(|x| 1f64.atan2(-x)).collect();
    let mut m = vec![vec![0.0; phis.len()]; phis.len()];
    for (i, a) in phis.iter().enumerate() {
        for (j, b) in phis.iter().enumerate() {
            m[i][j] = k.eval_angle(*a, *b)?;
        }
    }
    Ok(determinant(m))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}
