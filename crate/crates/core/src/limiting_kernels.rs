//! Scaled large-N limits of the kernels and their 1/N and 1/N² corrections,
//! built from confluent hypergeometric blocks.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::finite_kernels::{eta1, eta2};
use crate::quadrature::{tanh_sinh_vec, DeOptions, Node};
use crate::routh_romanovski::EnsembleParams;
use crate::special_fns::{hyp1f1, hyp2f1_terminating, log_gamma, SeriesControl};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Relative separation below which X = Y is treated by the confluent limit.
const DIAG_SWITCH: f64 = 1e-6;

/// Parameters of Ã^{(p+k, q)}(j; X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfluentBlock {
    pub p: f64,
    pub q_eff: f64,
    pub k: u32,
}

impl ConfluentBlock {
    pub fn new(p: f64, q_eff: f64, k: u32) -> Result<Self> {
        let b = ConfluentBlock { p, q_eff, k };
        let a = b.shift();
        if a < 0.0 || (a == 0.0 && q_eff != 0.0) || !a.is_finite() {
            return Err(Error::InvalidParams(format!(
                "confluent block needs p + k > 0 (p + k = 0 only with q = 0), got p + k = {a}, q = {q_eff}"
            )));
        }
        Ok(b)
    }

    fn shift(&self) -> f64 {
        self.p + self.k as f64
    }

    fn next(&self) -> Self {
        ConfluentBlock { k: self.k + 1, ..*self }
    }
}

/// Ã^{(p+k,q)}(j; X) = ((p+k−iq)_j/(2p+2k)_j) ₁F₁(p+k+j−iq; 2p+2k+j; 2iX).
///
/// At p + k = 0 (q = 0) the values are the limits ½(1 + e^{2iX}) for j = 0
/// and ½e^{2iX} for j ≥ 1.
pub fn a_confluent(j: usize, block: &ConfluentBlock, x: f64) -> Result<C64> {
    let a = block.shift();
    let z = C64::new(0.0, 2.0 * x);
    if a == 0.0 {
        return Ok(if j == 0 { 0.5 * (1.0 + z.exp()) } else { 0.5 * z.exp() });
    }
    let aa = C64::new(a, -block.q_eff);
    let mut r = C64::new(1.0, 0.0);
    for i in 0..j {
        r *= (aa + i as f64) / (2.0 * a + i as f64);
    }
    Ok(r * hyp1f1(aa + j as f64, C64::new(2.0 * a + j as f64, 0.0), z, &SeriesControl::default())?)
}

/// A value together with its derivative in X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: C64,
    pub d: C64,
}

impl Dual {
    pub fn constant(v: C64) -> Self {
        Dual {
            v,
            d: C64::new(0.0, 0.0),
        }
    }

    pub fn var(x: f64) -> Self {
        Dual {
            v: C64::new(x, 0.0),
            d: C64::new(1.0, 0.0),
        }
    }

    fn powi(self, n: i32) -> Self {
        let mut r = Dual::constant(C64::new(1.0, 0.0));
        for _ in 0..n {
            r = r * self;
        }
        r
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            d: self.d + o.d,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            d: self.d - o.d,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl Mul<C64> for Dual {
    type Output = Dual;
    fn mul(self, o: C64) -> Dual {
        Dual {
            v: self.v * o,
            d: self.d * o,
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, o: f64) -> Dual {
        Dual {
            v: self.v * o,
            d: self.d * o,
        }
    }
}

/// C̃₀, C̃₁, C̃₂ of one block at one point, carried as duals in X.
#[derive(Debug, Clone, Copy)]
struct Side {
    c: [Dual; 3],
}

fn side(block: &ConfluentBlock, x: Dual) -> Result<Side> {
    let xr = x.v.re;
    let mut raw = [C64::new(0.0, 0.0); 6];
    let top = if x.d == C64::new(0.0, 0.0) { 4 } else { 5 };
    for (j, r) in raw.iter_mut().enumerate().take(top + 1) {
        *r = a_confluent(j, block, xr)?;
    }
    // dÃ(j)/dX = 2iÃ(j+1)
    let a: Vec<Dual> = (0..5)
        .map(|j| Dual {
            v: raw[j],
            d: 2.0 * I * raw[j + 1] * x.d,
        })
        .collect();
    let k = block.k as f64;
    let p = block.p;
    let t = x * (2.0 * I);
    let w = C64::new(block.q_eff, k);
    let c0 = a[0];
    let p1 = t.powi(2) * (a[1] - a[2]) * 0.5 - t * a[1] * k;
    let c1 = p1 + x * c0 * w;
    let p2 = t.powi(4) * (a[2] - a[3] * 2.0 + a[4]) * (1.0 / 8.0)
        + t.powi(3) * (a[1] - a[2] * (3.0 * (k + 1.0)) + a[3] * (3.0 * k + 2.0)) * (1.0 / 6.0)
        + t.powi(2) * (a[1] * (-2.0 * k) + a[2] * (2.0 * k * (k + 1.0))) * 0.25;
    let c2 = p2 + x * p1 * w + x.powi(2) * c0 * (w * w * 0.5 - (k + p) / 6.0);
    Ok(Side { c: [c0, c1, c2] })
}

/// C̃₀, C̃₁ or C̃₂ of the block (p, q_eff, k) at X.
pub fn c_tilde(order: usize, k: u32, p: f64, q_eff: f64, x: f64) -> Result<C64> {
    if order > 2 {
        return Err(Error::Domain(format!("c_tilde order {order} > 2")));
    }
    let b = ConfluentBlock::new(p, q_eff, k)?;
    Ok(side(&b, Dual::constant(C64::new(x, 0.0)))?.c[order].v)
}

/// J₀, J₁, J₂ and the constants Q₁, Q₂ of the block (p, q_eff, k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JBlocks {
    pub j0: C64,
    pub j1: C64,
    pub j2: C64,
    pub q1: f64,
    pub q2: f64,
}

fn q1(p: f64, k: f64) -> f64 {
    p * (2.0 * p + 2.0 * k + 1.0)
}

fn q2(p: f64, k: f64, x: f64, y: f64) -> f64 {
    -x * y / 3.0 + (p + k) * (2.0 * p + 2.0 * k + 1.0) * (6.0 * p * p - p - k - 1.0) / 6.0
}

/// f_i(X, Y) with J_i = f_i(X, Y) − f_i(Y, X).
fn fblocks(x: Dual, sx1: &Side, sy0: &Side) -> [Dual; 3] {
    let (a, b) = (&sx1.c, &sy0.c);
    [
        x * a[0] * b[0],
        x * (a[0] * b[1] + a[1] * b[0]),
        x * (a[2] * b[0] + a[1] * b[1] + a[0] * b[2]),
    ]
}

pub fn j_blocks(k: u32, p: f64, q_eff: f64, x: f64, y: f64) -> Result<JBlocks> {
    let b0 = ConfluentBlock::new(p, q_eff, k)?;
    let b1 = b0.next();
    let (xd, yd) = (Dual::constant(C64::new(x, 0.0)), Dual::constant(C64::new(y, 0.0)));
    let f = fblocks(xd, &side(&b1, xd)?, &side(&b0, yd)?);
    let g = fblocks(yd, &side(&b1, yd)?, &side(&b0, xd)?);
    let kf = k as f64;
    Ok(JBlocks {
        j0: (f[0] - g[0]).v,
        j1: (f[1] - g[1]).v,
        j2: (f[2] - g[2]).v,
        q1: q1(p, kf),
        q2: q2(p, kf, x, y),
    })
}

/// J_i(X, Y)/(X − Y), with the X = Y value taken as ∂_X J_i at the midpoint.
fn j_over_diff(b0: &ConfluentBlock, x: f64, y: f64) -> Result<[C64; 3]> {
    let b1 = b0.next();
    if (x - y).abs() > DIAG_SWITCH * x.abs().max(y.abs()).max(1.0) {
        let (xd, yd) = (Dual::constant(C64::new(x, 0.0)), Dual::constant(C64::new(y, 0.0)));
        let f = fblocks(xd, &side(&b1, xd)?, &side(b0, yd)?);
        let g = fblocks(yd, &side(&b1, yd)?, &side(b0, xd)?);
        let d = x - y;
        return Ok([(f[0] - g[0]).v / d, (f[1] - g[1]).v / d, (f[2] - g[2]).v / d]);
    }
    let m = 0.5 * (x + y);
    let xv = Dual::var(m);
    let yc = Dual::constant(C64::new(m, 0.0));
    let f = fblocks(xv, &side(&b1, xv)?, &side(b0, yc)?);
    let g = fblocks(yc, &side(&b1, yc)?, &side(b0, xv)?);
    Ok([(f[0] - g[0]).d, (f[1] - g[1]).d, (f[2] - g[2]).d])
}

/// 2^{2a} |Γ(a+1−iq)|² / (π Γ(2a+2) Γ(2a+1)).
fn norm_const(a: f64, q: f64) -> Result<f64> {
    let lg = 2.0 * log_gamma(C64::new(a + 1.0, -q))?.re
        - log_gamma(C64::new(2.0 * a + 2.0, 0.0))?.re
        - log_gamma(C64::new(2.0 * a + 1.0, 0.0))?.re;
    Ok((2.0 * a * 2f64.ln() + lg).exp() / PI)
}

fn pref2(b: &ConfluentBlock, x: f64, y: f64) -> Result<C64> {
    let a = b.shift();
    let ph = (-I * (x + y)).exp() * (-b.q_eff * PI).exp();
    Ok(ph * norm_const(a, b.q_eff)? * (x * y).powf(a + 1.0) / (x * x))
}

/// K̂∞,2, L̂₁,₂ and L̂₂,₂ for the block (p, q_eff, k).
pub fn beta2_expansion(p: f64, q_eff: f64, k: u32, x: f64, y: f64) -> Result<[C64; 3]> {
    check_point(x, y)?;
    let b = ConfluentBlock::new(p, q_eff, k)?;
    let jd = j_over_diff(&b, x, y)?;
    let pre = pref2(&b, x, y)?;
    let kf = k as f64;
    let qq1 = q1(p, kf);
    let qq2 = q2(p, kf, x, y) + x * x / 3.0;
    Ok([
        pre * jd[0],
        pre * (jd[1] + qq1 * jd[0]),
        pre * (jd[2] + qq1 * jd[1] + qq2 * jd[0]),
    ])
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("limit kernels need X, Y > 0, got ({x}, {y})")));
    }
    Ok(())
}

fn quad_opts() -> DeOptions {
    DeOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        ..DeOptions::default()
    }
}

fn pack(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn unpack(v: &[f64]) -> Vec<C64> {
    v.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// 𝒥_o[f](X) = ∫_0^X e^{−is−qπ} s^{p+1} f(s) ds for f equal to C̃₀, C̃₁,
/// C̃₂ of the block (p, 2q, 2), and s² C̃₀.
pub fn j_odd(p: f64, q: f64, x: f64) -> Result<[C64; 4]> {
    let b = ConfluentBlock::new(p, 2.0 * q, 2)?;
    let err = std::cell::RefCell::new(None);
    let v = tanh_sinh_vec(
        |n: Node| {
            let s = n.x;
            match side(&b, Dual::constant(C64::new(s, 0.0))) {
                Ok(sd) => {
                    let w = (-I * s).exp() * (-q * PI).exp() * n.from_a.powf(p + 1.0);
                    pack(&[w * sd.c[0].v, w * sd.c[1].v, w * sd.c[2].v, w * s * s * sd.c[0].v])
                }
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    vec![0.0; 8]
                }
            }
        },
        8,
        0.0,
        x,
        &quad_opts(),
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let u = unpack(&v);
    Ok([u[0], u[1], u[2], u[3]])
}

/// 𝒥_s integrals at X: ∫_0^X e^{−2is} s^{2p} f(s) ds for f(s) equal to
/// C̃₀, C̃₁, C̃₂ of the block (2p, q, 1) at 2s, and s² C̃₀ at 2s.
pub fn j_sym(p: f64, q: f64, x: f64) -> Result<[C64; 4]> {
    let b = ConfluentBlock::new(2.0 * p, q, 1)?;
    let err = std::cell::RefCell::new(None);
    let v = tanh_sinh_vec(
        |n: Node| {
            let s = n.x;
            match side(&b, Dual::constant(C64::new(2.0 * s, 0.0))) {
                Ok(sd) => {
                    let w = (-2.0 * I * s).exp() * n.from_a.powf(2.0 * p);
                    pack(&[w * sd.c[0].v, w * sd.c[1].v, w * sd.c[2].v, w * s * s * sd.c[0].v])
                }
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    vec![0.0; 8]
                }
            }
        },
        8,
        0.0,
        x,
        &quad_opts(),
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let u = unpack(&v);
    Ok([u[0], u[1], u[2], u[3]])
}

/// K̂∞,β, L̂₁,β and (for β = 2, 4) L̂₂,β at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelExpansion {
    pub x: f64,
    pub y: f64,
    pub k_inf: C64,
    pub l1: C64,
    pub l2: Option<C64>,
}

/// 2^{2a−2} |Γ(a−iq)|² / (π Γ(2a) Γ(2a−1)).
fn hconst(a: f64, q: f64) -> Result<f64> {
    let lg = 2.0 * log_gamma(C64::new(a, -q))?.re
        - log_gamma(C64::new(2.0 * a, 0.0))?.re
        - log_gamma(C64::new(2.0 * a - 1.0, 0.0))?.re;
    Ok(((2.0 * a - 2.0) * 2f64.ln() + lg).exp() / PI)
}

/// Limit kernel and corrections for the ensemble `params` at (X, Y).
pub fn expansion(x: f64, y: f64, params: &EnsembleParams) -> Result<KernelExpansion> {
    check_point(x, y)?;
    let (p, q) = (params.p, params.q);
    match params.beta {
        2 => {
            let e = beta2_expansion(p, q, 0, x, y)?;
            Ok(KernelExpansion {
                x,
                y,
                k_inf: e[0],
                l1: e[1],
                l2: Some(e[2]),
            })
        }
        1 => {
            if !(p > 0.0) {
                return Err(Error::InvalidParams("beta = 1 limits need p > 0".into()));
            }
            let e = beta2_expansion(p, 2.0 * q, 1, x, y)?;
            let (e1, e2) = (eta1(p, q)?, eta2(p, q)?);
            let b1 = ConfluentBlock::new(p, 2.0 * q, 1)?;
            let sy = side(&b1, Dual::constant(C64::new(y, 0.0)))?;
            let (y0, y1) = (sy.c[0].v, sy.c[1].v);
            let jo = j_odd(p, q, x)?;
            let pre = e2 / (x * x) * (-I * y).exp() * y.powf(p + 2.0);
            let r = y / x;
            let k_inf = r * e[0] + pre * y0 * (jo[0] - e1 / 2.0);
            let l1 = r * e[1]
                + pre * (y0 * (jo[1] + p * (2.0 * p + 3.0) * jo[0] - p * (p + 1.0) * e1 / 2.0) + y1 * (jo[0] - e1 / 2.0));
            Ok(KernelExpansion {
                x,
                y,
                k_inf,
                l1,
                l2: None,
            })
        }
        4 => {
            if !(p > 0.0) {
                return Err(Error::InvalidParams("beta = 4 limits need p > 0".into()));
            }
            let e = beta2_expansion(2.0 * p, q, 0, 2.0 * x, 2.0 * y)?;
            let b0 = ConfluentBlock::new(2.0 * p, q, 0)?;
            let sy = side(&b0, Dual::constant(C64::new(2.0 * y, 0.0)))?;
            let (y0, y1, y2) = (sy.c[0].v, sy.c[1].v, sy.c[2].v);
            let js = j_sym(p, q, x)?;
            let pp = -(2f64.powf(4.0 * p + 1.0))
                * p
                * hconst(2.0 * p + 1.0, q)?
                * (-q * PI - 2.0 * I * y).exp()
                * y.powf(2.0 * p + 1.0);
            let g1 = 2.0 * p * (4.0 * p + 1.0);
            let g2 = p * (4.0 * p + 1.0) * (24.0 * p * p - 2.0 * p - 1.0) / 3.0;
            let js0 = pp * y0 * js[0];
            let a1 = pp * (y1 * js[0] + y0 * js[1]);
            let a2 = pp * (y2 * js[0] + y1 * js[1] + y0 * js[2]);
            let x2 = x * x;
            let k_inf = y / x * e[0] + js0 / x2;
            let l1 = y / (2.0 * x) * e[1] + 0.5 * (a1 + g1 * js0) / x2;
            let big = a2 + g1 * a1 + g2 * js0;
            let l2 = y / (4.0 * x) * e[2]
                + (x2 - y * y) / 6.0 * (y / x) * e[0]
                + (0.25 * big + (x2 / 3.0 - y * y / 6.0) * js0 + pp * y0 * js[3] / 6.0) / x2;
            Ok(KernelExpansion {
                x,
                y,
                k_inf,
                l1,
                l2: Some(l2),
            })
        }
        b => Err(Error::Unsupported(format!("limit kernels for beta = {b}"))),
    }
}

pub fn k_limit(beta: u32, x: f64, y: f64, params: &EnsembleParams) -> Result<C64> {
    Ok(expansion(x, y, &with_beta(params, beta))?.k_inf)
}

pub fn l1(beta: u32, x: f64, y: f64, params: &EnsembleParams) -> Result<C64> {
    Ok(expansion(x, y, &with_beta(params, beta))?.l1)
}

pub fn l2(beta: u32, x: f64, y: f64, params: &EnsembleParams) -> Result<C64> {
    expansion(x, y, &with_beta(params, beta))?
        .l2
        .ok_or_else(|| Error::Unsupported(format!("second correction for beta = {beta}")))
}

fn with_beta(params: &EnsembleParams, beta: u32) -> EnsembleParams {
    EnsembleParams { beta, ..*params }
}

/// |L̂₁ − p(X∂_X + Y∂_Y + 1)K̂∞| / (|L̂₁| + ε), partials by five-point
/// central differences with steps hX and hY.
pub fn derivative_identity_residual(beta: u32, x: f64, y: f64, params: &EnsembleParams, h: f64) -> Result<f64> {
    let pr = with_beta(params, beta);
    let (hx, hy) = (h * x, h * y);
    if x - 2.0 * hx <= 0.0 || y - 2.0 * hy <= 0.0 {
        return Err(Error::Domain("stencil leaves the domain".into()));
    }
    let k = |a: f64, b: f64| k_limit(beta, a, b, &pr);
    let d5 = |f: &dyn Fn(f64) -> Result<C64>, h: f64| -> Result<C64> {
        Ok((-f(2.0 * h)? + 8.0 * f(h)? - 8.0 * f(-h)? + f(-2.0 * h)?) / (12.0 * h))
    };
    let dx = d5(&|t| k(x + t, y), hx)?;
    let dy = d5(&|t| k(x, y + t), hy)?;
    let e = expansion(x, y, &pr)?;
    let rhs = pr.p * (x * dx + y * dy + e.k_inf);
    Ok((e.l1 - rhs).norm() / (e.l1.norm() + 1e-300))
}

/// The Bessel form of the q = 0 limit kernel,
/// (XY)^{1/2} (J_{p+1/2}(X) J_{p−1/2}(Y) − J_{p−1/2}(X) J_{p+1/2}(Y)) / (2(X − Y)),
/// for half-integer p.
pub fn bessel_kernel(p: f64, x: f64, y: f64) -> Result<f64> {
    let n = p + 0.5;
    if (n - n.round()).abs() > 1e-12 || n < 1.0 {
        return Err(Error::Unsupported(format!("Bessel kernel needs p in 1/2 + N, got {p}")));
    }
    let n = n.round() as i32;
    let j = |m: i32, t: f64| libm::jn(m, t);
    if x == y {
        return Err(Error::Domain("Bessel kernel at X = Y".into()));
    }
    Ok((x * y).sqrt() * (j(n, x) * j(n - 1, y) - j(n - 1, x) * j(n, y)) / (2.0 * (x - y)))
}

/// |₂F₁(−n, b; c; t/n) − ₁F₁(b; c; −t)|.
pub fn confluent_limit_residual(n: usize, b: C64, c: C64, t: C64) -> Result<f64> {
    let ctrl = SeriesControl::for_degree(n);
    let f = hyp2f1_terminating(n, b, c, t / n as f64, &ctrl)?;
    let g = hyp1f1(b, c, -t, &SeriesControl::default())?;
    Ok((f - g).norm())
}
