//! Routh–Romanovski polynomials Ĩ_n^{(c, c̄)}, their norms, the Cauchy
//! weights and the maps between the real line and the unit circle.
//!
//! Points on the line are written x = −cot φ with φ ∈ (0, π), so that the
//! circle angle is θ = 2φ. Most evaluations work in φ: the weighted
//! polynomial ω₂^{1/2} Ĩ_n stays bounded there, while Ĩ_n itself grows
//! like |x|^n.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::{tanh_sinh, DeOptions, Node};
use crate::special_fns::{hyp2f1_terminating, log_gamma, pochhammer, SeriesControl};

/// Dyson index, matrix size, singularity exponent and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub beta: u32,
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

impl EnsembleParams {
    pub fn new(beta: u32, n: usize, p: f64, q: f64) -> Result<Self> {
        let e = EnsembleParams { beta, n, p, q };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta == 0 || (self.beta != 1 && self.beta % 2 != 0) {
            return Err(Error::InvalidParams(format!("beta must be 1 or even, got {}", self.beta)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(Error::InvalidParams(format!("p must be nonnegative, got {}", self.p)));
        }
        if !self.q.is_finite() {
            return Err(Error::InvalidParams("q must be finite".into()));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        EnsembleParams { n, ..*self }
    }

    /// c_β = −β(N+p−1)/2 − 1 + iq.
    pub fn c_beta(&self) -> C64 {
        let b = self.beta as f64;
        C64::new(-b * (self.n as f64 + self.p - 1.0) / 2.0 - 1.0, self.q)
    }

    /// The exponent c of the Cauchy weight whose polynomials build the
    /// β = 1, 2, 4 kernels.
    pub fn kernel_c(&self) -> Result<C64> {
        let n = self.n as f64;
        match self.beta {
            1 => Ok(C64::new(-n - self.p, 2.0 * self.q)),
            2 => Ok(C64::new(-n - self.p, self.q)),
            4 => Ok(C64::new(-2.0 * n - 2.0 * self.p, self.q)),
            b => Err(Error::Unsupported(format!("kernels for beta = {b}"))),
        }
    }

    /// Phase entering the confluent blocks of the limiting kernels.
    pub fn q_eff(&self) -> f64 {
        if self.beta == 1 {
            2.0 * self.q
        } else {
            self.q
        }
    }
}

/// Exponent of the Cauchy weight (1 − ix)^c (1 + ix)^c̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyWeightParams {
    pub c: C64,
}

impl CauchyWeightParams {
    pub fn new(c: C64) -> Result<Self> {
        if !(c.re < -0.5) {
            return Err(Error::InvalidParams(format!("weight exponent needs Re c < -1/2, got {c}")));
        }
        Ok(CauchyWeightParams { c })
    }
}

/// θ ∈ (0, 2π) with x = i(1 + e^{iθ})/(1 − e^{iθ}) = −cot(θ/2).
pub fn cayley_to_circle(x: f64) -> f64 {
    2.0 * line_to_angle(x)
}

pub fn circle_to_line(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 2pi)")));
    }
    Ok(-1.0 / (theta / 2.0).tan())
}

/// φ ∈ (0, π) with x = −cot φ.
pub fn line_to_angle(x: f64) -> f64 {
    1f64.atan2(-x)
}

/// z(X) = −cot(X/N) and dz/dX = csc²(X/N)/N, for a real scale N.
pub fn scaled_point_map(x_big: f64, scale: f64) -> Result<(f64, f64)> {
    let phi = x_big / scale;
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("X/N = {phi} outside (0, pi)")));
    }
    let s = phi.sin();
    Ok((-phi.cos() / s, 1.0 / (scale * s * s)))
}

/// ω₂(x) = (1 + x²)^{Re c} e^{2 Im c arctan x}.
pub fn weight_cauchy(x: f64, w: &CauchyWeightParams) -> f64 {
    log_weight_cauchy(x, w).exp()
}

pub fn log_weight_cauchy(x: f64, w: &CauchyWeightParams) -> f64 {
    w.c.re * x.mul_add(x, 1.0).ln() + 2.0 * w.c.im * x.atan()
}

/// ω̃₁(x) = (1 + x²)^{(Re c − 1)/2} e^{Im c arctan x}.
pub fn weight_w1(x: f64, w: &CauchyWeightParams) -> f64 {
    (0.5 * (w.c.re - 1.0) * (1.0 + x * x).ln() + w.c.im * x.atan()).exp()
}

/// ω₂^{1/2}(z(X)) for the β = 2 weight: sin^{N+p}(X/N) e^{q(X/N − π/2)}.
pub fn weight_circle_scaled(x_big: f64, params: &EnsembleParams) -> Result<f64> {
    let n = params.n as f64;
    let phi = x_big / n;
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("X/N = {phi} outside (0, pi)")));
    }
    Ok(((n + params.p) * phi.sin().ln() + params.q * (phi - FRAC_PI_2)).exp())
}

/// Monic Ĩ_n(x) from the terminating Gauss series.
pub fn rr_poly(n: usize, c: C64, x: f64) -> Result<C64> {
    let s = c + c.conj();
    let den = pochhammer(s + (n as f64 + 1.0), n);
    if den.norm() == 0.0 {
        return Err(Error::Pole(format!("(c + c̄ + n + 1)_n at n = {n}, c = {c}")));
    }
    let pref = C64::new(0.0, -2.0).powu(n as u32) * pochhammer(c + 1.0, n) / den;
    let z = C64::new(1.0, -x) / 2.0;
    let f = hyp2f1_terminating(n, s + (n as f64 + 1.0), c + 1.0, z, &SeriesControl::for_degree(n))?;
    Ok(pref * f)
}

/// The prefactored polynomial ((1 − e^{2iφ})/(2i))^{M−k} Ĩ_{M−k}(−cot φ)
/// for the weight c = −M − pp + iQ, as the Gauss series
/// ₂F₁(−M+k, pp+k−iQ; 2pp+2k; 1 − e^{2iφ}).
pub fn rr_prefactored(m: usize, k: usize, pp: f64, qq: f64, phi: f64) -> Result<C64> {
    if k > m {
        return Err(Error::Domain(format!("k = {k} > M = {m}")));
    }
    let z = C64::new(1.0, 0.0) - C64::new(0.0, 2.0 * phi).exp();
    let b = C64::new(pp + k as f64, -qq);
    let c = C64::new(2.0 * pp + 2.0 * k as f64, 0.0);
    hyp2f1_terminating(m - k, b, c, z, &SeriesControl::for_degree(m))
}

/// The scaled polynomial of size N at the point X: the prefactored form
/// above with M = N, φ = X/N and the β = 2 weight of `params`.
pub fn rr_scaled(n_minus_k: usize, k: usize, x_big: f64, params: &EnsembleParams) -> Result<C64> {
    let n = n_minus_k + k;
    let phi = x_big / n as f64;
    if !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("X/N = {phi} outside (0, pi)")));
    }
    if !(params.p + k as f64 > 0.0) {
        return Err(Error::Domain("p + k must be positive".into()));
    }
    rr_prefactored(n, k, params.p, params.q, phi)
}

/// log h_n for the weight exponent c.
pub fn rr_log_norm(n: usize, c: C64) -> Result<f64> {
    let s = 2.0 * c.re;
    let nf = n as f64;
    let r = |x: f64| log_gamma(C64::new(x, 0.0)).map(|v| v.re);
    let lg_c = log_gamma(-c - nf)?;
    let lg_cb = log_gamma(-c.conj() - nf)?;
    Ok(
        (2.0 * nf + 2.0 + s) * 2f64.ln() + PI.ln() + r(nf + 1.0)? + r(-s - 2.0 * nf)? + r(-s - 2.0 * nf - 1.0)?
            - r(-s - nf)?
            - lg_c.re
            - lg_cb.re,
    )
}

/// h_n = ∫ ω₂ Ĩ_n² dx.
pub fn rr_norm(n: usize, c: C64) -> Result<f64> {
    let v = rr_log_norm(n, c)?.exp();
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("h_{n} not positive for c = {c}")));
    }
    Ok(v)
}

/// Three-term recurrence Ĩ_{n+1} = (x − b_n) Ĩ_n − a_n Ĩ_{n−1} for the
/// weight exponent c. `new(c, m)` stores a_n, b_n for n < m, enough to
/// reach degree m.
#[derive(Debug, Clone)]
pub struct RrRecurrence {
    pub c: C64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl RrRecurrence {
    pub fn new(c: C64, max_degree: usize) -> Self {
        let (re, im) = (c.re, c.im);
        // ratio Im c/(n + Re c); at Im c = 0 the n = −Re c case is the
        // removable limit 0
        let t = |n: f64| if im == 0.0 { 0.0 } else { im / (n + re) };
        // d_n, e_n: the next two coefficients of the monic Ĩ_n
        let coeff = |n: usize| -> (C64, C64) {
            if n == 0 {
                return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            }
            let nf = n as f64;
            let r1 = C64::new(1.0, t(nf)) * (-nf / 2.0);
            let d = C64::new(nf * t(nf), 0.0);
            if n == 1 {
                return (d, C64::new(0.0, 0.0));
            }
            let cm = C64::new(re + nf - 1.0, im);
            let r2 = r1 * (-(nf - 1.0) * cm / (2.0 * (2.0 * (re + nf) - 1.0)));
            let e = C64::new(-nf * (nf - 1.0) / 2.0, 0.0) - r1 * (2.0 * (nf - 1.0)) - r2 * 4.0;
            (d, e)
        };
        let mut a = Vec::with_capacity(max_degree + 1);
        let mut b = Vec::with_capacity(max_degree + 1);
        let mut cur = coeff(0);
        for n in 0..max_degree {
            let next = coeff(n + 1);
            let bn = cur.0 - next.0;
            let an = cur.1 - next.1 - bn * cur.0;
            b.push(bn.re);
            a.push(an.re);
            cur = next;
        }
        RrRecurrence { c, a, b }
    }

    /// Highest degree reachable from the stored coefficients.
    pub fn max_degree(&self) -> usize {
        self.b.len()
    }

    /// Ĩ_0 .. Ĩ_n at a finite point x.
    pub fn values(&self, n: usize, x: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(n + 1);
        v.push(1.0);
        if n == 0 {
            return v;
        }
        v.push(x - self.b[0]);
        for j in 1..n {
            let nxt = (x - self.b[j]) * v[j] - self.a[j] * v[j - 1];
            v.push(nxt);
        }
        v
    }
}

/// Values of ω₂^{1/2} Ĩ_j at x = −cot φ, computed in the angle variable.
///
/// The recurrence runs on y_j = Ĩ_j sin^j φ. To keep large degrees inside
/// the floating-point range the stored y_j (and y_j′) carry a separate
/// log scale: the true value is `y[j] * exp(off[j])`.
#[derive(Debug, Clone)]
pub struct AngleValues {
    pub y: Vec<f64>,
    pub dy: Option<Vec<f64>>,
    pub off: Vec<f64>,
    pub log_sin: f64,
    pub cos: f64,
    pub sin: f64,
    /// Im c (φ − π/2).
    pub log_phase: f64,
    pub neg_re_c: f64,
    pub im_c: f64,
}

impl AngleValues {
    fn log_pref(&self, j: usize, k: i32) -> f64 {
        (self.neg_re_c - j as f64 + k as f64) * self.log_sin + self.log_phase + self.off[j]
    }

    /// ω₂^{1/2} Ĩ_j sin^k φ as mantissa and log magnitude.
    pub fn split(&self, j: usize, k: i32) -> (f64, f64) {
        (self.y[j], self.log_pref(j, k))
    }

    /// d/dφ of ω₂^{1/2} Ĩ_j as mantissa and log magnitude.
    pub fn split_deriv(&self, j: usize) -> (f64, f64) {
        let dy = self.dy.as_ref().expect("derivatives not computed");
        let e = self.neg_re_c - j as f64;
        let dl = e * self.cos / self.sin + self.im_c;
        (dl * self.y[j] + dy[j], self.log_pref(j, 0))
    }

    /// ω₂^{1/2} Ĩ_j.
    pub fn w(&self, j: usize) -> f64 {
        self.single(j, 0)
    }

    pub fn dw(&self, j: usize) -> f64 {
        let (m, l) = self.split_deriv(j);
        m * l.exp()
    }

    /// ω₂^{1/2} Ĩ_j sin^k φ.
    pub fn single(&self, j: usize, k: i32) -> f64 {
        if self.y[j] == 0.0 {
            return 0.0;
        }
        self.y[j] * self.log_pref(j, k).exp()
    }

    /// ω₂ Ĩ_i Ĩ_j sin^k φ.
    pub fn product(&self, i: usize, j: usize, k: i32) -> f64 {
        let yy = self.y[i] * self.y[j];
        if yy == 0.0 {
            return 0.0;
        }
        let e = 2.0 * self.neg_re_c - (i + j) as f64 + k as f64;
        yy * (e * self.log_sin + 2.0 * self.log_phase + self.off[i] + self.off[j]).exp()
    }
}

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;

/// Evaluate ω₂^{1/2} Ĩ_j(−cot φ) for j = 0..=n using the recurrence on
/// y_j = Ĩ_j sin^j φ. `sin_phi` is passed separately so that callers near
/// φ = 0 or π can supply it from the distance to the endpoint.
pub fn angle_values(rec: &RrRecurrence, n: usize, phi: f64, sin_phi: f64, deriv: bool) -> AngleValues {
    assert!(n <= rec.max_degree(), "degree {n} beyond recurrence table");
    let c = rec.c;
    let s = sin_phi;
    let co = if (phi - FRAC_PI_2).abs() < 0.5 {
        phi.cos()
    } else if phi < FRAC_PI_2 {
        (1.0 - s * s).sqrt()
    } else {
        -(1.0 - s * s).sqrt()
    };
    let mut y = Vec::with_capacity(n + 1);
    let mut dy = Vec::with_capacity(if deriv { n + 1 } else { 0 });
    let mut off = Vec::with_capacity(n + 1);
    y.push(1.0);
    off.push(0.0);
    if deriv {
        dy.push(0.0);
    }
    if n >= 1 {
        y.push(-co - rec.b[0] * s);
        off.push(0.0);
        if deriv {
            dy.push(s - rec.b[0] * co);
        }
    }
    // running pair (previous, current) in the current scale
    let mut cur_off = 0.0;
    let (mut y0, mut y1) = (y[0], *y.last().unwrap());
    let (mut d0, mut d1) = if deriv { (dy[0], *dy.last().unwrap()) } else { (0.0, 0.0) };
    for j in 1..n {
        let f = -co - rec.b[j] * s;
        let g = rec.a[j] * s * s;
        let y2 = f * y1 - g * y0;
        let mut d2 = 0.0;
        if deriv {
            let df = s - rec.b[j] * co;
            let dg = rec.a[j] * 2.0 * s * co;
            d2 = df * y1 + f * d1 - dg * y0 - g * d0;
        }
        y0 = y1;
        y1 = y2;
        d0 = d1;
        d1 = d2;
        let mag = y1.abs().max(y0.abs()).max(if deriv { d1.abs().max(d0.abs()) } else { 0.0 });
        if mag > RESCALE_HI || (mag < RESCALE_LO && mag > 0.0) {
            let l = mag.ln();
            let f = (-l).exp();
            y0 *= f;
            y1 *= f;
            d0 *= f;
            d1 *= f;
            cur_off += l;
        }
        y.push(y1);
        off.push(cur_off);
        if deriv {
            dy.push(d1);
        }
    }
    AngleValues {
        y,
        dy: if deriv { Some(dy) } else { None },
        off,
        log_sin: s.ln(),
        cos: co,
        sin: s,
        log_phase: c.im * (phi - FRAC_PI_2),
        neg_re_c: -c.re,
        im_c: c.im,
    }
}

/// ω₂^{1/2} Ĩ_n at x = −cot φ (single degree).
pub fn weighted_rr(rec: &RrRecurrence, n: usize, phi: f64) -> f64 {
    angle_values(rec, n, phi, phi.sin(), false).w(n)
}

/// sin φ for a node in (0, π), taken from the nearer endpoint.
pub fn node_sin(n: &Node) -> f64 {
    if n.from_a <= n.to_b {
        n.from_a.sin()
    } else {
        n.to_b.sin()
    }
}

/// |∫ω₂ Ĩ_n Ĩ_m dx − h_n δ_{nm}| / h_n, by quadrature in φ.
pub fn orthogonality_check(n: usize, m: usize, c: C64, opts: &DeOptions) -> Result<f64> {
    let g = gram_entry(n, m, c, opts)?;
    let hn = rr_norm(n, c)?;
    let target = if n == m { hn } else { 0.0 };
    Ok((g - target).abs() / hn)
}

/// ∫ω₂ Ĩ_n Ĩ_m dx with x = −cot φ, dx = dφ/sin²φ.
pub fn gram_entry(n: usize, m: usize, c: C64, opts: &DeOptions) -> Result<f64> {
    let top = n.max(m);
    let rec = RrRecurrence::new(c, top);
    let opts = scaled_floor(n, m, c, opts)?;
    let v = tanh_sinh(
        |node| {
            let s = node_sin(&node);
            let av = angle_values(&rec, top, node.x, s, false);
            C64::new(av.product(n, m, -2), 0.0)
        },
        0.0,
        PI,
        &opts,
    )?;
    Ok(v.re)
}

/// Off-diagonal entries vanish, so the stopping rule gets an absolute floor
/// at rounding level of √(h_n h_m).
fn scaled_floor(n: usize, m: usize, c: C64, opts: &DeOptions) -> Result<DeOptions> {
    let scale = (0.5 * (rr_log_norm(n, c)? + rr_log_norm(m, c)?)).exp();
    Ok(DeOptions {
        abs_tol: opts.abs_tol.max(1e-15 * scale),
        ..*opts
    })
}

/// Gram matrix of Ĩ_0..Ĩ_n under ω₂.
pub fn gram_matrix(n: usize, c: C64, opts: &DeOptions) -> Result<Vec<Vec<f64>>> {
    let rec = RrRecurrence::new(c, n);
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for j in i..=n {
            let opts = scaled_floor(i, j, c, opts)?;
            let v = tanh_sinh(
                |node| {
                    let s = node_sin(&node);
                    let av = angle_values(&rec, n, node.x, s, false);
                    C64::new(av.product(i, j, -2), 0.0)
                },
                0.0,
                PI,
                &opts,
            )?
            .re;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EnsembleParams {
        EnsembleParams::new(2, 8, 1.5, 0.7).unwrap()
    }

    #[test]
    fn maps() {
        assert!(circle_to_line(PI).unwrap().abs() < 1e-15);
        let (z, j) = scaled_point_map(10.0 * FRAC_PI_2, 10.0).unwrap();
        assert!(z.abs() < 1e-15 && (j - 0.1).abs() < 1e-15);
        let x = 1.0;
        let back = circle_to_line(cayley_to_circle(x)).unwrap();
        assert!((back - x).abs() < 1e-12);
        assert!(scaled_point_map(0.0, 5.0).is_err());
        assert!(circle_to_line(0.0).is_err());
    }

    #[test]
    fn weights() {
        let w = CauchyWeightParams::new(C64::new(-2.0, 0.7)).unwrap();
        assert!((weight_cauchy(0.0, &w) - 1.0).abs() < 1e-15);
        let w0 = CauchyWeightParams::new(C64::new(-2.0, 0.0)).unwrap();
        assert!((weight_cauchy(1.0, &w0) - 0.25).abs() < 1e-15);
        let p = EnsembleParams::new(2, 10, 1.5, 0.0).unwrap();
        assert!((weight_circle_scaled(10.0 * FRAC_PI_2, &p).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn recurrence_matches_gauss_series() {
        let c = params().kernel_c().unwrap();
        let rec = RrRecurrence::new(c, 10);
        for x in [-2.5, -0.3, 0.0, 0.8, 3.0] {
            let v = rec.values(8, x);
            for (n, vn) in v.iter().enumerate() {
                let h = rr_poly(n, c, x).unwrap();
                assert!(h.im.abs() < 1e-9 * (1.0 + h.re.abs()));
                assert!((h.re - vn).abs() < 1e-10 * (1.0 + vn.abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn monic_by_finite_differences() {
        let c = params().kernel_c().unwrap();
        for n in 0..=8usize {
            // n-th forward difference with unit step equals n! times the leading coefficient
            let mut d = 0.0;
            for j in 0..=n {
                let binom: f64 = (0..j).map(|i| (n - i) as f64 / (i + 1) as f64).product();
                let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
                d += sign * binom * rr_poly(n, c, j as f64 - n as f64 / 2.0).unwrap().re;
            }
            let fact: f64 = (1..=n).map(|i| i as f64).product();
            assert!((d / fact - 1.0).abs() < 1e-8, "n = {n}: {}", d / fact);
        }
    }

    #[test]
    fn norms_positive_and_first_matches_quadrature() {
        let c = EnsembleParams::new(2, 6, 1.5, 0.7).unwrap().kernel_c().unwrap();
        for n in 0..6 {
            assert!(rr_norm(n, c).unwrap() > 0.0);
        }
        let opts = DeOptions::default();
        let w = CauchyWeightParams::new(c).unwrap();
        let direct = tanh_sinh(
            |node| {
                let s = node_sin(&node);
                if s < 1e-100 {
                    return C64::new(0.0, 0.0);
                }
                let x = -node.x.cos() / s;
                C64::new(weight_cauchy(x, &w) / (s * s), 0.0)
            },
            0.0,
            PI,
            &opts,
        )
        .unwrap()
        .re;
        let h0 = rr_norm(0, c).unwrap();
        assert!((direct - h0).abs() < 1e-8 * h0, "{direct} {h0}");
        let r = gram_entry(3, 3, c, &opts).unwrap() / gram_entry(2, 2, c, &opts).unwrap();
        let rh = rr_norm(3, c).unwrap() / rr_norm(2, c).unwrap();
        assert!((r - rh).abs() < 1e-8 * rh);
    }

    #[test]
    fn prefactored_form_matches_polynomial() {
        let p = EnsembleParams::new(2, 20, 1.5, 0.7).unwrap();
        let c = p.kernel_c().unwrap();
        let rec = RrRecurrence::new(c, 21);
        let k = 1;
        let x_big = 1.0;
        let phi = x_big / 20.0;
        let pf = rr_scaled(19, k, x_big, &p).unwrap();
        // ((1 − e^{2iφ})/(2i))^{n} = (−e^{iφ} sin φ)^{n}
        let base = -C64::new(0.0, phi).exp() * phi.sin();
        let direct = base.powu(19) * rec.values(19, -1.0 / phi.tan())[19];
        assert!((pf - direct).norm() < 1e-10 * direct.norm());
        let zero_deg = rr_scaled(0, 20, x_big, &p).unwrap();
        assert_eq!(zero_deg, C64::new(1.0, 0.0));
    }

    #[test]
    fn angle_values_and_derivative() {
        let c = params().kernel_c().unwrap();
        let rec = RrRecurrence::new(c, 9);
        let phi = 0.9;
        let av = angle_values(&rec, 8, phi, phi.sin(), true);
        let w = CauchyWeightParams { c };
        let x = -1.0 / phi.tan();
        let direct = weight_cauchy(x, &w).sqrt() * rr_poly(8, c, x).unwrap().re;
        assert!((av.w(8) - direct).abs() < 1e-12 * direct.abs().max(1e-3));
        let h = 1e-5;
        let fd = (weighted_rr(&rec, 8, phi + h) - weighted_rr(&rec, 8, phi - h)) / (2.0 * h);
        let dw = av.dw(8);
        assert!((fd - dw).abs() < 1e-7 * dw.abs().max(1.0));
    }

    #[test]
    fn large_degree_keeps_scale() {
        // A_N A_{N-1} / h_{N-1} stays finite at N = 2000 in mid-range
        let n = 2000;
        let c = C64::new(-(n as f64) - 1.5, 0.7);
        let rec = RrRecurrence::new(c, n);
        let av = angle_values(&rec, n, 1.5, 1.5f64.sin(), true);
        let (m1, l1) = av.split(n, 0);
        let (m0, l0) = av.split(n - 1, 0);
        let v = m1 * m0 * (l1 + l0 - rr_log_norm(n - 1, c).unwrap()).exp();
        assert!(v.is_finite() && v != 0.0);
        assert!(v.abs() < 10.0);
    }
}
