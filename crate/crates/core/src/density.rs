//! Spectral density of the circular Jacobi β-ensemble for even β: the
//! Morris normalisation, β-dimensional integral representations, the
//! finite-N density and its scaled limit.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::asymptotics::fit_slope;
use crate::error::{Error, Result};
use crate::jack_series::{hyper_pfq_alpha, JackControl};
use crate::quadrature::{ordered_sector_factored_adaptive, tanh_sinh_real, DeOptions, Node};
use crate::routh_romanovski::EnsembleParams;
use crate::special_fns::{ln_gamma, log_gamma};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorrisParams {
    pub a: C64,
    pub b: C64,
    pub lambda: f64,
    pub n: usize,
}

impl MorrisParams {
    pub fn new(a: C64, b: C64, lambda: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!("Morris lambda must be positive, got {lambda}")));
        }
        Ok(MorrisParams { a, b, lambda, n })
    }
}

/// ∏_{j<N} Γ(λj+a+b+1) Γ(λ(j+1)+1) / (Γ(λj+a+1) Γ(λj+b+1) Γ(1+λ)).
pub fn morris_closed(m: &MorrisParams) -> Result<C64> {
    Ok(log_morris(m)?.exp())
}

fn log_morris(m: &MorrisParams) -> Result<C64> {
    let l = m.lambda;
    let one = C64::new(1.0, 0.0);
    let mut s = C64::new(0.0, 0.0);
    for j in 0..m.n {
        let lj = l * j as f64;
        s += log_gamma(m.a + m.b + lj + 1.0)? + log_gamma(one * (l * (j as f64 + 1.0) + 1.0))?
            - log_gamma(m.a + lj + 1.0)?
            - log_gamma(m.b + lj + 1.0)?
            - log_gamma(one * (1.0 + l))?;
    }
    Ok(s)
}

/// The Morris integral over [−1/2, 1/2]^N by nested double-exponential
/// quadrature on the ordered sector (N ≤ 3).
pub fn morris_quadrature(m: &MorrisParams, rel_tol: f64) -> Result<C64> {
    if m.n > 3 {
        return Err(Error::Unsupported(format!("Morris quadrature in {} dimensions", m.n)));
    }
    if m.n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if !((m.a + m.b).re > -1.0) {
        return Err(Error::Domain(format!(
            "Morris integrand not integrable for a + b = {}",
            m.a + m.b
        )));
    }
    let s = m.a + m.b;
    let d = m.a - m.b;
    let g = |depth: usize, n: &Node| -> C64 {
        let lo = if depth == 0 { n.from_a } else { n.x + 0.5 };
        let e = lo.min(n.to_b);
        if e <= 0.0 {
            return C64::new(f64::NEG_INFINITY, 0.0);
        }
        I * PI * n.x * d + s * (2.0 * (PI * e).sin()).ln()
    };
    let h = |u: &Node, v: &Node, adjacent: bool| {
        let gap = if adjacent { v.from_a } else { v.x - u.x };
        2.0 * m.lambda * (2.0 * (PI * gap).sin()).abs().ln()
    };
    let v = ordered_sector_factored_adaptive(m.n, -0.5, 0.5, 5.0, 3, 8, rel_tol, &g, &h, &|_: &[Node]| C64::new(1.0, 0.0))?;
    Ok(v * factorial(m.n))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// ã = 2p + 2/β − 1 and b̃ = −p − 1 + 2iq/β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTilde {
    pub a_tilde: f64,
    pub b_tilde: C64,
}

impl DensityTilde {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        even_beta(params)?;
        let b = params.beta as f64;
        Ok(DensityTilde {
            a_tilde: 2.0 * params.p + 2.0 / b - 1.0,
            b_tilde: C64::new(-params.p - 1.0, 2.0 * params.q / b),
        })
    }
}

fn even_beta(params: &EnsembleParams) -> Result<()> {
    if params.beta == 0 || params.beta % 2 != 0 {
        return Err(Error::Unsupported(format!("density needs even beta, got {}", params.beta)));
    }
    params.validate()
}

/// Integrand factor f(θ₁, …, θ_β) of the weighted integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    One,
    /// Σ e^{iθ_j}
    SumExp,
    /// Σ e^{2iθ_j}
    SumExp2,
    /// Σ 1/(1 + e^{iθ_j})
    SumInvOnePlus,
}

impl Moment {
    fn eval(self, angles: &[f64]) -> C64 {
        match self {
            Moment::One => C64::new(1.0, 0.0),
            Moment::SumExp => angles.iter().map(|t| (I * t).exp()).sum(),
            Moment::SumExp2 => angles.iter().map(|t| (2.0 * I * t).exp()).sum(),
            Moment::SumInvOnePlus => angles.iter().map(|t| 1.0 / (1.0 + (I * t).exp())).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    /// ₂F₁^{(β/2)}(−n, −b̃; 2p+2; (1 − e^{−iθ})^β) with n = N − 1, as a
    /// normalised β-dimensional integral.
    FiniteN,
    /// 𝓘[f](θ), unnormalised.
    Weighted(Moment),
    /// I∞(θ) = 𝓘[1](θ).
    Infinity,
}

/// ∫_{[−π,π]^β} ∏ e^{iθ_j(ã−b̃)/2} |1+e^{iθ_j}|^{ã+b̃} g(θ) ∏_{j<k} |e^{iθ_k} − e^{iθ_j}|^{4/β},
/// with g(θ) given in log form per coordinate plus a symmetric factor.
fn beta_integral<G, H>(params: &EnsembleParams, per_angle: G, whole: H, rel_tol: f64) -> Result<C64>
where
    G: Fn(f64) -> C64 + Sync,
    H: Fn(&[f64]) -> C64 + Sync,
{
    let t = DensityTilde::new(params)?;
    let beta = params.beta as usize;
    let s = t.a_tilde + t.b_tilde;
    if !(s.re > -1.0) {
        return Err(Error::Domain(format!(
            "integral representation needs Re(a~ + b~) > -1, got {}",
            s.re
        )));
    }
    if beta > 4 {
        return Err(Error::Unsupported(format!("integral path for beta = {beta}")));
    }
    let d = (t.a_tilde - t.b_tilde) * 0.5;
    let expo = 4.0 / beta as f64;
    let g = |depth: usize, n: &Node| -> C64 {
        let lo = if depth == 0 { n.from_a } else { n.x + PI };
        let e = lo.min(n.to_b);
        if e <= 0.0 {
            return C64::new(f64::NEG_INFINITY, 0.0);
        }
        I * n.x * d + s * (2.0 * (0.5 * e).sin()).ln() + per_angle(n.x)
    };
    let h = |u: &Node, v: &Node, adjacent: bool| {
        let gap = if adjacent { v.from_a } else { v.x - u.x };
        expo * (2.0 * (0.5 * gap).sin()).abs().ln()
    };
    let f = |nodes: &[Node]| -> C64 {
        let mut angles = [0.0; 4];
        for (a, n) in angles.iter_mut().zip(nodes) {
            *a = n.x;
        }
        whole(&angles[..nodes.len()])
    };
    // β = 4 stops at level 4 (about 10⁷ nodes in the sector)
    let (tmax, start, max_level, tol) = if beta == 2 {
        (5.0, 3, 9, rel_tol)
    } else {
        (3.0, 2, 4, rel_tol.max(1e-6))
    };
    let v = ordered_sector_factored_adaptive(beta, -PI, PI, tmax, start, max_level, tol, &g, &h, &f)?;
    Ok(v * factorial(beta))
}

/// The β-dimensional integrals behind the density.
pub fn i_integral(kind: IntegralKind, theta: f64, params: &EnsembleParams) -> Result<C64> {
    even_beta(params)?;
    match kind {
        IntegralKind::FiniteN => {
            let n = params.n - 1;
            let x = C64::new(1.0, 0.0) - (-I * theta).exp();
            let raw = beta_integral(
                params,
                |t| (1.0 + x * (I * t).exp()).ln() * n as f64,
                |_| C64::new(1.0, 0.0),
                1e-10,
            )?;
            let t = DensityTilde::new(params)?;
            let b = params.beta as f64;
            let norm = log_morris(&MorrisParams::new(
                C64::new(t.a_tilde, 0.0),
                t.b_tilde,
                2.0 / b,
                params.beta as usize,
            )?)?;
            Ok(raw / ((2.0 * PI).powf(b) * norm.exp()))
        }
        IntegralKind::Weighted(m) => beta_integral(params, |t| I * theta * (I * t).exp(), |a| m.eval(a), 1e-8),
        IntegralKind::Infinity => beta_integral(params, |t| I * theta * (I * t).exp(), |_| C64::new(1.0, 0.0), 1e-10),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityPath {
    /// β-dimensional integral of the reflected series.
    Integral,
    /// Reflected Jack series ₂F₁^{(β/2)}(−n, b; 2p+2; 1 − e^{−iθ}).
    #[default]
    Jack,
    /// Jack series at e^{−iθ} with the Morris ratio; fails at gamma poles
    /// (for example p = 0).
    JackDirect,
}

/// Largest tolerated |Im ρ| / |ρ|.
const IMAG_TOL: f64 = 1e-8;

fn real_part(v: C64, theta: f64, tol: f64, scale: f64) -> Result<f64> {
    if v.im.abs() > tol * v.norm().max(1e-300) && v.im.abs() > tol * scale {
        return Err(Error::Domain(format!(
            "density at theta = {theta} has imaginary part {:e}",
            v.im
        )));
    }
    if v.re < -tol * scale {
        return Err(Error::NegativeDensity { theta, value: v.re });
    }
    Ok(v.re)
}

/// M_n((p−1)β/2+iq, (p+1)β/2−iq, β/2) / M_{n+1}(pβ/2+iq, pβ/2−iq, β/2).
fn morris_ratio(n: usize, p: f64, q: f64, beta: f64) -> Result<C64> {
    let h = beta / 2.0;
    let num = MorrisParams::new(C64::new((p - 1.0) * h, q), C64::new((p + 1.0) * h, -q), h, n)?;
    let den = MorrisParams::new(C64::new(p * h, q), C64::new(p * h, -q), h, n + 1)?;
    Ok((log_morris(&num)? - log_morris(&den)?).exp())
}

/// ρ_{N,β}(θ) on the circle, with ∫₀^{2π} ρ = N.
pub fn rho_finite(theta: f64, params: &EnsembleParams, path: DensityPath) -> Result<f64> {
    even_beta(params)?;
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 2 pi)")));
    }
    let (p, q) = (params.p, params.q);
    let beta = params.beta as f64;
    let nsz = params.n;
    let n = nsz - 1;
    let m = params.beta as usize;
    let common = nsz as f64 * (-q * (theta - PI)).exp() * (2.0 * (0.5 * theta).sin()).powf(p * beta);
    let phase = (I * (n as f64 * beta * theta / 2.0)).exp();
    let b = C64::new(p + 1.0, -2.0 * q / beta);
    let value = match path {
        DensityPath::Jack => {
            let a = C64::new(-(n as f64), 0.0);
            let x = C64::new(1.0, 0.0) - (-I * theta).exp();
            let c = C64::new(2.0 * p + 2.0, 0.0);
            reflected_norm(n, params)? * hyper_pfq_alpha(&[a, b], &[c], beta / 2.0, m, x, &JackControl::default())?
        }
        DensityPath::JackDirect => {
            let a = C64::new(-(n as f64), 0.0);
            let c = C64::new(-(n as f64) - p - 2.0 / beta + 2.0, -2.0 * q / beta);
            let x = (-I * theta).exp();
            let f = hyper_pfq_alpha(&[a, b], &[c], beta / 2.0, m, x, &JackControl::default())?;
            morris_ratio(n, p, q, beta)? * f / (2.0 * PI)
        }
        DensityPath::Integral => {
            let f = if n == 0 {
                C64::new(1.0, 0.0)
            } else {
                i_integral(IntegralKind::FiniteN, theta, params)?
            };
            reflected_norm(n, params)? * f
        }
    };
    let tol = if path == DensityPath::Integral { 1e-6 } else { IMAG_TOL };
    real_part(value * common * phase, theta, tol, nsz as f64 / (2.0 * PI))
}

/// Normalisation in front of ₂F₁^{(β/2)}(−n, p+1−2iq/β; 2p+2; (1−e^{−iθ})^β):
/// C_β (β/2)^{−pβ} Γ(nβ/2+pβ+β/2+1)/Γ(nβ/2+β/2+1).
fn reflected_norm(n: usize, params: &EnsembleParams) -> Result<f64> {
    let b = params.beta as f64;
    let p = params.p;
    let nb = n as f64 * b / 2.0;
    let lg = ln_gamma(nb + p * b + b / 2.0 + 1.0)? - ln_gamma(nb + b / 2.0 + 1.0)?;
    Ok(c_beta(params)? * (lg - p * b * (b / 2.0).ln()).exp())
}

/// C_β^{(p,q)} = (β/2)^{pβ}/(2π) Γ(1+β/2) |Γ(pβ/2+iq+1)|² / (Γ(pβ+β/2+1) Γ(pβ+1)).
pub fn c_beta(params: &EnsembleParams) -> Result<f64> {
    let b = params.beta as f64;
    let (p, q) = (params.p, params.q);
    let r = |x: f64| log_gamma(C64::new(x, 0.0)).map(|v| v.re);
    let lg =
        r(1.0 + b / 2.0)? + 2.0 * log_gamma(C64::new(p * b / 2.0 + 1.0, q))?.re - r(p * b + b / 2.0 + 1.0)? - r(p * b + 1.0)?;
    Ok(((p * b) * (b / 2.0).ln() + lg).exp() / (2.0 * PI))
}

/// ρ∞,β(θ), the limit of (1/N) ρ_{N,β}(θ/N).
pub fn rho_limit(theta: f64, params: &EnsembleParams, path: DensityPath) -> Result<f64> {
    even_beta(params)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta = {theta} must be positive")));
    }
    let (p, q) = (params.p, params.q);
    let beta = params.beta as f64;
    let pre = (q * PI).exp() * c_beta(params)? * theta.powf(p * beta) * (I * beta * theta / 2.0).exp();
    let f = match path {
        DensityPath::Jack => hyper_pfq_alpha(
            &[C64::new(p + 1.0, -2.0 * q / beta)],
            &[C64::new(2.0 * p + 2.0, 0.0)],
            beta / 2.0,
            params.beta as usize,
            -I * theta,
            &JackControl::default(),
        )?,
        DensityPath::Integral | DensityPath::JackDirect => {
            let t = DensityTilde::new(params)?;
            let m = MorrisParams::new(C64::new(t.a_tilde, 0.0), t.b_tilde, 2.0 / beta, params.beta as usize)?;
            i_integral(IntegralKind::Infinity, theta, params)? / ((2.0 * PI).powf(beta) * morris_closed(&m)?)
        }
    };
    let tol = if path == DensityPath::Integral { 1e-6 } else { IMAG_TOL };
    real_part(pre * f, theta, tol, 1.0 / (2.0 * PI))
}

/// ∫₀^{2π} ρ_{N,β}(θ) dθ.
pub fn rho_total(params: &EnsembleParams, path: DensityPath) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let half = |a: f64, b: f64| {
        tanh_sinh_real(
            |n: Node| {
                let th = if n.from_a < n.to_b { a + n.from_a } else { b - n.to_b };
                if !(th > 0.0 && th < 2.0 * PI) {
                    return 0.0;
                }
                match rho_finite(th, params, path) {
                    Ok(v) => v,
                    Err(e) => {
                        *err.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            a,
            b,
            &DeOptions {
                rel_tol: 1e-9,
                max_level: 8,
                ..DeOptions::default()
            },
        )
    };
    let v = half(0.0, PI)? + half(PI, 2.0 * PI)?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v)
}

/// Finite-N against limit density at one θ over a list of N.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityExpansion {
    pub theta: f64,
    pub n_values: Vec<usize>,
    pub rho_inf: f64,
    /// p d/dθ[θ ρ∞(θ)]
    pub l1_predicted: f64,
    /// N [(1/N) ρ_N(θ/N) − ρ∞(θ)]
    pub l1_measured: Vec<f64>,
    /// |(1/N) ρ_N(θ/N) − ρ∞ − l1_predicted/N|
    pub residual_after_l1: Vec<f64>,
    /// |(1/(N+p)) ρ_N(θ/(N+p)) − ρ∞|
    pub residual_tuned: Vec<f64>,
    pub slope_after_l1: f64,
    pub slope_tuned: f64,
}

impl DensityExpansion {
    /// |l1_measured − l1_predicted| strictly decreasing in N.
    pub fn l1_gap_decreasing(&self) -> bool {
        let gaps: Vec<f64> = self.l1_measured.iter().map(|m| (m - self.l1_predicted).abs()).collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn density_expansion_check(
    theta: f64,
    params: &EnsembleParams,
    n_list: &[usize],
    path: DensityPath,
) -> Result<DensityExpansion> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "N list must be increasing with at least two values".into(),
        ));
    }
    let rho_inf = rho_limit(theta, params, path)?;
    let h = 1e-3 * theta.max(1.0);
    let g = |t: f64| -> Result<f64> { Ok(t * rho_limit(t, params, path)?) };
    let deriv = (-g(theta + 2.0 * h)? + 8.0 * g(theta + h)? - 8.0 * g(theta - h)? + g(theta - 2.0 * h)?) / (12.0 * h);
    let l1_predicted = params.p * deriv;
    let mut l1_measured = Vec::new();
    let mut residual_after_l1 = Vec::new();
    let mut residual_tuned = Vec::new();
    for &n in n_list {
        let pn = params.with_n(n);
        let nf = n as f64;
        let v = rho_finite(theta / nf, &pn, path)? / nf;
        l1_measured.push(nf * (v - rho_inf));
        residual_after_l1.push((v - rho_inf - l1_predicted / nf).abs());
        let l = nf + params.p;
        let vt = rho_finite(theta / l, &pn, path)? / l;
        residual_tuned.push((vt - rho_inf).abs());
    }
    let (slope_after_l1, _, _) = fit_slope(n_list, &residual_after_l1)?;
    let (slope_tuned, _, _) = fit_slope(n_list, &residual_tuned)?;
    Ok(DensityExpansion {
        theta,
        n_values: n_list.to_vec(),
        rho_inf,
        l1_predicted,
        l1_measured,
        residual_after_l1,
        residual_tuned,
        slope_after_l1,
        slope_tuned,
    })
}
