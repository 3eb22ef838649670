//! Convergence of finite-N kernels to their limits: residual scans,
//! log-log slope fits, Richardson extrapolation and term-by-term checks of
//! the intermediate expansions.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::finite_kernels::{tail_integral, FiniteKernel, KernelTable, Scaling};
use crate::limiting_kernels::{c_tilde, expansion, j_odd, j_sym};
use crate::quadrature::DeOptions;
use crate::routh_romanovski::{log_weight_cauchy, rr_prefactored, CauchyWeightParams, EnsembleParams};
use crate::special_fns::{log_gamma, pochhammer};

/// Residuals below `FLOOR_FACTOR · ε · |K̂∞|` are at the rounding floor.
pub const FLOOR_FACTOR: f64 = 1e3;
/// Fits with r² below this are inconclusive.
pub const MIN_R2: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub n_values: Vec<usize>,
    pub residuals: Vec<f64>,
    pub fitted_slope: f64,
    pub fit_r2: f64,
    /// Two-point Richardson estimate of the limit from the two largest N.
    pub extrapolated_limit: f64,
    /// Every residual is at the floating point floor; no slope was fitted.
    pub floor: bool,
    /// N values left out of the fit (floor or outlier).
    pub dropped: Vec<usize>,
}

impl ResidualReport {
    pub fn conclusive(&self) -> bool {
        self.floor || self.fit_r2 >= MIN_R2
    }
}

/// Least-squares line through (ln N, ln r): (slope, intercept, r²).
fn line_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::FitDegenerate(format!("{} points", xs.len())));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDegenerate("all N equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, my - slope * mx, r2))
}

/// Slope of ln r against ln N. With four or more points the smallest N is
/// dropped when it sits more than 3σ off the line through the others.
/// Returns (slope, r², dropped N).
pub fn fit_slope(n_values: &[usize], residuals: &[f64]) -> Result<(f64, f64, Vec<usize>)> {
    if n_values.len() != residuals.len() {
        return Err(Error::InvalidParams("N list and residuals differ in length".into()));
    }
    if residuals.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::FitDegenerate("residuals must be positive and finite".into()));
    }
    let mut idx: Vec<usize> = (0..n_values.len()).collect();
    idx.sort_by_key(|&i| n_values[i]);
    let xs: Vec<f64> = idx.iter().map(|&i| (n_values[i] as f64).ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| residuals[i].ln()).collect();
    let (slope, _, r2) = line_fit(&xs, &ys)?;
    if xs.len() >= 4 {
        let (s, b, _) = line_fit(&xs[1..], &ys[1..])?;
        let res: Vec<f64> = xs[1..].iter().zip(&ys[1..]).map(|(x, y)| y - (s * x + b)).collect();
        let dof = (res.len() - 2).max(1) as f64;
        let sigma = (res.iter().map(|r| r * r).sum::<f64>() / dof).sqrt();
        let dev = (ys[0] - (s * xs[0] + b)).abs();
        if dev > 3.0 * sigma.max(1e-3) {
            let (s2, _, r2b) = line_fit(&xs[1..], &ys[1..])?;
            return Ok((s2, r2b, vec![n_values[idx[0]]]));
        }
    }
    Ok((slope, r2, Vec::new()))
}

/// (N₂ f(N₂) − N₁ f(N₁))/(N₂ − N₁), cancelling a 1/N term.
pub fn richardson(n1: usize, f1: f64, n2: usize, f2: f64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    (b * f2 - a * f1) / (b - a)
}

fn report(n_values: &[usize], values: &[f64], residuals: Vec<f64>, scale: f64) -> Result<ResidualReport> {
    let floor_level = FLOOR_FACTOR * f64::EPSILON * scale;
    let mut keep_n = Vec::new();
    let mut keep_r = Vec::new();
    let mut dropped = Vec::new();
    for (&n, &r) in n_values.iter().zip(&residuals) {
        if r < floor_level {
            dropped.push(n);
        } else {
            keep_n.push(n);
            keep_r.push(r);
        }
    }
    let m = n_values.len();
    let extrapolated_limit = if m >= 2 {
        richardson(n_values[m - 2], values[m - 2], n_values[m - 1], values[m - 1])
    } else {
        values.last().copied().unwrap_or(f64::NAN)
    };
    if keep_n.len() < 2 {
        return Ok(ResidualReport {
            n_values: n_values.to_vec(),
            residuals,
            fitted_slope: f64::NAN,
            fit_r2: f64::NAN,
            extrapolated_limit,
            floor: true,
            dropped,
        });
    }
    let (slope, r2, out) = fit_slope(&keep_n, &keep_r)?;
    dropped.extend(out);
    dropped.sort_unstable();
    Ok(ResidualReport {
        n_values: n_values.to_vec(),
        residuals,
        fitted_slope: slope,
        fit_r2: r2,
        extrapolated_limit,
        floor: false,
        dropped,
    })
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.len() < 2 {
        return Err(Error::InvalidParams("need at least two N values".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("N values must be strictly increasing".into()));
    }
    Ok(())
}

fn finite_scaled(beta: u32, n: usize, x: f64, y: f64, params: &EnsembleParams, scaling: Scaling) -> Result<f64> {
    let p = EnsembleParams::new(beta, n, params.p, params.q)?;
    FiniteKernel::new(&p)?.eval_scaled(x, y, scaling)
}

/// |S_N − Σ_{j ≤ order} L̂_j / N^j| at (X, Y) for every N in `n_list`
/// (order 0, 1 or 2), with its log-log slope.
pub fn kernel_residual_scan(
    beta: u32,
    x: f64,
    y: f64,
    params: &EnsembleParams,
    n_list: &[usize],
    order: usize,
) -> Result<ResidualReport> {
    check_n_list(n_list)?;
    if order > 2 {
        return Err(Error::InvalidParams(format!("expansion order {order} > 2")));
    }
    let lim_params = EnsembleParams { beta, ..*params };
    lim_params.validate()?;
    let e = expansion(x, y, &lim_params)?;
    let l2 = match (order, e.l2) {
        (2, None) => return Err(Error::Unsupported(format!("second-order term for beta = {beta}"))),
        (_, v) => v.map_or(0.0, |v| v.re),
    };
    let terms = [e.k_inf.re, e.l1.re, l2];
    let values = n_list
        .par_iter()
        .map(|&n| finite_scaled(beta, n, x, y, params, Scaling::Standard))
        .collect::<Result<Vec<f64>>>()?;
    let residuals = n_list
        .iter()
        .zip(&values)
        .map(|(&n, v)| {
            let nf = n as f64;
            let approx: f64 = (0..=order).map(|j| terms[j] / nf.powi(j as i32)).sum();
            (v - approx).abs()
        })
        .collect();
    report(n_list, &values, residuals, terms[0].abs())
}

/// |S_N − K̂∞| with the angle scaled by N + p instead of N.
pub fn tuned_scaling_residual(beta: u32, x: f64, y: f64, params: &EnsembleParams, n_list: &[usize]) -> Result<ResidualReport> {
    scaling_residual(beta, x, y, params, n_list, Scaling::Tuned)
}

pub fn scaling_residual(
    beta: u32,
    x: f64,
    y: f64,
    params: &EnsembleParams,
    n_list: &[usize],
    scaling: Scaling,
) -> Result<ResidualReport> {
    check_n_list(n_list)?;
    let lim_params = EnsembleParams { beta, ..*params };
    lim_params.validate()?;
    let k = expansion(x, y, &lim_params)?.k_inf.re;
    let values = n_list
        .par_iter()
        .map(|&n| finite_scaled(beta, n, x, y, params, scaling))
        .collect::<Result<Vec<f64>>>()?;
    let residuals = values.iter().map(|v| (v - k).abs()).collect();
    report(n_list, &values, residuals, k.abs())
}

/// The intermediate expansions checked term by term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionKind {
    /// (−N+k)_α against its expansion in 1/N (α = 3, k = 2), to 1/N².
    Poc,
    /// The circle weight ω₂^{1/2} at X/N, which is exact.
    Weight,
    /// The prefactored polynomial against Ã(0) plus its 1/N term (k = 1).
    Polynomial,
    /// 1/h_{N−k−1} against its leading power and two corrections (k = 1).
    Norm,
    /// sin(X/N) sin(Y/N)/sin((X−Y)/N) at Y = X/2, to 1/N².
    SineRatio,
    /// The weighted polynomial G against C̃₀ + C̃₁/N + C̃₂/N² (k = 1).
    Icc,
    /// The β = 1 tail ∫ Ĩ_{N−2} ω̃₁ against 𝒥_o to 1/N².
    TailB1,
    /// The β = 4 tail ∫ Ĩ_{2N−1} ω̃₁ against 𝒥_s in powers of 1/(2N).
    Icc4,
    /// γ_{2N−1} against its expansion in 1/(2N).
    Gamma2N,
}

impl ExpansionKind {
    pub const ALL: [ExpansionKind; 9] = [
        ExpansionKind::Poc,
        ExpansionKind::Weight,
        ExpansionKind::Polynomial,
        ExpansionKind::Norm,
        ExpansionKind::SineRatio,
        ExpansionKind::Icc,
        ExpansionKind::TailB1,
        ExpansionKind::Icc4,
        ExpansionKind::Gamma2N,
    ];

    /// Highest power of 1/N kept in the truncated right-hand side.
    pub fn order(self) -> i32 {
        match self {
            ExpansionKind::Weight => 0,
            ExpansionKind::Polynomial => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExpansionKind::Poc => "poc",
            ExpansionKind::Weight => "weight",
            ExpansionKind::Polynomial => "polynomial",
            ExpansionKind::Norm => "norm",
            ExpansionKind::SineRatio => "sine_ratio",
            ExpansionKind::Icc => "icc",
            ExpansionKind::TailB1 => "tail_b1",
            ExpansionKind::Icc4 => "icc4",
            ExpansionKind::Gamma2N => "gamma2N",
        }
    }
}

impl fmt::Display for ExpansionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExpansionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExpansionKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown expansion kind '{s}'")))
    }
}

/// hconst(a) = 2^{2a−2} |Γ(a−iq)|² / (π Γ(2a) Γ(2a−1)).
fn hconst(a: f64, q: f64) -> Result<f64> {
    let lg = 2.0 * log_gamma(C64::new(a, -q))?.re
        - log_gamma(C64::new(2.0 * a, 0.0))?.re
        - log_gamma(C64::new(2.0 * a - 1.0, 0.0))?.re;
    Ok(((2.0 * a - 2.0) * 2f64.ln() + lg).exp() / PI)
}

/// 1/h_{M−k−1}/(hconst(pp+k+1) M^{2pp+2k+1}) against 1 + Q₁/M + Q₂/M².
fn norm_ratio(m: usize, k: usize, pp: f64, q: f64) -> Result<(f64, f64, f64)> {
    let kf = k as f64;
    let mf = m as f64;
    let c = C64::new(-mf - pp, q);
    let log_h = crate::routh_romanovski::rr_log_norm(m - k - 1, c)?;
    let lead = hconst(pp + kf + 1.0, q)?.ln() + (2.0 * pp + 2.0 * kf + 1.0) * mf.ln();
    let lhs = (-log_h - lead).exp();
    let a = pp + kf;
    let q1 = pp * (2.0 * a + 1.0);
    let q2 = a * (2.0 * a + 1.0) * (6.0 * pp * pp - pp - kf - 1.0) / 6.0;
    Ok((lhs, q1, q2))
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(what.into()))
    }
}

/// N^{order+1} |LHS − truncated RHS| for one intermediate expansion, with
/// both sides divided by their leading size. `x` is the scaled point X;
/// `params` supplies p and q (β and N in `params` are ignored).
pub fn intermediate_expansion_check(kind: ExpansionKind, n: usize, x: f64, params: &EnsembleParams) -> Result<f64> {
    let (p, q) = (params.p, params.q);
    let nf = n as f64;
    require(n >= 4, "N must be at least 4")?;
    require(x > 0.0 && x < nf, "X must lie in (0, N)")?;
    let phi = x / nf;
    let diff: f64 = match kind {
        ExpansionKind::Poc => {
            let (alpha, k) = (3usize, 2.0);
            let a = alpha as f64;
            let lhs = pochhammer(C64::new(-nf + k, 0.0), alpha).re / ((-1f64).powi(alpha as i32) * nf.powi(alpha as i32));
            let c1 = -a * (2.0 * k + a - 1.0) / 2.0;
            let c2 = a * (a - 1.0) * (3.0 * a * a + (12.0 * k - 7.0) * a + 12.0 * k * k - 12.0 * k + 2.0) / 24.0;
            (lhs - (1.0 + c1 / nf + c2 / (nf * nf))).abs()
        }
        ExpansionKind::Weight => {
            let c = C64::new(-nf - p, q);
            let lw = 0.5 * log_weight_cauchy(-1.0 / phi.tan(), &CauchyWeightParams::new(c)?);
            let rhs = (nf + p) * phi.sin().ln() + q * (phi - PI / 2.0);
            (lw - rhs).exp_m1().abs()
        }
        ExpansionKind::Polynomial => {
            let k = 1usize;
            let lhs = rr_prefactored(n, k, p, q, phi)?;
            let c0 = c_tilde(0, k as u32, p, q, x)?;
            let c1 = c_tilde(1, k as u32, p, q, x)?;
            let p1 = c1 - C64::new(q, k as f64) * x * c0;
            (lhs - c0 - p1 / nf).norm()
        }
        ExpansionKind::Norm => {
            let (lhs, q1, q2) = norm_ratio(n, 1, p, q)?;
            (lhs - (1.0 + q1 / nf + q2 / (nf * nf))).abs()
        }
        ExpansionKind::SineRatio => {
            let y = x / 2.0;
            let lhs = phi.sin() * (y / nf).sin() / ((x - y) / nf).sin();
            let lead = x * y / (nf * (x - y));
            (lhs / lead - (1.0 - x * y / (3.0 * nf * nf))).abs()
        }
        ExpansionKind::Icc => {
            let k = 1u32;
            let kf = k as f64;
            let pf = rr_prefactored(n, k as usize, p, q, phi)?;
            let g = (C64::new(q, kf) * phi).exp() * (phi.sin() / phi).powf(p + kf) * pf;
            let c: Vec<C64> = (0..3).map(|j| c_tilde(j, k, p, q, x)).collect::<Result<_>>()?;
            (g - c[0] - c[1] / nf - c[2] / (nf * nf)).norm()
        }
        ExpansionKind::TailB1 => {
            require(n % 2 == 0, "tail_b1 needs even N")?;
            require(p > 0.0, "tail_b1 needs p > 0")?;
            let ep = EnsembleParams::new(1, n, p, q)?;
            let lhs = tail_integral(n - 2, x, &ep, &DeOptions::default())? * nf.powf(p + 2.0);
            let j = j_odd(p, q, x)?;
            let rhs = j[0] + j[1] / nf + (j[2] + j[3] / 6.0) / (nf * nf);
            (lhs - rhs).norm() / j[0].norm()
        }
        ExpansionKind::Icc4 => {
            require(p > 0.0, "icc4 needs p > 0")?;
            let ep = EnsembleParams::new(4, n, p, q)?;
            let tail = tail_integral(2 * n - 1, x, &ep, &DeOptions::default())?;
            let lhs = -tail * (q * PI / 2.0).exp() * nf.powf(2.0 * p + 1.0);
            let j = j_sym(p, q, x)?;
            let m = 2.0 * nf;
            let rhs = j[0] + j[1] / m + (j[2] / 4.0 + j[3] / 6.0) / (nf * nf);
            (lhs - rhs).norm() / j[0].norm()
        }
        ExpansionKind::Gamma2N => {
            require(p > 0.0, "gamma2N needs p > 0")?;
            let m = 2 * n;
            let mf = m as f64;
            let c = C64::new(-mf - 2.0 * p, q);
            let t = KernelTable::new(c, m)?;
            let g = t.gamma(m - 1);
            let lead = 2.0 * p * hconst(2.0 * p + 1.0, q)? * mf.powf(4.0 * p + 1.0);
            let g1 = 2.0 * p * (4.0 * p + 1.0);
            let g2 = p * (4.0 * p + 1.0) * (24.0 * p * p - 2.0 * p - 1.0) / 3.0;
            (g / lead - (1.0 + g1 / mf + g2 / (mf * mf))).abs()
        }
    };
    Ok(nf.powi(kind.order() + 1) * diff)
}

/// Scaled residuals at N and 2N; bounded when both are finite and their
/// ratio lies in [1/4, 4] (or both sit at the rounding floor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCheck {
    pub kind: ExpansionKind,
    pub n: usize,
    pub scaled: [f64; 2],
    pub bounded: bool,
}

pub fn expansion_check_pair(kind: ExpansionKind, n: usize, x: f64, params: &EnsembleParams) -> Result<ExpansionCheck> {
    let a = intermediate_expansion_check(kind, n, x, params)?;
    let b = intermediate_expansion_check(kind, 2 * n, x, params)?;
    let tiny = 1e-9;
    let bounded = a.is_finite() && b.is_finite() && ((a < tiny && b < tiny) || (b <= 4.0 * a.max(tiny) && b >= 0.25 * a));
    Ok(ExpansionCheck {
        kind,
        n,
        scaled: [a, b],
        bounded,
    })
}
