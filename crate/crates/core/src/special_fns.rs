//! Complex special functions: log-gamma, Pochhammer symbols, the terminating
//! Gauss series and Kummer's confluent series.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Truncation policy for hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub compensated: bool,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-15,
            max_terms: 4000,
            compensated: true,
        }
    }
}

impl SeriesControl {
    /// Default control sized for a polynomial of degree `n`.
    pub fn for_degree(n: usize) -> Self {
        SeriesControl {
            max_terms: 10 * n + 200,
            ..Default::default()
        }
    }
}

/// Neumaier summation for complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: C64,
    comp: C64,
}

fn two_sum(s: f64, x: f64, c: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *c += (s - t) + x;
    } else {
        *c += (x - t) + s;
    }
    t
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        self.sum.re = two_sum(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

enum Acc {
    Plain(C64),
    Comp(CompensatedSum),
}

impl Acc {
    fn new(compensated: bool) -> Self {
        if compensated {
            Acc::Comp(CompensatedSum::new())
        } else {
            Acc::Plain(C64::new(0.0, 0.0))
        }
    }
    fn add(&mut self, x: C64) {
        match self {
            Acc::Plain(s) => *s += x,
            Acc::Comp(c) => c.add(x),
        }
    }
    fn value(&self) -> C64 {
        match self {
            Acc::Plain(s) => *s,
            Acc::Comp(c) => c.value(),
        }
    }
}

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log Γ(z), continued analytically from the positive real axis.
pub fn log_gamma(z: C64) -> Result<C64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("{z}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log_gamma({z})")));
    }
    if z.re < 0.5 {
        // reflection
        let s = (z * PI).sin();
        let lg = log_gamma(C64::new(1.0, 0.0) - z)?;
        return Ok(C64::new(PI.ln(), 0.0) - s.ln() - lg);
    }
    let mut shift = C64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 16.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut pw = inv;
    for c in STIRLING {
        series += pw * c;
        pw *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift)
}

/// log Γ for real positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    log_gamma(C64::new(x, 0.0)).map(|v| v.re)
}

pub fn gamma(z: C64) -> Result<C64> {
    log_gamma(z).map(|v| v.exp())
}

/// (a)_n = a (a+1) ... (a+n-1).
pub fn pochhammer(a: C64, n: usize) -> C64 {
    if n <= 64 || is_nonpositive_integer(a) || is_nonpositive_integer(a + n as f64) {
        let mut r = C64::new(1.0, 0.0);
        for i in 0..n {
            r *= a + i as f64;
        }
        return r;
    }
    match (log_gamma(a + n as f64), log_gamma(a)) {
        (Ok(x), Ok(y)) => (x - y).exp(),
        _ => {
            let mut r = C64::new(1.0, 0.0);
            for i in 0..n {
                r *= a + i as f64;
            }
            r
        }
    }
}

/// ₂F₁(−n, b; c; z), a polynomial of degree n in z.
pub fn hyp2f1_terminating(n: usize, b: C64, c: C64, z: C64, ctrl: &SeriesControl) -> Result<C64> {
    let mut acc = Acc::new(ctrl.compensated);
    let mut term = C64::new(1.0, 0.0);
    acc.add(term);
    let limit = n.min(ctrl.max_terms);
    for k in 0..limit {
        let kf = k as f64;
        let denom = c + kf;
        if denom.norm() == 0.0 {
            return Err(Error::Pole(format!("(c)_{} with c = {c}", k + 1)));
        }
        let num_a = kf - n as f64;
        term *= (b + kf) * num_a / (denom * (kf + 1.0)) * z;
        acc.add(term);
        if term.norm() == 0.0 {
            break;
        }
        let s = acc.value().norm();
        if term.norm() <= ctrl.rel_tol * s {
            // remaining terms decay geometrically once the ratio is below 1/2
            let k1 = kf + 1.0;
            let ratio = ((b + k1) * (k1 - n as f64) / ((c + k1) * (k1 + 1.0)) * z).norm();
            if ratio < 0.5 {
                break;
            }
        }
    }
    if n > ctrl.max_terms {
        return Err(Error::SeriesNotConverged {
            terms: ctrl.max_terms,
            last: term.norm(),
        });
    }
    Ok(acc.value())
}

/// Beyond this |z| the power series loses digits to cancellation and
/// Kummer's equation is integrated outward instead.
const SERIES_RADIUS: f64 = 2.0;

/// Kummer's ₁F₁(a; c; z): the power series for |z| ≤ 2, otherwise Taylor
/// continuation of z w'' + (c − z) w' − a w = 0 along the ray to z
/// (for Re z ≥ 0).
pub fn hyp1f1(a: C64, c: C64, z: C64, ctrl: &SeriesControl) -> Result<C64> {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        return hyp1f1_series(a, c, z, ctrl);
    }
    if z.re < 0.0 {
        // stepping is stable only where the solution dominates
        return Ok(z.exp() * hyp1f1(c - a, c, -z, ctrl)?);
    }
    let dir = z / r;
    let z0 = dir * SERIES_RADIUS;
    let mut w = hyp1f1_series(a, c, z0, ctrl)?;
    let mut dw = a / c * hyp1f1_series(a + 1.0, c + 1.0, z0, ctrl)?;
    let steps = (r - SERIES_RADIUS).ceil() as usize;
    let h = dir * ((r - SERIES_RADIUS) / steps as f64);
    let mut at = z0;
    for _ in 0..steps {
        (w, dw) = kummer_step(a, c, at, w, dw, h, ctrl)?;
        at += h;
    }
    Ok(w)
}

/// w(z₀ + h) and w'(z₀ + h) from the Taylor series of the Kummer solution
/// through (z₀, w, w'); needs |h| < |z₀|.
fn kummer_step(a: C64, c: C64, z0: C64, w: C64, dw: C64, h: C64, ctrl: &SeriesControl) -> Result<(C64, C64)> {
    // b_{n+2} = ((n + a) b_n − (n + 1)(n + c − z₀) b_{n+1}) / (z₀ (n + 1)(n + 2))
    let (mut b0, mut b1) = (w, dw);
    let mut hp = C64::new(1.0, 0.0);
    let mut val = Acc::new(ctrl.compensated);
    let mut der = Acc::new(ctrl.compensated);
    val.add(b0);
    der.add(b1);
    val.add(b1 * h);
    let scale = w.norm() + dw.norm() * h.norm();
    let mut quiet = 0;
    for n in 0..ctrl.max_terms {
        let nf = n as f64;
        let b2 = ((a + nf) * b0 - (nf + 1.0) * (c + nf - z0) * b1) / (z0 * ((nf + 1.0) * (nf + 2.0)));
        hp *= h;
        // b2 h^{n+2} into w, (n + 2) b2 h^{n+1} into w'
        let tv = b2 * hp * h;
        let td = b2 * hp * (nf + 2.0);
        val.add(tv);
        der.add(td);
        if tv.norm() + td.norm() * h.norm() <= ctrl.rel_tol * scale.max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 3 {
                return Ok((val.value(), der.value()));
            }
        } else {
            quiet = 0;
        }
        b0 = b1;
        b1 = b2;
    }
    Err(Error::SeriesNotConverged {
        terms: ctrl.max_terms,
        last: b1.norm(),
    })
}

fn hyp1f1_series(a: C64, c: C64, z: C64, ctrl: &SeriesControl) -> Result<C64> {
    let mut acc = Acc::new(ctrl.compensated);
    let mut term = C64::new(1.0, 0.0);
    acc.add(term);
    let mut max_term: f64 = 1.0;
    for k in 0..ctrl.max_terms {
        let kf = k as f64;
        let denom = c + kf;
        if denom.norm() == 0.0 {
            return Err(Error::Pole(format!("(c)_{} with c = {c}", k + 1)));
        }
        term *= (a + kf) / (denom * (kf + 1.0)) * z;
        acc.add(term);
        let tn = term.norm();
        max_term = max_term.max(tn);
        if tn == 0.0 {
            return Ok(acc.value());
        }
        let s = acc.value().norm();
        if tn <= ctrl.rel_tol * s.max(f64::MIN_POSITIVE) {
            let k1 = kf + 1.0;
            let ratio = ((a + k1) / ((c + k1) * (k1 + 1.0)) * z).norm();
            if ratio < 0.5 {
                let v = acc.value();
                if max_term > 1e10 * v.norm() {
                    return Err(Error::SeriesNotConverged {
                        terms: k + 1,
                        last: max_term,
                    });
                }
                return Ok(v);
            }
        }
    }
    Err(Error::SeriesNotConverged {
        terms: ctrl.max_terms,
        last: term.norm(),
    })
}

/// Truncated large-z expansion of Γ(z+a)/Γ(z+b).
pub fn gamma_ratio_expansion(z: C64, a: C64, b: C64, order: u8) -> C64 {
    let d = a - b;
    let s = a + b - 1.0;
    let mut series = C64::new(1.0, 0.0);
    if order >= 1 {
        series += d * s / (z * 2.0);
    }
    if order >= 2 {
        let binom = d * (d - 1.0) / 2.0;
        series += binom * (s * s * 3.0 - a + b - 1.0) / (z * z * 12.0);
    }
    z.powc(d) * series
}

/// Relative difference with a floor on the denominator.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
