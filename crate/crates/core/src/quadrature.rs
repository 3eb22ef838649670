//! Quadrature rules: tanh-sinh (double exponential) with exact endpoint
//! distances, Gauss–Legendre, and nested tensor rules over ordered sectors.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// A node together with its distances to both ends of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_a: f64,
    pub to_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityMode {
    None,
    EndpointAlgebraic,
}

/// Fixed nodes and weights on an interval.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Node>,
    pub weights: Vec<f64>,
    pub domain: (f64, f64),
    pub singularity_mode: SingularityMode,
}

/// Double exponential settings: step 2^-level on |t| <= tmax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeOptions {
    pub tmax: f64,
    pub min_level: u32,
    pub max_level: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        DeOptions {
            tmax: 6.0,
            min_level: 3,
            max_level: 11,
            rel_tol: 1e-13,
            abs_tol: 1e-300,
        }
    }
}

fn de_point(a: f64, b: f64, len: f64, t: f64) -> (Node, f64) {
    let u = FRAC_PI_2 * t.sinh();
    let e = (-2.0 * u.abs()).exp();
    // distances measured from the nearer endpoint stay accurate
    let near = len * e / (1.0 + e);
    let far = len / (1.0 + e);
    let (from_a, to_b) = if u >= 0.0 { (far, near) } else { (near, far) };
    let x = if from_a <= to_b { a + from_a } else { b - to_b };
    let w = len * FRAC_PI_2 * t.cosh() * 2.0 * e / ((1.0 + e) * (1.0 + e));
    (Node { x, from_a, to_b }, w)
}

impl QuadratureRule {
    /// tanh-sinh rule with step 2^-level, truncated at |t| <= tmax.
    pub fn tanh_sinh(a: f64, b: f64, level: u32, tmax: f64) -> Self {
        Self::tanh_sinh_len(a, b, b - a, level, tmax)
    }

    /// As [`QuadratureRule::tanh_sinh`] with the interval length supplied
    /// separately, for intervals whose length is known more accurately
    /// than `b - a`.
    pub fn tanh_sinh_len(a: f64, b: f64, len: f64, level: u32, tmax: f64) -> Self {
        let h = 0.5f64.powi(level as i32);
        let k = (tmax / h).floor() as i64;
        let mut nodes = Vec::with_capacity((2 * k + 1) as usize);
        let mut weights = Vec::with_capacity((2 * k + 1) as usize);
        for i in -k..=k {
            let (n, w) = de_point(a, b, len, i as f64 * h);
            if w > 0.0 && n.from_a > 0.0 && n.to_b > 0.0 {
                nodes.push(n);
                weights.push(w * h);
            }
        }
        QuadratureRule {
            nodes,
            weights,
            domain: (a, b),
            singularity_mode: SingularityMode::EndpointAlgebraic,
        }
    }

    /// n-point Gauss–Legendre rule on [a, b].
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                if n == 1 {
                    p0 = 1.0;
                    p1 = x;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            let xi = mid - half * x;
            nodes.push(Node {
                x: xi,
                from_a: xi - a,
                to_b: b - xi,
            });
            weights.push(w * half);
        }
        QuadratureRule {
            nodes,
            weights,
            domain: (a, b),
            singularity_mode: SingularityMode::None,
        }
    }

    pub fn integrate<F: Fn(Node) -> C64>(&self, f: F) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            s += f(*n) * *w;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Adaptive tanh-sinh integration of a complex integrand over (a, b).
///
/// Levels are refined by halving the step and reusing earlier samples.
pub fn tanh_sinh<F: Fn(Node) -> C64>(f: F, a: f64, b: f64, opts: &DeOptions) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(a < b) {
        return tanh_sinh(f, b, a, opts).map(|v| -v);
    }
    let mut h = 1.0;
    let k = opts.tmax.floor() as i64;
    let mut sum = C64::new(0.0, 0.0);
    for i in -k..=k {
        let (n, w) = de_point(a, b, b - a, i as f64);
        if w > 0.0 && n.from_a > 0.0 && n.to_b > 0.0 {
            sum += f(n) * w;
        }
    }
    let mut prev = sum * h;
    let mut err = f64::INFINITY;
    for level in 1..=opts.max_level {
        h *= 0.5;
        let kmax = (opts.tmax / h).floor() as i64;
        let mut i = -kmax + if kmax % 2 == 0 { 1 } else { 0 };
        while i <= kmax {
            let (n, w) = de_point(a, b, b - a, i as f64 * h);
            if w > 0.0 && n.from_a > 0.0 && n.to_b > 0.0 {
                sum += f(n) * w;
            }
            i += 2;
        }
        let cur = sum * h;
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::QuadratureNotConverged {
                estimate: cur.norm(),
                error: f64::INFINITY,
            });
        }
        err = (cur - prev).norm();
        if level >= opts.min_level && err <= opts.rel_tol * cur.norm() + opts.abs_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        estimate: prev.norm(),
        error: err,
    })
}

/// Real-valued convenience wrapper around [`tanh_sinh`].
pub fn tanh_sinh_real<F: Fn(Node) -> f64>(f: F, a: f64, b: f64, opts: &DeOptions) -> Result<f64> {
    tanh_sinh(|n| C64::new(f(n), 0.0), a, b, opts).map(|v| v.re)
}

/// Adaptive tanh-sinh for a vector of real integrands sharing the same
/// nodes. Convergence is measured in the max norm.
pub fn tanh_sinh_vec<F: Fn(Node) -> Vec<f64>>(f: F, len_out: usize, a: f64, b: f64, opts: &DeOptions) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; len_out];
    let add = |sum: &mut Vec<f64>, n: Node, w: f64| {
        let v = f(n);
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x * w;
        }
    };
    let mut h = 1.0;
    let k = opts.tmax.floor() as i64;
    for i in -k..=k {
        let (n, w) = de_point(a, b, b - a, i as f64);
        if w > 0.0 && n.from_a > 0.0 && n.to_b > 0.0 {
            add(&mut sum, n, w);
        }
    }
    let mut prev: Vec<f64> = sum.iter().map(|v| v * h).collect();
    let mut err = f64::INFINITY;
    for level in 1..=opts.max_level {
        h *= 0.5;
        let kmax = (opts.tmax / h).floor() as i64;
        let mut i = -kmax + if kmax % 2 == 0 { 1 } else { 0 };
        while i <= kmax {
            let (n, w) = de_point(a, b, b - a, i as f64 * h);
            if w > 0.0 && n.from_a > 0.0 && n.to_b > 0.0 {
                add(&mut sum, n, w);
            }
            i += 2;
        }
        let cur: Vec<f64> = sum.iter().map(|v| v * h).collect();
        let scale = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !scale.is_finite() {
            return Err(Error::QuadratureNotConverged {
                estimate: scale,
                error: f64::INFINITY,
            });
        }
        err = cur.iter().zip(&prev).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if level >= opts.min_level && err <= opts.rel_tol * scale + opts.abs_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        estimate: prev.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        error: err,
    })
}

/// Integral over the ordered sector a < x_1 < ... < x_m < b by nested
/// tanh-sinh rules at a fixed level.
///
/// Each inner variable runs over (x_prev, b). The outermost loop runs in
/// parallel; partial sums are combined in a fixed order.
pub fn ordered_sector<F>(m: usize, a: f64, b: f64, level: u32, tmax: f64, f: &F) -> C64
where
    F: Fn(&[Node]) -> C64 + Sync,
{
    if m == 0 {
        return f(&[]);
    }
    let outer = QuadratureRule::tanh_sinh(a, b, level, tmax);
    let parts: Vec<C64> = outer
        .nodes
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(n, w)| {
            let mut stack = Vec::with_capacity(m);
            stack.push(*n);
            nested(m, b, level, tmax, &mut stack, f) * *w
        })
        .collect();
    parts.iter().fold(C64::new(0.0, 0.0), |s, v| s + v)
}

fn nested<F>(m: usize, b: f64, level: u32, tmax: f64, stack: &mut Vec<Node>, f: &F) -> C64
where
    F: Fn(&[Node]) -> C64,
{
    if stack.len() == m {
        return f(stack);
    }
    let last = *stack.last().expect("nonempty stack");
    let rule = QuadratureRule::tanh_sinh_len(last.x, b, last.to_b, level, tmax);
    let mut s = C64::new(0.0, 0.0);
    for (n, w) in rule.nodes.iter().zip(&rule.weights) {
        stack.push(*n);
        s += nested(m, b, level, tmax, stack, f) * *w;
        stack.pop();
    }
    s
}

/// Ordered-sector integral refined in level until two levels agree.
pub fn ordered_sector_adaptive<F>(
    m: usize,
    a: f64,
    b: f64,
    tmax: f64,
    start_level: u32,
    max_level: u32,
    rel_tol: f64,
    f: &F,
) -> Result<C64>
where
    F: Fn(&[Node]) -> C64 + Sync,
{
    let mut prev = ordered_sector(m, a, b, start_level, tmax, f);
    let mut err = f64::INFINITY;
    for level in start_level + 1..=max_level {
        let cur = ordered_sector(m, a, b, level, tmax, f);
        err = (cur - prev).norm();
        if err <= rel_tol * cur.norm() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        estimate: prev.norm(),
        error: err,
    })
}

/// Unit tanh-sinh rule: (fraction from the left end, fraction to the right
/// end, weight), fractions accurate near both ends.
fn unit_rule(level: u32, tmax: f64) -> Vec<(f64, f64, f64)> {
    let r = QuadratureRule::tanh_sinh_len(0.0, 1.0, 1.0, level, tmax);
    r.nodes.iter().zip(&r.weights).map(|(n, w)| (n.from_a, n.to_b, *w)).collect()
}

/// Ordered-sector integral of exp(Σ_i g(i, x_i) + Σ_{i<j} h(x_i, x_j)) · w(x)
/// at a fixed level. `g` receives the depth so the first variable can use
/// its exact distance to `a`; `h` receives consecutive pairs with the
/// exact gap in `from_a` of the later node.
pub fn ordered_sector_factored<G, H, W>(m: usize, a: f64, b: f64, level: u32, tmax: f64, g: &G, h: &H, w: &W) -> C64
where
    G: Fn(usize, &Node) -> C64 + Sync,
    H: Fn(&Node, &Node, bool) -> f64 + Sync,
    W: Fn(&[Node]) -> C64 + Sync,
{
    if m == 0 {
        return w(&[]);
    }
    let unit = unit_rule(level, tmax);
    let place = |lo: f64, len: f64, (fa, fb, _): (f64, f64, f64)| {
        let (from_a, to_b) = (len * fa, len * fb);
        let x = if from_a <= to_b { lo + from_a } else { b - to_b };
        Node { x, from_a, to_b }
    };
    let parts: Vec<C64> = unit
        .par_iter()
        .map(|&u| {
            let n = place(a, b - a, u);
            let mut stack = Vec::with_capacity(m);
            stack.push(n);
            let lg = g(0, &n);
            u.2 * (b - a) * nested_factored(m, b, &unit, lg, &mut stack, &place, g, h, w)
        })
        .collect();
    parts.iter().fold(C64::new(0.0, 0.0), |s, v| s + v)
}

#[allow(clippy::too_many_arguments)]
fn nested_factored<P, G, H, W>(
    m: usize,
    b: f64,
    unit: &[(f64, f64, f64)],
    log_acc: C64,
    stack: &mut Vec<Node>,
    place: &P,
    g: &G,
    h: &H,
    w: &W,
) -> C64
where
    P: Fn(f64, f64, (f64, f64, f64)) -> Node,
    G: Fn(usize, &Node) -> C64,
    H: Fn(&Node, &Node, bool) -> f64,
    W: Fn(&[Node]) -> C64,
{
    if stack.len() == m {
        if !(log_acc.re > -745.0) {
            return C64::new(0.0, 0.0);
        }
        return log_acc.exp() * w(stack);
    }
    let last = *stack.last().expect("nonempty stack");
    let depth = stack.len();
    let mut s = C64::new(0.0, 0.0);
    for &u in unit {
        let n = place(last.x, last.to_b, u);
        let mut lg = log_acc + g(depth, &n);
        for (i, prev) in stack.iter().enumerate() {
            lg += h(prev, &n, i + 1 == depth);
        }
        stack.push(n);
        s += nested_factored(m, b, unit, lg, stack, place, g, h, w) * (u.2 * last.to_b);
        stack.pop();
    }
    s
}

/// [`ordered_sector_factored`] refined in level until two levels agree.
#[allow(clippy::too_many_arguments)]
pub fn ordered_sector_factored_adaptive<G, H, W>(
    m: usize,
    a: f64,
    b: f64,
    tmax: f64,
    start_level: u32,
    max_level: u32,
    rel_tol: f64,
    g: &G,
    h: &H,
    w: &W,
) -> Result<C64>
where
    G: Fn(usize, &Node) -> C64 + Sync,
    H: Fn(&Node, &Node, bool) -> f64 + Sync,
    W: Fn(&[Node]) -> C64 + Sync,
{
    let mut prev = ordered_sector_factored(m, a, b, start_level, tmax, g, h, w);
    let mut err = f64::INFINITY;
    for level in start_level + 1..=max_level {
        let cur = ordered_sector_factored(m, a, b, level, tmax, g, h, w);
        err = (cur - prev).norm();
        if err <= rel_tol * cur.norm() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        estimate: prev.norm(),
        error: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let o = DeOptions::default();
        let v = tanh_sinh_real(|n| n.x * n.x, 0.0, 2.0, &o).unwrap();
        assert!((v - 8.0 / 3.0).abs() < 1e-13);
        // ∫_0^1 x^{-0.7} dx = 1/0.3 with the singular factor taken from the distance
        let v = tanh_sinh_real(|n| n.from_a.powf(-0.7), 0.0, 1.0, &o).unwrap();
        assert!((v - 1.0 / 0.3).abs() < 1e-10, "{v}");
        let v = tanh_sinh_real(|n| n.to_b.powf(-0.5), 0.0, 1.0, &o).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn vector_rule_matches_scalar() {
        let o = DeOptions::default();
        let v = tanh_sinh_vec(|n| vec![1.0, n.x, n.from_a.powf(-0.5)], 3, 0.0, 1.0, &o).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-13);
        assert!((v[1] - 0.5).abs() < 1e-13);
        assert!((v[2] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_exactness() {
        let r = QuadratureRule::gauss_legendre(8, -1.0, 3.0);
        let v = r.integrate(|n| C64::new(n.x.powi(15), 0.0));
        let exact = (3f64.powi(16) - 1.0) / 16.0;
        assert!((v.re - exact).abs() < 1e-9 * exact);
        assert!(r.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn ordered_sector_volume() {
        // volume of {0 < x < y < 1} is 1/2, and ∫ (y - x) = 1/6
        let v = ordered_sector(2, 0.0, 1.0, 4, 4.0, &|_| C64::new(1.0, 0.0));
        assert!((v.re - 0.5).abs() < 1e-12);
        let v = ordered_sector(2, 0.0, 1.0, 4, 4.0, &|n: &[Node]| C64::new(n[1].x - n[0].x, 0.0));
        assert!((v.re - 1.0 / 6.0).abs() < 1e-12);
        let v = ordered_sector(3, 0.0, 1.0, 4, 4.0, &|_| C64::new(1.0, 0.0));
        assert!((v.re - 1.0 / 6.0).abs() < 1e-12);
    }
}
