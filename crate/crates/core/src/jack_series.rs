//! Hypergeometric functions ₚFq^{(α)} of matrix argument at equal
//! arguments, summed over partitions with Jack polynomial weights.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Weakly decreasing positive parts; the empty partition has weight 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn conjugate(&self) -> Vec<usize> {
        let top = self.parts.first().copied().unwrap_or(0);
        (0..top).map(|j| self.parts.iter().filter(|&&p| p > j).count()).collect()
    }
}

fn push_exact(w: usize, m: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if w == 0 {
        out.push(Partition { parts: prefix.clone() });
        return;
    }
    if prefix.len() == m {
        return;
    }
    for k in (1..=max_part.min(w)).rev() {
        prefix.push(k);
        push_exact(w - k, m, k, prefix, out);
        prefix.pop();
    }
}

/// Partitions of exactly `weight` into at most `m` parts, each at most
/// `max_part`.
pub fn partitions_of(weight: usize, m: usize, max_part: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    push_exact(weight, m, max_part, &mut Vec::with_capacity(m), &mut out);
    out
}

/// All partitions with at most `m` parts and weight at most `max_weight`,
/// ordered by weight.
pub fn partitions_up_to(m: usize, max_weight: usize) -> Vec<Partition> {
    (0..=max_weight).flat_map(|w| partitions_of(w, m, w)).collect()
}

/// [a]_k^{(α)} = ∏_j (a − (j−1)/α)_{k_j}.
pub fn gen_pochhammer(a: C64, k: &Partition, alpha: f64) -> C64 {
    let mut r = C64::new(1.0, 0.0);
    for (j, &kj) in k.parts.iter().enumerate() {
        let b = a - j as f64 / alpha;
        for i in 0..kj {
            r *= b + i as f64;
        }
    }
    r
}

/// C_k^{(α)}(x, …, x) with m arguments, normalised so that the sum over
/// |k| = n is (m x)^n.
pub fn jack_principal(k: &Partition, alpha: f64, m: usize, x: C64) -> C64 {
    if k.len() > m {
        return C64::new(0.0, 0.0);
    }
    let n = k.weight();
    let kc = k.conjugate();
    let mut log = 0.0;
    let mut sign = 1.0;
    for (i, &ki) in k.parts.iter().enumerate() {
        for j in 0..ki {
            let arm = (ki - j - 1) as f64;
            let leg = (kc[j] - i - 1) as f64;
            let num = m as f64 - i as f64 + alpha * j as f64;
            if num == 0.0 {
                return C64::new(0.0, 0.0);
            }
            sign *= num.signum();
            log += num.abs().ln() - (leg + alpha * (arm + 1.0)).ln() - (leg + 1.0 + alpha * arm).ln();
        }
    }
    log += n as f64 * alpha.ln() + (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    x.powu(n as u32) * (sign * log.exp())
}

/// Summation controls for `hyper_pfq_alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JackControl {
    pub max_weight: usize,
    pub rel_tol: f64,
    /// Consecutive weight shells below `rel_tol` needed to stop.
    pub quiet_shells: usize,
}

impl Default for JackControl {
    fn default() -> Self {
        JackControl {
            max_weight: 200,
            rel_tol: 1e-17,
            quiet_shells: 3,
        }
    }
}

fn nonpositive_integer(a: C64) -> Option<usize> {
    if a.im == 0.0 && a.re <= 0.0 && a.re == a.re.round() {
        Some((-a.re) as usize)
    } else {
        None
    }
}

/// C_k(1^m)/|k|! · ∏[a]_k/∏[b]_k, accumulated box by box so that no
/// intermediate factor overflows.
fn series_term(k: &Partition, a_list: &[C64], b_list: &[C64], alpha: f64, m: usize) -> Result<C64> {
    if k.len() > m {
        return Ok(C64::new(0.0, 0.0));
    }
    let kc = k.conjugate();
    let mut t = C64::new(1.0, 0.0);
    for (i, &ki) in k.parts.iter().enumerate() {
        let shift = i as f64 / alpha;
        for j in 0..ki {
            let arm = (ki - j - 1) as f64;
            let leg = (kc[j] - i - 1) as f64;
            let num = m as f64 - i as f64 + alpha * j as f64;
            let mut f = C64::new(alpha * num / ((leg + alpha * (arm + 1.0)) * (leg + 1.0 + alpha * arm)), 0.0);
            for &a in a_list {
                f *= a - shift + j as f64;
            }
            for &b in b_list {
                let d = b - shift + j as f64;
                if d == C64::new(0.0, 0.0) {
                    return Err(Error::Pole(format!("[{b}]_{:?} vanishes", k.parts())));
                }
                f /= d;
            }
            t *= f;
        }
    }
    Ok(t)
}

/// ₚFq^{(α)}(a; b; x, …, x) with m equal arguments.
pub fn hyper_pfq_alpha(a_list: &[C64], b_list: &[C64], alpha: f64, m: usize, x: C64, ctrl: &JackControl) -> Result<C64> {
    if !(alpha > 0.0) || m == 0 {
        return Err(Error::Domain(format!("need alpha > 0 and m >= 1, got {alpha}, {m}")));
    }
    // a nonpositive integer −n stops every row at n
    let max_part = a_list.iter().filter_map(|&a| nonpositive_integer(a)).min();
    let top = match max_part {
        Some(n) => n * m,
        None => ctrl.max_weight,
    };
    let mut sum = C64::new(0.0, 0.0);
    let mut comp = C64::new(0.0, 0.0);
    let mut quiet = 0;
    let mut last = 0.0;
    let mut xp = C64::new(1.0, 0.0);
    for w in 0..=top {
        if w > 0 {
            xp *= x;
        }
        let mut shell = C64::new(0.0, 0.0);
        for k in partitions_of(w, m, max_part.unwrap_or(w).min(w)) {
            shell += series_term(&k, a_list, b_list, alpha, m)? * xp;
        }
        let y = shell - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        last = shell.norm();
        if max_part.is_none() {
            if last <= ctrl.rel_tol * sum.norm() {
                quiet += 1;
                if quiet >= ctrl.quiet_shells {
                    return Ok(sum);
                }
            } else {
                quiet = 0;
            }
        }
    }
    if max_part.is_some() {
        return Ok(sum);
    }
    Err(Error::SeriesNotConverged { terms: top, last })
}

/// ₂F₁^{(α)}(−n, b; c; t, …, t) written through the reflected series
/// ₂F₁^{(α)}(−n, b; c'; 1 − t)/₂F₁^{(α)}(−n, b; c'; 1) with
/// c' = −n + b + 1 + (m − 1)/α − c.
pub fn duality_ratio_2f1(n: usize, b: C64, c: C64, alpha: f64, m: usize, t: C64, ctrl: &JackControl) -> Result<C64> {
    let a = C64::new(-(n as f64), 0.0);
    let cp = a + b + 1.0 + (m as f64 - 1.0) / alpha - c;
    let num = hyper_pfq_alpha(&[a, b], &[cp], alpha, m, C64::new(1.0, 0.0) - t, ctrl)?;
    let den = hyper_pfq_alpha(&[a, b], &[cp], alpha, m, C64::new(1.0, 0.0), ctrl)?;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fns::{hyp2f1_terminating, SeriesControl};

    #[test]
    fn small_enumerations() {
        let p = partitions_up_to(2, 2);
        let want: Vec<Partition> = vec![vec![], vec![1], vec![2], vec![1, 1]]
            .into_iter()
            .map(Partition::new)
            .collect();
        assert_eq!(p, want);
        let brute = (0..5usize)
            .flat_map(|a| (0..=a).flat_map(move |b| (0..=b).map(move |c| a + b + c)))
            .filter(|&w| w <= 4)
            .count();
        assert_eq!(partitions_up_to(3, 4).len(), brute);
        assert_eq!(brute, 11);
        assert_eq!(partitions_up_to(1, 3).len(), 4);
    }

    #[test]
    fn pochhammer_examples() {
        let one = Partition::new(vec![]);
        assert_eq!(gen_pochhammer(C64::new(2.5, 1.0), &one, 0.7), C64::new(1.0, 0.0));
        let k = Partition::new(vec![2, 1]);
        assert!((gen_pochhammer(C64::new(3.0, 0.0), &k, 1.0) - 24.0).norm() < 1e-13);
    }

    #[test]
    fn sum_rule() {
        for m in 1..=4 {
            for alpha in [0.5, 1.0, 2.0] {
                for n in 0..=5 {
                    let s: C64 = partitions_of(n, m, n)
                        .iter()
                        .map(|k| jack_principal(k, alpha, m, C64::new(1.0, 0.0)))
                        .sum();
                    let want = (m as f64).powi(n as i32);
                    assert!((s.re - want).abs() < 1e-11 * want, "m {m} alpha {alpha} n {n}: {s}");
                }
            }
        }
    }

    #[test]
    fn one_variable_reduces_to_gauss() {
        let ctrl = JackControl::default();
        for alpha in [0.5, 1.0, 3.0] {
            let v = hyper_pfq_alpha(
                &[C64::new(-3.0, 0.0), C64::new(2.0, 0.0)],
                &[C64::new(4.0, 0.0)],
                alpha,
                1,
                C64::new(0.3, 0.0),
                &ctrl,
            )
            .unwrap();
            let g = hyp2f1_terminating(
                3,
                C64::new(2.0, 0.0),
                C64::new(4.0, 0.0),
                C64::new(0.3, 0.0),
                &SeriesControl::default(),
            )
            .unwrap();
            assert!((v - g).norm() < 1e-14, "{v} {g}");
        }
    }

    #[test]
    fn one_variable_confluent_is_exponential() {
        let v = hyper_pfq_alpha(&[], &[], 2.0, 1, C64::new(0.0, 2.5), &JackControl::default()).unwrap();
        assert!((v - C64::new(0.0, 2.5).exp()).norm() < 1e-14);
    }

    #[test]
    fn duality_matches_direct_sum() {
        let ctrl = JackControl::default();
        let (b, c) = (C64::new(2.5, -0.35), C64::new(-3.2, -0.35));
        for (alpha, m) in [(1.0, 2usize), (2.0, 4)] {
            let t = C64::new(0.3, -0.4);
            let direct = hyper_pfq_alpha(&[C64::new(-3.0, 0.0), b], &[c], alpha, m, t, &ctrl).unwrap();
            let dual = duality_ratio_2f1(3, b, c, alpha, m, t, &ctrl).unwrap();
            assert!((direct - dual).norm() < 1e-10 * direct.norm(), "{direct} {dual}");
            let unit = duality_ratio_2f1(3, b, c, alpha, m, C64::new(0.0, 0.0), &ctrl).unwrap();
            assert!((unit - 1.0).norm() < 1e-14);
        }
    }
}
