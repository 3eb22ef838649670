use num_complex::Complex64 as C64;
use specsing::limiting_kernels::*;
use specsing::routh_romanovski::EnsembleParams;
use std::f64::consts::PI;

#[test]
fn real_phase_limit_is_bessel_kernel() {
    for p in [0.5, 1.5] {
        let params = EnsembleParams::new(2, 10, p, 0.0).unwrap();
        for x in [0.5, 2.0, 4.5] {
            for y in [0.7, 1.9, 3.0] {
                let k = k_limit(2, x, y, &params).unwrap().re * x / y;
                let b = bessel_kernel(p, x, y).unwrap();
                assert!((k - b).abs() < 1e-8, "p {p} ({x},{y}): {k} {b}");
            }
        }
    }
}

#[test]
fn uniform_limit_is_sine_kernel() {
    let params = EnsembleParams::new(2, 10, 0.0, 0.0).unwrap();
    for (x, y) in [(0.5, 3.0), (2.0, 0.7), (1.0, 1.4)] {
        let k = k_limit(2, x, y, &params).unwrap().re * x / y;
        let s = (x - y).sin() / (PI * (x - y));
        assert!((k - s).abs() < 1e-10, "{k} {s}");
    }
}

#[test]
fn first_correction_is_a_derivative() {
    for beta in [1u32, 2, 4] {
        for (p, q) in [(1.5, 0.7), (0.8, 0.4)] {
            let params = EnsembleParams::new(beta, 10, p, q).unwrap();
            for (x, y) in [(1.0, 2.0), (2.5, 0.8)] {
                let r = derivative_identity_residual(beta, x, y, &params, 1e-3).unwrap();
                assert!(r <= 1e-6, "beta {beta} ({p},{q}) ({x},{y}): {r}");
            }
        }
    }
}

#[test]
fn confluent_residual_halves() {
    let (b, c, t) = (C64::new(2.5, -0.7), C64::new(4.0, 0.0), C64::new(0.0, 2.0));
    let r: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| confluent_limit_residual(n, b, c, t).unwrap())
        .collect();
    for w in r.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
    }
}

#[test]
fn second_correction_only_for_even_beta() {
    let params = EnsembleParams::new(1, 10, 1.5, 0.7).unwrap();
    assert!(l2(1, 1.0, 2.0, &params).is_err());
    assert!(l2(2, 1.0, 2.0, &params).is_ok());
    assert!(l2(4, 1.0, 2.0, &params).is_ok());
}

#[test]
fn bessel_kernel_needs_half_integer() {
    assert!(bessel_kernel(0.7, 1.0, 2.0).is_err());
}
