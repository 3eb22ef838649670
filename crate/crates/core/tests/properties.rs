use num_complex::Complex64 as C64;
use proptest::prelude::*;
use specsing::finite_kernels::{correlation_det, kernel_s2};
use specsing::jack_series::{jack_principal, partitions_of, Partition};
use specsing::routh_romanovski::{cayley_to_circle, circle_to_line, EnsembleParams};
use specsing::special_fns::{log_gamma, pochhammer};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric(x in -5.0f64..5.0, y in -5.0f64..5.0, p in 0.0f64..3.0, q in -2.0f64..2.0, n in 1usize..12) {
        let params = EnsembleParams::new(2, n, p, q).unwrap();
        let a = kernel_s2(x, y, &params).unwrap();
        let b = kernel_s2(y, x, &params).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-8));
    }

    #[test]
    fn two_point_function_bounded_by_product(x in -5.0f64..5.0, y in -5.0f64..5.0, p in 0.0f64..3.0, q in -2.0f64..2.0, n in 1usize..10) {
        let params = EnsembleParams::new(2, n, p, q).unwrap();
        let r2 = correlation_det(&[x, y], &params).unwrap();
        let a = kernel_s2(x, x, &params).unwrap();
        let b = kernel_s2(y, y, &params).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!(r2 >= -1e-12 * a * b && r2 <= a * b * (1.0 + 1e-12));
    }

    #[test]
    fn cayley_round_trip(x in -1e3f64..1e3) {
        let back = circle_to_line(cayley_to_circle(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * x.abs().max(1.0));
    }

    #[test]
    fn log_gamma_recurrence(re in 0.1f64..30.0, im in -20.0f64..20.0) {
        let z = C64::new(re, im);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        let wrapped = C64::new(d.re, (d.im / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI - d.im);
        prop_assert!(d.re.abs() < 1e-11 && wrapped.im.abs() < 1e-9);
    }

    #[test]
    fn pochhammer_splits(re in -5.0f64..5.0, im in -3.0f64..3.0, n in 0usize..8, m in 0usize..8) {
        let a = C64::new(re, im);
        let lhs = pochhammer(a, n + m);
        let rhs = pochhammer(a, n) * pochhammer(a + n as f64, m);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn jack_sum_rule(m in 1usize..5, n in 0usize..7, alpha in 0.2f64..4.0) {
        let s: C64 = partitions_of(n, m, n).iter().map(|k| jack_principal(k, alpha, m, C64::new(1.0, 0.0))).sum();
        let want = (m as f64).powi(n as i32);
        prop_assert!((s.re - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn conjugate_is_involution(parts in proptest::collection::vec(1usize..6, 0..5)) {
        let k = Partition::new(parts);
        let kk = Partition::new(k.conjugate());
        prop_assert_eq!(Partition::new(kk.conjugate()), k.clone());
        prop_assert_eq!(kk.weight(), k.weight());
    }
}
