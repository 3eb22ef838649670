use num_complex::Complex64 as C64;
use specsing::jack_series::*;
use specsing::special_fns::{hyp1f1, SeriesControl};

#[test]
fn zonal_case_one_variable_is_kummer() {
    let (a, c, z) = (C64::new(1.5, -0.35), C64::new(5.0, 0.0), C64::new(0.0, -2.0));
    let v = hyper_pfq_alpha(&[a], &[c], 1.0, 1, z, &JackControl::default()).unwrap();
    let k = hyp1f1(a, c, z, &SeriesControl::default()).unwrap();
    assert!((v - k).norm() < 1e-13 * k.norm());
}

#[test]
fn zero_argument_gives_one() {
    let v = hyper_pfq_alpha(
        &[C64::new(2.0, 1.0)],
        &[C64::new(3.0, 0.0)],
        2.0,
        4,
        C64::new(0.0, 0.0),
        &JackControl::default(),
    )
    .unwrap();
    assert_eq!(v, C64::new(1.0, 0.0));
}

#[test]
fn terminating_series_matches_explicit_partition_sum() {
    let (a, b, c, x) = (
        C64::new(-2.0, 0.0),
        C64::new(2.0, 0.5),
        C64::new(3.3, 0.0),
        C64::new(0.2, 0.1),
    );
    for (alpha, m) in [(0.5, 2usize), (1.0, 3), (2.0, 4)] {
        let v = hyper_pfq_alpha(&[a, b], &[c], alpha, m, x, &JackControl::default()).unwrap();
        let want: C64 = partitions_up_to(m, 2 * m)
            .iter()
            .map(|k| {
                let fact: f64 = (1..=k.weight()).map(|i| i as f64).product();
                gen_pochhammer(a, k, alpha) * gen_pochhammer(b, k, alpha) / gen_pochhammer(c, k, alpha)
                    * jack_principal(k, alpha, m, x)
                    / fact
            })
            .sum();
        assert!((v - want).norm() < 1e-13 * want.norm(), "{v} {want}");
    }
}

#[test]
fn pole_in_lower_parameter() {
    let e = hyper_pfq_alpha(
        &[C64::new(1.0, 0.0)],
        &[C64::new(-1.0, 0.0)],
        1.0,
        2,
        C64::new(0.5, 0.0),
        &JackControl::default(),
    );
    assert!(e.is_err());
}

#[test]
fn nonconvergent_series_reported() {
    let ctrl = JackControl {
        max_weight: 5,
        ..JackControl::default()
    };
    let e = hyper_pfq_alpha(
        &[C64::new(1.0, 0.0)],
        &[C64::new(1.0, 0.0)],
        1.0,
        2,
        C64::new(30.0, 0.0),
        &ctrl,
    );
    assert!(e.is_err());
}
