//! End-to-end acceptance run: one line per criterion, nonzero exit on any
//! failure.

use num_complex::Complex64 as C64;
use specsing::asymptotics::{
    expansion_check_pair, kernel_residual_scan, scaling_residual, tuned_scaling_residual, ExpansionKind,
};
use specsing::density::{
    density_expansion_check, morris_closed, morris_quadrature, rho_finite, rho_total, DensityPath, MorrisParams,
};
use specsing::finite_kernels::{kernel_s2, Scaling};
use specsing::limiting_kernels::{bessel_kernel, confluent_limit_residual, derivative_identity_residual, k_limit};
use specsing::quadrature::DeOptions;
use specsing::routh_romanovski::{gram_matrix, rr_norm, EnsembleParams};
use specsing::Result;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn orthogonality() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (p, q) in [(1.5, 0.7), (0.5, 0.0)] {
        let c = EnsembleParams::new(2, 12, p, q)?.kernel_c()?;
        let g = gram_matrix(6, c, &DeOptions::default())?;
        for i in 0..=6 {
            let hi = rr_norm(i, c)?;
            for j in 0..=6 {
                let e = if i == j {
                    (g[i][i] - hi).abs() / hi
                } else {
                    g[i][j].abs() / (hi * rr_norm(j, c)?).sqrt()
                };
                worst = worst.max(e);
            }
        }
    }
    outcome(worst < 1e-8, format!("max rel err {worst:.3e}"))
}

fn confluent_rate() -> Result<Outcome> {
    let (b, c, t) = (C64::new(2.5, -0.7), C64::new(4.0, 0.0), C64::new(0.0, 2.0));
    let r = [50, 100, 200, 400]
        .iter()
        .map(|&n| confluent_limit_residual(n, b, c, t))
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = r.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|x| (0.4..=0.6).contains(x));
    outcome(pass, format!("ratios {ratios:.4?}"))
}

fn bessel_reductions() -> Result<Outcome> {
    let mut worst_b: f64 = 0.0;
    for p in [0.5, 1.5] {
        let params = EnsembleParams::new(2, 10, p, 0.0)?;
        for x in [0.5, 2.0, 4.5] {
            for y in [0.7, 1.9, 3.0] {
                let k = k_limit(2, x, y, &params)?.re * x / y;
                worst_b = worst_b.max((k - bessel_kernel(p, x, y)?).abs());
            }
        }
    }
    let mut worst_s: f64 = 0.0;
    let params = EnsembleParams::new(2, 10, 0.0, 0.0)?;
    for x in [0.5, 2.0, 4.5] {
        for y in [0.7, 1.9, 3.0] {
            let k = k_limit(2, x, y, &params)?.re * x / y;
            worst_s = worst_s.max((k - (x - y).sin() / (PI * (x - y))).abs());
        }
    }
    outcome(
        worst_b < 1e-8 && worst_s < 1e-10,
        format!("Bessel {worst_b:.3e}, sine {worst_s:.3e}"),
    )
}

fn derivative_identity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for beta in [1u32, 2, 4] {
        for (p, q) in [(1.5, 0.7), (0.8, 0.4)] {
            let params = EnsembleParams::new(beta, 10, p, q)?;
            for (x, y) in [(0.5, 1.5), (1.0, 2.0), (2.5, 0.8), (3.5, 3.0)] {
                worst = worst.max(derivative_identity_residual(beta, x, y, &params, 1e-3)?);
            }
        }
    }
    outcome(worst <= 1e-6, format!("max residual {worst:.3e}"))
}

fn convergence_rates() -> Result<Outcome> {
    let params = EnsembleParams::new(2, 10, 1.5, 0.7)?;
    let (x, y) = (1.0, 2.0);
    let mut pass = true;
    let mut parts = Vec::new();
    let big = [100, 200, 400, 800];
    let r0 = kernel_residual_scan(2, x, y, &params, &big, 0)?;
    let r1 = kernel_residual_scan(2, x, y, &params, &big, 1)?;
    let r2 = kernel_residual_scan(2, x, y, &params, &big, 2)?;
    pass &= (-1.3..=-0.7).contains(&r0.fitted_slope) && (-2.3..=-1.7).contains(&r1.fitted_slope);
    pass &= r2.floor || r2.fitted_slope <= -2.7;
    parts.push(format!(
        "beta 2: {:.3} {:.3} {}",
        r0.fitted_slope,
        r1.fitted_slope,
        if r2.floor {
            "floor".to_string()
        } else {
            format!("{:.3}", r2.fitted_slope)
        }
    ));
    for beta in [1u32, 4] {
        let ns = [50, 100, 200, 400];
        let r0 = kernel_residual_scan(beta, x, y, &params, &ns, 0)?;
        let r1 = kernel_residual_scan(beta, x, y, &params, &ns, 1)?;
        pass &= (-1.3..=-0.7).contains(&r0.fitted_slope) && (-2.3..=-1.7).contains(&r1.fitted_slope);
        parts.push(format!("beta {beta}: {:.3} {:.3}", r0.fitted_slope, r1.fitted_slope));
    }
    outcome(pass, parts.join("; "))
}

fn tuned_scaling() -> Result<Outcome> {
    let ns = [50, 100, 200, 400];
    let params = EnsembleParams::new(2, 10, 1.5, 0.7)?;
    let mut slopes = Vec::new();
    for beta in [1u32, 2] {
        slopes.push(tuned_scaling_residual(beta, 1.0, 2.0, &params, &ns)?.fitted_slope);
    }
    let uniform = EnsembleParams::new(2, 10, 0.0, 0.0)?;
    slopes.push(scaling_residual(2, 1.0, 2.0, &uniform, &ns, Scaling::Standard)?.fitted_slope);
    let pass = slopes.iter().all(|s| (-2.4..=-1.6).contains(s));
    outcome(pass, format!("tuned beta 1, 2 and uniform untuned {slopes:.3?}"))
}

fn morris() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for lambda in [0.5, 1.0, 2.0] {
            let m = MorrisParams::new(C64::new(0.7, 0.0), C64::new(0.4, 0.3), lambda, n)?;
            let c = morris_closed(&m)?;
            let q = morris_quadrature(&m, 1e-9)?;
            worst = worst.max((c - q).norm() / c.norm());
        }
    }
    outcome(worst <= 1e-6, format!("max rel err {worst:.3e}"))
}

fn density_cross_validation() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (p, q) in [(1.5, 0.7), (0.5, 0.0)] {
        for n in [2usize, 3, 5] {
            let params = EnsembleParams::new(2, n, p, q)?;
            for theta in [0.8f64, 2.0, 4.5] {
                let x = 1.0 / (0.5 * theta).tan();
                let det = kernel_s2(x, x, &params)? / (2.0 * (0.5 * theta).sin().powi(2));
                for path in [DensityPath::Jack, DensityPath::Integral] {
                    worst = worst.max((rho_finite(theta, &params, path)? - det).abs() / det.abs());
                }
            }
        }
    }
    outcome(worst <= 1e-6, format!("max rel err {worst:.3e}"))
}

fn normalization() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (beta, n) in [(2u32, 4usize), (2, 6), (4, 3)] {
        let params = EnsembleParams::new(beta, n, 1.5, 0.7)?;
        worst = worst.max((rho_total(&params, DensityPath::Jack)? - n as f64).abs());
    }
    outcome(worst < 1e-4, format!("max |total - N| {worst:.3e}"))
}

fn density_expansion() -> Result<Outcome> {
    let theta = 2.0;
    let p2 = EnsembleParams::new(2, 8, 1.5, 0.7)?;
    let e2 = density_expansion_check(theta, &p2, &[8, 16, 32], DensityPath::Jack)?;
    let p4 = EnsembleParams::new(4, 4, 1.5, 0.7)?;
    let e4 = density_expansion_check(theta, &p4, &[4, 8], DensityPath::Jack)?;
    let pass = e2.l1_gap_decreasing()
        && (-2.4..=-1.6).contains(&e2.slope_after_l1)
        && (-2.4..=-1.6).contains(&e2.slope_tuned)
        && e4.l1_gap_decreasing();
    outcome(
        pass,
        format!(
            "beta 2 slopes {:.3} (after l1), {:.3} (tuned); beta 4 gap decreasing {}",
            e2.slope_after_l1,
            e2.slope_tuned,
            e4.l1_gap_decreasing()
        ),
    )
}

fn intermediate_kinds() -> Result<Outcome> {
    let params = EnsembleParams::new(2, 10, 1.5, 0.7)?;
    let mut failed = Vec::new();
    for kind in ExpansionKind::ALL {
        for n in [20, 40] {
            if !expansion_check_pair(kind, n, 1.3, &params)?.bounded {
                failed.push(format!("{kind}@{n}"));
            }
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} kinds, unbounded {failed:?}", ExpansionKind::ALL.len()),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let criteria: [Criterion; 11] = [
        ("orthogonality (N=12, n<=6)", orthogonality, Duration::from_secs(10)),
        ("confluent limit rate", confluent_rate, min(10)),
        ("Bessel and sine reductions", bessel_reductions, min(10)),
        ("derivative identity", derivative_identity, min(1)),
        ("kernel convergence rates", convergence_rates, min(10)),
        ("tuned scaling", tuned_scaling, min(10)),
        ("Morris integral", morris, min(1)),
        ("density cross-validation", density_cross_validation, min(10)),
        ("density normalization", normalization, min(10)),
        ("density expansion", density_expansion, min(15)),
        ("intermediate expansions", intermediate_kinds, min(10)),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let dt = t.elapsed();
        let pass = pass && dt <= *limit;
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            dt.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
