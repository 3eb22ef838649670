//! One function per command; each returns its table and whether the
//! verification it performs (if any) passed.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use specsing::asymptotics::{expansion_check_pair, kernel_residual_scan, tuned_scaling_residual, ExpansionKind, ResidualReport};
use specsing::density::{
    density_expansion_check, morris_closed, morris_quadrature, rho_finite, rho_limit, rho_total, MorrisParams,
};
use specsing::finite_kernels::{FiniteKernel, Scaling};
use specsing::limiting_kernels::{bessel_kernel, confluent_limit_residual, derivative_identity_residual, expansion};
use specsing::quadrature::DeOptions;
use specsing::routh_romanovski::{gram_matrix, rr_norm, EnsembleParams};
use specsing::Result;

use crate::config::{Command, RunConfig, Target};
use crate::output::{Cell, Table};

pub struct Report {
    pub table: Table,
    pub passed: bool,
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::KernelEval => kernel_eval(cfg),
        Command::KernelLimit => kernel_limit(cfg),
        Command::DensityEval if cfg.target == Target::Total => density_total(cfg),
        Command::DensityEval => density_eval(cfg),
        Command::DensityLimit => density_limit(cfg),
        Command::Converge => match cfg.target {
            Target::Density => converge_density(cfg),
            Target::Confluent => converge_confluent(cfg),
            _ => converge(cfg),
        },
        Command::VerifyIdentity => verify_identity(cfg),
        Command::VerifyIntermediate => verify_intermediate(cfg),
        Command::OrthoCheck => ortho_check(cfg),
        Command::MorrisCheck => morris_check(cfg),
    }
}

fn grid(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.grid_x
        .iter()
        .flat_map(|&x| cfg.grid_y.iter().map(move |&y| (x, y)))
        .collect()
}

fn table(cfg: &RunConfig, columns: &[&'static str], rows: Vec<Vec<Cell>>) -> Table {
    let mut t = Table::new(cfg.command.name(), columns);
    for r in rows {
        t.push(r);
    }
    t
}

fn ok(table: Table) -> Result<Report> {
    Ok(Report { table, passed: true })
}

fn kernel_eval(cfg: &RunConfig) -> Result<Report> {
    let points = grid(cfg);
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let k = FiniteKernel::new(&cfg.params.with_n(n))?;
        let vals = points
            .par_iter()
            .map(|&(x, y)| k.eval_scaled(x, y, Scaling::Standard))
            .collect::<Result<Vec<f64>>>()?;
        for (&(x, y), v) in points.iter().zip(vals) {
            rows.push(vec![n.into(), x.into(), y.into(), v.into(), 0.0.into()]);
        }
    }
    ok(table(cfg, &["n", "x", "y", "kernel_re", "kernel_im"], rows))
}

fn kernel_limit(cfg: &RunConfig) -> Result<Report> {
    let rows = grid(cfg)
        .par_iter()
        .map(|&(x, y)| {
            let e = expansion(x, y, &cfg.params)?;
            let l2 = e.l2.map(|v| (v.re, v.im));
            let reduction = closed_form(cfg, x, y);
            Ok(vec![
                x.into(),
                y.into(),
                e.k_inf.re.into(),
                e.k_inf.im.into(),
                e.l1.re.into(),
                e.l1.im.into(),
                l2.map(|v| v.0).into(),
                l2.map(|v| v.1).into(),
                (e.k_inf.re * x / y).into(),
                reduction.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    ok(table(
        cfg,
        &[
            "x",
            "y",
            "k_inf_re",
            "k_inf_im",
            "l1_re",
            "l1_im",
            "l2_re",
            "l2_im",
            "k_inf_gauged",
            "closed_form",
        ],
        rows,
    ))
}

/// Sine kernel at p = q = 0, Bessel kernel at q = 0 and half-integer p,
/// for β = 2.
fn closed_form(cfg: &RunConfig, x: f64, y: f64) -> Option<f64> {
    let p = cfg.params.p;
    if cfg.params.beta != 2 || cfg.params.q != 0.0 || x == y {
        return None;
    }
    if p == 0.0 {
        return Some((x - y).sin() / (std::f64::consts::PI * (x - y)));
    }
    bessel_kernel(p, x, y).ok()
}

fn density_eval(cfg: &RunConfig) -> Result<Report> {
    let cases: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.grid_x.iter().map(move |&t| (n, t)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(n, theta)| {
            let v = rho_finite(theta, &cfg.params.with_n(n), cfg.path)?;
            Ok(vec![n.into(), theta.into(), v.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    ok(table(cfg, &["n", "theta", "rho"], rows))
}

fn density_total(cfg: &RunConfig) -> Result<Report> {
    let rows = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let t = rho_total(&cfg.params.with_n(n), cfg.path)?;
            Ok(vec![n.into(), t.into(), (t - n as f64).abs().into()])
        })
        .collect::<Result<Vec<_>>>()?;
    ok(table(cfg, &["n", "total", "abs_err"], rows))
}

fn density_limit(cfg: &RunConfig) -> Result<Report> {
    let rows = cfg
        .grid_x
        .par_iter()
        .map(|&theta| Ok(vec![theta.into(), rho_limit(theta, &cfg.params, cfg.path)?.into()]))
        .collect::<Result<Vec<_>>>()?;
    ok(table(cfg, &["theta", "rho_inf"], rows))
}

fn push_scan(rows: &mut Vec<Vec<Cell>>, x: f64, y: f64, series: &str, r: &ResidualReport) {
    for (&n, &res) in r.n_values.iter().zip(&r.residuals) {
        rows.push(vec![
            x.into(),
            y.into(),
            series.into(),
            n.into(),
            res.into(),
            r.fitted_slope.into(),
            r.fit_r2.into(),
            r.floor.into(),
            r.extrapolated_limit.into(),
        ]);
    }
}

fn converge(cfg: &RunConfig) -> Result<Report> {
    let beta = cfg.params.beta;
    let top = if beta == 1 { 1 } else { 2 };
    let mut rows = Vec::new();
    for (x, y) in grid(cfg) {
        for order in 0..=top {
            let r = kernel_residual_scan(beta, x, y, &cfg.params, &cfg.n_list, order)?;
            push_scan(&mut rows, x, y, ["order0", "order1", "order2"][order], &r);
        }
        let r = tuned_scaling_residual(beta, x, y, &cfg.params, &cfg.n_list)?;
        push_scan(&mut rows, x, y, "tuned", &r);
    }
    ok(table(
        cfg,
        &[
            "x",
            "y",
            "series",
            "n",
            "residual",
            "slope",
            "fit_r2",
            "floor",
            "extrapolated",
        ],
        rows,
    ))
}

fn converge_density(cfg: &RunConfig) -> Result<Report> {
    let mut rows = Vec::new();
    for &theta in &cfg.grid_x {
        let e = density_expansion_check(theta, &cfg.params, &cfg.n_list, cfg.path)?;
        let gap = e.l1_gap_decreasing();
        for (i, &n) in e.n_values.iter().enumerate() {
            rows.push(vec![
                theta.into(),
                n.into(),
                e.rho_inf.into(),
                e.l1_predicted.into(),
                e.l1_measured[i].into(),
                e.residual_after_l1[i].into(),
                e.residual_tuned[i].into(),
                e.slope_after_l1.into(),
                e.slope_tuned.into(),
                gap.into(),
            ]);
        }
    }
    ok(table(
        cfg,
        &[
            "theta",
            "n",
            "rho_inf",
            "l1_predicted",
            "l1_measured",
            "residual_after_l1",
            "residual_tuned",
            "slope_after_l1",
            "slope_tuned",
            "gap_decreasing",
        ],
        rows,
    ))
}

/// ₂F₁(−n, p+1−iq; 2p+2; iX/n) against ₁F₁(p+1−iq; 2p+2; −iX).
fn converge_confluent(cfg: &RunConfig) -> Result<Report> {
    let (p, q) = (cfg.params.p, cfg.params.q);
    let (b, c) = (C64::new(p + 1.0, -q), C64::new(2.0 * p + 2.0, 0.0));
    let mut rows = Vec::new();
    for &x in &cfg.grid_x {
        let t = C64::new(0.0, x);
        let r = cfg
            .n_list
            .iter()
            .map(|&n| confluent_limit_residual(n, b, c, t))
            .collect::<Result<Vec<f64>>>()?;
        for (i, &n) in cfg.n_list.iter().enumerate() {
            let ratio = if i > 0 { Some(r[i] / r[i - 1]) } else { None };
            rows.push(vec![x.into(), n.into(), r[i].into(), ratio.into()]);
        }
    }
    ok(table(cfg, &["x", "n", "residual", "ratio"], rows))
}

fn verify_identity(cfg: &RunConfig) -> Result<Report> {
    let tol = cfg.tolerances.identity;
    let rows = grid(cfg)
        .par_iter()
        .map(|&(x, y)| {
            let r = derivative_identity_residual(cfg.params.beta, x, y, &cfg.params, 1e-3)?;
            Ok(vec![x.into(), y.into(), r.into(), (r <= tol).into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r[3] == Cell::Bool(true));
    Ok(Report {
        table: table(cfg, &["x", "y", "residual", "pass"], rows),
        passed,
    })
}

fn verify_intermediate(cfg: &RunConfig) -> Result<Report> {
    let cases: Vec<(ExpansionKind, usize, f64)> = ExpansionKind::ALL
        .iter()
        .flat_map(|&k| {
            cfg.n_list
                .iter()
                .flat_map(move |&n| cfg.grid_x.iter().map(move |&x| (k, n, x)))
        })
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(kind, n, x)| {
            let c = expansion_check_pair(kind, n, x, &cfg.params)?;
            Ok(vec![
                kind.name().into(),
                n.into(),
                x.into(),
                c.scaled[0].into(),
                c.scaled[1].into(),
                c.bounded.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r[5] == Cell::Bool(true));
    Ok(Report {
        table: table(cfg, &["kind", "n", "x", "scaled_n", "scaled_2n", "bounded"], rows),
        passed,
    })
}

fn ortho_check(cfg: &RunConfig) -> Result<Report> {
    let tol = cfg.tolerances.ortho;
    let d = cfg.max_degree;
    let mut rows = Vec::new();
    let mut passed = true;
    for &n in &cfg.n_list {
        let c = EnsembleParams {
            beta: 2,
            n,
            ..cfg.params
        }
        .kernel_c()?;
        let g = gram_matrix(d, c, &DeOptions::default())?;
        let h = (0..=d).map(|i| rr_norm(i, c)).collect::<Result<Vec<f64>>>()?;
        for i in 0..=d {
            for j in i..=d {
                let expected = if i == j { h[i] } else { 0.0 };
                let err = (g[i][j] - expected).abs() / (h[i] * h[j]).sqrt();
                passed &= err <= tol;
                rows.push(vec![
                    n.into(),
                    i.into(),
                    j.into(),
                    g[i][j].into(),
                    expected.into(),
                    err.into(),
                ]);
            }
        }
    }
    Ok(Report {
        table: table(cfg, &["n", "i", "j", "gram", "expected", "rel_err"], rows),
        passed,
    })
}

fn morris_check(cfg: &RunConfig) -> Result<Report> {
    let tol = cfg.tolerances.morris;
    let (a, b) = (C64::new(cfg.params.p, cfg.params.q), C64::new(cfg.params.p, -cfg.params.q));
    let cases: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.grid_x.iter().map(move |&l| (n, l)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(n, lambda)| {
            let m = MorrisParams::new(a, b, lambda, n)?;
            let c = morris_closed(&m)?;
            let q = morris_quadrature(&m, 1e-9)?;
            let err = (c - q).norm() / c.norm();
            Ok(vec![
                n.into(),
                lambda.into(),
                c.re.into(),
                c.im.into(),
                q.re.into(),
                q.im.into(),
                err.into(),
                (err <= tol).into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r[7] == Cell::Bool(true));
    Ok(Report {
        table: table(
            cfg,
            &[
                "n",
                "lambda",
                "closed_re",
                "closed_im",
                "quadrature_re",
                "quadrature_im",
                "rel_err",
                "pass",
            ],
            rows,
        ),
        passed,
    })
}
