//! Run configuration: TOML file merged with command-line flags.

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use specsing::density::DensityPath;
use specsing::routh_romanovski::EnsembleParams;
use std::path::PathBuf;

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Scaled finite-N kernel on an (X, Y) grid for every N.
    KernelEval,
    /// Limit kernel and its 1/N corrections on an (X, Y) grid.
    KernelLimit,
    /// Finite-N density at the angles in --grid-x.
    DensityEval,
    /// Scaled limit density at the angles in --grid-x.
    DensityLimit,
    /// Residual scans and log-log slopes over --n-list.
    Converge,
    /// First correction against the derivative of the limit kernel.
    VerifyIdentity,
    /// Scaled residuals of the intermediate expansions at N and 2N.
    VerifyIntermediate,
    /// Gram matrix of the weighted polynomials against the closed-form norms.
    OrthoCheck,
    /// Morris integral, closed form against quadrature (λ from --grid-x).
    MorrisCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelEval => "kernel-eval",
            Command::KernelLimit => "kernel-limit",
            Command::DensityEval => "density-eval",
            Command::DensityLimit => "density-limit",
            Command::Converge => "converge",
            Command::VerifyIdentity => "verify-identity",
            Command::VerifyIntermediate => "verify-intermediate",
            Command::OrthoCheck => "ortho-check",
            Command::MorrisCheck => "morris-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathArg {
    Jack,
    Integral,
}

impl From<PathArg> for DensityPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Jack => DensityPath::Jack,
            PathArg::Integral => DensityPath::Integral,
        }
    }
}

/// What `converge` scans, or what `density-eval` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// converge: finite kernel against the limit expansion
    Kernel,
    /// converge: scaled finite density against the limit density
    Density,
    /// converge: terminating ₂F₁ against its confluent limit
    Confluent,
    /// density-eval: pointwise density
    Value,
    /// density-eval: integral of the density over the circle
    Total,
}

#[derive(Debug, Parser)]
#[command(
    name = "specsing",
    version,
    about = "Kernels and densities of the circular Jacobi beta-ensemble"
)]
pub struct Args {
    /// Command to run (same as --command).
    #[arg(value_enum)]
    pub subcommand: Option<Command>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// TOML file with any of the settings below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<u32>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 0.., allow_negative_numbers = true)]
    pub grid_x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 0.., allow_negative_numbers = true)]
    pub grid_y: Option<Vec<f64>>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, env = "SPECSING_THREADS")]
    pub threads: Option<usize>,
    /// Density evaluation path.
    #[arg(long, value_enum)]
    pub path: Option<PathArg>,
    #[arg(long, value_enum)]
    pub target: Option<Target>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub beta: Option<u32>,
    pub n_list: Option<Vec<usize>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub grid_x: Option<Vec<f64>>,
    pub grid_y: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub path: Option<PathArg>,
    pub target: Option<Target>,
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub ortho: f64,
    pub morris: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-6,
            ortho: 1e-8,
            morris: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: EnsembleParams,
    pub n_list: Vec<usize>,
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub path: DensityPath,
    pub target: Target,
    pub max_degree: usize,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let command = args
            .subcommand
            .or(args.command)
            .or(file.command)
            .ok_or_else(|| CliError::Validation("no command given".into()))?;
        let beta = args.beta.or(file.beta).unwrap_or(2);
        let p = args.p.or(file.p).unwrap_or(1.5);
        let q = args.q.or(file.q).unwrap_or(0.7);
        let target = args.target.or(file.target).unwrap_or(match command {
            Command::DensityEval => Target::Value,
            _ => Target::Kernel,
        });
        let (dx, dy, dn) = defaults(command, beta, target);
        let n_list = args.n_list.or(file.n_list).unwrap_or(dn);
        let grid_x = args.grid_x.or(file.grid_x).unwrap_or(dx);
        let grid_y = args.grid_y.or(file.grid_y).unwrap_or(dy);
        let first_n = n_list.first().copied().unwrap_or(1).max(1);
        let params = EnsembleParams::new(beta, first_n, p, q).map_err(|e| CliError::Validation(e.to_string()))?;
        let cfg = RunConfig {
            command,
            params,
            n_list,
            grid_x,
            grid_y,
            out: args.out.or(file.out),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            threads: args.threads.or(file.threads),
            path: args.path.or(file.path).map_or(DensityPath::Jack, DensityPath::from),
            target,
            max_degree: file.max_degree.unwrap_or(6),
            tolerances: file.tolerances,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        let target_ok = match self.command {
            Command::Converge => matches!(self.target, Target::Kernel | Target::Density | Target::Confluent),
            Command::DensityEval => matches!(self.target, Target::Value | Target::Total),
            _ => self.target == Target::Kernel,
        };
        if !target_ok {
            return bad(format!("target {:?} does not apply to {}", self.target, self.command.name()));
        }
        let uses_y = matches!(
            self.command,
            Command::KernelEval | Command::KernelLimit | Command::VerifyIdentity
        ) || (self.command == Command::Converge && self.target == Target::Kernel);
        let uses_n = !matches!(
            self.command,
            Command::KernelLimit | Command::DensityLimit | Command::VerifyIdentity
        );
        let uses_x = !(self.command == Command::OrthoCheck || self.target == Target::Total);
        if (uses_x && self.grid_x.is_empty()) || (uses_y && self.grid_y.is_empty()) {
            return bad("grid is empty".into());
        }
        if let Some(v) = self.grid_x.iter().chain(&self.grid_y).find(|v| !v.is_finite()) {
            return bad(format!("grid value {v} is not finite"));
        }
        if uses_n && (self.n_list.is_empty() || self.n_list.contains(&0)) {
            return bad("N list must be nonempty and positive".into());
        }
        if self.command == Command::Converge && (self.n_list.len() < 2 || self.n_list.windows(2).any(|w| w[1] <= w[0])) {
            return bad("N list must be strictly increasing".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }
}

/// Per-command grid and N defaults: (X or θ or λ, Y, N list).
fn defaults(command: Command, beta: u32, target: Target) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let xy = (vec![1.0, 2.5], vec![2.0, 0.8]);
    match command {
        Command::Converge if target == Target::Density => {
            (vec![2.0], vec![], if beta == 4 { vec![4, 8] } else { vec![8, 16, 32] })
        }
        Command::Converge if target == Target::Confluent => (vec![2.0], vec![], vec![50, 100, 200, 400]),
        Command::DensityEval if target == Target::Total => (vec![], vec![], vec![4, 6]),
        Command::KernelEval => (xy.0, xy.1, vec![50, 100, 200]),
        Command::KernelLimit | Command::VerifyIdentity => (xy.0, xy.1, vec![]),
        Command::Converge if beta == 2 => (xy.0, xy.1, vec![100, 200, 400, 800]),
        Command::Converge => (xy.0, xy.1, vec![50, 100, 200, 400]),
        Command::DensityEval => (vec![0.8, 2.0, 4.5], vec![], vec![2, 3, 5]),
        Command::DensityLimit => (vec![0.5, 1.0, 2.0, 4.0], vec![], vec![]),
        Command::VerifyIntermediate => (vec![1.3], vec![], vec![20, 40]),
        Command::OrthoCheck => (vec![], vec![], vec![12]),
        Command::MorrisCheck => (vec![0.5, 1.0, 2.0], vec![], vec![1, 2, 3]),
    }
}
