//! Command-line configuration for the convergence study.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use forchheimer_core::{DtRule, ForchheimerLaw, ProblemKind, StudyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Manufactured,
    Zero,
}

#[derive(Debug, Parser)]
#[command(
    name = "forchheimer",
    about = "Mixed RT0 solver for generalized Forchheimer flow: mesh-refinement convergence study"
)]
pub struct Args {
    /// Comma-separated mesh sizes N (N x N squares), each a power-of-two multiple of the first.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub mesh_sizes: Vec<usize>,

    /// Fixed time step; overrides --dt-rule.
    #[arg(long)]
    pub dt: Option<f64>,

    /// Time-step rule used when --dt is absent.
    #[arg(long, default_value = "1/N")]
    pub dt_rule: String,

    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,

    /// Picard tolerance on the L2 norm of the gradient increment.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Coefficients a_0, a_1, ..., a_N of g.
    #[arg(long, value_delimiter = ',', default_value = "1,1", allow_hyphen_values = true)]
    pub g_coeffs: Vec<f64>,

    /// Exponents alpha_1, ..., alpha_N of g; pass an empty string for Darcy.
    #[arg(long, default_value = "1")]
    pub g_exponents: String,

    #[arg(long, value_enum, default_value_t = Problem::Manufactured)]
    pub problem: Problem,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Directory for per-run diagnostics CSV files (one per mesh size).
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub study: StudyConfig,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub diagnostics: Option<PathBuf>,
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("invalid number {s:?}: {e}")))
        .collect()
}

fn parse_dt_rule(rule: &str) -> Result<DtRule, String> {
    match rule.trim() {
        "1/N" | "1/n" | "inverse-n" => Ok(DtRule::InverseN),
        other => other
            .parse::<f64>()
            .map(DtRule::Fixed)
            .map_err(|_| format!("unknown dt rule {other:?} (expected \"1/N\" or a number)")),
    }
}

impl CliConfig {
    pub fn from_args(args: Args) -> Result<Self, String> {
        let exponents = parse_list(&args.g_exponents)?;
        let law = ForchheimerLaw::new(args.g_coeffs, exponents).map_err(|e| e.to_string())?;
        let dt = match args.dt {
            Some(dt) => DtRule::Fixed(dt),
            None => parse_dt_rule(&args.dt_rule)?,
        };
        let study = StudyConfig {
            mesh_sizes: args.mesh_sizes,
            dt,
            t_final: args.t_final,
            nonlinear_tol: args.tol,
            law,
            problem: match args.problem {
                Problem::Manufactured => ProblemKind::Manufactured,
                Problem::Zero => ProblemKind::Zero,
            },
            per_step_errors: false,
        };
        study.validate().map_err(|e| e.to_string())?;
        Ok(Self {
            study,
            format: args.format,
            out: args.out,
            diagnostics: args.diagnostics,
        })
    }
}

/// Parse and validate a full argument list (including the program name).
pub fn parse_config<I, T>(args: I) -> Result<CliConfig, String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(args).map_err(|e| e.to_string())?;
    CliConfig::from_args(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = parse_config(["forchheimer"]).unwrap();
        assert_eq!(cfg.study, StudyConfig::default());
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn explicit_lists() {
        let cfg = parse_config(["forchheimer", "--mesh-sizes", "4,8,16", "--dt", "0.01"]).unwrap();
        assert_eq!(cfg.study.mesh_sizes, vec![4, 8, 16]);
        assert_eq!(cfg.study.dt, DtRule::Fixed(0.01));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config(["forchheimer", "--mesh-sizes", "4,12"]).is_err());
        assert!(parse_config(["forchheimer", "--dt", "abc"]).is_err());
        assert!(parse_config(["forchheimer", "--dt", "2", "--t-final", "1"]).is_err());
        assert!(parse_config(["forchheimer", "--frobnicate"]).is_err());
        assert!(parse_config(["forchheimer", "--dt-rule", "1/N^2"]).is_err());
    }

    #[test]
    fn darcy_law_from_empty_exponents() {
        let cfg = parse_config(["forchheimer", "--g-coeffs", "2", "--g-exponents", ""]).unwrap();
        assert!(cfg.study.law.is_darcy());
        assert_eq!(cfg.study.law.a0(), 2.0);
    }
}
