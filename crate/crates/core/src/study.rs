//! Mesh-refinement convergence study against the manufactured solution.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::law::ForchheimerLaw;
use crate::mesh::StructuredTriMesh;
use crate::par;
use crate::problem::{FnProblem, ProblemData};
use crate::solver::{MixedSolver, SolverConfig, StepDiagnostics};
use crate::verification::{reduction_ratios, ErrorSet, ManufacturedSolution, ERROR_DEGREE, ERROR_REFINEMENT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    /// `dt = 1/N` for an `N x N` mesh.
    InverseN,
    Fixed(f64),
}

impl DtRule {
    pub fn dt(&self, n: usize) -> f64 {
        match *self {
            DtRule::InverseN => 1.0 / n as f64,
            DtRule::Fixed(dt) => dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `p = t x1(1-x1) x2(1-x2)` with the derived forcing.
    Manufactured,
    /// `f = 0`, `p_0 = 0`, homogeneous boundary data; the exact solution is 0.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub mesh_sizes: Vec<usize>,
    pub dt: DtRule,
    pub t_final: f64,
    pub nonlinear_tol: f64,
    pub law: ForchheimerLaw,
    pub problem: ProblemKind,
    /// Record errors after every step, not only at the final time.
    pub per_step_errors: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            mesh_sizes: vec![4, 8, 16, 32, 64],
            dt: DtRule::InverseN,
            t_final: 1.0,
            nonlinear_tol: SolverConfig::DEFAULT_TOL,
            law: ForchheimerLaw::two_term(1.0, 1.0).expect("valid law"),
            problem: ProblemKind::Manufactured,
            per_step_errors: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let sizes = &self.mesh_sizes;
        let first = *sizes
            .first()
            .ok_or_else(|| Error::Config("at least one mesh size is required".into()))?;
        if first == 0 {
            return Err(Error::Config("mesh sizes must be positive".into()));
        }
        for w in sizes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(format!("mesh sizes must increase ({} then {})", w[0], w[1])));
            }
        }
        for &n in sizes {
            if n % first != 0 || !(n / first).is_power_of_two() {
                return Err(Error::Config(format!(
                    "mesh size {n} is not a power-of-two multiple of {first}"
                )));
            }
        }
        for &n in sizes {
            self.solver_config(n)?.num_steps()?;
        }
        Ok(())
    }

    pub fn solver_config(&self, n: usize) -> Result<SolverConfig> {
        SolverConfig::new(self.dt.dt(n), self.t_final)?.with_tolerance(self.nonlinear_tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub dt: f64,
    pub errors: ErrorSet,
    pub picard_total: usize,
    pub diagnostics: Vec<StepDiagnostics>,
    /// `(t, errors)` after each step, when requested.
    pub step_errors: Vec<(f64, ErrorSet)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub beta: f64,
    pub rows: Vec<StudyRow>,
}

pub const CSV_HEADER: &str = "N,err_p_L2,rate_p,err_s_Lbeta,rate_s,err_u_Lbeta,rate_u";

impl StudyReport {
    fn series(&self, pick: impl Fn(&ErrorSet) -> f64) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, pick(&r.errors))).collect()
    }

    /// Ratio-convention rates per row (`None` on the first row or where undefined).
    pub fn rates(&self, pick: impl Fn(&ErrorSet) -> f64) -> Vec<Option<f64>> {
        let mut out = vec![None];
        if self.rows.len() >= 2 {
            out.extend(reduction_ratios(&self.series(pick)).expect("validated doubling sizes"));
        }
        out
    }

    fn table(&self) -> Vec<[String; 7]> {
        let rp = self.rates(|e| e.p_l2);
        let rs = self.rates(|e| e.s_lbeta);
        let ru = self.rates(|e| e.u_lbeta);
        let rate = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                [
                    row.n.to_string(),
                    format!("{:.6e}", row.errors.p_l2),
                    rate(rp[i]),
                    format!("{:.6e}", row.errors.s_lbeta),
                    rate(rs[i]),
                    format!("{:.6e}", row.errors.u_lbeta),
                    rate(ru[i]),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for cells in self.table() {
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "| N | ‖p-p_h‖ | Rates | ‖s-s_h‖_(L^{b}) | Rates | ‖u-u_h‖_(L^{b}) | Rates |",
            b = self.beta
        );
        out.push_str("|---|---|---|---|---|---|---|\n");
        for cells in self.table() {
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }
}

struct ZeroProblem(FnProblem);

impl ZeroProblem {
    fn errors(mesh: &StructuredTriMesh, state: &crate::solver::DiscreteState, beta: f64) -> Result<ErrorSet> {
        use crate::quadrature::quadrature;
        use crate::verification::{scalar_error_l2, scalar_error_linf, vector_error_lbeta, VectorDofs};
        let rule = quadrature(ERROR_DEGREE)?.refined(ERROR_REFINEMENT)?;
        Ok(ErrorSet {
            p_l2: scalar_error_l2(mesh, &state.p, |_| 0.0, &rule),
            p_linf: scalar_error_linf(mesh, &state.p, |_| 0.0, &rule),
            s_lbeta: vector_error_lbeta(mesh, VectorDofs::PiecewiseConstant(&state.s), |_| [0.0; 2], beta, &rule)?,
            u_lbeta: vector_error_lbeta(mesh, VectorDofs::Rt0(&state.u), |_| [0.0; 2], beta, &rule)?,
        })
    }
}

fn run_one(config: &StudyConfig, n: usize) -> Result<StudyRow> {
    let mesh = StructuredTriMesh::new(n)?;
    let solver = MixedSolver::new(&mesh)?;
    let solver_config = config.solver_config(n)?;
    let manufactured = ManufacturedSolution::new(config.law.clone());
    let zero = ZeroProblem(FnProblem::new(config.law.clone()));
    let data: &dyn ProblemData = match config.problem {
        ProblemKind::Manufactured => &manufactured,
        ProblemKind::Zero => &zero.0,
    };
    let beta = config.law.beta();
    let measure = |state: &crate::solver::DiscreteState| match config.problem {
        ProblemKind::Manufactured => manufactured.errors(&mesh, state, ERROR_DEGREE),
        ProblemKind::Zero => ZeroProblem::errors(&mesh, state, beta),
    };
    let mut step_errors = Vec::new();
    let mut failure = None;
    let output = solver.run_with(data, &solver_config, |_, next, _| {
        if config.per_step_errors && failure.is_none() {
            match measure(next) {
                Ok(e) => step_errors.push((next.t, e)),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let errors = measure(&output.state)?;
    Ok(StudyRow {
        n,
        dt: solver_config.dt,
        errors,
        picard_total: output.diagnostics.iter().map(|d| d.picard_iters).sum(),
        diagnostics: output.diagnostics,
        step_errors,
    })
}

/// Solve on every mesh size (concurrently under the `parallel` feature) and
/// collect the errors at the final time, rows in mesh-size order.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let results = par::map_slice(&config.mesh_sizes, |&n| {
        run_one(config, n).map_err(|e| Error::Study {
            n,
            source: Box::new(e),
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(StudyReport {
        beta: config.law.beta(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(StudyConfig::default().validate().is_ok());
        let bad = |sizes: Vec<usize>| StudyConfig {
            mesh_sizes: sizes,
            ..StudyConfig::default()
        };
        assert!(bad(vec![4, 12]).validate().is_err());
        assert!(bad(vec![8, 4]).validate().is_err());
        assert!(bad(vec![]).validate().is_err());
        assert!(bad(vec![3, 6, 24]).validate().is_ok());
        let cfg = StudyConfig {
            dt: DtRule::Fixed(2.0),
            ..StudyConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_problem_with_darcy_law_has_zero_errors() {
        let cfg = StudyConfig {
            mesh_sizes: vec![4],
            law: ForchheimerLaw::darcy(1.0).unwrap(),
            problem: ProblemKind::Zero,
            ..StudyConfig::default()
        };
        let report = run_study(&cfg).unwrap();
        let e = report.rows[0].errors;
        assert_eq!((e.p_l2, e.s_lbeta, e.u_lbeta), (0.0, 0.0, 0.0));
        assert!(report.to_csv().starts_with(&format!("{CSV_HEADER}\n4,0.000000e0,-,")));
    }
}
