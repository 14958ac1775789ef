//! Backward Euler in time, Picard (frozen mobility) iteration for the
//! nonlinearity, one sparse Cholesky solve per sweep.
//!
//! With the mobility frozen elementwise, the gradient equation is local,
//! `C_T u + D_T s_T = 0`, so `s_T = -D_T^{-1} C_T u`. The pressure mass matrix
//! is diagonal, so `p_T = (dt/|T|)(r_T - B_T u)`. What remains is an SPD
//! system for the RT0 coefficients:
//!
//! ```text
//! sum_T [ C_T^T D_T^{-1} C_T + (dt/|T|) B_T^T B_T ] u = sum_T (dt/|T|) B_T^T r_T - G
//! ```
//!
//! with `r_T = int_T (f - Psi_t) + (|T|/dt) p_prev_T` and
//! `G_e = int grad Psi . phi_e`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LltError;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Col, Side};

use crate::error::{Error, Result};
use crate::fem::{self, AssembledSystem, PROJECTION_DEGREE};
use crate::law::{norm, ForchheimerLaw};
use crate::mesh::StructuredTriMesh;
use crate::par;
use crate::problem::ProblemData;
use crate::quadrature::quadrature;

/// Symmetric 2x2 block `[xx, xy, yy]` coupling the gradient unknowns of one
/// element in `C_T u + D_T s_T = r_T`.
pub type Block2 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Absolute tolerance on the L2 norm of the gradient increment.
    pub nonlinear_tol: f64,
    pub max_picard: usize,
}

impl SolverConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_PICARD: usize = 100;

    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_final,
            nonlinear_tol: Self::DEFAULT_TOL,
            max_picard: Self::DEFAULT_MAX_PICARD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        self.nonlinear_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("final time must be positive, got {}", self.t_final)));
        }
        if self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(Error::Config(format!("dt {} exceeds final time {}", self.dt, self.t_final)));
        }
        if !(self.nonlinear_tol > 0.0) {
            return Err(Error::Config("nonlinear tolerance must be positive".into()));
        }
        if self.max_picard == 0 {
            return Err(Error::Config("max_picard must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `t_final / dt` must be an integer to within 1e-12.
    pub fn num_steps(&self) -> Result<usize> {
        self.validate()?;
        let ratio = self.t_final / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-12 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "final time {} is not an integer multiple of dt {}",
                self.t_final, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Coefficients of `(p_bar_h, s_h, u_h)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub p: Vec<f64>,
    /// Interleaved `(x, y)` per triangle.
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl DiscreteState {
    pub fn zeros(mesh: &StructuredTriMesh) -> Self {
        Self {
            p: vec![0.0; mesh.num_triangles()],
            s: vec![0.0; 2 * mesh.num_triangles()],
            u: vec![0.0; mesh.num_edges()],
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.s).chain(&self.u).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub picard_iters: usize,
    pub l2_pbar: f64,
    pub l2_weighted_s: f64,
    pub linf_p: f64,
}

impl StepDiagnostics {
    pub const CSV_HEADER: &'static str = "step,t,picard_iters,l2_pbar,l2_weighted_s,linf_p";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e}",
            self.step, self.t, self.picard_iters, self.l2_pbar, self.l2_weighted_s, self.linf_p
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub state: DiscreteState,
    pub diagnostics: Vec<StepDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub state: DiscreteState,
    /// One entry per linear solve.
    pub increments: Vec<f64>,
}

/// Solution of one linearized sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
}

/// Mesh, assembled blocks and the cached symbolic factorization of the flux
/// system, whose sparsity pattern never changes.
pub struct MixedSolver<'m> {
    mesh: &'m StructuredTriMesh,
    system: AssembledSystem,
    pattern: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    symbolic: SymbolicLlt<usize>,
}

impl<'m> MixedSolver<'m> {
    pub fn new(mesh: &'m StructuredTriMesh) -> Result<Self> {
        let system = fem::assemble(mesh);
        let n_u = system.layout.n_u;
        let mut indices = Vec::with_capacity(6 * mesh.num_triangles());
        for tri in mesh.triangles() {
            for i in 0..3 {
                for j in 0..3 {
                    let (r, c) = (tri.edges[i], tri.edges[j]);
                    if r >= c {
                        indices.push(Pair { row: r, col: c });
                    }
                }
            }
        }
        let (pattern, argsort) = SymbolicSparseColMat::try_new_from_indices(n_u, n_u, &indices)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let symbolic = SymbolicLlt::try_new(pattern.as_ref(), Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self {
            mesh,
            system,
            pattern,
            argsort,
            symbolic,
        })
    }

    pub fn mesh(&self) -> &StructuredTriMesh {
        self.mesh
    }

    pub fn system(&self) -> &AssembledSystem {
        &self.system
    }

    /// `p_bar = pi(p_0 - Psi(., 0))`, `s = pi grad p_0`, and `u` the RT0 field
    /// whose element averages best match `-K(|s_T|) s_T` (penalizing divergence).
    pub fn initialize(&self, data: &dyn ProblemData) -> Result<DiscreteState> {
        let mesh = self.mesh;
        let p = fem::l2_project_scalar(mesh, |x| data.initial_pressure(x) - data.psi(x, 0.0));
        let s = fem::l2_project_vector(mesh, |x| data.initial_gradient(x));
        let law = data.law();
        let target = par::try_map_range(mesh.num_triangles(), |t| {
            law.flux_of_gradient([s[2 * t], s[2 * t + 1]])
        })?;
        let blocks: Vec<Block2> = mesh.triangles().iter().map(|t| [t.area, 0.0, t.area]).collect();
        // sum_T C_T^T w_T with w_T the target average
        let weighted: Vec<f64> = target.into_iter().flatten().collect();
        let rhs = self.system.avg.transpose_mul_vec(&weighted);
        let u = self.solve_flux(&blocks, 1.0, &rhs)?;
        Ok(DiscreteState { p, s, u, t: 0.0 })
    }

    /// `int_T (f - Psi_t)(., t)` per element and `int grad Psi(., t) . phi_e` per edge.
    pub fn loads(&self, data: &dyn ProblemData, t: f64) -> (Vec<f64>, Vec<f64>) {
        let rule = quadrature(PROJECTION_DEGREE).expect("projection rule exists");
        let f = fem::integrate_scalar(self.mesh, &rule, |x| data.forcing(x, t) - data.psi_t(x, t));
        let g = fem::rt0_load(self.mesh, &rule, |x| data.grad_psi(x, t));
        (f, g)
    }

    /// Assemble and factor `sum_T C_T^T D_T^{-1} C_T + w (1/|T|) B_T^T B_T`,
    /// then solve with `rhs`.
    fn solve_flux(&self, blocks: &[Block2], div_weight: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let mesh = self.mesh;
        let locals = par::map_range(mesh.num_triangles(), |t| {
            let tri = &mesh.triangles()[t];
            let [dxx, dxy, dyy] = blocks[t];
            let det = dxx * dyy - dxy * dxy;
            let inv = [dyy / det, -dxy / det, dxx / det];
            let c: [[f64; 3]; 2] = std::array::from_fn(|comp| {
                std::array::from_fn(|k| self.system.avg.get(2 * t + comp, tri.edges[k]))
            });
            let b: [f64; 3] = std::array::from_fn(|k| self.system.div.get(t, tri.edges[k]));
            let mut local = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    let cdc = c[0][i] * (inv[0] * c[0][j] + inv[1] * c[1][j])
                        + c[1][i] * (inv[1] * c[0][j] + inv[2] * c[1][j]);
                    local[i][j] = cdc + div_weight / tri.area * b[i] * b[j];
                }
            }
            local
        });
        let mut values = Vec::with_capacity(6 * mesh.num_triangles());
        for (tri, local) in mesh.triangles().iter().zip(&locals) {
            for i in 0..3 {
                for j in 0..3 {
                    if tri.edges[i] >= tri.edges[j] {
                        values.push(local[i][j]);
                    }
                }
            }
        }
        let matrix = SparseColMat::new_from_argsort(self.pattern.clone(), &self.argsort, &values)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), matrix.as_ref(), Side::Lower)
            .map_err(|e| match e {
                LltError::Numeric(_) => Error::Factorization("flux matrix is not positive definite".into()),
                other => Error::Factorization(format!("{other:?}")),
            })?;
        let mut x = Col::<f64>::from_fn(rhs.len(), |i| rhs[i]);
        llt.solve_in_place(x.as_mat_mut());
        let u: Vec<f64> = (0..rhs.len()).map(|i| x[i]).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("non-finite flux solution".into()));
        }
        Ok(u)
    }

    /// Solve the linear system obtained by fixing the local gradient blocks:
    ///
    /// ```text
    /// (|T|/dt) p_T + B_T u      = f_load_T + (|T|/dt) p_prev_T
    /// C_T u + D_T s_T           = 0
    /// sum_T C_T^T s_T + B^T p   = g_load
    /// ```
    pub fn solve_linearized(
        &self,
        p_prev: &[f64],
        f_load: &[f64],
        g_load: &[f64],
        dt: f64,
        blocks: &[Block2],
    ) -> Result<LinearSolution> {
        let mesh = self.mesh;
        let r: Vec<f64> = mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| f_load[t] + tri.area / dt * p_prev[t])
            .collect();
        let scaled: Vec<f64> = mesh
            .triangles()
            .iter()
            .zip(&r)
            .map(|(tri, rt)| dt / tri.area * rt)
            .collect();
        let mut rhs = self.system.div.transpose_mul_vec(&scaled);
        for (v, g) in rhs.iter_mut().zip(g_load) {
            *v -= g;
        }
        let u = self.solve_flux(blocks, dt, &rhs)?;

        let bu = self.system.div.mul_vec(&u);
        let cu = self.system.avg.mul_vec(&u);
        let p = mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| dt / tri.area * (r[t] - bu[t]))
            .collect();
        let mut s = vec![0.0; 2 * mesh.num_triangles()];
        for (t, [dxx, dxy, dyy]) in blocks.iter().copied().enumerate() {
            let det = dxx * dyy - dxy * dxy;
            let (cx, cy) = (cu[2 * t], cu[2 * t + 1]);
            s[2 * t] = -(dyy * cx - dxy * cy) / det;
            s[2 * t + 1] = -(dxx * cy - dxy * cx) / det;
        }
        Ok(LinearSolution { p, s, u })
    }

    /// `|T| K(|s_T|) I` for every element.
    fn frozen_blocks(&self, law: &ForchheimerLaw, s: &[f64]) -> Result<Vec<Block2>> {
        let mesh = self.mesh;
        par::try_map_range(mesh.num_triangles(), |t| {
            let k = law.k(norm([s[2 * t], s[2 * t + 1]]))?;
            let a = mesh.triangles()[t].area * k;
            Ok([a, 0.0, a])
        })
    }

    /// Advance from `prev` (at `t_n - dt`) to `t_n`. Returns the converged state
    /// and the number of linear solves.
    pub fn picard_step(
        &self,
        prev: &DiscreteState,
        t_n: f64,
        config: &SolverConfig,
        data: &dyn ProblemData,
    ) -> Result<(DiscreteState, usize)> {
        let outcome = self.picard_iterate(prev, t_n, config, data)?;
        Ok((outcome.state, outcome.increments.len()))
    }

    /// Like [`Self::picard_step`], also reporting the L2 norm of every gradient
    /// increment. The warm start is the previous level's gradient.
    pub fn picard_iterate(
        &self,
        prev: &DiscreteState,
        t_n: f64,
        config: &SolverConfig,
        data: &dyn ProblemData,
    ) -> Result<PicardOutcome> {
        let law = data.law();
        let (f_load, g_load) = self.loads(data, t_n);
        let mut guess = prev.s.clone();
        let mut blocks = self.frozen_blocks(law, &guess)?;
        let mut increments = Vec::new();
        for _ in 0..config.max_picard {
            let sol = self.solve_linearized(&prev.p, &f_load, &g_load, config.dt, &blocks)?;
            let diff: Vec<f64> = sol.s.iter().zip(&guess).map(|(a, b)| a - b).collect();
            let increment = fem::l2_norm_p0_vector(self.mesh, &diff);
            increments.push(increment);
            let next_blocks = self.frozen_blocks(law, &sol.s)?;
            // identical blocks reproduce this iterate exactly on the next sweep
            if increment <= config.nonlinear_tol || next_blocks == blocks {
                let state = DiscreteState {
                    p: sol.p,
                    s: sol.s,
                    u: sol.u,
                    t: t_n,
                };
                return Ok(PicardOutcome { state, increments });
            }
            guess = sol.s;
            blocks = next_blocks;
        }
        Err(Error::Convergence {
            what: "Picard iteration",
            iterations: config.max_picard,
            residual: increments.last().copied().unwrap_or(f64::INFINITY),
        })
    }

    pub fn diagnostics(
        &self,
        state: &DiscreteState,
        step: usize,
        picard_iters: usize,
        data: &dyn ProblemData,
    ) -> Result<StepDiagnostics> {
        let mesh = self.mesh;
        let law = data.law();
        let weighted = par::try_map_range(mesh.num_triangles(), |t| {
            let s = [state.s[2 * t], state.s[2 * t + 1]];
            let m = norm(s);
            Ok::<_, Error>(mesh.triangles()[t].area * law.k(m)? * m * m)
        })?;
        let psi = fem::l2_project_scalar(mesh, |x| data.psi(x, state.t));
        let linf_p = state
            .p
            .iter()
            .zip(&psi)
            .map(|(p, q)| (p + q).abs())
            .fold(0.0, f64::max);
        Ok(StepDiagnostics {
            step,
            t: state.t,
            picard_iters,
            l2_pbar: fem::l2_norm_p0(mesh, &state.p),
            l2_weighted_s: weighted.iter().sum::<f64>().sqrt(),
            linf_p,
        })
    }

    /// Run to `config.t_final`, calling `observe(prev, next, diag)` after every step.
    pub fn run_with<F>(&self, data: &dyn ProblemData, config: &SolverConfig, mut observe: F) -> Result<RunOutput>
    where
        F: FnMut(&DiscreteState, &DiscreteState, &StepDiagnostics),
    {
        let steps = config.num_steps()?;
        let mut state = self.initialize(data)?;
        let mut diagnostics = Vec::with_capacity(steps);
        for n in 1..=steps {
            let t_n = if n == steps { config.t_final } else { n as f64 * config.dt };
            let wrap = |e: Error| Error::Step {
                step: n,
                source: Box::new(e),
            };
            let (next, iters) = self.picard_step(&state, t_n, config, data).map_err(wrap)?;
            let diag = self.diagnostics(&next, n, iters, data).map_err(wrap)?;
            observe(&state, &next, &diag);
            diagnostics.push(diag);
            state = next;
        }
        Ok(RunOutput { state, diagnostics })
    }

    pub fn run(&self, data: &dyn ProblemData, config: &SolverConfig) -> Result<RunOutput> {
        self.run_with(data, config, |_, _, _| {})
    }

    /// `sum_T [ |T| (p - p_prev)_T / dt + (B u)_T - int_T (f - Psi_t) ]`; the
    /// divergence terms leave only the boundary flux.
    pub fn mass_balance_residual(&self, prev: &DiscreteState, next: &DiscreteState, dt: f64, data: &dyn ProblemData) -> f64 {
        let (f_load, _) = self.loads(data, next.t);
        let bu = self.system.div.mul_vec(&next.u);
        let storage: f64 = self
            .mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| tri.area * (next.p[t] - prev.p[t]) / dt)
            .sum();
        storage + bu.iter().sum::<f64>() - f_load.iter().sum::<f64>()
    }

    /// `max_T |avg_T(u_h) + K(|s_T|) s_T|`.
    pub fn flux_gradient_mismatch(&self, state: &DiscreteState, law: &ForchheimerLaw) -> Result<f64> {
        let cu = self.system.avg.mul_vec(&state.u);
        let per_element = par::try_map_range(self.mesh.num_triangles(), |t| {
            let area = self.mesh.triangles()[t].area;
            let s = [state.s[2 * t], state.s[2 * t + 1]];
            let k = law.k(norm(s))?;
            let d = [cu[2 * t] / area + k * s[0], cu[2 * t + 1] / area + k * s[1]];
            Ok::<_, Error>(norm(d))
        })?;
        Ok(per_element.into_iter().fold(0.0, f64::max))
    }
}
