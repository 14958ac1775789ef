//! Manufactured solution, discretization error norms and convergence rates.

use crate::error::{Error, Result};
use crate::fem::{self, PROJECTION_DEGREE};
use crate::law::{norm, ForchheimerLaw};
use crate::mesh::StructuredTriMesh;
use crate::par;
use crate::problem::ProblemData;
use crate::quadrature::{quadrature, QuadratureRule};
use crate::solver::{DiscreteState, MixedSolver};
use crate::Vec2;

/// `p(x, t) = t x1 (1 - x1) x2 (1 - x2)` on the unit square with homogeneous
/// Dirichlet data and zero initial pressure. Gradient, flux `u = -K(|s|) s`
/// and forcing `f = p_t + div u` follow from the configured law.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    law: ForchheimerLaw,
}

impl ManufacturedSolution {
    pub fn new(law: ForchheimerLaw) -> Self {
        Self { law }
    }

    /// The two-term law `g(s) = 1 + s` used for the published convergence table.
    pub fn two_term() -> Self {
        Self::new(ForchheimerLaw::two_term(1.0, 1.0).expect("valid law"))
    }

    pub fn beta(&self) -> f64 {
        self.law.beta()
    }

    pub fn pressure(&self, x: Vec2, t: f64) -> f64 {
        t * bump(x[0]) * bump(x[1])
    }

    pub fn pressure_t(&self, x: Vec2) -> f64 {
        bump(x[0]) * bump(x[1])
    }

    pub fn gradient(&self, x: Vec2, t: f64) -> Vec2 {
        [
            t * (1.0 - 2.0 * x[0]) * bump(x[1]),
            t * bump(x[0]) * (1.0 - 2.0 * x[1]),
        ]
    }

    /// Hessian of `p` as `[p_xx, p_xy, p_yy]`.
    fn hessian(&self, x: Vec2, t: f64) -> [f64; 3] {
        [
            -2.0 * t * bump(x[1]),
            t * (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1]),
            -2.0 * t * bump(x[0]),
        ]
    }

    pub fn flux(&self, x: Vec2, t: f64) -> Vec2 {
        self.law
            .flux_of_gradient(self.gradient(x, t))
            .expect("mobility of a finite gradient")
    }

    /// `p_t - div(K(|s|) s)` with `div(K s) = K div s + K'(|s|) s^T H s / |s|`.
    pub fn exact_f(&self, x: Vec2, t: f64) -> f64 {
        let s = self.gradient(x, t);
        let [hxx, hxy, hyy] = self.hessian(x, t);
        let m = norm(s);
        let k = self.law.k(m).expect("mobility of a finite gradient");
        let mut div_ks = k * (hxx + hyy);
        if m > 0.0 {
            let shs = s[0] * (hxx * s[0] + hxy * s[1]) + s[1] * (hxy * s[0] + hyy * s[1]);
            div_ks += self.law.k_prime(m).expect("derivative at positive argument") * shs / m;
        }
        self.pressure_t(x) - div_ks
    }

    /// Errors of a discrete state against the exact solution at `state.t`.
    /// The rule is `degree` refined [`ERROR_REFINEMENT`] times per element.
    pub fn errors(&self, mesh: &StructuredTriMesh, state: &DiscreteState, degree: usize) -> Result<ErrorSet> {
        let rule = quadrature(degree)?.refined(ERROR_REFINEMENT)?;
        let t = state.t;
        let beta = self.beta();
        Ok(ErrorSet {
            p_l2: scalar_error_l2(mesh, &state.p, |x| self.pressure(x, t), &rule),
            p_linf: scalar_error_linf(mesh, &state.p, |x| self.pressure(x, t), &rule),
            s_lbeta: vector_error_lbeta(mesh, VectorDofs::PiecewiseConstant(&state.s), |x| self.gradient(x, t), beta, &rule)?,
            u_lbeta: vector_error_lbeta(mesh, VectorDofs::Rt0(&state.u), |x| self.flux(x, t), beta, &rule)?,
        })
    }
}

fn bump(x: f64) -> f64 {
    x * (1.0 - x)
}

impl ProblemData for ManufacturedSolution {
    fn law(&self) -> &ForchheimerLaw {
        &self.law
    }

    fn forcing(&self, x: Vec2, t: f64) -> f64 {
        self.exact_f(x, t)
    }

    fn initial_pressure(&self, x: Vec2) -> f64 {
        self.pressure(x, 0.0)
    }

    fn initial_gradient(&self, x: Vec2) -> Vec2 {
        self.gradient(x, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSet {
    pub p_l2: f64,
    pub p_linf: f64,
    pub s_lbeta: f64,
    pub u_lbeta: f64,
}

/// Coefficients of a discrete vector field.
#[derive(Debug, Clone, Copy)]
pub enum VectorDofs<'a> {
    /// Interleaved `(x, y)` per triangle.
    PiecewiseConstant(&'a [f64]),
    /// RT0 edge coefficients.
    Rt0(&'a [f64]),
}

impl VectorDofs<'_> {
    fn eval(&self, mesh: &StructuredTriMesh, t: usize, x: Vec2) -> Vec2 {
        match *self {
            VectorDofs::PiecewiseConstant(c) => [c[2 * t], c[2 * t + 1]],
            VectorDofs::Rt0(u) => fem::rt0_field(mesh, u, t, x),
        }
    }
}

/// `(sum_T int_T |p_h - p|^2)^{1/2}` for piecewise-constant `p_h`.
pub fn scalar_error_l2<F>(mesh: &StructuredTriMesh, coeffs: &[f64], exact: F, rule: &QuadratureRule) -> f64
where
    F: Fn(Vec2) -> f64 + Sync + Send,
{
    let per_element = par::map_range(mesh.num_triangles(), |t| {
        let area = mesh.triangles()[t].area;
        rule.iter()
            .map(|(b, w)| {
                let d = coeffs[t] - exact(mesh.map_point(t, b));
                w * d * d
            })
            .sum::<f64>()
            * area
    });
    per_element.iter().sum::<f64>().sqrt()
}

/// Largest `|p_h - p|` over all quadrature points.
pub fn scalar_error_linf<F>(mesh: &StructuredTriMesh, coeffs: &[f64], exact: F, rule: &QuadratureRule) -> f64
where
    F: Fn(Vec2) -> f64 + Sync + Send,
{
    par::map_range(mesh.num_triangles(), |t| {
        rule.points
            .iter()
            .map(|b| (coeffs[t] - exact(mesh.map_point(t, b))).abs())
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `(sum_T int_T |v_h - v|^beta)^{1/beta}`.
pub fn vector_error_lbeta<F>(
    mesh: &StructuredTriMesh,
    dofs: VectorDofs<'_>,
    exact: F,
    beta: f64,
    rule: &QuadratureRule,
) -> Result<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync + Send,
{
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!("L^beta norm needs beta >= 1, got {beta}")));
    }
    let per_element = par::map_range(mesh.num_triangles(), |t| {
        let area = mesh.triangles()[t].area;
        rule.iter()
            .map(|(b, w)| {
                let x = mesh.map_point(t, b);
                let vh = dofs.eval(mesh, t, x);
                let v = exact(x);
                w * norm([vh[0] - v[0], vh[1] - v[1]]).powf(beta)
            })
            .sum::<f64>()
            * area
    });
    Ok(per_element.iter().sum::<f64>().powf(1.0 / beta))
}

/// `log2(e_prev / e_next)` between consecutive refinement levels; `None` where
/// an error is not positive.
pub fn convergence_rates(errors: &[(usize, f64)]) -> Result<Vec<Option<f64>>> {
    pairwise(errors, |prev, next, factor| (prev / next).ln() / factor.ln())
}

/// `e_prev / e_next` between consecutive refinement levels (the "rate" column
/// convention of the published table, where 2 means first order under mesh
/// doubling).
pub fn reduction_ratios(errors: &[(usize, f64)]) -> Result<Vec<Option<f64>>> {
    pairwise(errors, |prev, next, _| prev / next)
}

fn pairwise<F>(errors: &[(usize, f64)], f: F) -> Result<Vec<Option<f64>>>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if errors.len() < 2 {
        return Err(Error::Domain("rates need at least two refinement levels".into()));
    }
    errors
        .windows(2)
        .map(|w| {
            let ((n0, e0), (n1, e1)) = (w[0], w[1]);
            if n1 != 2 * n0 {
                return Err(Error::Domain(format!("mesh sizes {n0} -> {n1} do not double")));
            }
            Ok((e0 > 0.0 && e1 > 0.0).then(|| f(e0, e1, n1 as f64 / n0 as f64)))
        })
        .collect()
}

/// Residual norms of the discrete equations evaluated at projections of the
/// exact solution (`pi p`, `pi s`, RT0 interpolant of `u`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedResidual {
    pub mass: f64,
    pub constitutive: f64,
    pub gradient: f64,
}

pub fn projected_residual(
    solver: &MixedSolver<'_>,
    solution: &ManufacturedSolution,
    t: f64,
    dt: f64,
) -> Result<ProjectedResidual> {
    let mesh = solver.mesh();
    let sys = solver.system();
    let p = fem::l2_project_scalar(mesh, |x| solution.pressure(x, t));
    let p_prev = fem::l2_project_scalar(mesh, |x| solution.pressure(x, t - dt));
    let s = fem::l2_project_vector(mesh, |x| solution.gradient(x, t));
    let u = fem::rt0_interpolate(mesh, |x| solution.flux(x, t));
    let (f_load, g_load) = solver.loads(solution, t);
    let bu = sys.div.mul_vec(&u);
    let cu = sys.avg.mul_vec(&u);
    let mut mass = 0.0;
    let mut constitutive = 0.0;
    for (tr, tri) in mesh.triangles().iter().enumerate() {
        let r1 = tri.area * (p[tr] - p_prev[tr]) / dt + bu[tr] - f_load[tr];
        mass += r1 * r1 / tri.area;
        let st = [s[2 * tr], s[2 * tr + 1]];
        let k = solution.law.k(norm(st))?;
        let r2 = [cu[2 * tr] + tri.area * k * st[0], cu[2 * tr + 1] + tri.area * k * st[1]];
        constitutive += (r2[0] * r2[0] + r2[1] * r2[1]) / tri.area;
    }
    let cts = sys.avg.transpose_mul_vec(&s);
    let btp = sys.div.transpose_mul_vec(&p);
    let gradient = cts
        .iter()
        .zip(&btp)
        .zip(&g_load)
        .map(|((a, b), g)| (a + b - g).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ProjectedResidual {
        mass: mass.sqrt(),
        constitutive: constitutive.sqrt(),
        gradient,
    })
}

/// Default quadrature degree for error norms.
pub const ERROR_DEGREE: usize = PROJECTION_DEGREE;

/// Subdivisions per element edge for error norms: `|e|^beta` has kinks inside
/// elements where the error changes sign, so a single rule does not saturate.
pub const ERROR_REFINEMENT: usize = 4;
