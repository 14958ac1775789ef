use crate::law::ForchheimerLaw;
use crate::Vec2;

/// Data of the initial-boundary value problem
/// `p_t + div u = f`, `u = -K(|grad p|) grad p`, with Dirichlet data carried by
/// an extension `Psi` of the boundary values into the domain.
///
/// The scheme only ever needs `grad Psi` and `Psi_t`; `Psi` itself enters at
/// `t = 0` (to form `p_0 - Psi(., 0)`) and in the pressure monitor.
pub trait ProblemData: Sync {
    fn law(&self) -> &ForchheimerLaw;

    fn forcing(&self, x: Vec2, t: f64) -> f64;

    fn initial_pressure(&self, x: Vec2) -> f64;

    fn initial_gradient(&self, x: Vec2) -> Vec2;

    fn psi(&self, _x: Vec2, _t: f64) -> f64 {
        0.0
    }

    fn psi_t(&self, _x: Vec2, _t: f64) -> f64 {
        0.0
    }

    fn grad_psi(&self, _x: Vec2, _t: f64) -> Vec2 {
        [0.0, 0.0]
    }
}

type ScalarFn = Box<dyn Fn(Vec2, f64) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(Vec2, f64) -> Vec2 + Send + Sync>;
type InitFn = Box<dyn Fn(Vec2) -> f64 + Send + Sync>;
type InitGradFn = Box<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// Problem assembled from closures; every field defaults to zero.
pub struct FnProblem {
    law: ForchheimerLaw,
    forcing: Option<ScalarFn>,
    initial: Option<InitFn>,
    initial_gradient: Option<InitGradFn>,
    psi: Option<ScalarFn>,
    psi_t: Option<ScalarFn>,
    grad_psi: Option<VectorFn>,
}

impl FnProblem {
    pub fn new(law: ForchheimerLaw) -> Self {
        Self {
            law,
            forcing: None,
            initial: None,
            initial_gradient: None,
            psi: None,
            psi_t: None,
            grad_psi: None,
        }
    }

    pub fn forcing(mut self, f: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Box::new(f));
        self
    }

    /// Initial pressure together with its gradient.
    pub fn initial(
        mut self,
        p0: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        grad_p0: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        self.initial = Some(Box::new(p0));
        self.initial_gradient = Some(Box::new(grad_p0));
        self
    }

    /// Boundary extension `Psi`, its time derivative and its gradient.
    pub fn boundary_extension(
        mut self,
        psi: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static,
        psi_t: impl Fn(Vec2, f64) -> f64 + Send + Sync + 'static,
        grad_psi: impl Fn(Vec2, f64) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        self.psi = Some(Box::new(psi));
        self.psi_t = Some(Box::new(psi_t));
        self.grad_psi = Some(Box::new(grad_psi));
        self
    }
}

impl ProblemData for FnProblem {
    fn law(&self) -> &ForchheimerLaw {
        &self.law
    }

    fn forcing(&self, x: Vec2, t: f64) -> f64 {
        self.forcing.as_ref().map_or(0.0, |f| f(x, t))
    }

    fn initial_pressure(&self, x: Vec2) -> f64 {
        self.initial.as_ref().map_or(0.0, |f| f(x))
    }

    fn initial_gradient(&self, x: Vec2) -> Vec2 {
        self.initial_gradient.as_ref().map_or([0.0, 0.0], |f| f(x))
    }

    fn psi(&self, x: Vec2, t: f64) -> f64 {
        self.psi.as_ref().map_or(0.0, |f| f(x, t))
    }

    fn psi_t(&self, x: Vec2, t: f64) -> f64 {
        self.psi_t.as_ref().map_or(0.0, |f| f(x, t))
    }

    fn grad_psi(&self, x: Vec2, t: f64) -> Vec2 {
        self.grad_psi.as_ref().map_or([0.0, 0.0], |f| f(x, t))
    }
}
