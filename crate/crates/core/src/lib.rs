//! Expanded mixed finite elements for slightly compressible flow governed by a
//! generalized Forchheimer law, on a structured triangulation of the unit
//! square.
//!
//! The unknowns are the pressure `p` (piecewise constant), its gradient `s`
//! (piecewise-constant vectors) and the flux `u` (lowest-order Raviart-Thomas).
//! Time is discretized by backward Euler and the nonlinear mobility `K(|s|)` is
//! resolved by a Picard iteration.

pub mod error;
pub mod fem;
pub mod law;
pub mod mesh;
pub mod par;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod verification;

pub type Vec2 = [f64; 2];

pub use error::{Error, Result};
pub use fem::{assemble, AssembledSystem, DofLayout};
pub use law::ForchheimerLaw;
pub use mesh::StructuredTriMesh;
pub use problem::{FnProblem, ProblemData};
pub use quadrature::{quadrature, QuadratureRule};
pub use solver::{DiscreteState, MixedSolver, RunOutput, SolverConfig, StepDiagnostics};
pub use study::{run_study, DtRule, ProblemKind, StudyConfig, StudyReport, StudyRow};
pub use verification::{convergence_rates, reduction_ratios, ErrorSet, ManufacturedSolution};
