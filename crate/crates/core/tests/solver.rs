use forchheimer_core::verification::{
    projected_residual, scalar_error_l2, vector_error_lbeta, VectorDofs,
};
use forchheimer_core::{
    fem, quadrature, ForchheimerLaw, FnProblem, ManufacturedSolution, MixedSolver,
    SolverConfig, StructuredTriMesh,
};
use std::f64::consts::PI;

fn sine_problem() -> FnProblem {
    FnProblem::new(ForchheimerLaw::two_term(1.0, 1.0).unwrap()).initial(
        |x| (PI * x[0]).sin() * (PI * x[1]).sin(),
        |x| {
            [
                PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            ]
        },
    )
}

#[test]
fn zero_data_pressure_norm_strictly_decreases() {
    let mesh = StructuredTriMesh::new(8).unwrap();
    let solver = MixedSolver::new(&mesh).unwrap();
    let data = sine_problem();
    let initial = solver.initialize(&data).unwrap();
    let out = solver.run(&data, &SolverConfig::new(0.125, 1.0).unwrap()).unwrap();
    let mut prev = fem::l2_norm_p0(&mesh, &initial.p);
    for d in &out.diagnostics {
        assert!(d.l2_pbar < prev, "step {}: {} !< {prev}", d.step, d.l2_pbar);
        prev = d.l2_pbar;
    }
}

#[test]
fn picard_increments_contract() {
    let mesh = StructuredTriMesh::new(4).unwrap();
    let solver = MixedSolver::new(&mesh).unwrap();
    let exact = ManufacturedSolution::two_term();
    let config = SolverConfig::new(0.25, 1.0).unwrap().with_tolerance(1e-12).unwrap();
    let start = solver.initialize(&exact).unwrap();
    let outcome = solver.picard_iterate(&start, 0.25, &config, &exact).unwrap();
    assert!(outcome.increments.len() >= 3);
    for w in outcome.increments.windows(2) {
        assert!(w[1] < w[0], "{:?}", outcome.increments);
    }
}

#[test]
fn runs_are_bit_identical() {
    let mesh = StructuredTriMesh::new(8).unwrap();
    let solver = MixedSolver::new(&mesh).unwrap();
    let exact = ManufacturedSolution::two_term();
    let config = SolverConfig::new(0.125, 1.0).unwrap();
    let a = solver.run(&exact, &config).unwrap();
    let b = MixedSolver::new(&mesh).unwrap().run(&exact, &config).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.state.p), bits(&b.state.p));
    assert_eq!(bits(&a.state.s), bits(&b.state.s));
    assert_eq!(bits(&a.state.u), bits(&b.state.u));
    assert_eq!(a, b);
}

#[test]
fn forcing_matches_finite_differences() {
    let exact = ManufacturedSolution::two_term();
    let h = 1e-5;
    for &x in &[[0.3, 0.7], [0.1, 0.2], [0.5, 0.25], [0.9, 0.85]] {
        for t in [0.2, 1.0] {
            let ux = |dx: f64| exact.flux([x[0] + dx, x[1]], t)[0];
            let uy = |dy: f64| exact.flux([x[0], x[1] + dy], t)[1];
            let div = (ux(h) - ux(-h) + uy(h) - uy(-h)) / (2.0 * h);
            let pt = (exact.pressure(x, t + h) - exact.pressure(x, t - h)) / (2.0 * h);
            let f = exact.exact_f(x, t);
            assert!((f - (pt + div)).abs() < 1e-6, "x={x:?} t={t}: {f} vs {}", pt + div);
        }
    }
}

#[test]
fn forcing_symmetries() {
    let exact = ManufacturedSolution::two_term();
    for &(a, b) in &[(0.1, 0.3), (0.45, 0.8), (0.2, 0.2)] {
        let f = exact.exact_f([a, b], 1.0);
        assert!((f - exact.exact_f([b, a], 1.0)).abs() < 1e-13);
        assert!((f - exact.exact_f([1.0 - a, b], 1.0)).abs() < 1e-13);
        assert!((f - exact.exact_f([a, 1.0 - b], 1.0)).abs() < 1e-13);
    }
    // at the centre s = 0 and div(K s) = K(0) (p_xx + p_yy)
    assert!((exact.exact_f([0.5, 0.5], 0.0) - 0.0625).abs() < 1e-15);
    assert!((exact.exact_f([0.5, 0.5], 1.0) - (0.0625 + 1.0)).abs() < 1e-14);
}

#[test]
fn projected_residual_decreases_under_refinement() {
    let exact = ManufacturedSolution::two_term();
    let residuals: Vec<_> = [4, 8, 16, 32]
        .into_iter()
        .map(|n| {
            let mesh = StructuredTriMesh::new(n).unwrap();
            let solver = MixedSolver::new(&mesh).unwrap();
            projected_residual(&solver, &exact, 1.0, 1.0 / n as f64).unwrap()
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[1].mass < w[0].mass, "{residuals:?}");
        assert!(w[1].constitutive < w[0].constitutive, "{residuals:?}");
        assert!(w[1].gradient < w[0].gradient, "{residuals:?}");
    }
}

#[test]
fn error_norms_are_homogeneous() {
    let mesh = StructuredTriMesh::new(6).unwrap();
    let rule = quadrature(4).unwrap();
    let p: Vec<f64> = (0..mesh.num_triangles()).map(|t| (t as f64 * 0.37).sin()).collect();
    let s: Vec<f64> = (0..2 * mesh.num_triangles()).map(|i| (i as f64 * 0.11).cos()).collect();
    let u: Vec<f64> = (0..mesh.num_edges()).map(|e| (e as f64 * 0.53).sin()).collect();
    let zero = |_: [f64; 2]| [0.0, 0.0];
    for beta in [1.5, 2.0] {
        for lambda in [-3.0, 0.5, 7.25] {
            let scale = |v: &[f64]| v.iter().map(|x| lambda * x).collect::<Vec<_>>();
            let e_p = scalar_error_l2(&mesh, &p, |_| 0.0, &rule);
            let e_ps = scalar_error_l2(&mesh, &scale(&p), |_| 0.0, &rule);
            assert!((e_ps - lambda.abs() * e_p).abs() < 1e-12 * e_ps);
            let e_s = vector_error_lbeta(&mesh, VectorDofs::PiecewiseConstant(&s), zero, beta, &rule).unwrap();
            let s2 = scale(&s);
            let e_ss = vector_error_lbeta(&mesh, VectorDofs::PiecewiseConstant(&s2), zero, beta, &rule).unwrap();
            assert!((e_ss - lambda.abs() * e_s).abs() < 1e-12 * e_ss);
            let e_u = vector_error_lbeta(&mesh, VectorDofs::Rt0(&u), zero, beta, &rule).unwrap();
            let u2 = scale(&u);
            let e_us = vector_error_lbeta(&mesh, VectorDofs::Rt0(&u2), zero, beta, &rule).unwrap();
            assert!((e_us - lambda.abs() * e_u).abs() < 1e-12 * e_us);
        }
    }
}

#[test]
fn quadrature_is_saturated() {
    let exact = ManufacturedSolution::two_term();
    for n in [8, 16] {
        let mesh = StructuredTriMesh::new(n).unwrap();
        let solver = MixedSolver::new(&mesh).unwrap();
        let out = solver.run(&exact, &SolverConfig::new(1.0 / n as f64, 1.0).unwrap()).unwrap();
        let lo = exact.errors(&mesh, &out.state, 4).unwrap();
        let hi = exact.errors(&mesh, &out.state, 6).unwrap();
        for (a, b) in [(lo.p_l2, hi.p_l2), (lo.s_lbeta, hi.s_lbeta), (lo.u_lbeta, hi.u_lbeta)] {
            assert!((a - b).abs() / b < 1e-3, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn boundary_extension_enters_through_gradient_and_time_derivative() {
    // p = Psi = x1 + 2 x2 + t solves p_t + div u = 1 for Darcy with a0 = 1
    let law = ForchheimerLaw::darcy(1.0).unwrap();
    let data = FnProblem::new(law)
        .forcing(|_, _| 1.0)
        .initial(|x| x[0] + 2.0 * x[1], |_| [1.0, 2.0])
        .boundary_extension(|x, t| x[0] + 2.0 * x[1] + t, |_, _| 1.0, |_, _| [1.0, 2.0]);
    let mesh = StructuredTriMesh::new(4).unwrap();
    let solver = MixedSolver::new(&mesh).unwrap();
    let out = solver.run(&data, &SolverConfig::new(0.25, 1.0).unwrap()).unwrap();
    assert!(out.state.p.iter().all(|p| p.abs() < 1e-12));
    // s approximates the full gradient grad p = grad Psi
    for s in out.state.s.chunks_exact(2) {
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }
}
