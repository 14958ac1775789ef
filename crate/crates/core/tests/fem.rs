use forchheimer_core::fem::{self, l2_project_scalar};
use forchheimer_core::quadrature::quadrature;
use forchheimer_core::verification::scalar_error_l2;
use forchheimer_core::{assemble, StructuredTriMesh};
use std::f64::consts::PI;

fn wave(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

#[test]
fn projection_error_is_first_order() {
    let rule = quadrature(6).unwrap();
    let errors: Vec<f64> = [4, 8, 16, 32]
        .into_iter()
        .map(|n| {
            let mesh = StructuredTriMesh::new(n).unwrap();
            let proj = l2_project_scalar(&mesh, wave);
            scalar_error_l2(&mesh, &proj, wave, &rule)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }
}

#[test]
fn projection_is_stable() {
    let rule = quadrature(6).unwrap();
    let fields: [fn([f64; 2]) -> f64; 3] = [wave, |x| (5.0 * x[0]).exp() - x[1], |x| (x[0] - 0.3).abs()];
    for n in [2, 8, 16] {
        let mesh = StructuredTriMesh::new(n).unwrap();
        for f in fields {
            let proj = l2_project_scalar(&mesh, f);
            let norm_f = scalar_error_l2(&mesh, &vec![0.0; mesh.num_triangles()], f, &rule);
            assert!(fem::l2_norm_p0(&mesh, &proj) <= norm_f * (1.0 + 1e-12));
        }
    }
}

#[test]
fn projection_of_linear_field_is_centroid_value() {
    let mesh = StructuredTriMesh::new(5).unwrap();
    let proj = l2_project_scalar(&mesh, |x| 3.0 * x[0] - 2.0 * x[1] + 1.0);
    for (t, v) in proj.iter().enumerate() {
        let c = mesh.centroid(t);
        assert!((v - (3.0 * c[0] - 2.0 * c[1] + 1.0)).abs() < 1e-14);
    }
}

#[test]
fn assembly_is_deterministic() {
    let mesh = StructuredTriMesh::new(12).unwrap();
    let a = assemble(&mesh);
    let b = assemble(&mesh);
    assert_eq!(a, b);
    assert!(a.mass_u.is_symmetric(0.0));
}

#[test]
fn divergence_of_interpolant_is_projected_divergence() {
    // the commuting property of the RT0 interpolant
    let mesh = StructuredTriMesh::new(6).unwrap();
    let sys = assemble(&mesh);
    let field = |x: [f64; 2]| [x[0] * x[0] * x[1], x[0] * x[1].powi(3) + x[1]];
    let div = |x: [f64; 2]| 2.0 * x[0] * x[1] + 3.0 * x[0] * x[1] * x[1] + 1.0;
    let u = fem::rt0_interpolate(&mesh, field);
    let bu = sys.div.mul_vec(&u);
    let proj = l2_project_scalar(&mesh, div);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        assert!((bu[t] / tri.area - proj[t]).abs() < 1e-12, "triangle {t}");
    }
}
