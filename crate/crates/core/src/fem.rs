//! Lowest-order spaces of the expanded mixed method: piecewise constants for
//! the pressure, piecewise-constant 2-vectors for the gradient, RT0 for the
//! flux. Also the L2 projections and the block matrices of the discrete system.

use crate::error::{domain, Result};
use crate::mesh::StructuredTriMesh;
use crate::par;
use crate::quadrature::{quadrature, QuadratureRule};
use crate::sparse::CsrMatrix;
use crate::Vec2;

/// Quadrature degree for projections and load vectors.
pub const PROJECTION_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub n_p: usize,
    pub n_s: usize,
    pub n_u: usize,
}

impl DofLayout {
    pub fn new(mesh: &StructuredTriMesh) -> Self {
        Self {
            n_p: mesh.num_triangles(),
            n_s: 2 * mesh.num_triangles(),
            n_u: mesh.num_edges(),
        }
    }
}

/// Block matrices of the three-field system.
///
/// Gradient dofs are stored interleaved: `(T, x)` at `2T`, `(T, y)` at `2T+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub layout: DofLayout,
    /// `int phi_i . phi_j` on RT0.
    pub mass_u: CsrMatrix,
    /// `int_T div phi_e`, `n_p x n_u`.
    pub div: CsrMatrix,
    /// `int_T phi_e` componentwise, `n_s x n_u`.
    pub avg: CsrMatrix,
    /// Diagonal of the gradient-space mass matrix (`|T|` per component).
    pub mass_s: Vec<f64>,
    /// Diagonal of the pressure-space mass matrix (`|T|`).
    pub mass_p: Vec<f64>,
}

/// Scale factor `sigma |e| / (2|T|)` of the local RT0 shape function.
fn rt0_scale(mesh: &StructuredTriMesh, t: usize, k: usize) -> f64 {
    let tri = &mesh.triangles()[t];
    tri.signs[k] * mesh.edges()[tri.edges[k]].length / (2.0 * tri.area)
}

/// RT0 shape function of local edge `k` on triangle `t`, without the
/// point-in-triangle check.
pub fn rt0_shape(mesh: &StructuredTriMesh, t: usize, k: usize, x: Vec2) -> Vec2 {
    let c = rt0_scale(mesh, t, k);
    let opp = mesh.vertices()[mesh.triangles()[t].vertices[k]];
    [c * (x[0] - opp[0]), c * (x[1] - opp[1])]
}

/// RT0 basis field `sigma |e| (x - x_opp) / (2|T|)` for local edge `k`.
pub fn rt0_eval(mesh: &StructuredTriMesh, t: usize, k: usize, x: Vec2) -> Result<Vec2> {
    if t >= mesh.num_triangles() || k > 2 {
        return Err(domain(format!("no local edge {k} on triangle {t}")));
    }
    let bary = mesh.barycentric(t, x);
    if bary.iter().any(|&b| b < -1e-12) {
        return Err(domain(format!("point {x:?} lies outside triangle {t}")));
    }
    Ok(rt0_shape(mesh, t, k, x))
}

/// Constant divergence `sigma |e| / |T|` of the local RT0 shape function.
pub fn rt0_divergence(mesh: &StructuredTriMesh, t: usize, k: usize) -> f64 {
    2.0 * rt0_scale(mesh, t, k)
}

/// Value of the RT0 field with global coefficients `u` at `x` in triangle `t`.
pub fn rt0_field(mesh: &StructuredTriMesh, u: &[f64], t: usize, x: Vec2) -> Vec2 {
    let tri = &mesh.triangles()[t];
    let mut out = [0.0; 2];
    for k in 0..3 {
        let phi = rt0_shape(mesh, t, k, x);
        let c = u[tri.edges[k]];
        out[0] += c * phi[0];
        out[1] += c * phi[1];
    }
    out
}

/// Element average of the RT0 field `u` on each triangle, interleaved like
/// the gradient dofs.
pub fn rt0_averages(mesh: &StructuredTriMesh, u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let v = rt0_field(mesh, u, t, mesh.centroid(t));
        out.extend(v);
    }
    out
}

/// Canonical RT0 interpolant: `u_e = (1/|e|) int_e F . n_e` (3-point Gauss on each edge).
pub fn rt0_interpolate<F>(mesh: &StructuredTriMesh, field: F) -> Vec<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync + Send,
{
    const GAUSS3: [(f64, f64); 3] = [
        (0.112_701_665_379_258_3, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.887_298_334_620_741_7, 5.0 / 18.0),
    ];
    par::map_slice(mesh.edges(), |e| {
        let [a, b] = e.vertices.map(|v| mesh.vertices()[v]);
        GAUSS3
            .iter()
            .map(|&(s, w)| {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let f = field(x);
                w * (f[0] * e.normal[0] + f[1] * e.normal[1])
            })
            .sum()
    })
}

pub fn assemble(mesh: &StructuredTriMesh) -> AssembledSystem {
    let layout = DofLayout::new(mesh);
    let rule = quadrature(2).expect("degree-2 rule exists");

    struct Local {
        mass: [[f64; 3]; 3],
        div: [f64; 3],
        avg: [[f64; 3]; 2],
    }

    let locals = par::map_range(mesh.num_triangles(), |t| {
        let tri = &mesh.triangles()[t];
        let mut mass = [[0.0; 3]; 3];
        for (bary, w) in rule.iter() {
            let x = mesh.map_point(t, bary);
            let phi: [Vec2; 3] = std::array::from_fn(|k| rt0_shape(mesh, t, k, x));
            for i in 0..3 {
                for j in 0..3 {
                    mass[i][j] += w * tri.area * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]);
                }
            }
        }
        let div = std::array::from_fn(|k| tri.signs[k] * mesh.edges()[tri.edges[k]].length);
        let xc = mesh.centroid(t);
        let mut avg = [[0.0; 3]; 2];
        for k in 0..3 {
            let opp = mesh.vertices()[tri.vertices[k]];
            let c = 0.5 * tri.signs[k] * mesh.edges()[tri.edges[k]].length;
            avg[0][k] = c * (xc[0] - opp[0]);
            avg[1][k] = c * (xc[1] - opp[1]);
        }
        Local { mass, div, avg }
    });

    let nt = mesh.num_triangles();
    let mut mass_trip = Vec::with_capacity(9 * nt);
    let mut div_trip = Vec::with_capacity(3 * nt);
    let mut avg_trip = Vec::with_capacity(6 * nt);
    for (t, local) in locals.iter().enumerate() {
        let edges = mesh.triangles()[t].edges;
        for i in 0..3 {
            for j in 0..3 {
                mass_trip.push((edges[i], edges[j], local.mass[i][j]));
            }
            div_trip.push((t, edges[i], local.div[i]));
            avg_trip.push((2 * t, edges[i], local.avg[0][i]));
            avg_trip.push((2 * t + 1, edges[i], local.avg[1][i]));
        }
    }
    let areas: Vec<f64> = mesh.triangles().iter().map(|t| t.area).collect();

    AssembledSystem {
        layout,
        mass_u: CsrMatrix::from_triplets(layout.n_u, layout.n_u, mass_trip),
        div: CsrMatrix::from_triplets(layout.n_p, layout.n_u, div_trip),
        avg: CsrMatrix::from_triplets(layout.n_s, layout.n_u, avg_trip),
        mass_s: areas.iter().flat_map(|&a| [a, a]).collect(),
        mass_p: areas,
    }
}

/// `int_T f` for every triangle.
pub fn integrate_scalar<F>(mesh: &StructuredTriMesh, rule: &QuadratureRule, f: F) -> Vec<f64>
where
    F: Fn(Vec2) -> f64 + Sync + Send,
{
    par::map_range(mesh.num_triangles(), |t| {
        let area = mesh.triangles()[t].area;
        rule.iter()
            .map(|(b, w)| w * f(mesh.map_point(t, b)))
            .sum::<f64>()
            * area
    })
}

/// `int_Omega F . phi_e` for every edge.
pub fn rt0_load<F>(mesh: &StructuredTriMesh, rule: &QuadratureRule, field: F) -> Vec<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync + Send,
{
    let locals = par::map_range(mesh.num_triangles(), |t| {
        let area = mesh.triangles()[t].area;
        let mut out = [0.0; 3];
        for (b, w) in rule.iter() {
            let x = mesh.map_point(t, b);
            let f = field(x);
            for (k, slot) in out.iter_mut().enumerate() {
                let phi = rt0_shape(mesh, t, k, x);
                *slot += w * area * (f[0] * phi[0] + f[1] * phi[1]);
            }
        }
        out
    });
    let mut load = vec![0.0; mesh.num_edges()];
    for (t, local) in locals.iter().enumerate() {
        for (k, &v) in local.iter().enumerate() {
            load[mesh.triangles()[t].edges[k]] += v;
        }
    }
    load
}

/// Elementwise average `(1/|T|) int_T f`.
pub fn l2_project_scalar<F>(mesh: &StructuredTriMesh, f: F) -> Vec<f64>
where
    F: Fn(Vec2) -> f64 + Sync + Send,
{
    let rule = quadrature(PROJECTION_DEGREE).expect("projection rule exists");
    par::map_range(mesh.num_triangles(), |t| {
        rule.iter().map(|(b, w)| w * f(mesh.map_point(t, b))).sum()
    })
}

/// Componentwise elementwise average, interleaved `(x, y)` per triangle.
pub fn l2_project_vector<F>(mesh: &StructuredTriMesh, f: F) -> Vec<f64>
where
    F: Fn(Vec2) -> Vec2 + Sync + Send,
{
    let rule = quadrature(PROJECTION_DEGREE).expect("projection rule exists");
    let pairs = par::map_range(mesh.num_triangles(), |t| {
        rule.iter().fold([0.0, 0.0], |acc, (b, w)| {
            let v = f(mesh.map_point(t, b));
            [acc[0] + w * v[0], acc[1] + w * v[1]]
        })
    });
    pairs.into_iter().flatten().collect()
}

/// `(sum_T |T| v_T^2)^{1/2}` for a piecewise-constant scalar.
pub fn l2_norm_p0(mesh: &StructuredTriMesh, v: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .zip(v)
        .map(|(t, x)| t.area * x * x)
        .sum::<f64>()
        .sqrt()
}

/// `(sum_T |T| |v_T|^2)^{1/2}` for interleaved piecewise-constant vectors.
pub fn l2_norm_p0_vector(mesh: &StructuredTriMesh, v: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .zip(v.chunks_exact(2))
        .map(|(t, x)| t.area * (x[0] * x[0] + x[1] * x[1]))
        .sum::<f64>()
        .sqrt()
}
