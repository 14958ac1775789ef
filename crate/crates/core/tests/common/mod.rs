#![allow(dead_code)]

use forchheimer_core::{DiscreteState, MixedSolver, ProblemData};
use nalgebra::{DMatrix, DVector};

/// Closed-form mobility of `g(s) = 1 + s` and its derivative.
pub fn two_term_k(xi: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 * xi).sqrt())
}

pub fn two_term_k_prime(xi: f64) -> f64 {
    let r = (1.0 + 4.0 * xi).sqrt();
    -4.0 / (r * (1.0 + r) * (1.0 + r))
}

/// Damped Newton on the full three-field system of one backward Euler step,
/// assembled densely from the block matrices (no elimination, no Picard).
pub fn newton_step(
    solver: &MixedSolver<'_>,
    prev: &DiscreteState,
    t_n: f64,
    dt: f64,
    data: &dyn ProblemData,
) -> DiscreteState {
    let mesh = solver.mesh();
    let sys = solver.system();
    let (np, ns, nu) = (sys.layout.n_p, sys.layout.n_s, sys.layout.n_u);
    let n = np + ns + nu;
    let (f_load, g_load) = solver.loads(data, t_n);
    let areas: Vec<f64> = mesh.triangles().iter().map(|t| t.area).collect();

    let residual = |z: &DVector<f64>| -> DVector<f64> {
        let p = z.rows(0, np);
        let s = z.rows(np, ns);
        let u: Vec<f64> = z.rows(np + ns, nu).iter().copied().collect();
        let bu = sys.div.mul_vec(&u);
        let cu = sys.avg.mul_vec(&u);
        let sv: Vec<f64> = s.iter().copied().collect();
        let pv: Vec<f64> = p.iter().copied().collect();
        let cts = sys.avg.transpose_mul_vec(&sv);
        let btp = sys.div.transpose_mul_vec(&pv);
        let mut r = DVector::zeros(n);
        for t in 0..np {
            r[t] = areas[t] * (p[t] - prev.p[t]) / dt + bu[t] - f_load[t];
            let (sx, sy) = (s[2 * t], s[2 * t + 1]);
            let k = two_term_k(sx.hypot(sy));
            r[np + 2 * t] = cu[2 * t] + areas[t] * k * sx;
            r[np + 2 * t + 1] = cu[2 * t + 1] + areas[t] * k * sy;
        }
        for e in 0..nu {
            r[np + ns + e] = cts[e] + btp[e] - g_load[e];
        }
        r
    };

    let jacobian = |z: &DVector<f64>| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(n, n);
        for t in 0..np {
            j[(t, t)] = areas[t] / dt;
            let (sx, sy) = (z[np + 2 * t], z[np + 2 * t + 1]);
            let m = sx.hypot(sy);
            let k = two_term_k(m);
            let (mut xx, mut xy, mut yy) = (k, 0.0, k);
            if m > 0.0 {
                let kp = two_term_k_prime(m) / m;
                xx += kp * sx * sx;
                xy += kp * sx * sy;
                yy += kp * sy * sy;
            }
            let (rx, ry) = (np + 2 * t, np + 2 * t + 1);
            j[(rx, rx)] = areas[t] * xx;
            j[(rx, ry)] = areas[t] * xy;
            j[(ry, rx)] = areas[t] * xy;
            j[(ry, ry)] = areas[t] * yy;
        }
        for (r, c, v) in sys.div.triplets() {
            j[(r, np + ns + c)] = v;
            j[(np + ns + c, r)] = v;
        }
        for (r, c, v) in sys.avg.triplets() {
            j[(np + r, np + ns + c)] = v;
            j[(np + ns + c, np + r)] = v;
        }
        j
    };

    let mut z = DVector::from_iterator(
        n,
        prev.p.iter().chain(&prev.s).chain(&prev.u).copied(),
    );
    let mut r = residual(&z);
    for _ in 0..60 {
        let rn = r.norm();
        if rn < 1e-15 {
            break;
        }
        let delta = jacobian(&z).lu().solve(&(-&r)).expect("nonsingular Jacobian");
        let mut lambda = 1.0;
        loop {
            let trial = &z + lambda * &delta;
            let rt = residual(&trial);
            if rt.norm() <= (1.0 - 1e-4 * lambda) * rn || lambda < 1e-8 {
                z = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
        if delta.amax() < 1e-15 {
            break;
        }
    }
    DiscreteState {
        p: z.rows(0, np).iter().copied().collect(),
        s: z.rows(np, ns).iter().copied().collect(),
        u: z.rows(np + ns, nu).iter().copied().collect(),
        t: t_n,
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
