//! Generalized Forchheimer law `g(|u|) u = -grad p` and the quantities derived
//! from it: the implicit mobility `K(xi) = 1/g(s(xi))` with `s g(s) = xi`, its
//! derivative, the energy density `H`, and the flux/gradient inversion pair.

use crate::error::{domain, Error, Result};
use crate::Vec2;

const ROOT_MAX_ITER: usize = 200;
const ROOT_REL_TOL: f64 = 1e-12;
const H_REL_TOL: f64 = 1e-10;
const H_MAX_DEPTH: u32 = 48;

/// `g(s) = a_0 + a_1 s^alpha_1 + ... + a_N s^alpha_N`.
///
/// An empty exponent list is the Darcy law `g = a_0`, for which the degeneracy
/// exponent is taken as 0 (so `beta = 2`).
#[derive(Debug, Clone, PartialEq)]
pub struct ForchheimerLaw {
    coefficients: Vec<f64>,
    exponents: Vec<f64>,
    degeneracy: f64,
}

impl ForchheimerLaw {
    /// `coefficients = [a_0, a_1, ..., a_N]`, `exponents = [alpha_1, ..., alpha_N]`.
    pub fn new(coefficients: Vec<f64>, exponents: Vec<f64>) -> Result<Self> {
        if coefficients.len() != exponents.len() + 1 {
            return Err(domain(format!(
                "expected {} coefficients for {} exponents, got {}",
                exponents.len() + 1,
                exponents.len(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(domain("coefficients must be finite and nonnegative"));
        }
        if coefficients[0] <= 0.0 {
            return Err(domain("a_0 must be positive"));
        }
        if coefficients.len() > 1 && *coefficients.last().unwrap() <= 0.0 {
            return Err(domain("leading coefficient a_N must be positive"));
        }
        if exponents.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(domain("exponents must be finite and positive"));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("exponents must be strictly increasing"));
        }
        let degeneracy = exponents.last().map_or(0.0, |&top| top / (top + 1.0));
        Ok(Self {
            coefficients,
            exponents,
            degeneracy,
        })
    }

    /// `g(s) = a_0`.
    pub fn darcy(a0: f64) -> Result<Self> {
        Self::new(vec![a0], vec![])
    }

    /// `g(s) = a_0 + a_1 s`.
    pub fn two_term(a0: f64, a1: f64) -> Result<Self> {
        Self::new(vec![a0, a1], vec![1.0])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn a0(&self) -> f64 {
        self.coefficients[0]
    }

    /// `a = alpha_N / (alpha_N + 1)`.
    pub fn degeneracy(&self) -> f64 {
        self.degeneracy
    }

    /// `beta = 2 - a`, the natural Lebesgue exponent for gradient and flux.
    pub fn beta(&self) -> f64 {
        2.0 - self.degeneracy
    }

    pub fn is_darcy(&self) -> bool {
        self.exponents.is_empty()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.coefficients[1..]
            .iter()
            .copied()
            .zip(self.exponents.iter().copied())
    }

    /// Coefficients of `a_0 + a_1 s` when the law has exactly that shape.
    fn as_two_term(&self) -> Option<(f64, f64)> {
        (self.exponents.len() == 1 && self.exponents[0] == 1.0)
            .then(|| (self.coefficients[0], self.coefficients[1]))
    }

    pub fn g(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(domain(format!("g evaluated at negative argument {s}")));
        }
        Ok(self.g_unchecked(s))
    }

    fn g_unchecked(&self, s: f64) -> f64 {
        self.a0() + self.terms().map(|(c, e)| c * s.powf(e)).sum::<f64>()
    }

    fn g_prime_unchecked(&self, s: f64) -> f64 {
        self.terms()
            .map(|(c, e)| {
                if c == 0.0 {
                    0.0
                } else {
                    c * e * s.powf(e - 1.0)
                }
            })
            .sum()
    }

    /// Unique `s >= 0` with `s g(s) = xi`.
    pub fn s_of_xi(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(domain(format!("s(xi) requires finite xi >= 0, got {xi}")));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        if self.is_darcy() {
            return Ok(xi / self.a0());
        }
        if let Some((a0, a1)) = self.as_two_term() {
            // positive root of a1 s^2 + a0 s - xi, in cancellation-free form
            return Ok(2.0 * xi / (a0 + (a0 * a0 + 4.0 * a1 * xi).sqrt()));
        }
        self.s_of_xi_newton(xi)
    }

    /// Safeguarded Newton with bisection fallback on `[0, xi/a_0]`.
    pub(crate) fn s_of_xi_newton(&self, xi: f64) -> Result<f64> {
        let mut lo = 0.0_f64;
        let mut hi = xi / self.a0();
        // leading-term asymptote as a starting point
        let top = self.coefficients.last().copied().unwrap_or(self.a0());
        let alpha_top = self.exponents.last().copied().unwrap_or(0.0);
        let mut s = (xi / top).powf(1.0 / (alpha_top + 1.0)).clamp(lo, hi);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let mut residual = f64::INFINITY;
        for _ in 0..ROOT_MAX_ITER {
            let gs = self.g_unchecked(s);
            let phi = s * gs - xi;
            residual = phi.abs() / xi;
            if residual <= ROOT_REL_TOL {
                return Ok(s);
            }
            if phi > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(s);
            }
            let slope = gs + s * self.g_prime_unchecked(s);
            let newton = s - phi / slope;
            s = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::Convergence {
            what: "s(xi) root solve",
            iterations: ROOT_MAX_ITER,
            residual,
        })
    }

    /// Mobility `K(xi) = 1/g(s(xi))`.
    pub fn k(&self, xi: f64) -> Result<f64> {
        let s = self.s_of_xi(xi)?;
        Ok(1.0 / self.g_unchecked(s))
    }

    /// `dK/dxi` by implicit differentiation of `s g(s) = xi`.
    pub fn k_prime(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(domain(format!("K'(xi) requires xi > 0, got {xi}")));
        }
        if self.is_darcy() {
            return Ok(0.0);
        }
        let s = self.s_of_xi(xi)?;
        let g = self.g_unchecked(s);
        let dg = self.g_prime_unchecked(s);
        let ds = 1.0 / (g + s * dg);
        Ok(-dg * ds / (g * g))
    }

    /// `H(xi) = int_0^{xi^2} K(sqrt(t)) dt`, evaluated as `int_0^xi 2 r K(r) dr`.
    pub fn h(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(domain(format!("H(xi) requires finite xi >= 0, got {xi}")));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        if self.is_darcy() {
            return Ok(xi * xi / self.a0());
        }
        let integrand = |r: f64| -> Result<f64> { Ok(2.0 * r * self.k(r)?) };
        adaptive_simpson(&integrand, 0.0, xi, H_REL_TOL)
    }

    /// `-K(|y|) y`.
    pub fn flux_of_gradient(&self, y: Vec2) -> Result<Vec2> {
        let k = self.k(norm(y))?;
        Ok([-k * y[0], -k * y[1]])
    }

    /// `-g(|u|) u`, the exact inverse of [`Self::flux_of_gradient`].
    pub fn gradient_of_flux(&self, u: Vec2) -> Vec2 {
        let g = self.g_unchecked(norm(u));
        [-g * u[0], -g * u[1]]
    }
}

pub(crate) fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

fn adaptive_simpson<F>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // absolute target from a coarse magnitude estimate
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, H_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
