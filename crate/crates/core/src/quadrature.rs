//! Symmetric quadrature rules on triangles with positive weights.

use crate::error::{domain, Result};

/// Points are barycentric triples; weights sum to one and are scaled by the
/// element area at the point of use.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 3], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// Composite rule: this rule applied on each of the `m * m` congruent
    /// subtriangles of the uniform refinement. Keeps the polynomial degree and
    /// resolves integrands that are only piecewise smooth inside an element.
    pub fn refined(&self, m: usize) -> Result<QuadratureRule> {
        if m == 0 {
            return Err(domain("refinement level must be positive"));
        }
        let h = 1.0 / m as f64;
        let scale = h * h;
        let mut points = Vec::with_capacity(self.len() * m * m);
        let mut weights = Vec::with_capacity(self.len() * m * m);
        // sub-triangles in (l1, l2) lattice coordinates, third coordinate implied
        let mut push = |corners: [[f64; 2]; 3]| {
            for (b, w) in self.iter() {
                let l1 = b[0] * corners[0][0] + b[1] * corners[1][0] + b[2] * corners[2][0];
                let l2 = b[0] * corners[0][1] + b[1] * corners[1][1] + b[2] * corners[2][1];
                points.push([1.0 - l1 - l2, l1, l2]);
                weights.push(w * scale);
            }
        };
        for i in 0..m {
            for j in 0..m - i {
                let (a, b) = (i as f64 * h, j as f64 * h);
                push([[a, b], [a + h, b], [a, b + h]]);
                if i + j + 1 < m {
                    push([[a + h, b], [a + h, b + h], [a, b + h]]);
                }
            }
        }
        Ok(QuadratureRule {
            points,
            weights,
            degree: self.degree,
        })
    }
}

/// Rule exact to at least `degree`, for `degree` in `1..=6`.
pub fn quadrature(degree: usize) -> Result<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let exact = match degree {
        1 => {
            centroid(&mut points, &mut weights, 1.0);
            1
        }
        2 => {
            orbit3(&mut points, &mut weights, 0.0, 0.5, 1.0 / 3.0);
            2
        }
        // no 4-point rule of degree 3 has positive weights; use the degree-4 rule
        3 | 4 => {
            orbit3(
                &mut points,
                &mut weights,
                0.108_103_018_168_070,
                0.445_948_490_915_965,
                0.223_381_589_678_011,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.816_847_572_980_459,
                0.091_576_213_509_771,
                0.109_951_743_655_322,
            );
            4
        }
        5 => {
            centroid(&mut points, &mut weights, 0.225);
            orbit3(
                &mut points,
                &mut weights,
                0.059_715_871_789_770,
                0.470_142_064_105_115,
                0.132_394_152_788_506,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.797_426_985_353_087,
                0.101_286_507_323_456,
                0.125_939_180_544_827,
            );
            5
        }
        6 => {
            orbit3(
                &mut points,
                &mut weights,
                0.501_426_509_658_179,
                0.249_286_745_170_910,
                0.116_786_275_726_379,
            );
            orbit3(
                &mut points,
                &mut weights,
                0.873_821_971_016_996,
                0.063_089_014_491_502,
                0.050_844_906_370_207,
            );
            orbit6(
                &mut points,
                &mut weights,
                [0.053_145_049_844_817, 0.310_352_451_033_784, 0.636_502_499_121_399],
                0.082_851_075_618_374,
            );
            6
        }
        _ => return Err(domain(format!("no quadrature rule of degree {degree} (supported: 1..=6)"))),
    };
    Ok(QuadratureRule {
        points,
        weights,
        degree: exact,
    })
}

fn centroid(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, w: f64) {
    points.push([1.0 / 3.0; 3]);
    weights.push(w);
}

/// The three permutations of `(a, b, b)`.
fn orbit3(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, a: f64, b: f64, w: f64) {
    points.extend([[a, b, b], [b, a, b], [b, b, a]]);
    weights.extend([w; 3]);
}

/// The six permutations of `(a, b, c)`.
fn orbit6(points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>, [a, b, c]: [f64; 3], w: f64) {
    points.extend([[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]);
    weights.extend([w; 6]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// `int_{ref} x^i y^j` over the unit right triangle, divided by its area.
    fn monomial_mean(i: u32, j: u32) -> f64 {
        2.0 * factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn every_rule_is_exact_to_its_degree() {
        for requested in 1..=6 {
            let rule = quadrature(requested).unwrap();
            assert!(rule.degree >= requested);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "degree {requested}: {total}");
            for i in 0..=rule.degree as u32 {
                for j in 0..=(rule.degree as u32 - i) {
                    let approx: f64 = rule
                        .iter()
                        .map(|(b, w)| w * b[1].powi(i as i32) * b[2].powi(j as i32))
                        .sum();
                    let exact = monomial_mean(i, j);
                    assert!(
                        (approx - exact).abs() < 1e-13,
                        "degree {requested}: x^{i} y^{j}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn named_rules() {
        let one = quadrature(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.weights, vec![1.0]);
        let two = quadrature(2).unwrap();
        assert_eq!(two.len(), 3);
        // x^4 over the reference triangle (area 1/2) is 1/30
        let four = quadrature(4).unwrap();
        let x4: f64 = 0.5 * four.iter().map(|(b, w)| w * b[1].powi(4)).sum::<f64>();
        assert!((x4 - 1.0 / 30.0).abs() < 1e-14);
        assert!(quadrature(0).is_err());
        assert!(quadrature(7).is_err());
    }

    #[test]
    fn refined_rule_keeps_exactness_and_resolves_kinks() {
        let rule = quadrature(4).unwrap().refined(3).unwrap();
        assert_eq!(rule.len(), 6 * 9);
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for (i, j) in [(0, 0), (2, 1), (0, 4), (3, 1)] {
            let approx: f64 = rule.iter().map(|(b, w)| w * b[1].powi(i) * b[2].powi(j)).sum();
            assert!((approx - monomial_mean(i as u32, j as u32)).abs() < 1e-13);
        }
        assert!(rule.points.iter().all(|b| b.iter().all(|&l| l >= -1e-15)));
        // |x - 1/3| over the reference triangle: exact mean 16/81
        let mean = |r: &QuadratureRule| r.iter().map(|(b, w)| w * (b[1] - 1.0 / 3.0).abs()).sum::<f64>();
        let coarse = (mean(&quadrature(4).unwrap()) - 16.0 / 81.0).abs();
        let fine = (mean(&quadrature(4).unwrap().refined(8).unwrap()) - 16.0 / 81.0).abs();
        assert!(fine < coarse / 10.0, "{coarse} {fine}");
        assert!(quadrature(2).unwrap().refined(0).is_err());
    }
}
