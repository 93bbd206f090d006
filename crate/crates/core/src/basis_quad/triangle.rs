use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::quadrature::QuadratureRule;
use crate::mesh2d::Point2;

/// Number of polynomials of total degree at most `p` in two variables.
pub const fn dim_p(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

const CENTER: f64 = 1.0 / 3.0;

/// Orthonormal modal basis of `P^p` on the reference triangle
/// (0,0), (1,0), (0,1).
///
/// Built by Gram–Schmidt on centered monomials taken in graded order, so the
/// first `dim_p(q)` functions of a degree-`p` basis are exactly the degree-`q`
/// basis for every `q <= p`.
#[derive(Debug, Clone)]
pub struct TriangleBasis2D {
    degree: usize,
    exponents: Vec<(i32, i32)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coef: Vec<f64>,
}

impl TriangleBasis2D {
    pub fn new(degree: usize) -> Self {
        let n = dim_p(degree);
        let mut exponents = Vec::with_capacity(n);
        for total in 0..=degree {
            for b in 0..=total {
                exponents.push(((total - b) as i32, b as i32));
            }
        }
        let rule = QuadratureRule::reference_triangle(2 * degree);
        // Monomial values at the quadrature points.
        let nq = rule.len();
        let mut mono = vec![0.0; n * nq];
        for (q, p) in rule.points.iter().enumerate() {
            for (m, &(a, b)) in exponents.iter().enumerate() {
                mono[m * nq + q] = (p.x1 - CENTER).powi(a) * (p.x2 - CENTER).powi(b);
            }
        }
        let inner = |u: &[f64], v: &[f64]| -> f64 {
            u.iter()
                .zip(v)
                .zip(&rule.weights)
                .map(|((x, y), w)| x * y * w)
                .sum()
        };
        // Basis function values at quadrature points, and their coefficients.
        let mut vals: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut coef = vec![0.0; n * n];
        for m in 0..n {
            let mut v = mono[m * nq..(m + 1) * nq].to_vec();
            let mut c = vec![0.0; n];
            c[m] = 1.0;
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for (k, vk) in vals.iter().enumerate() {
                    let proj = inner(&v, vk);
                    for (x, y) in v.iter_mut().zip(vk) {
                        *x -= proj * y;
                    }
                    for j in 0..n {
                        c[j] -= proj * coef[k * n + j];
                    }
                }
            }
            let norm = inner(&v, &v).sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            for j in 0..n {
                coef[m * n + j] = c[j] / norm;
            }
            vals.push(v);
        }
        TriangleBasis2D {
            degree,
            exponents,
            coef,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Values of the first `out.len()` basis functions at reference point `xi`.
    pub fn eval_reference(&self, xi: Point2, out: &mut [f64]) {
        let n = self.dim();
        let mut mono = [0.0; 64];
        let (dx, dy) = (xi.x1 - CENTER, xi.x2 - CENTER);
        for (m, &(a, b)) in self.exponents.iter().enumerate() {
            mono[m] = dx.powi(a) * dy.powi(b);
        }
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.coef[i * n..(i + 1) * n];
            *o = row[..=i].iter().zip(&mono[..=i]).map(|(c, m)| c * m).sum();
        }
    }

    /// Values and reference gradients of the first `vals.len()` functions.
    pub fn eval_reference_grad(
        &self,
        xi: Point2,
        vals: &mut [f64],
        d1: &mut [f64],
        d2: &mut [f64],
    ) {
        let n = self.dim();
        let mut mono = [0.0; 64];
        let mut m1 = [0.0; 64];
        let mut m2 = [0.0; 64];
        let (dx, dy) = (xi.x1 - CENTER, xi.x2 - CENTER);
        for (m, &(a, b)) in self.exponents.iter().enumerate() {
            let pa = dx.powi(a);
            let pb = dy.powi(b);
            mono[m] = pa * pb;
            m1[m] = if a > 0 {
                a as f64 * dx.powi(a - 1) * pb
            } else {
                0.0
            };
            m2[m] = if b > 0 {
                b as f64 * pa * dy.powi(b - 1)
            } else {
                0.0
            };
        }
        for i in 0..vals.len() {
            let row = &self.coef[i * n..i * n + i + 1];
            let (mut v, mut g1, mut g2) = (0.0, 0.0, 0.0);
            for (m, c) in row.iter().enumerate() {
                v += c * mono[m];
                g1 += c * m1[m];
                g2 += c * m2[m];
            }
            vals[i] = v;
            d1[i] = g1;
            d2[i] = g2;
        }
    }
}

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTriangle {
    pub vertices: [Point2; 3],
    jac: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    det: f64,
}

impl AffineTriangle {
    pub fn new(a: Point2, b: Point2, c: Point2) -> Self {
        let jac = [[b.x1 - a.x1, c.x1 - a.x1], [b.x2 - a.x2, c.x2 - a.x2]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        AffineTriangle {
            vertices: [a, b, c],
            jac,
            inv,
            det,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det.abs()
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    pub fn to_reference(&self, x: Point2) -> Point2 {
        let a = self.vertices[0];
        let (dx, dy) = (x.x1 - a.x1, x.x2 - a.x2);
        Point2::new(
            self.inv[0][0] * dx + self.inv[0][1] * dy,
            self.inv[1][0] * dx + self.inv[1][1] * dy,
        )
    }

    pub fn to_physical(&self, xi: Point2) -> Point2 {
        let a = self.vertices[0];
        Point2::new(
            a.x1 + self.jac[0][0] * xi.x1 + self.jac[0][1] * xi.x2,
            a.x2 + self.jac[1][0] * xi.x1 + self.jac[1][1] * xi.x2,
        )
    }

    /// Maps a reference gradient to a physical one (`J^{-T} g`).
    pub fn push_gradient(&self, g1: f64, g2: f64) -> (f64, f64) {
        (
            self.inv[0][0] * g1 + self.inv[1][0] * g2,
            self.inv[0][1] * g1 + self.inv[1][1] * g2,
        )
    }
}

/// A degree-`p` orthonormal basis on a physical triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementBasis<'a> {
    pub basis: &'a TriangleBasis2D,
    pub map: &'a AffineTriangle,
}

impl<'a> ElementBasis<'a> {
    pub fn new(basis: &'a TriangleBasis2D, map: &'a AffineTriangle) -> Self {
        ElementBasis { basis, map }
    }

    /// Values of the first `out.len()` functions at physical point `x`.
    pub fn values(&self, x: Point2, out: &mut [f64]) {
        self.basis.eval_reference(self.map.to_reference(x), out);
        let s = 1.0 / self.map.abs_det().sqrt();
        for o in out.iter_mut() {
            *o *= s;
        }
    }

    /// Values and physical gradients of the first `vals.len()` functions.
    pub fn values_and_gradients(
        &self,
        x: Point2,
        vals: &mut [f64],
        dx1: &mut [f64],
        dx2: &mut [f64],
    ) {
        self.basis
            .eval_reference_grad(self.map.to_reference(x), vals, dx1, dx2);
        let s = 1.0 / self.map.abs_det().sqrt();
        for i in 0..vals.len() {
            let (g1, g2) = self.map.push_gradient(dx1[i], dx2[i]);
            vals[i] *= s;
            dx1[i] = g1 * s;
            dx2[i] = g2 * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(p: usize, tri: &AffineTriangle) -> Vec<f64> {
        let basis = TriangleBasis2D::new(p);
        let n = basis.dim();
        let rule =
            QuadratureRule::on_triangle(2 * p, tri.vertices[0], tri.vertices[1], tri.vertices[2]);
        let eb = ElementBasis::new(&basis, tri);
        let mut g = vec![0.0; n * n];
        let mut vals = vec![0.0; n];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            eb.values(*x, &mut vals);
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += w * vals[i] * vals[j];
                }
            }
        }
        g
    }

    #[test]
    fn gram_matrix_is_identity() {
        let tri = AffineTriangle::new(
            Point2::new(0.1, -0.2),
            Point2::new(0.7, 0.05),
            Point2::new(0.3, 0.4),
        );
        for p in 0..=4 {
            let n = dim_p(p);
            let g = gram(p, &tri);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * n + j] - expect).abs() < 1e-12, "p={p} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn lower_degree_basis_is_prefix() {
        let b4 = TriangleBasis2D::new(4);
        let b2 = TriangleBasis2D::new(2);
        let xi = Point2::new(0.2, 0.3);
        let mut v4 = vec![0.0; b4.dim()];
        let mut v2 = vec![0.0; b2.dim()];
        b4.eval_reference(xi, &mut v4);
        b2.eval_reference(xi, &mut v2);
        for (a, b) in v2.iter().zip(&v4) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let tri = AffineTriangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.1),
            Point2::new(0.2, 0.6),
        );
        let basis = TriangleBasis2D::new(3);
        let eb = ElementBasis::new(&basis, &tri);
        let n = basis.dim();
        let x = Point2::new(0.2, 0.2);
        let (mut v, mut g1, mut g2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        eb.values_and_gradients(x, &mut v, &mut g1, &mut g2);
        let h = 1e-6;
        let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
        eb.values(Point2::new(x.x1 + h, x.x2), &mut vp);
        eb.values(Point2::new(x.x1 - h, x.x2), &mut vm);
        for i in 0..n {
            assert!(((vp[i] - vm[i]) / (2.0 * h) - g1[i]).abs() < 1e-6);
        }
        eb.values(Point2::new(x.x1, x.x2 + h), &mut vp);
        eb.values(Point2::new(x.x1, x.x2 - h), &mut vm);
        for i in 0..n {
            assert!(((vp[i] - vm[i]) / (2.0 * h) - g2[i]).abs() < 1e-6);
        }
    }
}
