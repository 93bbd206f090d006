use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mesh2d::Point2;

/// Gauss–Legendre rule on (-1, 1) with `n` points, exact for degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
pub fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut d_prev = 0.0;
    let mut d = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// A quadrature rule on an interval.
#[derive(Debug, Clone)]
pub struct IntervalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl IntervalRule {
    /// Gauss–Legendre rule with `n` points mapped to `(a, b)`.
    pub fn gauss(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        IntervalRule {
            points: x.iter().map(|&s| mid + half * s).collect(),
            weights: w.iter().map(|&wi| wi * half).collect(),
        }
    }

    /// Composite Gauss rule graded geometrically towards `a`, for integrands
    /// with an integrable singularity at that end.
    pub fn graded_towards_start(n: usize, a: f64, b: f64, levels: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut hi = 1.0;
        for _ in 0..levels {
            let lo = 0.5 * hi;
            let r = IntervalRule::gauss(n, a + lo * (b - a), a + hi * (b - a));
            points.extend(r.points);
            weights.extend(r.weights);
            hi = lo;
        }
        let r = IntervalRule::gauss(n, a, a + hi * (b - a));
        points.extend(r.points);
        weights.extend(r.weights);
        IntervalRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A quadrature rule on a triangle, with points in physical coordinates and
/// weights that sum to the triangle's area.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadratureRule {
    /// Collapsed-coordinate (Duffy) Gauss rule on the reference triangle
    /// (0,0), (1,0), (0,1), exact for total degree `degree`.
    pub fn reference_triangle(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (i, &xu) in x.iter().enumerate() {
            let u = 0.5 * (xu + 1.0);
            for (j, &xw) in x.iter().enumerate() {
                let s = 0.5 * (xw + 1.0);
                points.push(Point2::new(u, s * (1.0 - u)));
                weights.push(0.25 * w[i] * w[j] * (1.0 - u));
            }
        }
        QuadratureRule {
            points,
            weights,
            exactness: degree,
        }
    }

    /// The reference rule pushed forward to the triangle `(a, b, c)`.
    pub fn on_triangle(degree: usize, a: Point2, b: Point2, c: Point2) -> Self {
        let reference = Self::reference_triangle(degree);
        reference.mapped(a, b, c)
    }

    /// Maps a rule given on the reference triangle to `(a, b, c)`.
    pub fn mapped(&self, a: Point2, b: Point2, c: Point2) -> Self {
        let det = ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2)).abs();
        let points = self
            .points
            .iter()
            .map(|p| {
                Point2::new(
                    a.x1 + (b.x1 - a.x1) * p.x1 + (c.x1 - a.x1) * p.x2,
                    a.x2 + (b.x2 - a.x2) * p.x1 + (c.x2 - a.x2) * p.x2,
                )
            })
            .collect();
        let weights = self.weights.iter().map(|w| w * det).collect();
        QuadratureRule {
            points,
            weights,
            exactness: self.exactness,
        }
    }

    /// Composite rule on `(a, b, c)` refined `depth` times towards vertex `a`
    /// by 4-fold uniform subdivision of the sub-triangle touching `a`.
    pub fn graded_towards_vertex(
        degree: usize,
        a: Point2,
        b: Point2,
        c: Point2,
        depth: usize,
    ) -> Self {
        let reference = Self::reference_triangle(degree);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let (mut b, mut c) = (b, c);
        for _ in 0..depth {
            let ab = a.midpoint(b);
            let ac = a.midpoint(c);
            let bc = b.midpoint(c);
            for (p, q, r) in [(ab, b, bc), (ac, bc, c), (ab, bc, ac)] {
                let sub = reference.mapped(p, q, r);
                points.extend(sub.points);
                weights.extend(sub.weights);
            }
            b = ab;
            c = ac;
        }
        let sub = reference.mapped(a, b, c);
        points.extend(sub.points);
        weights.extend(sub.weights);
        QuadratureRule {
            points,
            weights,
            exactness: degree,
        }
    }

    /// Composite rule on `(a, b, c)` after `levels` rounds of 4-fold uniform
    /// subdivision.
    pub fn subdivided(degree: usize, a: Point2, b: Point2, c: Point2, levels: usize) -> Self {
        let reference = Self::reference_triangle(degree);
        let mut tris = vec![(a, b, c)];
        for _ in 0..levels {
            tris = tris
                .into_iter()
                .flat_map(|(a, b, c)| {
                    let (ab, bc, ca) = (a.midpoint(b), b.midpoint(c), c.midpoint(a));
                    [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
                })
                .collect();
        }
        let mut points = Vec::with_capacity(tris.len() * reference.len());
        let mut weights = Vec::with_capacity(tris.len() * reference.len());
        for (p, q, r) in tris {
            let sub = reference.mapped(p, q, r);
            points.extend(sub.points);
            weights.extend(sub.weights);
        }
        QuadratureRule {
            points,
            weights,
            exactness: degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(Point2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 0 {
                    2.0 / (k as f64 + 1.0)
                } else {
                    0.0
                };
                assert!((approx - exact).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_rule_exact_on_monomials() {
        // Closed form: int_T x^a y^b = a! b! / (a + b + 2)!
        for q in 0..=14 {
            let rule = QuadratureRule::reference_triangle(q);
            for a in 0..=q {
                for b in 0..=(q - a) {
                    let approx = rule.integrate(|p| p.x1.powi(a as i32) * p.x2.powi(b as i32));
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!(
                        ((approx - exact) / exact).abs() < 1e-13,
                        "q={q} a={a} b={b}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn graded_rule_preserves_area_and_polynomials() {
        let (a, b, c) = (
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 1.0),
        );
        let rule = QuadratureRule::graded_towards_vertex(4, a, b, c, 5);
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        let plain = QuadratureRule::on_triangle(4, a, b, c);
        let f = |p: Point2| p.x1 * p.x1 * p.x2 + p.x2.powi(3);
        assert!((rule.integrate(f) - plain.integrate(f)).abs() < 1e-14);
    }

    #[test]
    fn graded_interval_rule_handles_weak_singularity() {
        let rule = IntervalRule::graded_towards_start(6, 0.0, 1.0, 40);
        let approx: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powf(-1.0 / 3.0))
            .sum();
        assert!((approx - 1.5).abs() < 1e-5);
    }
}
