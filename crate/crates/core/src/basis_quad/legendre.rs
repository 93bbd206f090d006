use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::quadrature::{gauss_legendre, legendre_and_derivative};

/// L²-orthonormal Legendre basis `sqrt(2/(b-a)) * sqrt(j + 1/2) * P_j` on an
/// interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreBasis1D {
    pub degree: usize,
    pub a: f64,
    pub b: f64,
}

impl LegendreBasis1D {
    pub fn new(degree: usize, a: f64, b: f64) -> Self {
        debug_assert!(b > a);
        LegendreBasis1D { degree, a, b }
    }

    pub fn reference(degree: usize) -> Self {
        Self::new(degree, -1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    fn scale(&self) -> f64 {
        (2.0 / (self.b - self.a)).sqrt()
    }

    fn to_reference(&self, t: f64) -> f64 {
        2.0 * (t - self.a) / (self.b - self.a) - 1.0
    }

    /// Values of all basis functions at `t`.
    pub fn values(&self, t: f64) -> Vec<f64> {
        let s = self.to_reference(t);
        let scale = self.scale();
        (0..=self.degree)
            .map(|j| scale * (j as f64 + 0.5).sqrt() * legendre_and_derivative(j, s).0)
            .collect()
    }

    /// Values and time derivatives of all basis functions at `t`.
    pub fn values_and_derivatives(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let s = self.to_reference(t);
        let scale = self.scale();
        let chain = 2.0 / (self.b - self.a);
        let mut vals = Vec::with_capacity(self.dim());
        let mut ders = Vec::with_capacity(self.dim());
        for j in 0..=self.degree {
            let (p, d) = legendre_and_derivative(j, s);
            let c = scale * (j as f64 + 0.5).sqrt();
            vals.push(c * p);
            ders.push(c * d * chain);
        }
        (vals, ders)
    }

    /// Trace values at the upper end `b`.
    pub fn top(&self) -> Vec<f64> {
        let scale = self.scale();
        (0..=self.degree)
            .map(|j| scale * (j as f64 + 0.5).sqrt())
            .collect()
    }

    /// Trace values at the lower end `a`.
    pub fn bottom(&self) -> Vec<f64> {
        let scale = self.scale();
        (0..=self.degree)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * scale * (j as f64 + 0.5).sqrt()
            })
            .collect()
    }

    /// `D[a][b] = ∫ ψ_a ψ_b' dt`, row-major.
    pub fn derivative_matrix(&self) -> Vec<f64> {
        let n = self.dim();
        let (x, w) = gauss_legendre(n + 1);
        let mut d = vec![0.0; n * n];
        let half = 0.5 * (self.b - self.a);
        for (xi, wi) in x.iter().zip(&w) {
            let t = self.a + half * (xi + 1.0);
            let (vals, ders) = self.values_and_derivatives(t);
            for a in 0..n {
                for b in 0..n {
                    d[a * n + b] += wi * half * vals[a] * ders[b];
                }
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let basis = LegendreBasis1D::reference(3);
        let vals = basis.values(0.3);
        assert!((vals[0] - 0.5f64.sqrt()).abs() < 1e-15);
        let at_one = basis.values(1.0);
        assert!((at_one[2] - 2.5f64.sqrt()).abs() < 1e-14);
        assert!((at_one[2] - 1.58114).abs() < 1e-5);
    }

    #[test]
    fn orthonormal_on_mapped_interval() {
        let basis = LegendreBasis1D::new(4, 0.25, 0.375);
        let (x, w) = gauss_legendre(8);
        let half = 0.5 * (basis.b - basis.a);
        let mut gram = [[0.0; 5]; 5];
        for (xi, wi) in x.iter().zip(&w) {
            let v = basis.values(basis.a + half * (xi + 1.0));
            for a in 0..5 {
                for b in 0..5 {
                    gram[a][b] += wi * half * v[a] * v[b];
                }
            }
        }
        for (a, row) in gram.iter().enumerate() {
            for (b, g) in row.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn traces_match_point_values() {
        let basis = LegendreBasis1D::new(3, 1.0, 1.5);
        let top = basis.top();
        let bottom = basis.bottom();
        for (t, v) in top.iter().zip(basis.values(1.5)) {
            assert!((t - v).abs() < 1e-13);
        }
        for (t, v) in bottom.iter().zip(basis.values(1.0)) {
            assert!((t - v).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matrix_integrates_by_parts() {
        // D + D^T = top top^T - bottom bottom^T
        let basis = LegendreBasis1D::new(3, 0.0, 0.5);
        let d = basis.derivative_matrix();
        let (top, bottom) = (basis.top(), basis.bottom());
        for a in 0..4 {
            for b in 0..4 {
                let lhs = d[a * 4 + b] + d[b * 4 + a];
                let rhs = top[a] * top[b] - bottom[a] * bottom[b];
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }
}
