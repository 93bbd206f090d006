//! Modal bases on triangles and intervals, quadrature, local L² projection
//! and the one-dimensional inverse-inequality constants.

mod legendre;
mod quadrature;
mod triangle;

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use legendre::LegendreBasis1D;
pub use quadrature::{gauss_legendre, legendre_and_derivative, IntervalRule, QuadratureRule};
pub use triangle::{dim_p, AffineTriangle, ElementBasis, TriangleBasis2D};

use crate::mesh2d::Point2;

/// Triangle-rule exactness used for element integrals with spatial degree `p`.
pub fn triangle_rule_degree(p_max: usize) -> usize {
    2 * p_max + 4
}

/// Number of Gauss points in time for temporal degree `p_t`.
pub fn time_rule_points(pt_max: usize) -> usize {
    pt_max + 3
}

/// L² projection onto `P^{p_x}(K_x) ⊗ P^{p_t}(I)` of a space–time element.
///
/// Coefficients are returned spatial-major: index `i * (p_t + 1) + a`.
#[derive(Debug, Clone)]
pub struct LocalProjector {
    pub basis: TriangleBasis2D,
    pub p_t: usize,
    rule_degree: usize,
    time_points: usize,
}

impl LocalProjector {
    pub fn new(p_x: usize, p_t: usize) -> Self {
        LocalProjector {
            basis: TriangleBasis2D::new(p_x),
            p_t,
            rule_degree: triangle_rule_degree(p_x) + 2,
            time_points: time_rule_points(p_t) + 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim() * (self.p_t + 1)
    }

    pub fn project(
        &self,
        f: impl Fn(Point2, f64) -> f64,
        tri: &AffineTriangle,
        interval: (f64, f64),
    ) -> Vec<f64> {
        let [a, b, c] = tri.vertices;
        let rule = QuadratureRule::on_triangle(self.rule_degree, a, b, c);
        self.project_with_rule(f, tri, interval, &rule)
    }

    pub fn project_with_rule(
        &self,
        f: impl Fn(Point2, f64) -> f64,
        tri: &AffineTriangle,
        interval: (f64, f64),
        rule: &QuadratureRule,
    ) -> Vec<f64> {
        let nx = self.basis.dim();
        let nt = self.p_t + 1;
        let eb = ElementBasis::new(&self.basis, tri);
        let time = IntervalRule::gauss(self.time_points, interval.0, interval.1);
        let leg = LegendreBasis1D::new(self.p_t, interval.0, interval.1);
        let psi: Vec<Vec<f64>> = time.points.iter().map(|&t| leg.values(t)).collect();
        let mut coef = vec![0.0; nx * nt];
        let mut phi = vec![0.0; nx];
        for (x, wx) in rule.points.iter().zip(&rule.weights) {
            eb.values(*x, &mut phi);
            for ((t, wt), ps) in time.points.iter().zip(&time.weights).zip(&psi) {
                let fw = f(*x, *t) * wx * wt;
                for i in 0..nx {
                    for a in 0..nt {
                        coef[i * nt + a] += fw * phi[i] * ps[a];
                    }
                }
            }
        }
        coef
    }

    /// Evaluates a projected expansion at `(x, t)`.
    pub fn evaluate(
        &self,
        coef: &[f64],
        tri: &AffineTriangle,
        interval: (f64, f64),
        x: Point2,
        t: f64,
    ) -> f64 {
        let nx = self.basis.dim();
        let nt = self.p_t + 1;
        let mut phi = vec![0.0; nx];
        ElementBasis::new(&self.basis, tri).values(x, &mut phi);
        let psi = LegendreBasis1D::new(self.p_t, interval.0, interval.1).values(t);
        let mut s = 0.0;
        for i in 0..nx {
            for a in 0..nt {
                s += coef[i * nt + a] * phi[i] * psi[a];
            }
        }
        s
    }
}

/// Maximal observed inverse-inequality ratios on segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseConstants {
    /// max of `h^{1/2} ||P||_{L2} / ||P||_{L1}`
    pub c_2_1: f64,
    /// max of `h^{1/2} ||P||_{L∞} / ||P||_{L2}`
    pub c_inf_2: f64,
}

/// Ratios `(h^{1/2}‖P‖₂/‖P‖₁, h^{1/2}‖P‖∞/‖P‖₂)` for the polynomial with
/// orthonormal-Legendre coefficients `coef` on the segment `(a, b)`.
pub fn inverse_ratios(coef: &[f64], a: f64, b: f64) -> (f64, f64) {
    let p = coef.len() - 1;
    let basis = LegendreBasis1D::new(p, a, b);
    let eval = |t: f64| -> f64 { basis.values(t).iter().zip(coef).map(|(v, c)| v * c).sum() };
    let deriv = |t: f64| -> f64 {
        basis
            .values_and_derivatives(t)
            .1
            .iter()
            .zip(coef)
            .map(|(v, c)| v * c)
            .sum()
    };
    let h = b - a;
    let l2 = coef.iter().map(|c| c * c).sum::<f64>().sqrt();

    let samples = 512;
    let grid: Vec<f64> = (0..=samples)
        .map(|k| a + h * k as f64 / samples as f64)
        .collect();
    let roots_of = |g: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut roots = Vec::new();
        for w in grid.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (mut glo, ghi) = (g(lo), g(hi));
            if glo == 0.0 {
                roots.push(lo);
                continue;
            }
            if glo * ghi < 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid);
                    if gm * glo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                    if hi - lo < 1e-15 * h {
                        break;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        roots
    };

    // L1: integrate |P| exactly between consecutive sign changes.
    let mut breaks = vec![a];
    breaks.extend(roots_of(&eval).into_iter().filter(|&r| r > a && r < b));
    breaks.push(b);
    let mut l1 = 0.0;
    for w in breaks.windows(2) {
        let rule = IntervalRule::gauss(p + 1, w[0], w[1]);
        let piece: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(t, wt)| wt * eval(*t))
            .sum();
        l1 += piece.abs();
    }

    // L∞: endpoints and critical points.
    let mut linf = eval(a).abs().max(eval(b).abs());
    if p >= 2 {
        for r in roots_of(&deriv) {
            linf = linf.max(eval(r).abs());
        }
    }
    let sh = h.sqrt();
    (sh * l2 / l1, sh * linf / l2)
}

/// Samples random polynomials of degree `p` on random segments and returns the
/// largest observed inverse-inequality ratios.
pub fn inverse_constants_check(p: usize, trials: usize, seed: u64) -> InverseConstants {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InverseConstants {
        c_2_1: 0.0,
        c_inf_2: 0.0,
    };
    for _ in 0..trials {
        let a: f64 = rng.gen_range(-5.0..5.0);
        let h: f64 = 10f64.powf(rng.gen_range(-3.0..1.0));
        let coef: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if coef.iter().all(|c| c.abs() < 1e-12) {
            continue;
        }
        let (r21, rinf) = inverse_ratios(&coef, a, a + h);
        out.c_2_1 = out.c_2_1.max(r21);
        out.c_inf_2 = out.c_inf_2.max(rinf);
    }
    out
}
