#[allow(unused_imports)]
use num_traits::Float;

use super::{DiscreteField, Discretization};
use crate::basis_quad::{triangle_rule_degree, IntervalRule, QuadratureRule};
use crate::mesh2d::{BoundaryTag, Point2};
use crate::spacetime::EdgeKind;
use crate::{Error, Result};

/// Which of the two equivalent expressions of the DG bilinear form to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearForm {
    /// Derivatives on the test functions, upwind and central fluxes on faces.
    Primal,
    /// Derivatives on the trial functions, jumps of the trial functions on faces.
    IntegratedByParts,
}

/// Values and first derivatives of `(v, σ1, σ2)` at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldJet {
    pub val: [f64; 3],
    pub dx1: [f64; 3],
    pub dx2: [f64; 3],
    pub dt: [f64; 3],
}

impl Discretization<'_> {
    /// Values and derivatives of `field` restricted to triangle `k`, slab `slab`.
    pub fn jet(&self, field: &DiscreteField, k: usize, slab: usize, x: Point2, t: f64) -> FieldJet {
        let n = self.basis.dim();
        let mut vals = [0.0; 64];
        let mut d1 = [0.0; 64];
        let mut d2 = [0.0; 64];
        self.element_basis(k)
            .values_and_gradients(x, &mut vals[..n], &mut d1[..n], &mut d2[..n]);
        let (psi, dpsi) = self.time_basis(slab).values_and_derivatives(t);
        let block = field.block(slab, k);
        FieldJet {
            val: self.combine(block, &vals[..n], &psi),
            dx1: self.combine(block, &d1[..n], &psi),
            dx2: self.combine(block, &d2[..n], &psi),
            dt: self.combine(block, &vals[..n], &dpsi),
        }
    }
}

fn check_shape(disc: &Discretization<'_>, f: &DiscreteField) -> Result<()> {
    if f.degrees != disc.degrees || f.n_spatial != disc.n_spatial() || f.n_slabs() != disc.n_slabs()
    {
        return Err(Error::ShapeMismatch(alloc::format!(
            "field with {} triangles × {} slabs, discretization with {} × {}",
            f.n_spatial,
            f.n_slabs(),
            disc.n_spatial(),
            disc.n_slabs()
        )));
    }
    let len = disc.layout.block() * disc.n_spatial();
    if f.slabs.iter().any(|s| s.len() != len) {
        return Err(Error::ShapeMismatch("coefficient vector length".into()));
    }
    Ok(())
}

fn dot2(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[1] * b[1] + a[2] * b[2]
}

/// Value of the DG bilinear form `A(trial; test)` by direct quadrature.
pub fn apply_bilinear(
    disc: &Discretization<'_>,
    form: BilinearForm,
    trial: &DiscreteField,
    test: &DiscreteField,
) -> Result<f64> {
    check_shape(disc, trial)?;
    check_shape(disc, test)?;
    let nx = disc.n_spatial();
    let ns = disc.n_slabs();
    let pmax = disc.degrees.px_max();
    let qdeg = triangle_rule_degree(pmax);
    let primal = form == BilinearForm::Primal;
    let mut total = 0.0;

    // Element volumes.
    for slab in 0..ns {
        let tr = disc.time_rule(slab);
        for k in 0..nx {
            let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
            let [a, b, c] = disc.maps[k].vertices;
            let rule = QuadratureRule::on_triangle(qdeg, a, b, c);
            for (x, wx) in rule.points.iter().zip(&rule.weights) {
                for (t, wt) in tr.points.iter().zip(&tr.weights) {
                    let u = disc.jet(trial, k, slab, *x, *t);
                    let z = disc.jet(test, k, slab, *x, *t);
                    let val = if primal {
                        -(u.val[0] * (z.dx1[1] + z.dx2[2] + c2inv * z.dt[0])
                            + u.val[1] * (z.dx1[0] + z.dt[1])
                            + u.val[2] * (z.dx2[0] + z.dt[2]))
                    } else {
                        (u.dx1[1] + u.dx2[2] + c2inv * u.dt[0]) * z.val[0]
                            + (u.dx1[0] + u.dt[1]) * z.val[1]
                            + (u.dx2[0] + u.dt[2]) * z.val[2]
                    };
                    total += wx * wt * val;
                }
            }
        }
    }

    // Space-like faces, including t = 0 and t = T.
    for k in 0..nx {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let [a, b, c] = disc.maps[k].vertices;
        let rule = QuadratureRule::on_triangle(qdeg, a, b, c);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            for n in 0..=ns {
                let t = disc.mesh.temporal.breakpoints()[n];
                // `lower` is the trace from slab n - 1, `upper` from slab n.
                let lower = (n > 0).then(|| {
                    (
                        disc.evaluate(trial, k, n - 1, *x, t),
                        disc.evaluate(test, k, n - 1, *x, t),
                    )
                });
                let upper = (n < ns).then(|| {
                    (
                        disc.evaluate(trial, k, n, *x, t),
                        disc.evaluate(test, k, n, *x, t),
                    )
                });
                let val = match (lower, upper, primal) {
                    (Some((u, z)), Some((_, z2)), true) => {
                        c2inv * u[0] * (z[0] - z2[0])
                            + u[1] * (z[1] - z2[1])
                            + u[2] * (z[2] - z2[2])
                    }
                    (Some((u, _)), Some((u2, z2)), false) => {
                        -(c2inv * (u[0] - u2[0]) * z2[0]
                            + (u[1] - u2[1]) * z2[1]
                            + (u[2] - u2[2]) * z2[2])
                    }
                    (Some((u, z)), None, true) | (None, Some((u, z)), false) => {
                        c2inv * u[0] * z[0] + dot2(u, z)
                    }
                    _ => 0.0,
                };
                total += w * val;
            }
        }
    }

    // Time-like and boundary faces.
    let edge = IntervalRule::gauss(pmax + 2, 0.0, 1.0);
    for (f, face) in disc.mesh.spatial_faces.iter().enumerate() {
        let nrm = face.normal;
        let alpha = disc.flux.alpha[f];
        let beta = disc.flux.beta[f];
        let un = |u: [f64; 3]| u[1] * nrm[0] + u[2] * nrm[1];
        for slab in 0..ns {
            let tr = disc.time_rule(slab);
            for (s, ws) in edge.points.iter().zip(&edge.weights) {
                let x = face.point(*s);
                for (t, wt) in tr.points.iter().zip(&tr.weights) {
                    let w = ws * face.length * wt;
                    let val = match face.kind {
                        EdgeKind::Interior { minus, plus } => {
                            let (u1, z1) = (
                                disc.evaluate(trial, minus, slab, x, *t),
                                disc.evaluate(test, minus, slab, x, *t),
                            );
                            let (u2, z2) = (
                                disc.evaluate(trial, plus, slab, x, *t),
                                disc.evaluate(test, plus, slab, x, *t),
                            );
                            // Normal jumps along `nrm`: [v]_N = (v1 - v2) n, [σ]_N = (σ1 - σ2)·n.
                            let (jv, jw) = (u1[0] - u2[0], z1[0] - z2[0]);
                            let (js, jt) = (un(u1) - un(u2), un(z1) - un(z2));
                            let penalty = alpha * jv * jw + beta * js * jt;
                            if primal {
                                0.5 * (u1[0] + u2[0]) * jt + 0.5 * (un(u1) + un(u2)) * jw + penalty
                            } else {
                                -jv * 0.5 * (un(z1) + un(z2)) - js * 0.5 * (z1[0] + z2[0]) + penalty
                            }
                        }
                        EdgeKind::Boundary { element, tag } => {
                            let u = disc.evaluate(trial, element, slab, x, *t);
                            let z = disc.evaluate(test, element, slab, x, *t);
                            match (tag, primal) {
                                (BoundaryTag::Dirichlet, true) => {
                                    un(u) * z[0] + alpha * u[0] * z[0]
                                }
                                (BoundaryTag::Dirichlet, false) => {
                                    -u[0] * un(z) + alpha * u[0] * z[0]
                                }
                                (BoundaryTag::Neumann, true) => u[0] * un(z) + beta * un(u) * un(z),
                                (BoundaryTag::Neumann, false) => {
                                    -un(u) * z[0] + beta * un(u) * un(z)
                                }
                            }
                        }
                    };
                    total += w * val;
                }
            }
        }
    }
    Ok(total)
}

/// `A(trial; test)` through the assembled slab matrices: the block lower
/// bidiagonal global matrix applied to `trial`, tested with `test`.
pub fn apply_bilinear_matrix(
    disc: &Discretization<'_>,
    trial: &DiscreteField,
    test: &DiscreteField,
) -> Result<f64> {
    check_shape(disc, trial)?;
    check_shape(disc, test)?;
    let l = disc.layout;
    let nx = disc.n_spatial();
    let mut total = 0.0;
    for slab in 0..disc.n_slabs() {
        let a = super::assemble::slab_matrix(disc, slab);
        let y = a.mul_vec(&trial.slabs[slab]);
        total += y
            .iter()
            .zip(&test.slabs[slab])
            .map(|(a, b)| a * b)
            .sum::<f64>();
        if slab > 0 {
            // Coupling to the previous slab: -∫ (c⁻² v⁻ w⁺ + σ⁻·τ⁺) at the interface.
            let prev = super::assemble::Trace::from_slab(disc, trial, slab - 1);
            let bot = disc.time_basis(slab).bottom();
            let z = &test.slabs[slab];
            for k in 0..nx {
                let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
                let base = k * l.block();
                for a in 0..l.nt {
                    for i in 0..l.nv {
                        total -= c2inv * prev.v[k * l.nv + i] * bot[a] * z[base + l.v(i, a)];
                    }
                    for d in 0..2 {
                        for i in 0..l.ns {
                            total -=
                                prev.sigma[d][k * l.ns + i] * bot[a] * z[base + l.sigma(d, i, a)];
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}
