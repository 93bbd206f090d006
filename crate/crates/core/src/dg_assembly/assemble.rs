use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{DiscreteField, Discretization, ProblemData};
use crate::basis_quad::{triangle_rule_degree, IntervalRule, QuadratureRule};
use crate::mesh2d::{BoundaryTag, Point2};
use crate::solver::{BlockLu, BlockSparseMatrix};
use crate::spacetime::EdgeKind;
use crate::{Error, Result};

/// Spatial coefficients of `(v, σ1, σ2)` on every triangle at a slab
/// interface; `v` has `nv` entries per triangle, `σ_d` has `ns`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub v: Vec<f64>,
    pub sigma: [Vec<f64>; 2],
}

impl Trace {
    /// L² projection of the initial data onto the spatial basis.
    pub fn initial(disc: &Discretization<'_>, problem: &dyn ProblemData) -> Self {
        let l = disc.layout;
        let nx = disc.n_spatial();
        let mut v = vec![0.0; nx * l.nv];
        let mut s1 = vec![0.0; nx * l.ns];
        let mut s2 = vec![0.0; nx * l.ns];
        let mut phi = vec![0.0; disc.basis.dim()];
        let local = problem.localized_initial_data();
        for k in 0..nx {
            let eb = disc.element_basis(k);
            let fine = local.and_then(|(centre, scale)| localized_rule(disc, k, centre, scale));
            let rule = fine.as_ref().unwrap_or(&disc.element_rules[k]);
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                eb.values(*x, &mut phi);
                let v0 = problem.v0(*x);
                let s0 = problem.sigma0(*x);
                for i in 0..l.nv {
                    v[k * l.nv + i] += w * v0 * phi[i];
                }
                for i in 0..l.ns {
                    s1[k * l.ns + i] += w * s0[0] * phi[i];
                    s2[k * l.ns + i] += w * s0[1] * phi[i];
                }
            }
        }
        Trace { v, sigma: [s1, s2] }
    }

    /// Trace of the slab-`slab` solution at the top of that slab.
    pub fn from_slab(disc: &Discretization<'_>, field: &DiscreteField, slab: usize) -> Self {
        let l = disc.layout;
        let nx = disc.n_spatial();
        let mut out = Trace {
            v: Vec::with_capacity(nx * l.nv),
            sigma: [Vec::with_capacity(nx * l.ns), Vec::with_capacity(nx * l.ns)],
        };
        for k in 0..nx {
            let [v, s1, s2] = disc.trace_coefficients(field, k, slab, true);
            out.v.extend(v);
            out.sigma[0].extend(s1);
            out.sigma[1].extend(s2);
        }
        out
    }
}

/// Number of length scales beyond which localized data is negligible.
const LOCALIZED_CUTOFF: f64 = 8.0;

fn localized_rule(
    disc: &Discretization<'_>,
    k: usize,
    centre: Point2,
    scale: f64,
) -> Option<QuadratureRule> {
    let spatial = &disc.mesh.spatial;
    let diam = spatial.diameter(k);
    if spatial.distance_to(k, centre) > LOCALIZED_CUTOFF * scale || diam <= scale {
        return None;
    }
    let levels = (diam / scale).log2().ceil() as usize;
    let [a, b, c] = disc.maps[k].vertices;
    Some(QuadratureRule::subdivided(
        triangle_rule_degree(disc.degrees.px_max()),
        a,
        b,
        c,
        levels,
    ))
}

/// Matrix and right-hand side of one time slab.
#[derive(Debug, Clone)]
pub struct SlabSystem {
    pub matrix: BlockSparseMatrix,
    pub rhs: Vec<f64>,
}

impl SlabSystem {
    pub fn solve(&self) -> Result<Vec<f64>> {
        Ok(BlockLu::factor(&self.matrix)?.solve(&self.rhs))
    }
}

/// Assembles the system of slab `slab` with upwind data `upwind` at its
/// bottom.
pub fn assemble_slab(
    disc: &Discretization<'_>,
    slab: usize,
    upwind: &Trace,
    problem: &dyn ProblemData,
) -> Result<SlabSystem> {
    if slab >= disc.n_slabs() {
        return Err(Error::param(alloc::format!("slab {slab} out of range")));
    }
    Ok(SlabSystem {
        matrix: slab_matrix(disc, slab),
        rhs: slab_rhs(disc, slab, upwind, problem),
    })
}

/// Face mass matrices `M^{pq}_{ij} = ∫_F φ^{K_p}_i φ^{K_q}_j` in the full
/// spatial basis, for the one or two triangles adjacent to spatial face `f`.
fn face_mass(disc: &Discretization<'_>, f: usize) -> Vec<Vec<f64>> {
    let face = &disc.mesh.spatial_faces[f];
    let (minus, plus) = face.elements();
    let elems: Vec<usize> = core::iter::once(minus).chain(plus).collect();
    let n = disc.basis.dim();
    let rule = IntervalRule::gauss(disc.degrees.px_max() + 2, 0.0, 1.0);
    let mut mats = vec![vec![0.0; n * n]; elems.len() * elems.len()];
    let mut phis = vec![vec![0.0; n]; elems.len()];
    for (s, w) in rule.points.iter().zip(&rule.weights) {
        let x = face.point(*s);
        let w = w * face.length;
        for (p, &k) in elems.iter().enumerate() {
            disc.element_basis(k).values(x, &mut phis[p]);
        }
        for p in 0..elems.len() {
            for q in 0..elems.len() {
                let m = &mut mats[p * elems.len() + q];
                for i in 0..n {
                    let wi = w * phis[p][i];
                    for j in 0..n {
                        m[i * n + j] += wi * phis[q][j];
                    }
                }
            }
        }
    }
    mats
}

pub(crate) fn slab_pattern(disc: &Discretization<'_>) -> Vec<(usize, usize)> {
    disc.mesh
        .spatial_faces
        .iter()
        .filter_map(|f| match f.kind {
            EdgeKind::Interior { minus, plus } => Some((minus, plus)),
            EdgeKind::Boundary { .. } => None,
        })
        .collect()
}

/// The slab matrix; it depends on the slab only through its length.
pub fn slab_matrix(disc: &Discretization<'_>, slab: usize) -> BlockSparseMatrix {
    let l = disc.layout;
    let nx = disc.n_spatial();
    let nt = l.nt;
    let mut a = BlockSparseMatrix::new(nx, l.block(), &slab_pattern(disc));
    let tb = disc.time_basis(slab);
    let dmat = tb.derivative_matrix();
    let top = tb.top();
    let n = disc.basis.dim();
    let qdeg = triangle_rule_degree(disc.degrees.px_max());
    let (mut vals, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    for k in 0..nx {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let [p0, p1, p2] = disc.maps[k].vertices;
        let rule = QuadratureRule::on_triangle(qdeg, p0, p1, p2);
        let eb = disc.element_basis(k);
        // grad[d][i * n + j] = ∫ φ_j ∂_d φ_i
        let mut grad = [vec![0.0; n * n], vec![0.0; n * n]];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            eb.values_and_gradients(*x, &mut vals, &mut d1, &mut d2);
            for i in 0..n {
                for j in 0..n {
                    grad[0][i * n + j] += w * vals[j] * d1[i];
                    grad[1][i * n + j] += w * vals[j] * d2[i];
                }
            }
        }
        let blk = a.block_mut(k, k);
        let bs = l.block();
        for a_ in 0..nt {
            for b in 0..nt {
                let t = -dmat[b * nt + a_] + top[a_] * top[b];
                for i in 0..l.nv {
                    blk[l.v(i, a_) * bs + l.v(i, b)] += c2inv * t;
                }
                for d in 0..2 {
                    for i in 0..l.ns {
                        blk[l.sigma(d, i, a_) * bs + l.sigma(d, i, b)] += t;
                    }
                }
            }
            for d in 0..2 {
                for i in 0..l.nv {
                    for j in 0..l.ns {
                        blk[l.v(i, a_) * bs + l.sigma(d, j, a_)] -= grad[d][i * n + j];
                    }
                }
                for i in 0..l.ns {
                    for j in 0..l.nv {
                        blk[l.sigma(d, i, a_) * bs + l.v(j, a_)] -= grad[d][i * n + j];
                    }
                }
            }
        }
    }

    for (f, face) in disc.mesh.spatial_faces.iter().enumerate() {
        let mats = face_mass(disc, f);
        let nrm = face.normal;
        let alpha = disc.flux.alpha[f];
        let beta = disc.flux.beta[f];
        match face.kind {
            EdgeKind::Interior { minus, plus } => {
                let elems = [minus, plus];
                let sign = [1.0, -1.0];
                for p in 0..2 {
                    for q in 0..2 {
                        let m = &mats[p * 2 + q];
                        let (sp, sq) = (sign[p], sign[q]);
                        let blk = a.block_mut(elems[p], elems[q]);
                        add_face_block(blk, &l, n, m, |ctx| match ctx {
                            Coupling::TauV(d) => 0.5 * sp * nrm[d],
                            Coupling::WSigma(e) => 0.5 * sp * nrm[e],
                            Coupling::WV => alpha * sp * sq,
                            Coupling::TauSigma(d, e) => beta * sp * sq * nrm[d] * nrm[e],
                        });
                    }
                }
            }
            EdgeKind::Boundary { element, tag } => {
                let blk = a.block_mut(element, element);
                let m = &mats[0];
                match tag {
                    BoundaryTag::Dirichlet => add_face_block(blk, &l, n, m, |ctx| match ctx {
                        Coupling::WSigma(e) => nrm[e],
                        Coupling::WV => alpha,
                        _ => 0.0,
                    }),
                    BoundaryTag::Neumann => add_face_block(blk, &l, n, m, |ctx| match ctx {
                        Coupling::TauV(d) => nrm[d],
                        Coupling::TauSigma(d, e) => beta * nrm[d] * nrm[e],
                        _ => 0.0,
                    }),
                }
            }
        }
    }
    a
}

#[derive(Clone, Copy)]
enum Coupling {
    /// Test `τ_d`, trial `v`.
    TauV(usize),
    /// Test `w`, trial `σ_e`.
    WSigma(usize),
    WV,
    TauSigma(usize, usize),
}

fn add_face_block(
    blk: &mut [f64],
    l: &super::Layout,
    n: usize,
    m: &[f64],
    coef: impl Fn(Coupling) -> f64,
) {
    let bs = l.block();
    for a in 0..l.nt {
        let c = coef(Coupling::WV);
        if c != 0.0 {
            for i in 0..l.nv {
                for j in 0..l.nv {
                    blk[l.v(i, a) * bs + l.v(j, a)] += c * m[i * n + j];
                }
            }
        }
        for d in 0..2 {
            let c = coef(Coupling::TauV(d));
            if c != 0.0 {
                for i in 0..l.ns {
                    for j in 0..l.nv {
                        blk[l.sigma(d, i, a) * bs + l.v(j, a)] += c * m[i * n + j];
                    }
                }
            }
            let c = coef(Coupling::WSigma(d));
            if c != 0.0 {
                for i in 0..l.nv {
                    for j in 0..l.ns {
                        blk[l.v(i, a) * bs + l.sigma(d, j, a)] += c * m[i * n + j];
                    }
                }
            }
            for e in 0..2 {
                let c = coef(Coupling::TauSigma(d, e));
                if c != 0.0 {
                    for i in 0..l.ns {
                        for j in 0..l.ns {
                            blk[l.sigma(d, i, a) * bs + l.sigma(e, j, a)] += c * m[i * n + j];
                        }
                    }
                }
            }
        }
    }
}

/// Right-hand side of slab `slab`: source, upwind data and boundary data.
pub fn slab_rhs(
    disc: &Discretization<'_>,
    slab: usize,
    upwind: &Trace,
    problem: &dyn ProblemData,
) -> Vec<f64> {
    let l = disc.layout;
    let nx = disc.n_spatial();
    let bs = l.block();
    let mut rhs = vec![0.0; nx * bs];
    let tb = disc.time_basis(slab);
    let bot = tb.bottom();
    let tr = disc.time_rule(slab);
    let psis: Vec<Vec<f64>> = tr.points.iter().map(|&t| tb.values(t)).collect();
    let n = disc.basis.dim();
    let mut phi = vec![0.0; n];

    for k in 0..nx {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let r = &mut rhs[k * bs..(k + 1) * bs];
        for a in 0..l.nt {
            for i in 0..l.nv {
                r[l.v(i, a)] += c2inv * bot[a] * upwind.v[k * l.nv + i];
            }
            for d in 0..2 {
                for i in 0..l.ns {
                    r[l.sigma(d, i, a)] += bot[a] * upwind.sigma[d][k * l.ns + i];
                }
            }
        }
        let eb = disc.element_basis(k);
        let rule = &disc.element_rules[k];
        for (x, wx) in rule.points.iter().zip(&rule.weights) {
            eb.values(*x, &mut phi);
            for ((t, wt), psi) in tr.points.iter().zip(&tr.weights).zip(&psis) {
                let f = problem.source(*x, *t) * wx * wt;
                if f == 0.0 {
                    continue;
                }
                for a in 0..l.nt {
                    for i in 0..l.nv {
                        r[l.v(i, a)] += f * phi[i] * psi[a];
                    }
                }
            }
        }
    }

    for (f, face) in disc.mesh.spatial_faces.iter().enumerate() {
        let EdgeKind::Boundary { element: k, tag } = face.kind else {
            continue;
        };
        let nrm = face.normal;
        let alpha = disc.flux.alpha[f];
        let beta = disc.flux.beta[f];
        let eb = disc.element_basis(k);
        let rule = &disc.face_rules[f];
        let r = &mut rhs[k * bs..(k + 1) * bs];
        for (s, ws) in rule.points.iter().zip(&rule.weights) {
            let x = face.point(*s);
            eb.values(x, &mut phi);
            for ((t, wt), psi) in tr.points.iter().zip(&tr.weights).zip(&psis) {
                let w = ws * face.length * wt;
                // (coefficient of w, coefficient of τ·n)
                let (cw, ctau) = match tag {
                    BoundaryTag::Dirichlet => {
                        let g = problem.dirichlet(x, *t) * w;
                        (alpha * g, -g)
                    }
                    BoundaryTag::Neumann => {
                        let g = problem.neumann(x, *t, nrm) * w;
                        (-g, beta * g)
                    }
                };
                if cw == 0.0 && ctau == 0.0 {
                    continue;
                }
                for a in 0..l.nt {
                    for i in 0..l.nv {
                        r[l.v(i, a)] += cw * phi[i] * psi[a];
                    }
                    for d in 0..2 {
                        for i in 0..l.ns {
                            r[l.sigma(d, i, a)] += ctau * nrm[d] * phi[i] * psi[a];
                        }
                    }
                }
            }
        }
    }
    rhs
}

/// Solves all slabs in order, passing the top trace of each slab forward as
/// upwind data. The factorization is reused while the step length repeats.
pub fn march(disc: &Discretization<'_>, problem: &dyn ProblemData) -> Result<DiscreteField> {
    let mut field = disc.zero_field();
    let mut trace = Trace::initial(disc, problem);
    let mut cached: Option<(f64, BlockLu)> = None;
    for slab in 0..disc.n_slabs() {
        let step = disc.mesh.temporal.step(slab);
        let reuse = cached
            .as_ref()
            .is_some_and(|(h, _)| (h - step).abs() <= 1e-12 * step);
        if !reuse {
            let lu = BlockLu::factor(&slab_matrix(disc, slab)).map_err(|e| Error::Slab {
                slab,
                source: Box::new(e),
            })?;
            cached = Some((step, lu));
        }
        let (_, lu) = cached.as_ref().expect("factorization present");
        let rhs = slab_rhs(disc, slab, &trace, problem);
        field.slabs[slab] = lu.solve(&rhs);
        trace = Trace::from_slab(disc, &field, slab);
    }
    Ok(field)
}
