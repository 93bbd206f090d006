//! Slab-wise assembly and solution of the space–time DG system.

mod assemble;
mod forms;
#[cfg(test)]
mod tests;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis_quad::{
    dim_p, triangle_rule_degree, AffineTriangle, ElementBasis, IntervalRule, LegendreBasis1D,
    QuadratureRule, TriangleBasis2D,
};
use crate::mesh2d::Point2;
use crate::spacetime::{EdgeKind, SpaceTimeMesh};
use crate::{Error, Result};

pub use assemble::{assemble_slab, march, slab_matrix, slab_rhs, SlabSystem, Trace};
pub use forms::{apply_bilinear, apply_bilinear_matrix, BilinearForm, FieldJet};

/// Polynomial degrees of the discrete space, uniform over the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeSpec {
    pub px_v: usize,
    pub pt_v: usize,
    pub px_sigma: usize,
    pub pt_sigma: usize,
}

impl DegreeSpec {
    pub fn new(px_v: usize, pt_v: usize, px_sigma: usize, pt_sigma: usize) -> Self {
        DegreeSpec {
            px_v,
            pt_v,
            px_sigma,
            pt_sigma,
        }
    }

    /// All four degrees equal to `p`.
    pub fn uniform(p: usize) -> Self {
        Self::new(p, p, p, p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pt_sigma != self.pt_v {
            return Err(Error::Validation(format!(
                "temporal degrees differ: p_t^v = {}, p_t^sigma = {}",
                self.pt_v, self.pt_sigma
            )));
        }
        if self.px_v.abs_diff(self.px_sigma) > 1 {
            return Err(Error::Validation(format!(
                "|p_x^sigma - p_x^v| = {} exceeds 1",
                self.px_v.abs_diff(self.px_sigma)
            )));
        }
        if self.px_v.max(self.px_sigma) > 8 {
            return Err(Error::Validation(
                "spatial degree above 8 is not supported".into(),
            ));
        }
        Ok(())
    }

    pub fn px_max(&self) -> usize {
        self.px_v.max(self.px_sigma)
    }

    pub fn nt(&self) -> usize {
        self.pt_v + 1
    }
}

/// Index layout of one element block: `v`, then `σ1`, then `σ2`; inside each
/// field the modal index is `i * (p_t + 1) + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub nv: usize,
    pub ns: usize,
    pub nt: usize,
}

impl Layout {
    pub fn new(degrees: &DegreeSpec) -> Self {
        Layout {
            nv: dim_p(degrees.px_v),
            ns: dim_p(degrees.px_sigma),
            nt: degrees.nt(),
        }
    }

    pub fn block(&self) -> usize {
        (self.nv + 2 * self.ns) * self.nt
    }

    pub fn v(&self, i: usize, a: usize) -> usize {
        i * self.nt + a
    }

    /// Index of `σ_d` (`d` = 0 or 1).
    pub fn sigma(&self, d: usize, i: usize, a: usize) -> usize {
        (self.nv + d * self.ns + i) * self.nt + a
    }
}

/// Choice of the penalty parameters on time-like and boundary faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxMode {
    /// `α = a`, `β = b`.
    Constant { a: f64, b: f64 },
    /// `α = a / h_F`, `β = b · h_F`.
    FaceScaled { a: f64, b: f64 },
    /// `α = c⁻¹ h_x / h_F`, `β = c · h_F / h_x`; at interfaces `c` is the mean
    /// of the two adjacent speeds.
    RefinedScaled { h_x: f64 },
}

/// Penalty parameters per spatial face.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl FluxParams {
    pub fn from_mode(mesh: &SpaceTimeMesh, mode: FluxMode) -> Result<Self> {
        let mut alpha = Vec::with_capacity(mesh.spatial_faces.len());
        let mut beta = Vec::with_capacity(mesh.spatial_faces.len());
        for face in &mesh.spatial_faces {
            let h = face.length;
            let (a, b) = match mode {
                FluxMode::Constant { a, b } => (a, b),
                FluxMode::FaceScaled { a, b } => (a / h, b * h),
                FluxMode::RefinedScaled { h_x } => {
                    let c = match face.kind {
                        EdgeKind::Interior { minus, plus } => {
                            0.5 * (mesh.spatial.speed(minus) + mesh.spatial.speed(plus))
                        }
                        EdgeKind::Boundary { element, .. } => mesh.spatial.speed(element),
                    };
                    (h_x / (c * h), c * h / h_x)
                }
            };
            alpha.push(a);
            beta.push(b);
        }
        let params = FluxParams { alpha, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(x) = self
            .alpha
            .iter()
            .chain(&self.beta)
            .find(|x| !(**x > 0.0 && x.is_finite()))
        {
            return Err(Error::Validation(format!(
                "penalty parameter {x} is not positive"
            )));
        }
        Ok(())
    }
}

/// Data of the initial–boundary value problem. The wave speed comes from the
/// mesh subdomains.
pub trait ProblemData: Sync {
    fn v0(&self, x: Point2) -> f64;
    fn sigma0(&self, x: Point2) -> [f64; 2];
    fn source(&self, x: Point2, t: f64) -> f64;
    fn dirichlet(&self, x: Point2, t: f64) -> f64;
    /// Prescribed `σ · n` for outward normal `n`.
    fn neumann(&self, x: Point2, t: f64, n: [f64; 2]) -> f64;
    /// Exact `(v, σ1, σ2)` when known.
    fn exact(&self, _x: Point2, _t: f64) -> Option<[f64; 3]> {
        None
    }
    /// Points near which the data are singular; elements touching them get
    /// subdivided quadrature.
    fn singular_points(&self) -> Vec<Point2> {
        Vec::new()
    }
    /// Centre and length scale of initial data concentrated near a point;
    /// elements within a few length scales get subdivided quadrature.
    fn localized_initial_data(&self) -> Option<(Point2, f64)> {
        None
    }
}

/// Checks degrees and penalties against a mesh.
pub fn validate(mesh: &SpaceTimeMesh, degrees: &DegreeSpec, flux: &FluxParams) -> Result<()> {
    degrees.validate()?;
    flux.validate()?;
    if flux.alpha.len() != mesh.spatial_faces.len() || flux.beta.len() != mesh.spatial_faces.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} penalty values for {} faces",
            flux.alpha.len(),
            mesh.spatial_faces.len()
        )));
    }
    Ok(())
}

/// Modal coefficients of `(v_h, σ_h)`, one vector per slab.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub degrees: DegreeSpec,
    pub n_spatial: usize,
    pub slabs: Vec<Vec<f64>>,
}

impl DiscreteField {
    pub fn zeros(degrees: DegreeSpec, n_spatial: usize, n_slabs: usize) -> Self {
        let len = Layout::new(&degrees).block() * n_spatial;
        DiscreteField {
            degrees,
            n_spatial,
            slabs: vec![vec![0.0; len]; n_slabs],
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.degrees)
    }

    /// Total number of unknowns.
    pub fn dof_count(&self) -> usize {
        self.slabs.iter().map(Vec::len).sum()
    }

    pub fn n_slabs(&self) -> usize {
        self.slabs.len()
    }

    pub fn block(&self, slab: usize, k: usize) -> &[f64] {
        let b = self.layout().block();
        &self.slabs[slab][k * b..(k + 1) * b]
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.slabs
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-element geometry, bases and quadrature shared by assembly and analysis.
#[derive(Debug, Clone)]
pub struct Discretization<'m> {
    pub mesh: &'m SpaceTimeMesh,
    pub degrees: DegreeSpec,
    pub flux: FluxParams,
    pub layout: Layout,
    pub basis: TriangleBasis2D,
    pub maps: Vec<AffineTriangle>,
    /// Element quadrature, subdivided on elements touching a singular point.
    pub element_rules: Vec<QuadratureRule>,
    /// Edge quadrature on `[0, 1]` per spatial face.
    pub face_rules: Vec<IntervalRule>,
    pub time_points: usize,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m SpaceTimeMesh, degrees: DegreeSpec, flux: FluxParams) -> Result<Self> {
        Self::with_singular_points(mesh, degrees, flux, &[])
    }

    pub fn for_problem(
        mesh: &'m SpaceTimeMesh,
        degrees: DegreeSpec,
        flux: FluxParams,
        problem: &dyn ProblemData,
    ) -> Result<Self> {
        Self::with_singular_points(mesh, degrees, flux, &problem.singular_points())
    }

    pub fn with_singular_points(
        mesh: &'m SpaceTimeMesh,
        degrees: DegreeSpec,
        flux: FluxParams,
        singular: &[Point2],
    ) -> Result<Self> {
        validate(mesh, &degrees, &flux)?;
        let pmax = degrees.px_max();
        let qdeg = triangle_rule_degree(pmax);
        let reference = QuadratureRule::reference_triangle(qdeg);
        let spatial = &mesh.spatial;
        let mut maps = Vec::with_capacity(spatial.len());
        let mut element_rules = Vec::with_capacity(spatial.len());
        for k in 0..spatial.len() {
            let [a, b, c] = spatial.triangle_points(k);
            maps.push(AffineTriangle::new(a, b, c));
            let tol = 1e-12 * spatial.diameter(k);
            let touches = singular
                .iter()
                .any(|s| [a, b, c].iter().any(|p| p.dist(*s) <= tol));
            element_rules.push(if touches {
                QuadratureRule::subdivided(qdeg, a, b, c, 1)
            } else {
                reference.mapped(a, b, c)
            });
        }
        let face_rule = IntervalRule::gauss(pmax + 3, 0.0, 1.0);
        let face_rules = vec![face_rule; mesh.spatial_faces.len()];
        Ok(Discretization {
            mesh,
            degrees,
            flux,
            layout: Layout::new(&degrees),
            basis: TriangleBasis2D::new(pmax),
            maps,
            element_rules,
            face_rules,
            time_points: pmax.max(degrees.pt_v) + 3,
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.maps.len()
    }

    pub fn n_slabs(&self) -> usize {
        self.mesh.n_slabs()
    }

    pub fn speed(&self, k: usize) -> f64 {
        self.mesh.spatial.speed(k)
    }

    pub fn element_basis(&self, k: usize) -> ElementBasis<'_> {
        ElementBasis::new(&self.basis, &self.maps[k])
    }

    pub fn time_basis(&self, slab: usize) -> LegendreBasis1D {
        let (a, b) = self.mesh.temporal.slab(slab);
        LegendreBasis1D::new(self.degrees.pt_v, a, b)
    }

    pub fn time_rule(&self, slab: usize) -> IntervalRule {
        let (a, b) = self.mesh.temporal.slab(slab);
        IntervalRule::gauss(self.time_points, a, b)
    }

    pub fn zero_field(&self) -> DiscreteField {
        DiscreteField::zeros(self.degrees, self.n_spatial(), self.n_slabs())
    }

    /// `(v, σ1, σ2)` of the restriction of `field` to triangle `k` and slab
    /// `slab`, evaluated at `(x, t)`.
    pub fn evaluate(
        &self,
        field: &DiscreteField,
        k: usize,
        slab: usize,
        x: Point2,
        t: f64,
    ) -> [f64; 3] {
        let mut phi = [0.0; 64];
        let n = self.basis.dim();
        self.element_basis(k).values(x, &mut phi[..n]);
        let psi = self.time_basis(slab).values(t);
        self.combine(field.block(slab, k), &phi[..n], &psi)
    }

    pub(crate) fn combine(&self, block: &[f64], phi: &[f64], psi: &[f64]) -> [f64; 3] {
        let l = self.layout;
        let mut out = [0.0; 3];
        for i in 0..l.nv {
            let s: f64 = (0..l.nt).map(|a| block[l.v(i, a)] * psi[a]).sum();
            out[0] += s * phi[i];
        }
        for d in 0..2 {
            for i in 0..l.ns {
                let s: f64 = (0..l.nt).map(|a| block[l.sigma(d, i, a)] * psi[a]).sum();
                out[1 + d] += s * phi[i];
            }
        }
        out
    }

    /// Spatial traces of `field` at the top (`top = true`) or bottom of `slab`
    /// on triangle `k`, as coefficient vectors in the spatial basis.
    pub fn trace_coefficients(
        &self,
        field: &DiscreteField,
        k: usize,
        slab: usize,
        top: bool,
    ) -> [Vec<f64>; 3] {
        let l = self.layout;
        let tb = self.time_basis(slab);
        let psi = if top { tb.top() } else { tb.bottom() };
        let block = field.block(slab, k);
        let v = (0..l.nv)
            .map(|i| (0..l.nt).map(|a| block[l.v(i, a)] * psi[a]).sum())
            .collect();
        let s = |d| {
            (0..l.ns)
                .map(|i| (0..l.nt).map(|a| block[l.sigma(d, i, a)] * psi[a]).sum())
                .collect()
        };
        [v, s(0), s(1)]
    }

    /// L² projection of `(v, σ)` given pointwise onto the discrete space.
    pub fn project(&self, f: &(dyn Fn(Point2, f64) -> [f64; 3] + Sync)) -> DiscreteField {
        let l = self.layout;
        let mut field = self.zero_field();
        let n = self.basis.dim();
        let mut phi = vec![0.0; n];
        for slab in 0..self.n_slabs() {
            let tr = self.time_rule(slab);
            let tb = self.time_basis(slab);
            let psis: Vec<Vec<f64>> = tr.points.iter().map(|&t| tb.values(t)).collect();
            for k in 0..self.n_spatial() {
                let eb = self.element_basis(k);
                let b = l.block();
                let block = &mut field.slabs[slab][k * b..(k + 1) * b];
                let rule = &self.element_rules[k];
                for (x, wx) in rule.points.iter().zip(&rule.weights) {
                    eb.values(*x, &mut phi);
                    for ((t, wt), psi) in tr.points.iter().zip(&tr.weights).zip(&psis) {
                        let val = f(*x, *t);
                        let w = wx * wt;
                        for a in 0..l.nt {
                            for i in 0..l.nv {
                                block[l.v(i, a)] += w * val[0] * phi[i] * psi[a];
                            }
                            for d in 0..2 {
                                for i in 0..l.ns {
                                    block[l.sigma(d, i, a)] += w * val[1 + d] * phi[i] * psi[a];
                                }
                            }
                        }
                    }
                }
            }
        }
        field
    }
}
