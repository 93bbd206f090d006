//! DG seminorm, energy and error functionals, and projection-rate studies.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dg_assembly::{DegreeSpec, DiscreteField, Discretization, FluxParams, ProblemData};
use crate::mesh2d::{Point2, SpatialMesh};
use crate::rates::loglog_slope;
use crate::spacetime::{build_spacetime, EdgeKind, TemporalPartition};
use crate::{Error, Result};

/// A function that is polynomial on each space–time element, given by its
/// restriction `(v, σ1, σ2)` to triangle `k` and slab `slab`.
pub trait PiecewiseField {
    fn eval(&self, k: usize, slab: usize, x: Point2, t: f64) -> [f64; 3];
}

/// A discrete field seen through its discretization.
pub struct Discrete<'a, 'm> {
    pub disc: &'a Discretization<'m>,
    pub field: &'a DiscreteField,
}

impl PiecewiseField for Discrete<'_, '_> {
    fn eval(&self, k: usize, slab: usize, x: Point2, t: f64) -> [f64; 3] {
        self.disc.evaluate(self.field, k, slab, x, t)
    }
}

/// `exact − discrete`.
pub struct ErrorField<'a, 'm> {
    pub disc: &'a Discretization<'m>,
    pub field: &'a DiscreteField,
    pub exact: &'a dyn Fn(Point2, f64) -> [f64; 3],
}

impl PiecewiseField for ErrorField<'_, '_> {
    fn eval(&self, k: usize, slab: usize, x: Point2, t: f64) -> [f64; 3] {
        let u = (self.exact)(x, t);
        let h = self.disc.evaluate(self.field, k, slab, x, t);
        [u[0] - h[0], u[1] - h[1], u[2] - h[2]]
    }
}

/// The separate contributions to the squared DG seminorm over `Ω × (0, t_n)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeminormParts {
    /// `½‖c⁻¹w‖² + ½‖τ‖²` at `t = 0`.
    pub initial: f64,
    /// The same at `t = t_n`.
    pub top: f64,
    /// Jumps across interior slab interfaces.
    pub space_like: f64,
    /// Penalty terms on time-like, Dirichlet and Neumann faces.
    pub penalty: f64,
}

impl SeminormParts {
    pub fn total(&self) -> f64 {
        self.initial + self.top + self.space_like + self.penalty
    }
}

fn slab_count_check(disc: &Discretization<'_>, up_to: usize) -> Result<()> {
    if up_to == 0 || up_to > disc.n_slabs() {
        return Err(Error::param(alloc::format!(
            "slab count {up_to} not in 1..={}",
            disc.n_slabs()
        )));
    }
    Ok(())
}

/// Squared seminorm contributions of `w` over the first `up_to` slabs.
pub fn dg_seminorm_parts(
    disc: &Discretization<'_>,
    w: &dyn PiecewiseField,
    up_to: usize,
) -> Result<SeminormParts> {
    slab_count_check(disc, up_to)?;
    let nx = disc.n_spatial();
    let bp = disc.mesh.temporal.breakpoints();
    let mut parts = SeminormParts::default();
    for k in 0..nx {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let energy = |u: [f64; 3]| 0.5 * (c2inv * u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        let rule = &disc.element_rules[k];
        for (x, wx) in rule.points.iter().zip(&rule.weights) {
            parts.initial += wx * energy(w.eval(k, 0, *x, bp[0]));
            parts.top += wx * energy(w.eval(k, up_to - 1, *x, bp[up_to]));
            for m in 1..up_to {
                let lo = w.eval(k, m - 1, *x, bp[m]);
                let hi = w.eval(k, m, *x, bp[m]);
                parts.space_like += wx * energy([lo[0] - hi[0], lo[1] - hi[1], lo[2] - hi[2]]);
            }
        }
    }
    for (f, face) in disc.mesh.spatial_faces.iter().enumerate() {
        let alpha = disc.flux.alpha[f];
        let beta = disc.flux.beta[f];
        let nrm = face.normal;
        let un = |u: [f64; 3]| u[1] * nrm[0] + u[2] * nrm[1];
        let rule = &disc.face_rules[f];
        for slab in 0..up_to {
            let tr = disc.time_rule(slab);
            for (s, ws) in rule.points.iter().zip(&rule.weights) {
                let x = face.point(*s);
                for (t, wt) in tr.points.iter().zip(&tr.weights) {
                    let wgt = ws * face.length * wt;
                    parts.penalty += wgt
                        * match face.kind {
                            EdgeKind::Interior { minus, plus } => {
                                let a = w.eval(minus, slab, x, *t);
                                let b = w.eval(plus, slab, x, *t);
                                alpha * (a[0] - b[0]).powi(2) + beta * (un(a) - un(b)).powi(2)
                            }
                            EdgeKind::Boundary { element, tag } => {
                                let a = w.eval(element, slab, x, *t);
                                match tag {
                                    crate::mesh2d::BoundaryTag::Dirichlet => alpha * a[0] * a[0],
                                    crate::mesh2d::BoundaryTag::Neumann => beta * un(a).powi(2),
                                }
                            }
                        };
                }
            }
        }
    }
    Ok(parts)
}

/// `|w|_{DG(Q_n)}` with `Q_n = Ω × (0, t_n)`, `n = up_to`.
pub fn dg_seminorm(disc: &Discretization<'_>, w: &dyn PiecewiseField, up_to: usize) -> Result<f64> {
    Ok(dg_seminorm_parts(disc, w, up_to)?.total().sqrt())
}

/// `½∫_Ω (c⁻²v² + |σ|²)` for pointwise data on the mesh of `disc`.
pub fn energy_of(disc: &Discretization<'_>, f: &dyn Fn(Point2) -> [f64; 3]) -> f64 {
    let mut e = 0.0;
    for k in 0..disc.n_spatial() {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let rule = &disc.element_rules[k];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let u = f(*x);
            e += w * 0.5 * (c2inv * u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        }
    }
    e
}

/// Energy of the discrete field at the slab boundary `t`, using the trace
/// from below (from above at the initial time).
pub fn energy(disc: &Discretization<'_>, field: &DiscreteField, t: f64) -> Result<f64> {
    let n = disc
        .mesh
        .temporal
        .breakpoint_index(t)
        .ok_or(Error::NotSlabBoundary(t))?;
    let t = disc.mesh.temporal.breakpoints()[n];
    let slab = n.saturating_sub(1);
    let mut e = 0.0;
    for k in 0..disc.n_spatial() {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let rule = &disc.element_rules[k];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let u = disc.evaluate(field, k, slab, *x, t);
            e += w * 0.5 * (c2inv * u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        }
    }
    Ok(e)
}

/// Terms of the discrete energy identity at `t_n`:
/// `E(t_n) + dissipated = E(0; v0, σ0)` for source-free problems with
/// homogeneous boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub energy: f64,
    /// `½‖c⁻¹(v_h(0⁺) − v0)‖² + ½‖σ_h(0⁺) − σ0‖²`.
    pub initial_jump: f64,
    pub space_like: f64,
    pub penalty: f64,
    pub initial_energy: f64,
}

impl EnergyBalance {
    pub fn dissipated(&self) -> f64 {
        self.initial_jump + self.space_like + self.penalty
    }

    /// `|E(t_n) + dissipated − E(0)| / E(0)`.
    pub fn relative_defect(&self) -> f64 {
        (self.energy + self.dissipated() - self.initial_energy).abs()
            / self.initial_energy.max(1e-300)
    }
}

pub fn energy_balance(
    disc: &Discretization<'_>,
    field: &DiscreteField,
    problem: &dyn ProblemData,
    up_to: usize,
) -> Result<EnergyBalance> {
    let parts = dg_seminorm_parts(disc, &Discrete { disc, field }, up_to)?;
    let t0 = disc.mesh.temporal.start();
    let initial = |x: Point2| {
        let s = problem.sigma0(x);
        [problem.v0(x), s[0], s[1]]
    };
    let mut jump = 0.0;
    for k in 0..disc.n_spatial() {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let rule = &disc.element_rules[k];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let u = disc.evaluate(field, k, 0, *x, t0);
            let u0 = initial(*x);
            jump += w
                * 0.5
                * (c2inv * (u[0] - u0[0]).powi(2)
                    + (u[1] - u0[1]).powi(2)
                    + (u[2] - u0[2]).powi(2));
        }
    }
    Ok(EnergyBalance {
        energy: parts.top,
        initial_jump: jump,
        space_like: parts.space_like,
        penalty: parts.penalty,
        initial_energy: energy_of(disc, &initial),
    })
}

/// Errors at a slab boundary `t_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub t_n: f64,
    /// `‖c⁻¹(v − v_h)‖` on `Ω × {t_n}`.
    pub l2_v: f64,
    /// `‖σ − σ_h‖` on `Ω × {t_n}`.
    pub l2_sigma: f64,
    /// `|(v, σ) − (v_h, σ_h)|_{DG(Q_n)}`; absent at `t_0` and for combined
    /// sparse approximations.
    pub dg_seminorm: Option<f64>,
    pub rel_l2_v: f64,
    pub rel_l2_sigma: f64,
    /// Set when an exact-solution norm vanishes; the relative fields then
    /// hold absolute errors.
    pub absolute: bool,
    pub dof_total: usize,
}

impl ErrorReport {
    /// `½‖c⁻¹e_v‖² + ½‖e_σ‖² ≤ |e|²_DG` at `t_n`.
    pub fn trace_bound_holds(&self) -> bool {
        self.dg_seminorm.map_or(true, |dg| {
            0.5 * (self.l2_v * self.l2_v + self.l2_sigma * self.l2_sigma)
                <= dg * dg * (1.0 + 1e-10) + 1e-300
        })
    }
}

/// L² errors of `v`, `σ` at `t_n` (trace from below) and their relative
/// variants, measured on the quadrature of `disc`.
pub fn l2_errors_at(
    disc: &Discretization<'_>,
    eval: &dyn Fn(usize, Point2) -> [f64; 3],
    exact: &dyn Fn(Point2) -> [f64; 3],
) -> ([f64; 2], [f64; 2]) {
    let mut err = [0.0; 2];
    let mut norm = [0.0; 2];
    for k in 0..disc.n_spatial() {
        let c2inv = 1.0 / (disc.speed(k) * disc.speed(k));
        let rule = &disc.element_rules[k];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let u = exact(*x);
            let h = eval(k, *x);
            err[0] += w * c2inv * (u[0] - h[0]).powi(2);
            err[1] += w * ((u[1] - h[1]).powi(2) + (u[2] - h[2]).powi(2));
            norm[0] += w * c2inv * u[0] * u[0];
            norm[1] += w * (u[1] * u[1] + u[2] * u[2]);
        }
    }
    (err.map(f64::sqrt), norm.map(f64::sqrt))
}

pub fn error_at(
    disc: &Discretization<'_>,
    field: &DiscreteField,
    exact: &dyn Fn(Point2, f64) -> [f64; 3],
    t_n: f64,
) -> Result<ErrorReport> {
    let n = disc
        .mesh
        .temporal
        .breakpoint_index(t_n)
        .ok_or(Error::NotSlabBoundary(t_n))?;
    let t = disc.mesh.temporal.breakpoints()[n];
    let slab = n.saturating_sub(1);
    let (err, norm) = l2_errors_at(disc, &|k, x| disc.evaluate(field, k, slab, x, t), &|x| {
        exact(x, t)
    });
    let dg = if n == 0 {
        None
    } else {
        Some(dg_seminorm(disc, &ErrorField { disc, field, exact }, n)?)
    };
    Ok(ErrorReport::from_norms(t, err, norm, dg, field.dof_count()))
}

impl ErrorReport {
    /// Assembles a report from absolute errors `err` and exact-solution
    /// norms `norm`, each ordered `(v, σ)`.
    pub fn from_norms(
        t_n: f64,
        err: [f64; 2],
        norm: [f64; 2],
        dg_seminorm: Option<f64>,
        dof_total: usize,
    ) -> Self {
        let rel = |e: f64, z: f64| if z == 0.0 { e } else { e / z };
        ErrorReport {
            t_n,
            l2_v: err[0],
            l2_sigma: err[1],
            dg_seminorm,
            rel_l2_v: rel(err[0], norm[0]),
            rel_l2_sigma: rel(err[1], norm[1]),
            absolute: norm[0] == 0.0 || norm[1] == 0.0,
            dof_total,
        }
    }
}

/// Projection errors on one mesh of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionLevel {
    pub h_x: f64,
    pub h_t: f64,
    pub l2: f64,
    /// `‖∇_x(f − Πf)‖` over the space–time domain.
    pub grad_x: f64,
    /// `‖∂_t(f − Πf)‖` over the space–time domain.
    pub grad_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionStudy {
    pub levels: Vec<ProjectionLevel>,
    pub l2_order: Option<f64>,
    pub grad_x_order: Option<f64>,
    pub grad_t_order: Option<f64>,
}

/// A scalar space–time function with its gradient `(∂1, ∂2, ∂t)`.
pub type ScalarJet<'a> = &'a (dyn Fn(Point2, f64) -> (f64, [f64; 3]) + Sync);

/// L² projection of `f` onto `P^{p_x}(K_x) ⊗ P^{p_t}(I_n)` elementwise on each
/// mesh of the family, with errors measured in L², the spatial gradient and
/// the time derivative; orders are least-squares slopes in `h_x`.
pub fn projection_rate_study(
    f: ScalarJet<'_>,
    meshes: &[(SpatialMesh, TemporalPartition)],
    p_x: usize,
    p_t: usize,
    singular: &[Point2],
) -> Result<ProjectionStudy> {
    let degrees = DegreeSpec::new(p_x, p_t, p_x, p_t);
    let mut levels = Vec::with_capacity(meshes.len());
    for (spatial, temporal) in meshes {
        let st = build_spacetime(spatial.clone(), temporal.clone())?;
        let nf = st.spatial_faces.len();
        let flux = FluxParams {
            alpha: vec![1.0; nf],
            beta: vec![1.0; nf],
        };
        let disc = Discretization::with_singular_points(&st, degrees, flux, singular)?;
        let proj: Box<dyn Fn(Point2, f64) -> [f64; 3] + Sync> =
            Box::new(|x, t| [f(x, t).0, 0.0, 0.0]);
        let field = disc.project(&*proj);
        let (mut l2, mut gx, mut gt) = (0.0, 0.0, 0.0);
        for slab in 0..disc.n_slabs() {
            let tr = disc.time_rule(slab);
            for k in 0..disc.n_spatial() {
                let rule = &disc.element_rules[k];
                for (x, wx) in rule.points.iter().zip(&rule.weights) {
                    for (t, wt) in tr.points.iter().zip(&tr.weights) {
                        let (v, g) = f(*x, *t);
                        let j = disc.jet(&field, k, slab, *x, *t);
                        let w = wx * wt;
                        l2 += w * (v - j.val[0]).powi(2);
                        gx += w * ((g[0] - j.dx1[0]).powi(2) + (g[1] - j.dx2[0]).powi(2));
                        gt += w * (g[2] - j.dt[0]).powi(2);
                    }
                }
            }
        }
        levels.push(ProjectionLevel {
            h_x: spatial.statistics().h_max,
            h_t: temporal.max_step(),
            l2: l2.sqrt(),
            grad_x: gx.sqrt(),
            grad_t: gt.sqrt(),
        });
    }
    let hs: Vec<f64> = levels.iter().map(|l| l.h_x).collect();
    let slope = |sel: fn(&ProjectionLevel) -> f64| {
        let ys: Vec<f64> = levels.iter().map(sel).collect();
        if ys.iter().any(|y| *y <= 0.0) {
            None
        } else {
            loglog_slope(&hs, &ys)
        }
    };
    Ok(ProjectionStudy {
        l2_order: slope(|l| l.l2),
        grad_x_order: slope(|l| l.grad_x),
        grad_t_order: slope(|l| l.grad_t),
        levels,
    })
}
