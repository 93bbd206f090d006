//! Convergence studies, signal probes and point snapshots.

use alloc::boxed::Box;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analysis::error_at;
use crate::dg_assembly::{
    march, DegreeSpec, DiscreteField, Discretization, FluxMode, FluxParams, ProblemData,
};
use crate::mesh2d::{corner_refine_scaled, refine_to_width, Point2, PointLocator, SpatialMesh};
use crate::problems::Problem;
use crate::rates::log2_ratios;
use crate::spacetime::{build_spacetime, SpaceTimeMesh, TemporalPartition};
use crate::{Error, Result};

/// How spatial meshes of a level family are built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshMode {
    /// Bisection to width `h0 · 2^{-l}`.
    Uniform,
    /// Bisection to width `2^{-l}` followed by grading towards the corners
    /// of the coarse mesh.
    CornerRefined,
}

/// Penalty choice, resolved per mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxChoice {
    Constant {
        a: f64,
        b: f64,
    },
    FaceScaled {
        a: f64,
        b: f64,
    },
    /// `α = c⁻¹ h_x / h_F`, `β = c h_F / h_x` with `h_x` the level width.
    RefinedScaled,
}

impl FluxChoice {
    pub fn resolve(self, mesh: &SpaceTimeMesh, h_x: f64) -> Result<FluxParams> {
        let mode = match self {
            FluxChoice::Constant { a, b } => FluxMode::Constant { a, b },
            FluxChoice::FaceScaled { a, b } => FluxMode::FaceScaled { a, b },
            FluxChoice::RefinedScaled => FluxMode::RefinedScaled { h_x },
        };
        FluxParams::from_mode(mesh, mode)
    }
}

/// Width of level `level`: `h0 · 2^{-l}` for uniform families and
/// `2^{-l}` length-scale units for corner-refined ones.
pub fn level_width(problem: &Problem, mode: MeshMode, level: usize) -> f64 {
    let half = 0.5f64.powi(level as i32);
    match mode {
        MeshMode::Uniform => problem.h0 * half,
        MeshMode::CornerRefined => problem.length_scale * half,
    }
}

/// Spatial mesh of level `level`.
pub fn level_spatial_mesh(
    problem: &Problem,
    mode: MeshMode,
    level: usize,
    p_sigma_x: usize,
    conforming: bool,
) -> Result<SpatialMesh> {
    match mode {
        MeshMode::Uniform => refine_to_width(
            &problem.mesh0,
            level_width(problem, mode, level),
            conforming,
        ),
        MeshMode::CornerRefined => corner_refine_scaled(
            &problem.mesh0,
            0.5f64.powi(level as i32),
            p_sigma_x,
            conforming,
            problem.length_scale,
        ),
    }
}

/// Space–time mesh of level `level`: `2^level` uniform slabs on `(0, T)`.
pub fn level_mesh(
    problem: &Problem,
    mode: MeshMode,
    level: usize,
    p_sigma_x: usize,
    conforming: bool,
) -> Result<SpaceTimeMesh> {
    let spatial = level_spatial_mesh(problem, mode, level, p_sigma_x, conforming)?;
    build_spacetime(
        spatial,
        TemporalPartition::uniform(problem.t_end, 1 << level)?,
    )
}

/// Settings of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub mode: MeshMode,
    pub levels: Vec<usize>,
    pub degrees: DegreeSpec,
    pub flux: FluxChoice,
    pub conforming: bool,
}

/// One level of a convergence table. Errors are relative L² errors at the
/// final time and the DG seminorm of the error, when available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_x: f64,
    pub h_t: f64,
    pub dofs: usize,
    pub error_v: f64,
    pub rate_v: Option<f64>,
    pub error_sigma: f64,
    pub rate_sigma: Option<f64>,
    pub error_dg: Option<f64>,
    pub rate_dg: Option<f64>,
}

/// Result of solving one level.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub mesh: SpaceTimeMesh,
    pub flux: FluxParams,
    pub field: DiscreteField,
}

pub fn solve_level(problem: &Problem, cfg: &ConvergenceConfig, level: usize) -> Result<LevelRun> {
    let mesh = level_mesh(
        problem,
        cfg.mode,
        level,
        cfg.degrees.px_sigma,
        cfg.conforming,
    )?;
    let h_x = level_width(problem, cfg.mode, level);
    let flux = cfg.flux.resolve(&mesh, h_x)?;
    let disc =
        Discretization::for_problem(&mesh, cfg.degrees, flux.clone(), problem.data.as_ref())?;
    let field = march(&disc, problem.data.as_ref())?;
    Ok(LevelRun { mesh, flux, field })
}

/// Errors of a solved level at the final time.
pub fn level_row(
    problem: &Problem,
    cfg: &ConvergenceConfig,
    level: usize,
    run: &LevelRun,
) -> Result<ConvergenceRow> {
    let data = problem.data.as_ref();
    if data.exact(Point2::new(0.0, 0.0), 0.0).is_none() {
        return Err(Error::param("convergence study needs an exact solution"));
    }
    let exact = |x: Point2, t: f64| data.exact(x, t).unwrap_or([0.0; 3]);
    let disc = Discretization::for_problem(&run.mesh, cfg.degrees, run.flux.clone(), data)?;
    let report = error_at(&disc, &run.field, &exact, problem.t_end)?;
    Ok(ConvergenceRow {
        level,
        h_x: run.mesh.spatial.statistics().h_max,
        h_t: run.mesh.temporal.max_step(),
        dofs: run.field.dof_count(),
        error_v: report.rel_l2_v,
        rate_v: None,
        error_sigma: report.rel_l2_sigma,
        rate_sigma: None,
        error_dg: report.dg_seminorm,
        rate_dg: None,
    })
}

/// Fills the rate columns from consecutive rows.
pub fn fill_rates(rows: &mut [ConvergenceRow]) {
    let rate = |a: f64, b: f64| log2_ratios(&[a, b])[0];
    for i in 1..rows.len() {
        let (prev, row) = (rows[i - 1], &mut rows[i]);
        row.rate_v = Some(rate(prev.error_v, row.error_v));
        row.rate_sigma = Some(rate(prev.error_sigma, row.error_sigma));
        row.rate_dg = prev.error_dg.zip(row.error_dg).map(|(a, b)| rate(a, b));
    }
}

/// Solves every level and tabulates errors and rates.
pub fn run_convergence(problem: &Problem, cfg: &ConvergenceConfig) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let annotate = |e| Error::Level {
            level,
            source: Box::new(e),
        };
        let run = solve_level(problem, cfg, level).map_err(annotate)?;
        rows.push(level_row(problem, cfg, level, &run).map_err(annotate)?);
    }
    fill_rates(&mut rows);
    Ok(rows)
}

/// `∫_{Ω_C} v dx` at the slab boundaries and its trapezoidal antiderivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub element: usize,
    pub t: Vec<f64>,
    pub v_c: Vec<f64>,
    pub u_c: Vec<f64>,
}

/// Records `v_C(t_n) = ∫_{Ω_C} v_h(x, t_n) dx` on the element `Ω_C`
/// containing `probe`, using traces from below (from above at `t_0`), and
/// integrates it in time with the trapezoidal rule starting from zero.
pub fn signal_probe(
    disc: &Discretization<'_>,
    field: &DiscreteField,
    probe: Point2,
) -> Result<ProbeSeries> {
    let element = PointLocator::new(&disc.mesh.spatial)
        .locate(probe)
        .ok_or(Error::PointLocation(probe.x1, probe.x2))?;
    let bp = disc.mesh.temporal.breakpoints();
    let rule = &disc.element_rules[element];
    let mut v_c = Vec::with_capacity(bp.len());
    for (n, &t) in bp.iter().enumerate() {
        let slab = n.saturating_sub(1);
        v_c.push(rule.integrate(|x| disc.evaluate(field, element, slab, x, t)[0]));
    }
    let mut u_c = Vec::with_capacity(bp.len());
    let mut acc = 0.0;
    u_c.push(0.0);
    for n in 1..bp.len() {
        acc += 0.5 * (bp[n] - bp[n - 1]) * (v_c[n] + v_c[n - 1]);
        u_c.push(acc);
    }
    Ok(ProbeSeries {
        element,
        t: bp.to_vec(),
        v_c,
        u_c,
    })
}

/// Outcome of the qualitative arrival check on a probe series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalCheck {
    /// `max |u_C|` for `t ≤ quiet_until`.
    pub baseline: f64,
    /// Maximal runs of same-signed samples with `|u_C|` above
    /// `factor × baseline`.
    pub lobes: usize,
}

impl ArrivalCheck {
    pub fn passed(&self, min_lobes: usize) -> bool {
        self.lobes >= min_lobes
    }
}

pub fn arrival_check(series: &ProbeSeries, quiet_until: f64, factor: f64) -> ArrivalCheck {
    let baseline = series
        .t
        .iter()
        .zip(&series.u_c)
        .filter(|(t, _)| **t <= quiet_until)
        .map(|(_, u)| u.abs())
        .fold(0.0, f64::max);
    let threshold = factor * baseline;
    let mut lobes = 0;
    let mut current = 0.0f64;
    for &u in &series.u_c {
        if u.abs() > threshold && u != 0.0 {
            if current == 0.0 || current.signum() != u.signum() {
                lobes += 1;
            }
            current = u;
        } else {
            current = 0.0;
        }
    }
    ArrivalCheck { baseline, lobes }
}

/// One point sample of `(v, σ1, σ2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x1: f64,
    pub x2: f64,
    pub v: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Samples the field at the slab boundary `t` (trace from below) at the
/// centres of an `n × n` grid over the bounding box of the mesh; points
/// outside the domain are omitted.
pub fn snapshot(
    disc: &Discretization<'_>,
    field: &DiscreteField,
    t: f64,
    n: usize,
) -> Result<Vec<Sample>> {
    let idx = disc
        .mesh
        .temporal
        .breakpoint_index(t)
        .ok_or(Error::NotSlabBoundary(t))?;
    let t = disc.mesh.temporal.breakpoints()[idx];
    let slab = idx.saturating_sub(1);
    let verts = &disc.mesh.spatial.vertices;
    let (mut lo, mut hi) = (verts[0], verts[0]);
    for p in verts {
        lo = Point2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
        hi = Point2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
    }
    let locator = PointLocator::new(&disc.mesh.spatial);
    let (dx, dy) = ((hi.x1 - lo.x1) / n as f64, (hi.x2 - lo.x2) / n as f64);
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let x = Point2::new(lo.x1 + (i as f64 + 0.5) * dx, lo.x2 + (j as f64 + 0.5) * dy);
            if let Some(k) = locator.locate(x) {
                let u = disc.evaluate(field, k, slab, x, t);
                out.push(Sample {
                    x1: x.x1,
                    x2: x.x2,
                    v: u[0],
                    sigma1: u[1],
                    sigma2: u[2],
                });
            }
        }
    }
    Ok(out)
}

/// Solves `problem` on a given spatial mesh with `slabs` uniform slabs.
pub fn solve_on(
    spatial: SpatialMesh,
    t_end: f64,
    slabs: usize,
    degrees: DegreeSpec,
    flux: FluxChoice,
    h_x: f64,
    data: &dyn ProblemData,
) -> Result<LevelRun> {
    let mesh = build_spacetime(spatial, TemporalPartition::uniform(t_end, slabs)?)?;
    let flux = flux.resolve(&mesh, h_x)?;
    let disc = Discretization::for_problem(&mesh, degrees, flux.clone(), data)?;
    let field = march(&disc, data)?;
    Ok(LevelRun { mesh, flux, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg_assembly::ProblemData;
    use crate::mesh2d::{domains, BoundaryTag};
    use crate::problems::{make_problem, ProblemId};

    fn synthetic(q: f64) -> Vec<ConvergenceRow> {
        (0..4)
            .map(|l| ConvergenceRow {
                level: l,
                h_x: 0.0,
                h_t: 0.0,
                dofs: 0,
                error_v: 3.0 * 2f64.powf(-q * l as f64),
                rate_v: None,
                error_sigma: 2f64.powf(-q * l as f64),
                rate_sigma: None,
                error_dg: Some(1.0),
                rate_dg: None,
            })
            .collect()
    }

    #[test]
    fn rates_of_synthetic_sequence() {
        let mut rows = synthetic(1.7);
        fill_rates(&mut rows);
        assert!(rows[0].rate_v.is_none());
        for r in &rows[1..] {
            assert!((r.rate_v.unwrap() - 1.7).abs() < 1e-12);
            assert!((r.rate_sigma.unwrap() - 1.7).abs() < 1e-12);
            assert!(r.rate_dg.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn level_meshes_of_test1() {
        let p = make_problem(ProblemId::Test1);
        for l in 0..4 {
            let m = level_mesh(&p, MeshMode::Uniform, l, 1, true).unwrap();
            assert_eq!(m.n_spatial(), 2 << (2 * l));
            assert_eq!(m.n_slabs(), 1 << l);
        }
    }

    struct Quiet;
    impl ProblemData for Quiet {
        fn v0(&self, _: Point2) -> f64 {
            0.0
        }
        fn sigma0(&self, _: Point2) -> [f64; 2] {
            [0.0; 2]
        }
        fn source(&self, _: Point2, _: f64) -> f64 {
            0.0
        }
        fn dirichlet(&self, _: Point2, _: f64) -> f64 {
            0.0
        }
        fn neumann(&self, _: Point2, _: f64, _: [f64; 2]) -> f64 {
            0.0
        }
    }

    #[test]
    fn zero_problem_gives_zero_probe_and_snapshot() {
        let m = refine_to_width(&domains::unit_square(BoundaryTag::Dirichlet), 0.4, true).unwrap();
        let run = solve_on(
            m,
            1.0,
            4,
            DegreeSpec::uniform(1),
            FluxChoice::Constant { a: 1.0, b: 1.0 },
            0.4,
            &Quiet,
        )
        .unwrap();
        let flux = run.flux.clone();
        let disc = Discretization::new(&run.mesh, DegreeSpec::uniform(1), flux).unwrap();
        let s = signal_probe(&disc, &run.field, Point2::new(0.3, 0.6)).unwrap();
        assert_eq!(s.t.len(), 5);
        assert!(s.v_c.iter().chain(&s.u_c).all(|x| *x == 0.0));
        assert!(matches!(
            signal_probe(&disc, &run.field, Point2::new(1.5, 0.5)),
            Err(Error::PointLocation(..))
        ));
        let snap = snapshot(&disc, &run.field, 0.5, 10).unwrap();
        assert_eq!(snap.len(), 100);
        assert!(snap
            .iter()
            .all(|s| s.v == 0.0 && s.sigma1 == 0.0 && s.sigma2 == 0.0));
        assert!(snapshot(&disc, &run.field, 0.6, 10).is_err());
    }

    #[test]
    fn gamma_snapshot_covers_three_quadrants() {
        let st = build_spacetime(
            domains::gamma_domain(BoundaryTag::Neumann),
            TemporalPartition::uniform(1.0, 1).unwrap(),
        )
        .unwrap();
        let flux = FluxChoice::Constant { a: 1.0, b: 1.0 }
            .resolve(&st, 1.0)
            .unwrap();
        let disc = Discretization::new(&st, DegreeSpec::uniform(1), flux).unwrap();
        let snap = snapshot(&disc, &disc.zero_field(), 1.0, 100).unwrap();
        assert_eq!(snap.len(), 7500);
    }

    #[test]
    fn snapshot_riemann_sum_matches_norm() {
        let st = build_spacetime(
            refine_to_width(&domains::unit_square(BoundaryTag::Dirichlet), 0.3, true).unwrap(),
            TemporalPartition::uniform(1.0, 2).unwrap(),
        )
        .unwrap();
        let flux = FluxChoice::Constant { a: 1.0, b: 1.0 }
            .resolve(&st, 0.3)
            .unwrap();
        let disc = Discretization::new(&st, DegreeSpec::uniform(2), flux).unwrap();
        let exact = |x: Point2, t: f64| crate::problems::StandingWave::solution(x, 0.3 + 0.5 * t);
        let field = disc.project(&exact);
        let snap = snapshot(&disc, &field, 1.0, 200).unwrap();
        let riemann: f64 = snap.iter().map(|s| s.v * s.v).sum::<f64>() / (200.0 * 200.0);
        let quad = crate::analysis::l2_errors_at(
            &disc,
            &|k, x| disc.evaluate(&field, k, 1, x, 1.0),
            &|_| [0.0; 3],
        )
        .0[0];
        assert!((riemann.sqrt() / quad - 1.0).abs() < 0.05);
    }

    #[test]
    fn arrival_check_counts_signed_lobes() {
        let s = ProbeSeries {
            element: 0,
            t: (0..8).map(|i| i as f64 * 0.1).collect(),
            v_c: alloc::vec![0.0; 8],
            u_c: alloc::vec![0.01, -0.01, 0.0, 0.2, 0.3, -0.4, 0.0, 0.5],
        };
        let c = arrival_check(&s, 0.15, 5.0);
        assert_eq!(c.baseline, 0.01);
        assert_eq!(c.lobes, 3);
        assert!(c.passed(2));
    }
}
