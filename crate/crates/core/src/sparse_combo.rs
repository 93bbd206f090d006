//! Sparse space–time approximation by the combination technique.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::analysis::{l2_errors_at, ErrorReport};
use crate::dg_assembly::{
    march, DegreeSpec, DiscreteField, Discretization, FluxParams, ProblemData,
};
use crate::mesh2d::{Point2, PointLocator, SpatialMesh};
use crate::problems::Problem;
use crate::spacetime::{build_spacetime, SpaceTimeMesh, TemporalPartition};
use crate::study::{level_spatial_mesh, level_width, FluxChoice, MeshMode};
use crate::{Error, Result};

/// A pair of refinement levels in space and time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelIndex {
    pub l_x: usize,
    pub l_t: usize,
}

impl LevelIndex {
    pub fn new(l_x: usize, l_t: usize) -> Self {
        LevelIndex { l_x, l_t }
    }

    pub fn norm1(self) -> usize {
        self.l_x + self.l_t
    }
}

/// Members of a combination with their coefficients `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    pub max: LevelIndex,
    pub min: LevelIndex,
    /// Sorted by index.
    pub members: Vec<(LevelIndex, i32)>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn coefficient_sum(&self) -> i32 {
        self.members.iter().map(|m| m.1).sum()
    }

    pub fn indices(&self) -> impl Iterator<Item = LevelIndex> + '_ {
        self.members.iter().map(|m| m.0)
    }
}

/// All `l ≥ L0` with `|l| = L_x + L0_t` (coefficient `+1`) or
/// `|l| = L_x + L0_t − 1` (coefficient `−1`).
pub fn build_index_set(max: LevelIndex, min: LevelIndex) -> Result<IndexSet> {
    if max.l_x < min.l_x || max.l_t < min.l_t || max.l_x - min.l_x != max.l_t - min.l_t {
        return Err(Error::IndexSetLevels {
            dx: max.l_x as i64 - min.l_x as i64,
            dt: max.l_t as i64 - min.l_t as i64,
        });
    }
    let top = max.l_x + min.l_t;
    let mut members = Vec::new();
    let floor = min.l_x + min.l_t;
    for (level, c) in [(top, 1), (top.wrapping_sub(1), -1)] {
        if top == 0 && c < 0 || level < floor {
            continue;
        }
        for l_x in min.l_x..=level - min.l_t {
            members.push((LevelIndex::new(l_x, level - l_x), c));
        }
    }
    members.sort();
    Ok(IndexSet { max, min, members })
}

/// `C(p_x, p_t) = 6 (p_t + 1)(p_x + 1)(p_x + 2)/2`.
pub fn dof_constant(p_x: usize, p_t: usize) -> usize {
    6 * (p_t + 1) * (p_x + 1) * (p_x + 2) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMode {
    Full,
    Sparse,
}

/// `C · base_cells · 2^{2l_x + l_t}` summed over the relevant indices, where
/// `base_cells` is the number of triangle pairs times slabs at level
/// `(0, 0)`.
pub fn dof_count(
    mode: DofMode,
    max: LevelIndex,
    min: LevelIndex,
    p_x: usize,
    p_t: usize,
    base_cells: usize,
) -> Result<usize> {
    let per = |l: LevelIndex| dof_constant(p_x, p_t) * base_cells << (2 * l.l_x + l.l_t);
    Ok(match mode {
        DofMode::Full => per(max),
        DofMode::Sparse => build_index_set(max, min)?.indices().map(per).sum(),
    })
}

/// How detail meshes are derived from a problem's coarse mesh: detail
/// `(l_x, l_t)` uses the spatial level `base_level + l_x` and
/// `base_slabs · 2^{l_t}` uniform slabs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hierarchy {
    pub mode: MeshMode,
    pub base_level: usize,
    pub base_slabs: usize,
    pub degrees: DegreeSpec,
    pub flux: FluxChoice,
    pub conforming: bool,
}

impl Hierarchy {
    pub fn spatial_mesh(&self, problem: &Problem, l_x: usize) -> Result<SpatialMesh> {
        level_spatial_mesh(
            problem,
            self.mode,
            self.base_level + l_x,
            self.degrees.px_sigma,
            self.conforming,
        )
    }

    pub fn width(&self, problem: &Problem, l_x: usize) -> f64 {
        level_width(problem, self.mode, self.base_level + l_x)
    }

    pub fn slabs(&self, l_t: usize) -> usize {
        self.base_slabs << l_t
    }
}

/// One full-tensor solve of a combination.
#[derive(Debug, Clone)]
pub struct DetailSolution {
    pub index: LevelIndex,
    pub mesh: SpaceTimeMesh,
    pub flux: FluxParams,
    pub field: DiscreteField,
}

impl DetailSolution {
    pub fn discretization<'m>(
        &'m self,
        data: &dyn ProblemData,
        degrees: DegreeSpec,
    ) -> Result<Discretization<'m>> {
        Discretization::for_problem(&self.mesh, degrees, self.flux.clone(), data)
    }
}

/// Solves the detail problem `index`.
pub fn solve_detail(
    problem: &Problem,
    hierarchy: &Hierarchy,
    index: LevelIndex,
) -> Result<DetailSolution> {
    let data = problem.data.as_ref();
    let run = || -> Result<DetailSolution> {
        let spatial = hierarchy.spatial_mesh(problem, index.l_x)?;
        let slabs = hierarchy.slabs(index.l_t);
        let mesh = build_spacetime(spatial, TemporalPartition::uniform(problem.t_end, slabs)?)?;
        let flux = hierarchy
            .flux
            .resolve(&mesh, hierarchy.width(problem, index.l_x))?;
        let disc = Discretization::for_problem(&mesh, hierarchy.degrees, flux.clone(), data)?;
        let field = march(&disc, data)?;
        Ok(DetailSolution {
            index,
            mesh,
            flux,
            field,
        })
    };
    run().map_err(|e| Error::Detail {
        l_x: index.l_x,
        l_t: index.l_t,
        source: Box::new(e),
    })
}

/// Solves every member of `set` in index order.
pub fn solve_details(
    problem: &Problem,
    hierarchy: &Hierarchy,
    set: &IndexSet,
) -> Result<Vec<DetailSolution>> {
    set.indices()
        .map(|l| solve_detail(problem, hierarchy, l))
        .collect()
}

/// Evaluates `Σ c_l w_l` at `t_end` (traces from below) on the quadrature
/// of the detail with the finest spatial mesh, locating every point in
/// each detail mesh, and measures the L² errors against `exact`.
pub fn combined_error_at_t(
    details: &[DetailSolution],
    set: &IndexSet,
    data: &dyn ProblemData,
    degrees: DegreeSpec,
    exact: &dyn Fn(Point2, f64) -> [f64; 3],
) -> Result<ErrorReport> {
    if details.len() != set.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} details for {} indices",
            details.len(),
            set.len()
        )));
    }
    let mut parts = Vec::with_capacity(details.len());
    for (index, c) in &set.members {
        let d = details.iter().find(|d| d.index == *index).ok_or_else(|| {
            Error::ShapeMismatch(format!("missing detail ({}, {})", index.l_x, index.l_t))
        })?;
        parts.push((
            d,
            *c as f64,
            d.discretization(data, degrees)?,
            PointLocator::new(&d.mesh.spatial),
        ));
    }
    let t_end = parts[0].0.mesh.temporal.end();
    if parts
        .iter()
        .any(|p| (p.0.mesh.temporal.end() - t_end).abs() > 1e-12 * t_end.abs().max(1.0))
    {
        return Err(Error::param("details have different final times"));
    }
    let reference = parts
        .iter()
        .max_by_key(|p| (p.0.index.l_x, core::cmp::Reverse(p.0.index.l_t)))
        .map(|p| &p.2)
        .expect("non-empty index set");
    let failure = core::cell::RefCell::new(None);
    let eval = |_: usize, x: Point2| {
        let mut sum = [0.0; 3];
        for (d, c, disc, locator) in &parts {
            match locator.locate(x) {
                Some(j) => {
                    let u = disc.evaluate(&d.field, j, d.mesh.n_slabs() - 1, x, t_end);
                    for i in 0..3 {
                        sum[i] += c * u[i];
                    }
                }
                None => {
                    failure.borrow_mut().get_or_insert(x);
                }
            }
        }
        sum
    };
    let (err, norm) = l2_errors_at(reference, &eval, &|x| exact(x, t_end));
    if let Some(x) = failure.into_inner() {
        return Err(Error::PointLocation(x.x1, x.x2));
    }
    let dofs = details.iter().map(|d| d.field.dof_count()).sum();
    Ok(ErrorReport::from_norms(t_end, err, norm, None, dofs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::error_at;
    use crate::problems::{make_problem, ProblemId};

    fn idx(l_x: usize, l_t: usize) -> LevelIndex {
        LevelIndex::new(l_x, l_t)
    }

    fn hierarchy() -> Hierarchy {
        Hierarchy {
            mode: MeshMode::Uniform,
            base_level: 1,
            base_slabs: 2,
            degrees: DegreeSpec::uniform(1),
            flux: FluxChoice::Constant { a: 1.0, b: 1.0 },
            conforming: true,
        }
    }

    #[test]
    fn seven_index_figure() {
        let s = build_index_set(idx(4, 5), idx(1, 2)).unwrap();
        let plus: Vec<_> = s.members.iter().filter(|m| m.1 == 1).map(|m| m.0).collect();
        let minus: Vec<_> = s
            .members
            .iter()
            .filter(|m| m.1 == -1)
            .map(|m| m.0)
            .collect();
        assert_eq!(plus, [idx(1, 5), idx(2, 4), idx(3, 3), idx(4, 2)]);
        assert_eq!(minus, [idx(1, 4), idx(2, 3), idx(3, 2)]);
    }

    #[test]
    fn degenerate_and_small_sets() {
        for l in [idx(0, 0), idx(1, 2), idx(0, 3)] {
            let s = build_index_set(l, l).unwrap();
            assert_eq!(s.members, [(l, 1)]);
        }
        let s = build_index_set(idx(1, 1), idx(0, 0)).unwrap();
        assert_eq!(s.members, [(idx(0, 0), -1), (idx(0, 1), 1), (idx(1, 0), 1)]);
        assert!(matches!(
            build_index_set(idx(2, 2), idx(0, 1)),
            Err(Error::IndexSetLevels { dx: 2, dt: 1 })
        ));
        assert!(build_index_set(idx(0, 2), idx(1, 2)).is_err());
    }

    #[test]
    fn coefficients_telescope() {
        for lx0 in 0..3 {
            for lt0 in 0..3 {
                for d in 0..5 {
                    let s = build_index_set(idx(lx0 + d, lt0 + d), idx(lx0, lt0)).unwrap();
                    assert_eq!(s.coefficient_sum(), 1);
                    assert_eq!(s.len(), 2 * d + 1);
                }
            }
        }
    }

    #[test]
    fn dof_counts() {
        assert_eq!(dof_constant(1, 1), 36);
        assert_eq!(
            dof_count(DofMode::Sparse, idx(1, 1), idx(0, 0), 1, 1, 1).unwrap(),
            252
        );
        assert_eq!(
            dof_count(DofMode::Full, idx(2, 2), idx(0, 0), 1, 1, 1).unwrap(),
            2304
        );
        for l in 1..=6usize {
            let m = dof_count(DofMode::Sparse, idx(l, l), idx(0, 0), 1, 1, 1).unwrap();
            let closed = (5.0 - 3.0 * 0.5f64.powi(l as i32)) / 2.0 * 4f64.powi(l as i32) * 36.0;
            assert_eq!(m as f64, closed);
            assert!(m * 2 < 5 * 36 << (2 * l));
        }
    }

    #[test]
    fn dof_count_matches_detail_unknowns() {
        let p = make_problem(ProblemId::Test1);
        let h = hierarchy();
        let set = build_index_set(idx(2, 3), idx(0, 1)).unwrap();
        let details = solve_details(&p, &h, &set).unwrap();
        let actual: usize = details.iter().map(|d| d.field.dof_count()).sum();
        assert_eq!(
            dof_count(DofMode::Sparse, idx(2, 3), idx(0, 1), 1, 1, 8).unwrap(),
            actual
        );
    }

    #[test]
    fn single_index_matches_error_at() {
        let p = make_problem(ProblemId::Test1);
        let h = hierarchy();
        let set = build_index_set(idx(1, 2), idx(1, 2)).unwrap();
        let details = solve_details(&p, &h, &set).unwrap();
        let exact = |x: Point2, t: f64| p.data.exact(x, t).unwrap();
        let combined =
            combined_error_at_t(&details, &set, p.data.as_ref(), h.degrees, &exact).unwrap();
        let disc = details[0]
            .discretization(p.data.as_ref(), h.degrees)
            .unwrap();
        let direct = error_at(&disc, &details[0].field, &exact, 1.0).unwrap();
        assert!(combined.dg_seminorm.is_none());
        assert!((combined.l2_v / direct.l2_v - 1.0).abs() < 1e-12);
        assert!((combined.l2_sigma / direct.l2_sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_solution_survives_combination() {
        let p = make_problem(ProblemId::Custom);
        let h = hierarchy();
        let set = build_index_set(idx(2, 3), idx(0, 1)).unwrap();
        let details = solve_details(&p, &h, &set).unwrap();
        let exact = |x: Point2, t: f64| p.data.exact(x, t).unwrap();
        let r = combined_error_at_t(&details, &set, p.data.as_ref(), h.degrees, &exact).unwrap();
        assert!(r.l2_v < 1e-9 && r.l2_sigma < 1e-9, "{r:?}");
    }

    #[test]
    fn missing_detail_is_reported() {
        let p = make_problem(ProblemId::Test1);
        let set = build_index_set(idx(1, 1), idx(0, 0)).unwrap();
        let details = solve_details(&p, &hierarchy(), &set).unwrap();
        let exact = |x: Point2, t: f64| p.data.exact(x, t).unwrap();
        assert!(matches!(
            combined_error_at_t(
                &details[..2],
                &set,
                p.data.as_ref(),
                DegreeSpec::uniform(1),
                &exact
            ),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
