//! Experiment drivers behind the command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use xtdg_core::analysis::error_at;
use xtdg_core::dg_assembly::Discretization;
use xtdg_core::mesh2d::{Point2, SpatialMesh};
use xtdg_core::problems::Problem;
use xtdg_core::sparse_combo::{build_index_set, combined_error_at_t, solve_detail, DetailSolution};
use xtdg_core::study::{
    arrival_check, fill_rates, level_row, level_spatial_mesh, level_width, signal_probe, snapshot,
    solve_level, solve_on, ArrivalCheck, ConvergenceRow, LevelRun, ProbeSeries, Sample,
};

use crate::tables::{convergence_markdown, write_convergence, write_probe, write_snapshot};
use crate::{CliError, ExperimentConfig};

fn exact_of(problem: &Problem) -> Result<impl Fn(Point2, f64) -> [f64; 3] + '_, CliError> {
    let data = problem.data.as_ref();
    if data.exact(Point2::new(0.0, 0.0), 0.0).is_none() {
        return Err(CliError::Config(format!(
            "problem `{}` has no exact solution to measure errors against",
            problem.id.name()
        )));
    }
    Ok(move |x: Point2, t: f64| data.exact(x, t).unwrap_or([0.0; 3]))
}

/// Full-tensor convergence study; levels are solved concurrently.
pub fn run_full(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, CliError> {
    let problem = cfg.problem();
    let _ = exact_of(&problem)?;
    let study = cfg.convergence();
    let mut rows = study
        .levels
        .par_iter()
        .map(|&level| {
            let annotate = |e| xtdg_core::Error::Level {
                level,
                source: Box::new(e),
            };
            let run = solve_level(&problem, &study, level).map_err(annotate)?;
            level_row(&problem, &study, level, &run).map_err(annotate)
        })
        .collect::<Result<Vec<_>, _>>()?;
    fill_rates(&mut rows);
    check_rows(&rows)?;
    Ok(rows)
}

/// One row of a sparse study together with the per-detail relative errors.
#[derive(Debug, Clone)]
pub struct SparseLevel {
    pub row: ConvergenceRow,
    pub detail_errors: Vec<[f64; 2]>,
}

impl SparseLevel {
    /// Combined errors at most `factor` times the largest detail error.
    pub fn within(&self, factor: f64) -> bool {
        let max = |i: usize| self.detail_errors.iter().map(|e| e[i]).fold(0.0, f64::max);
        self.row.error_v <= factor * max(0) && self.row.error_sigma <= factor * max(1)
    }
}

/// Sparse combination study over `cfg.sparse_levels`; details of each level
/// are solved concurrently and combined in index order.
pub fn run_sparse(cfg: &ExperimentConfig) -> Result<Vec<SparseLevel>, CliError> {
    let problem = cfg.problem();
    let exact = exact_of(&problem)?;
    let hierarchy = cfg.hierarchy();
    let mut out = Vec::with_capacity(cfg.sparse_levels.len());
    for &l in &cfg.sparse_levels {
        let (max, min) = cfg.sparse_indices(l);
        let set = build_index_set(max, min)?;
        let details: Vec<DetailSolution> = set
            .members
            .par_iter()
            .map(|(index, _)| solve_detail(&problem, &hierarchy, *index))
            .collect::<Result<_, _>>()?;
        let report =
            combined_error_at_t(&details, &set, problem.data.as_ref(), cfg.degrees, &exact)?;
        let mut detail_errors = Vec::with_capacity(details.len());
        for d in &details {
            let disc = d.discretization(problem.data.as_ref(), cfg.degrees)?;
            let e = error_at(&disc, &d.field, &exact, problem.t_end)?;
            detail_errors.push([e.rel_l2_v, e.rel_l2_sigma]);
        }
        let h_x = details
            .iter()
            .map(|d| d.mesh.spatial.statistics().h_max)
            .fold(f64::INFINITY, f64::min);
        let h_t = details
            .iter()
            .map(|d| d.mesh.temporal.max_step())
            .fold(f64::INFINITY, f64::min);
        out.push(SparseLevel {
            row: ConvergenceRow {
                level: l,
                h_x,
                h_t,
                dofs: report.dof_total,
                error_v: report.rel_l2_v,
                rate_v: None,
                error_sigma: report.rel_l2_sigma,
                rate_sigma: None,
                error_dg: None,
                rate_dg: None,
            },
            detail_errors,
        });
    }
    let mut rows: Vec<ConvergenceRow> = out.iter().map(|s| s.row).collect();
    fill_rates(&mut rows);
    for (s, r) in out.iter_mut().zip(rows) {
        s.row = r;
    }
    check_rows(&out.iter().map(|s| s.row).collect::<Vec<_>>())?;
    Ok(out)
}

fn check_rows(rows: &[ConvergenceRow]) -> Result<(), CliError> {
    for r in rows {
        let errs = [Some(r.error_v), Some(r.error_sigma), r.error_dg];
        if errs.iter().flatten().any(|e| !e.is_finite()) {
            return Err(CliError::Gate(format!(
                "non-finite error at level {}",
                r.level
            )));
        }
    }
    Ok(())
}

/// The mesh of the last configured level.
pub fn single_mesh(cfg: &ExperimentConfig, problem: &Problem) -> Result<SpatialMesh, CliError> {
    let level = *cfg.levels.last().expect("validated non-empty");
    Ok(level_spatial_mesh(
        problem,
        cfg.mode,
        level,
        cfg.degrees.px_sigma,
        cfg.conforming,
    )?)
}

/// Solves on the last configured level with `cfg.slabs` slabs, or
/// `2^level` when unset.
pub fn solve_single(cfg: &ExperimentConfig, problem: &Problem) -> Result<LevelRun, CliError> {
    let level = *cfg.levels.last().expect("validated non-empty");
    let spatial = single_mesh(cfg, problem)?;
    let slabs = cfg.slabs.unwrap_or(1 << level);
    Ok(solve_on(
        spatial,
        problem.t_end,
        slabs,
        cfg.degrees,
        cfg.flux,
        level_width(problem, cfg.mode, level),
        problem.data.as_ref(),
    )?)
}

pub fn run_snapshot(cfg: &ExperimentConfig, t: f64, grid: usize) -> Result<Vec<Sample>, CliError> {
    let problem = cfg.problem();
    let run = solve_single(cfg, &problem)?;
    let disc = Discretization::for_problem(
        &run.mesh,
        cfg.degrees,
        run.flux.clone(),
        problem.data.as_ref(),
    )?;
    Ok(snapshot(&disc, &run.field, t, grid)?)
}

pub fn run_probe(cfg: &ExperimentConfig) -> Result<(ProbeSeries, ArrivalCheck), CliError> {
    let problem = cfg.problem();
    let run = solve_single(cfg, &problem)?;
    let disc = Discretization::for_problem(
        &run.mesh,
        cfg.degrees,
        run.flux.clone(),
        problem.data.as_ref(),
    )?;
    let series = signal_probe(&disc, &run.field, cfg.probe)?;
    let check = arrival_check(&series, cfg.probe_quiet_until, cfg.probe_factor);
    Ok((series, check))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    fs::File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes `<problem>_<tag>.csv` and `.md` into `dir`.
pub fn write_study(
    dir: &Path,
    cfg: &ExperimentConfig,
    tag: &str,
    rows: &[ConvergenceRow],
) -> Result<PathBuf, CliError> {
    let stem = format!("{}_{tag}", cfg.problem.name());
    let csv = dir.join(format!("{stem}.csv"));
    write_convergence(create(&csv)?, rows)?;
    let md = dir.join(format!("{stem}.md"));
    fs::write(&md, convergence_markdown(rows)).map_err(|e| CliError::Io(md, e))?;
    Ok(csv)
}

pub fn write_snapshot_file(
    dir: &Path,
    cfg: &ExperimentConfig,
    t: f64,
    samples: &[Sample],
) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}_snapshot_t{t}.csv", cfg.problem.name()));
    write_snapshot(create(&path)?, samples)?;
    Ok(path)
}

pub fn write_probe_file(
    dir: &Path,
    cfg: &ExperimentConfig,
    series: &ProbeSeries,
) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}_probe.csv", cfg.problem.name()));
    write_probe(create(&path)?, series)?;
    Ok(path)
}
