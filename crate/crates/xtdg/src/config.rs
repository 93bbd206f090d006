//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use xtdg_core::dg_assembly::DegreeSpec;
use xtdg_core::mesh2d::{CornerSpec, Point2};
use xtdg_core::problems::{make_problem, Problem, ProblemId};
use xtdg_core::sparse_combo::{Hierarchy, LevelIndex};
use xtdg_core::study::{ConvergenceConfig, FluxChoice, MeshMode};

use crate::CliError;

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "XTDG_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub mode: MeshMode,
    pub levels: Vec<usize>,
    pub degrees: DegreeSpec,
    pub flux: FluxChoice,
    pub conforming: bool,
    /// Finest sparse levels `L_x` of a sparse study; `L_t` follows from
    /// `sparse_min`.
    pub sparse_levels: Vec<usize>,
    pub sparse_min: LevelIndex,
    pub base_level: usize,
    pub base_slabs: usize,
    /// Slab count for single runs (snapshot, probe); `2^level` when absent.
    pub slabs: Option<usize>,
    pub corner_delta: Option<f64>,
    pub corner_radius: Option<f64>,
    pub probe: Point2,
    pub probe_quiet_until: f64,
    pub probe_factor: f64,
    pub probe_min_lobes: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for `problem`.
    pub fn defaults(problem: ProblemId) -> Self {
        let (base_level, base_slabs) = match problem {
            ProblemId::Test2 => (2, 4),
            _ => (1, 2),
        };
        ExperimentConfig {
            problem,
            mode: match problem {
                ProblemId::Test4 => MeshMode::CornerRefined,
                _ => MeshMode::Uniform,
            },
            levels: vec![2, 3, 4],
            degrees: DegreeSpec::uniform(1),
            flux: FluxChoice::Constant { a: 1.0, b: 1.0 },
            conforming: true,
            sparse_levels: vec![1, 2, 3, 4],
            sparse_min: LevelIndex::new(0, 1),
            base_level,
            base_slabs,
            slabs: None,
            corner_delta: None,
            corner_radius: None,
            probe: Point2::new(1.0, 0.25),
            probe_quiet_until: 0.3,
            probe_factor: 5.0,
            probe_min_lobes: 2,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    n + 1
                )));
            }
        }
        let problem = ProblemId::parse(
            entries
                .get("problem")
                .ok_or_else(|| CliError::Config("missing key `problem`".into()))?,
        )?;
        let mut cfg = Self::defaults(problem);
        let mut deg = [None::<usize>; 4];
        let (mut alpha, mut beta, mut flux_name) = (1.0, 1.0, String::from("constant"));
        for (key, value) in &entries {
            let v = value.as_str();
            match key.as_str() {
                "problem" => {}
                "mode" => cfg.mode = parse_mode(v)?,
                "levels" => cfg.levels = list(key, v)?,
                "p" => {
                    let p = num(key, v)?;
                    deg = [Some(p); 4];
                }
                "px_v" => deg[0] = Some(num(key, v)?),
                "pt_v" => deg[1] = Some(num(key, v)?),
                "px_sigma" => deg[2] = Some(num(key, v)?),
                "pt_sigma" => deg[3] = Some(num(key, v)?),
                "flux" => flux_name = v.to_string(),
                "alpha" => alpha = num(key, v)?,
                "beta" => beta = num(key, v)?,
                "conforming" => cfg.conforming = num(key, v)?,
                "sparse_levels" => cfg.sparse_levels = list(key, v)?,
                "sparse_min" => {
                    let l: Vec<usize> = list(key, v)?;
                    if l.len() != 2 {
                        return Err(CliError::Config("`sparse_min` needs two levels".into()));
                    }
                    cfg.sparse_min = LevelIndex::new(l[0], l[1]);
                }
                "base_level" => cfg.base_level = num(key, v)?,
                "base_slabs" => cfg.base_slabs = num(key, v)?,
                "slabs" => cfg.slabs = Some(num(key, v)?),
                "corner_delta" => cfg.corner_delta = Some(num(key, v)?),
                "corner_radius" => cfg.corner_radius = Some(num(key, v)?),
                "probe" => {
                    let p: Vec<f64> = list(key, v)?;
                    if p.len() != 2 {
                        return Err(CliError::Config("`probe` needs two coordinates".into()));
                    }
                    cfg.probe = Point2::new(p[0], p[1]);
                }
                "probe_quiet_until" => cfg.probe_quiet_until = num(key, v)?,
                "probe_factor" => cfg.probe_factor = num(key, v)?,
                "probe_min_lobes" => cfg.probe_min_lobes = num(key, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
            }
        }
        if let [Some(a), Some(b), Some(c), Some(d)] = deg {
            cfg.degrees = DegreeSpec::new(a, b, c, d);
        } else if deg.iter().any(Option::is_some) {
            let base = cfg.degrees;
            cfg.degrees = DegreeSpec::new(
                deg[0].unwrap_or(base.px_v),
                deg[1].unwrap_or(base.pt_v),
                deg[2].unwrap_or(base.px_sigma),
                deg[3].unwrap_or(base.pt_sigma),
            );
        }
        cfg.flux = match flux_name.as_str() {
            "constant" => FluxChoice::Constant { a: alpha, b: beta },
            "face_scaled" => FluxChoice::FaceScaled { a: alpha, b: beta },
            "refined_scaled" => FluxChoice::RefinedScaled,
            other => return Err(CliError::Config(format!("unknown flux mode `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.degrees.validate()?;
        if self.levels.is_empty() {
            return Err(CliError::Config("`levels` is empty".into()));
        }
        if self.base_slabs == 0 || self.slabs == Some(0) {
            return Err(CliError::Config("slab counts must be positive".into()));
        }
        if self.mode == MeshMode::CornerRefined
            && make_problem(self.problem).mesh0.corners.is_empty()
        {
            return Err(CliError::Config(format!(
                "problem `{}` has no corners to refine towards",
                self.problem.name()
            )));
        }
        Ok(())
    }

    /// The problem with corner parameters overridden from the config.
    pub fn problem(&self) -> Problem {
        let mut p = make_problem(self.problem);
        for c in &mut p.mesh0.corners {
            *c = CornerSpec {
                location: c.location,
                delta: self.corner_delta.unwrap_or(c.delta),
                radius: self.corner_radius.unwrap_or(c.radius),
            };
        }
        p
    }

    pub fn convergence(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            mode: self.mode,
            levels: self.levels.clone(),
            degrees: self.degrees,
            flux: self.flux,
            conforming: self.conforming,
        }
    }

    pub fn hierarchy(&self) -> Hierarchy {
        Hierarchy {
            mode: self.mode,
            base_level: self.base_level,
            base_slabs: self.base_slabs,
            degrees: self.degrees,
            flux: self.flux,
            conforming: self.conforming,
        }
    }

    /// `(L, L0)` for the sparse level `l_x`.
    pub fn sparse_indices(&self, l_x: usize) -> (LevelIndex, LevelIndex) {
        let min = self.sparse_min;
        (
            LevelIndex::new(l_x, (l_x + min.l_t).saturating_sub(min.l_x)),
            min,
        )
    }

    /// `output_dir`, unless overridden by the environment.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

fn parse_mode(v: &str) -> Result<MeshMode, CliError> {
    match v {
        "uniform" => Ok(MeshMode::Uniform),
        "corner_refined" => Ok(MeshMode::CornerRefined),
        _ => Err(CliError::Config(format!("unknown mesh mode `{v}`"))),
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}
