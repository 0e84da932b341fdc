//! Study configuration, single solves, convergence studies and the `efie`
//! command line.

use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use nalgebra::{DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{assemble_system, AssemblyPath};
use crate::error::{Error, Result, StageExt};
use crate::field::{dipole_field, evaluation_sphere, max_pointwise_error, write_field_csv, Dipole, PotentialEvaluator};
use crate::geometry::{builtin, load_geometry, MultipatchGeometry, BUILTIN_NAMES};
use crate::mesh::Mesh;
use crate::quadrature::QuadratureConfig;
use crate::solver::{gmres_dense, GmresOptions};
use crate::spaces::{build_discrete_space, Superspace, SpaceKind};

/// Exact header of study CSV files.
pub const CSV_HEADER: &str =
    "geometry,kind,p,level,dofs,superspace_dim,iterations,max_pw_error,observed_order,assembly_s,solve_s,config_hash";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_GEOMETRY: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discretization {
    Spline,
    Rt,
    Both,
}

impl Discretization {
    pub fn kinds(self) -> Vec<SpaceKind> {
        match self {
            Discretization::Spline => vec![SpaceKind::Spline],
            Discretization::Rt => vec![SpaceKind::RaviartThomas],
            Discretization::Both => vec![SpaceKind::Spline, SpaceKind::RaviartThomas],
        }
    }
}

impl std::str::FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "both" => Ok(Discretization::Both),
            other => match other.parse::<SpaceKind>()? {
                SpaceKind::Spline => Ok(Discretization::Spline),
                SpaceKind::RaviartThomas => Ok(Discretization::Rt),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleConfig {
    pub x0: [f64; 3],
    pub p0: [f64; 3],
}

/// Where the reference field is compared with the computed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evaluation {
    Sphere { radius: f64, count: usize },
    Points { points: Vec<[f64; 3]> },
}

impl Evaluation {
    pub fn points(&self) -> Vec<Vector3<f64>> {
        match self {
            Evaluation::Sphere { radius, count } => evaluation_sphere(*radius, *count),
            Evaluation::Points { points } => points.iter().map(|p| Vector3::from(*p)).collect(),
        }
    }
}

/// Quadrature settings on top of the per-degree defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    /// Far-pair order; singular and near orders follow at `+1` and `+2`.
    pub order: Option<usize>,
    pub far: Option<usize>,
    pub singular: Option<usize>,
    pub near: Option<usize>,
    pub near_ratio: Option<f64>,
    pub excitation: Option<usize>,
}

impl QuadratureOverrides {
    pub fn resolve(&self, p: usize) -> Result<QuadratureConfig> {
        let mut q = QuadratureConfig::for_degree(p);
        if let Some(o) = self.order {
            q.far = o;
            q.singular = o + 1;
            q.near = o + 2;
        }
        q.far = self.far.unwrap_or(q.far);
        q.singular = self.singular.unwrap_or(q.singular);
        q.near = self.near.unwrap_or(q.near);
        q.near_ratio = self.near_ratio.unwrap_or(q.near_ratio);
        q.excitation = self.excitation.unwrap_or(q.excitation);
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let g = GmresOptions::default();
        Self {
            tol: g.tol,
            restart: g.restart,
            max_iterations: g.max_total,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> GmresOptions {
        GmresOptions {
            tol: self.tol,
            restart: self.restart,
            max_total: self.max_iterations,
        }
    }
}

/// A fully resolved study: every field has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Built-in name or path to a geometry file.
    pub geometry: String,
    pub discretization: Discretization,
    pub degrees: Vec<usize>,
    pub levels: Vec<u32>,
    pub kappa: f64,
    pub dipole: DipoleConfig,
    pub evaluation: Evaluation,
    pub quadrature: QuadratureOverrides,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
    /// Run cells concurrently. Rows are written once all cells finish.
    pub parallel_cells: bool,
}

/// Config file contents; anything missing falls back to a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<String>,
    discretization: Option<Discretization>,
    degrees: Option<Vec<usize>>,
    levels: Option<Vec<u32>>,
    kappa: Option<f64>,
    dipole: Option<RawDipole>,
    evaluation: Option<Evaluation>,
    quadrature: Option<QuadratureOverrides>,
    solver: Option<SolverConfig>,
    output: Option<PathBuf>,
    parallel_cells: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDipole {
    x0: Option<[f64; 3]>,
    p0: Option<[f64; 3]>,
}

/// Dipole placement used when a config names a built-in body but no `x0`.
pub fn default_dipole_position(geometry: &str) -> Option<[f64; 3]> {
    match geometry {
        "sphere" => Some([0.1, 0.1, 0.0]),
        "fichera" => Some([0.25, 0.25, 0.25]),
        _ => None,
    }
}

pub const DEFAULT_POLARIZATION: [f64; 3] = [0.0, 0.1, 0.1];

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Study configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in geometry name or geometry file.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Polynomial degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub degree: Option<Vec<usize>>,
    /// Refinement levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub level: Option<Vec<u32>>,
    /// spline, rt or both.
    #[arg(long)]
    pub kind: Option<Discretization>,
    /// Wavenumber.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Far-pair quadrature order.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Output file: study CSV, or the field dump of a single solve.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    /// Parses a TOML config. Relative geometry paths are taken relative to
    /// `base` when given.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(raw, &Overrides::default(), base)
    }

    /// Reads a config file, if any, and applies command-line overrides.
    pub fn load(overrides: &Overrides) -> Result<Self> {
        let (raw, base) = match &overrides.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let raw: RawConfig =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                (raw, path.parent().map(Path::to_path_buf))
            }
            None => (RawConfig::default(), None),
        };
        Self::resolve(raw, overrides, base.as_deref())
    }

    /// Config for a built-in body with every default.
    pub fn builtin(geometry: &str) -> Result<Self> {
        Self::resolve(
            RawConfig {
                geometry: Some(geometry.to_string()),
                ..RawConfig::default()
            },
            &Overrides::default(),
            None,
        )
    }

    fn resolve(raw: RawConfig, o: &Overrides, base: Option<&Path>) -> Result<Self> {
        let geometry = match (&o.geometry, raw.geometry) {
            (Some(g), _) => g.clone(),
            (None, Some(g)) => match base {
                Some(dir) if !BUILTIN_NAMES.contains(&g.as_str()) && Path::new(&g).is_relative() => {
                    dir.join(&g).to_string_lossy().into_owned()
                }
                _ => g,
            },
            (None, None) => {
                return Err(Error::Config(
                    "no geometry given: set `geometry` to a built-in name or a geometry file, or pass --geometry".into(),
                ))
            }
        };
        let dipole_raw = raw.dipole.unwrap_or_default();
        let x0 = match dipole_raw.x0.or_else(|| default_dipole_position(&geometry)) {
            Some(x0) => x0,
            None => {
                return Err(Error::Config(format!(
                    "geometry '{geometry}' has no default dipole position: set dipole.x0 inside the body"
                )))
            }
        };
        let mut quadrature = raw.quadrature.unwrap_or_default();
        if o.quad_order.is_some() {
            quadrature = QuadratureOverrides {
                order: o.quad_order,
                ..QuadratureOverrides::default()
            };
        }
        let config = StudyConfig {
            geometry,
            discretization: o.kind.or(raw.discretization).unwrap_or(Discretization::Spline),
            degrees: o.degree.clone().or(raw.degrees).unwrap_or_else(|| vec![1]),
            levels: o.level.clone().or(raw.levels).unwrap_or_else(|| vec![0]),
            kappa: o.kappa.or(raw.kappa).unwrap_or(1.0),
            dipole: DipoleConfig {
                x0,
                p0: dipole_raw.p0.unwrap_or(DEFAULT_POLARIZATION),
            },
            evaluation: raw.evaluation.unwrap_or(Evaluation::Sphere {
                radius: 3.0,
                count: 100,
            }),
            quadrature,
            solver: raw.solver.unwrap_or_default(),
            output: o.out.clone().or(raw.output),
            parallel_cells: raw.parallel_cells.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.degrees.iter().any(|&p| p == 0) {
            return Err(Error::Config("degrees must be at least 1".into()));
        }
        if let Some(&l) = self.levels.iter().find(|&&l| l > 12) {
            return Err(Error::Config(format!("level {l} is beyond any dense solve")));
        }
        match &self.evaluation {
            Evaluation::Sphere { radius, count } if !(*radius > 0.0) || *count == 0 => {
                return Err(Error::Config("evaluation sphere needs a positive radius and count".into()))
            }
            Evaluation::Points { points } if points.is_empty() => {
                return Err(Error::Config("evaluation point list is empty".into()))
            }
            _ => {}
        }
        if !(self.solver.tol > 0.0) || self.solver.restart == 0 || self.solver.max_iterations == 0 {
            return Err(Error::Config("solver needs positive tol, restart and max_iterations".into()));
        }
        for &p in &self.degrees {
            self.quadrature.resolve(p).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the resolved config.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn load_geometry(&self) -> Result<MultipatchGeometry> {
        if BUILTIN_NAMES.contains(&self.geometry.as_str()) {
            builtin(&self.geometry)
        } else {
            load_geometry(&self.geometry)
        }
        .stage("geometry")
    }

    pub fn dipole(&self) -> Result<Dipole> {
        Dipole::new(Vector3::from(self.dipole.x0), Vector3::from(self.dipole.p0), self.kappa)
    }

    /// Every `(kind, p, level)` cell in study order.
    pub fn cells(&self) -> Vec<(SpaceKind, usize, u32)> {
        let mut out = Vec::new();
        for kind in self.discretization.kinds() {
            for &p in &self.degrees {
                for &level in &self.levels {
                    out.push((kind, p, level));
                }
            }
        }
        out
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub geometry: String,
    pub kind: SpaceKind,
    pub p: usize,
    pub level: u32,
    pub dofs: usize,
    pub superspace_dim: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub relative_residual: f64,
    pub max_pw_error: f64,
    /// Filled in by studies, from the previous level of the same series.
    pub observed_order: Option<f64>,
    pub assembly_s: f64,
    pub solve_s: f64,
    pub config_hash: String,
}

/// One CSV row. Failed cells keep only their coordinates.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    geometry: &'a str,
    kind: &'static str,
    p: usize,
    level: u32,
    dofs: Option<usize>,
    superspace_dim: Option<usize>,
    iterations: Option<usize>,
    max_pw_error: Option<f64>,
    observed_order: Option<f64>,
    assembly_s: Option<f64>,
    solve_s: Option<f64>,
    config_hash: &'a str,
}

impl<'a> From<&'a ConvergenceRecord> for CsvRow<'a> {
    fn from(r: &'a ConvergenceRecord) -> Self {
        CsvRow {
            geometry: &r.geometry,
            kind: r.kind.name(),
            p: r.p,
            level: r.level,
            dofs: Some(r.dofs),
            superspace_dim: Some(r.superspace_dim),
            iterations: Some(r.iterations),
            max_pw_error: Some(r.max_pw_error),
            observed_order: r.observed_order,
            assembly_s: Some(r.assembly_s),
            solve_s: Some(r.solve_s),
            config_hash: &r.config_hash,
        }
    }
}

/// Computed fields of a solve, for dumping.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub record: ConvergenceRecord,
    pub points: Vec<Vector3<f64>>,
    pub fields: Vec<crate::field::CVector3>,
}

fn geometry_label(config: &StudyConfig) -> String {
    Path::new(&config.geometry)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| config.geometry.clone())
}

/// Builds spaces, assembles, solves and evaluates one cell on a loaded geometry.
pub fn solve_cell(
    config: &StudyConfig,
    geometry: &MultipatchGeometry,
    kind: SpaceKind,
    p: usize,
    level: u32,
) -> Result<SolveOutput> {
    let dipole = config.dipole().stage("dipole")?;
    let quad = config.quadrature.resolve(p).stage("quadrature")?;
    let mesh = Mesh::new(geometry, level);
    let space = build_discrete_space(kind, &mesh, p).stage("space")?;
    info!("{kind} p={p} level={level}: {} dofs, superspace {}", space.dim(), space.superspace().dim());

    let start = Instant::now();
    let incident_error = std::sync::Mutex::new(None);
    let system = assemble_system(&mesh, &space, config.kappa, &quad, AssemblyPath::Projected, |x| {
        dipole_field(&dipole, x).unwrap_or_else(|e| {
            incident_error.lock().unwrap().get_or_insert(e.to_string());
            crate::field::CVector3::zeros()
        })
    })
    .stage("assembly")?;
    if let Some(msg) = incident_error.into_inner().unwrap() {
        return Err(Error::Argument(format!("incident field: {msg}")).at("assembly"));
    }
    let assembly_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let b = DVector::from_vec(system.g.clone());
    let report = gmres_dense(&system.a, &b, &config.solver.options()).stage("solve")?;
    let solve_s = start.elapsed().as_secs_f64();
    info!(
        "{} iterations, {} restarts, residual {:.2e}, {assembly_s:.1}s assembly, {solve_s:.1}s solve",
        report.total_iterations, report.restarts, report.final_relative_residual
    );

    let w_star = space
        .transformation()
        .transpose_mul_vec(report.solution.as_slice())
        .stage("evaluation")?;
    let points = config.evaluation.points();
    let evaluator =
        PotentialEvaluator::new(&mesh, space.superspace(), &w_star, config.kappa, quad.excitation).stage("evaluation")?;
    let fields = evaluator.eval_many(&points).stage("evaluation")?;
    let reference = points
        .iter()
        .map(|x| dipole_field(&dipole, x))
        .collect::<Result<Vec<_>>>()
        .stage("evaluation")?;
    let max_pw_error = max_pointwise_error(&fields, &reference).stage("evaluation")?;

    Ok(SolveOutput {
        record: ConvergenceRecord {
            geometry: geometry_label(config),
            kind,
            p,
            level,
            dofs: space.dim(),
            superspace_dim: space.superspace().dim(),
            iterations: report.total_iterations,
            restarts: report.restarts,
            relative_residual: report.final_relative_residual,
            max_pw_error,
            observed_order: None,
            assembly_s,
            solve_s,
            config_hash: config.hash(),
        },
        points,
        fields,
    })
}

/// Solves a single `(kind, p, level)` cell, loading the geometry.
pub fn run_single(config: &StudyConfig, kind: SpaceKind, p: usize, level: u32) -> Result<ConvergenceRecord> {
    let geometry = config.load_geometry()?;
    solve_cell(config, &geometry, kind, p, level).map(|o| o.record)
}

/// A study cell that failed.
#[derive(Debug)]
pub struct CellFailure {
    pub kind: SpaceKind,
    pub p: usize,
    pub level: u32,
    pub error: Error,
}

impl fmt::Display for CellFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} p={} level={}: {}", self.kind, self.p, self.level, self.error)
    }
}

pub type CellOutcome = std::result::Result<ConvergenceRecord, CellFailure>;

/// `log2(coarse / fine)` per level step.
pub fn observed_order(coarse: (u32, f64), fine: (u32, f64)) -> Option<f64> {
    let steps = fine.0 as f64 - coarse.0 as f64;
    (steps > 0.0 && coarse.1 > 0.0 && fine.1 > 0.0).then(|| (coarse.1 / fine.1).log2() / steps)
}

struct CsvSink {
    writer: csv::Writer<File>,
}

impl CsvSink {
    fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_error)?;
        writer.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
        writer.flush()?;
        Ok(Self { writer })
    }

    fn push(&mut self, outcome: &CellOutcome, label: &str, hash: &str) -> Result<()> {
        let row = match outcome {
            Ok(r) => CsvRow::from(r),
            Err(f) => CsvRow {
                geometry: label,
                kind: f.kind.name(),
                p: f.p,
                level: f.level,
                dofs: None,
                superspace_dim: None,
                iterations: None,
                max_pw_error: None,
                observed_order: None,
                assembly_s: None,
                solve_s: None,
                config_hash: hash,
            },
        };
        self.writer.serialize(row).map_err(csv_error)?;
        self.writer.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Argument(format!("csv: {other:?}")),
    }
}

/// Runs every cell of the study. Rows go to `config.output` as they finish;
/// a failing cell leaves a row with empty results and the study moves on.
pub fn run_study(config: &StudyConfig) -> Result<Vec<CellOutcome>> {
    let geometry = config.load_geometry()?;
    let label = geometry_label(config);
    let hash = config.hash();
    let mut sink = match &config.output {
        Some(path) => Some(CsvSink::create(path)?),
        None => None,
    };
    let cells = config.cells();
    let solve = |&(kind, p, level): &(SpaceKind, usize, u32)| -> CellOutcome {
        solve_cell(config, &geometry, kind, p, level)
            .map(|o| o.record)
            .map_err(|error| CellFailure { kind, p, level, error })
    };
    let mut finish = |outcomes: &mut Vec<CellOutcome>, mut outcome: CellOutcome| -> Result<()> {
        if let Ok(r) = &mut outcome {
            let previous = outcomes.iter().rev().find_map(|o| match o {
                Ok(q) if q.kind == r.kind && q.p == r.p => Some(q),
                Err(f) if f.kind == r.kind && f.p == r.p => None,
                _ => None,
            });
            r.observed_order = previous.and_then(|q| observed_order((q.level, q.max_pw_error), (r.level, r.max_pw_error)));
        }
        if let Err(f) = &outcome {
            warn!("cell failed: {f}");
        }
        if let Some(s) = sink.as_mut() {
            s.push(&outcome, &label, &hash)?;
        }
        outcomes.push(outcome);
        Ok(())
    };
    let mut outcomes = Vec::with_capacity(cells.len());
    if config.parallel_cells {
        let results: Vec<CellOutcome> = cells.par_iter().map(solve).collect();
        for outcome in results {
            finish(&mut outcomes, outcome)?;
        }
    } else {
        for cell in &cells {
            let outcome = solve(cell);
            finish(&mut outcomes, outcome)?;
        }
    }
    Ok(outcomes)
}

/// Dimensions of one space on one level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSummary {
    pub kind: SpaceKind,
    pub p: usize,
    pub level: u32,
    pub elements: usize,
    pub dofs: usize,
    pub superspace_dim: usize,
}

impl SpaceSummary {
    /// Bytes of a dense complex `dim(P) x dim(P)` matrix.
    pub fn superspace_matrix_bytes(&self) -> u64 {
        16 * (self.superspace_dim as u64).pow(2)
    }

    /// Bytes of the dense transformed matrix.
    pub fn system_matrix_bytes(&self) -> u64 {
        16 * (self.dofs as u64).pow(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryInfo {
    pub geometry: String,
    pub patches: usize,
    pub interfaces: usize,
    pub boundary_edges: usize,
    pub area: f64,
    pub spaces: Vec<SpaceSummary>,
}

/// Geometry statistics and space sizes for every cell of the config.
pub fn info(config: &StudyConfig) -> Result<GeometryInfo> {
    let geometry = config.load_geometry()?;
    let area = geometry.area(20).stage("geometry")?;
    let mut spaces = Vec::new();
    for (kind, p, level) in config.cells() {
        let mesh = Mesh::new(&geometry, level);
        let space = build_discrete_space(kind, &mesh, p).stage("space")?;
        spaces.push(SpaceSummary {
            kind,
            p,
            level,
            elements: mesh.num_elements(),
            dofs: space.dim(),
            superspace_dim: Superspace::new(p, mesh.num_elements())?.dim(),
        });
    }
    Ok(GeometryInfo {
        geometry: config.geometry.clone(),
        patches: geometry.num_patches(),
        interfaces: geometry.interfaces().len(),
        boundary_edges: geometry.boundary_edges().len(),
        area,
        spaces,
    })
}

fn human_bytes(b: u64) -> String {
    const UNITS: [&str; 5] = ["B", "KiB", "MiB", "GiB", "TiB"];
    let mut v = b as f64;
    let mut u = 0;
    while v >= 1024.0 && u + 1 < UNITS.len() {
        v /= 1024.0;
        u += 1;
    }
    format!("{v:.1} {}", UNITS[u])
}

impl fmt::Display for GeometryInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "geometry        {}", self.geometry)?;
        writeln!(f, "patches         {}", self.patches)?;
        writeln!(f, "interfaces      {}", self.interfaces)?;
        writeln!(f, "boundary edges  {}", self.boundary_edges)?;
        writeln!(f, "area            {:.12}", self.area)?;
        writeln!(f, "kind    p  level  elements     dofs  superspace  A* memory   A memory")?;
        for s in &self.spaces {
            writeln!(
                f,
                "{:<6} {:>2} {:>6} {:>9} {:>8} {:>11} {:>10} {:>10}",
                s.kind.name(),
                s.p,
                s.level,
                s.elements,
                s.dofs,
                s.superspace_dim,
                human_bytes(s.superspace_matrix_bytes()),
                human_bytes(s.system_matrix_bytes())
            )?;
        }
        Ok(())
    }
}

/// Process exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    if error.stage() == Some("geometry") {
        return EXIT_GEOMETRY;
    }
    match error.root() {
        Error::Config(_) | Error::Argument(_) => EXIT_CONFIG,
        Error::Topology(_) | Error::Conformity(_) | Error::Degenerate { .. } | Error::Parse { .. } => EXIT_GEOMETRY,
        Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "efie", version, about = "EFIE boundary elements on multipatch NURBS surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geometry statistics, space dimensions and matrix memory.
    Info(Overrides),
    /// One solve; prints its record and dumps the field with --out.
    Solve(Overrides),
    /// Every (kind, degree, level) cell, as CSV.
    Study(Overrides),
}

fn print_record(r: &ConvergenceRecord) {
    println!(
        "{} {} p={} level={}: dofs {} (superspace {}), {} iterations ({} restarts, residual {:.2e}), max error {:.6e}, assembly {:.2}s, solve {:.2}s",
        r.geometry,
        r.kind,
        r.p,
        r.level,
        r.dofs,
        r.superspace_dim,
        r.iterations,
        r.restarts,
        r.relative_residual,
        r.max_pw_error,
        r.assembly_s,
        r.solve_s
    );
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Info(o) => {
            let config = StudyConfig::load(&o)?;
            print!("{}", info(&config)?);
            Ok(EXIT_OK)
        }
        Command::Solve(o) => {
            let config = StudyConfig::load(&o)?;
            let cells = config.cells();
            let &[(kind, p, level)] = cells.as_slice() else {
                return Err(Error::Config(format!(
                    "solve takes one kind, degree and level but the config has {} cells; use study",
                    cells.len()
                )));
            };
            let geometry = config.load_geometry()?;
            let out = solve_cell(&config, &geometry, kind, p, level)?;
            print_record(&out.record);
            if let Some(path) = &config.output {
                write_field_csv(path, &out.points, &out.fields)?;
            }
            Ok(EXIT_OK)
        }
        Command::Study(o) => {
            let config = StudyConfig::load(&o)?;
            let outcomes = run_study(&config)?;
            let mut code = EXIT_OK;
            for outcome in &outcomes {
                match outcome {
                    Ok(r) => print_record(r),
                    Err(f) => {
                        eprintln!("error: {f}");
                        if code == EXIT_OK {
                            code = exit_code(&f.error);
                        }
                    }
                }
            }
            Ok(code)
        }
    }
}

/// Runs the command line and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
