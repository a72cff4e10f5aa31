//! Single solves and parameter sweeps with CSV output.
//!
//! Configuration is a flat `key = value` text whose keys mirror the command
//! line flags; `#` starts a comment. Results are one CSV row per solve with
//! the columns of [`CSV_HEADER`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::{solve_pressure, KrylovOptions, KrylovReport};
use crate::precond::{PrecondConfig, PrecondKind, Preconditioner, RobinSite};
use crate::pressure::PseudoLaplacian;
use crate::q1::{CornerMode, MassKind};
use crate::sem::{Discretization, Mesh2D};

pub const CSV_HEADER: &str =
    "experiment,precond,corners,fdm,N,Nv,Ex,Ey,iterations,wall_time_s,final_rel_residual,converged";

/// Orders swept when none are given.
pub const DEFAULT_ORDERS: [usize; 6] = [6, 8, 10, 12, 14, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Iterations against order on 8x8 for BJ, RAS and ORAS-O0, with and
    /// without corner overlap, dense blocks.
    CornerStudy,
    /// Wall time against order on 16x16 for FDM-based RAS, ORAS-O0, ORAS-O2.
    FdmTiming,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::CornerStudy => "corner-study",
            Self::FdmTiming => "fdm-timing",
        }
    }

    /// `(precond, corner mode)` of each curve; `None` where corners do not apply.
    pub fn curves(self) -> Vec<(PrecondKind, Option<CornerMode>)> {
        match self {
            Self::CornerStudy => vec![
                (PrecondKind::BlockJacobi, None),
                (PrecondKind::Ras, Some(CornerMode::FullTensor)),
                (PrecondKind::Ras, Some(CornerMode::Cross)),
                (PrecondKind::OrasO0, Some(CornerMode::FullTensor)),
                (PrecondKind::OrasO0, Some(CornerMode::Cross)),
            ],
            Self::FdmTiming => [PrecondKind::Ras, PrecondKind::OrasO0, PrecondKind::OrasO2]
                .into_iter()
                .map(|k| (k, Some(CornerMode::FullTensor)))
                .collect(),
        }
    }

    /// Base configuration of the experiment.
    pub fn defaults(self) -> RunConfig {
        match self {
            Self::CornerStudy => RunConfig {
                experiment: self.name().into(),
                elements: (8, 8),
                use_fdm: false,
                repetitions: 1,
                ..RunConfig::default()
            },
            Self::FdmTiming => RunConfig {
                experiment: self.name().into(),
                elements: (16, 16),
                use_fdm: true,
                repetitions: 3,
                ..RunConfig::default()
            },
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "corner-study" => Ok(Self::CornerStudy),
            "fdm-timing" => Ok(Self::FdmTiming),
            other => Err(Error::Config(format!("unknown experiment {other:?} (corner-study, fdm-timing)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsMode {
    /// Seeded noise with the constant component removed.
    #[default]
    Noise,
    /// `b = E p*` for a smooth `p*`.
    Manufactured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Label written to the `experiment` column.
    pub experiment: String,
    pub elements: (usize, usize),
    pub order: usize,
    /// Orders swept by [`run_experiment`].
    pub orders: Vec<usize>,
    pub overlap: usize,
    pub precond: PrecondKind,
    pub corner_mode: CornerMode,
    pub use_fdm: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub domain: (f64, f64),
    pub k_min: Option<f64>,
    pub eta_shift: f64,
    pub robin_site: RobinSite,
    pub mass: MassKind,
    pub rhs: RhsMode,
    /// Timed solves per row; the median is reported.
    pub repetitions: usize,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Self {
            experiment: "solve".into(),
            elements: (8, 8),
            order: 8,
            orders: DEFAULT_ORDERS.to_vec(),
            overlap: 2,
            precond: PrecondKind::OrasO0,
            corner_mode: CornerMode::FullTensor,
            use_fdm: false,
            tol: 1e-8,
            max_iter: 2000,
            seed: 0,
            domain: (tau, tau),
            k_min: None,
            eta_shift: 0.0,
            robin_site: RobinSite::OuterNode,
            mass: MassKind::Consistent,
            rhs: RhsMode::Noise,
            repetitions: 1,
            output: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_switch(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key} expects on or off, got {value:?}"))),
    }
}

fn parse_pair<T: FromStr>(key: &str, value: &str, seps: &[char]) -> Result<(T, T)> {
    let parts: Vec<&str> = value.split(seps).collect();
    match parts.as_slice() {
        [a, b] => Ok((parse(key, a)?, parse(key, b)?)),
        _ => Err(Error::Config(format!("{key} expects two values, got {value:?}"))),
    }
}

impl RunConfig {
    /// Sets one option by its flag name (with or without leading dashes;
    /// `_` and `-` are interchangeable).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "experiment" => self.experiment = v.to_string(),
            "elements" => self.elements = parse_pair(&key, v, &['x', 'X', ','])?,
            "order" => self.order = parse(&key, v)?,
            "orders" => {
                self.orders = v.split(',').map(|s| parse(&key, s)).collect::<Result<_>>()?;
            }
            "overlap" => self.overlap = parse(&key, v)?,
            "precond" => self.precond = v.parse()?,
            "corners" => {
                self.corner_mode = if parse_switch(&key, v)? { CornerMode::FullTensor } else { CornerMode::Cross }
            }
            "fdm" => self.use_fdm = parse_switch(&key, v)?,
            "tol" => self.tol = parse(&key, v)?,
            "max-iter" => self.max_iter = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "domain" => self.domain = parse_pair(&key, v, &[','])?,
            "kmin" | "k-min" => {
                self.k_min = if v == "auto" { None } else { Some(parse(&key, v)?) };
            }
            "eta-shift" => self.eta_shift = parse(&key, v)?,
            "robin-site" => {
                self.robin_site = match v {
                    "outer-node" => RobinSite::OuterNode,
                    "ghost" => RobinSite::Ghost,
                    "augmented" => RobinSite::Augmented,
                    _ => return Err(Error::Config(format!("unknown robin-site {v:?}"))),
                }
            }
            "mass" => {
                self.mass = match v {
                    "consistent" => MassKind::Consistent,
                    "lumped" => MassKind::Lumped,
                    _ => return Err(Error::Config(format!("unknown mass {v:?}"))),
                }
            }
            "rhs" => {
                self.rhs = match v {
                    "noise" => RhsMode::Noise,
                    "manufactured" => RhsMode::Manufactured,
                    _ => return Err(Error::Config(format!("unknown rhs {v:?}"))),
                }
            }
            "repetitions" => self.repetitions = parse(&key, v)?,
            "out" | "output" => self.output = Some(PathBuf::from(v)),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_kv_file(&mut self, path: &Path) -> Result<()> {
        self.apply_kv_text(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.elements.0 == 0 || self.elements.1 == 0 {
            return bad("elements must be positive".into());
        }
        if self.order < 2 {
            return bad(format!("order must be at least 2, got {}", self.order));
        }
        if self.overlap == 0 {
            return bad("overlap must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max-iter must be at least 1".into());
        }
        if !(self.domain.0 > 0.0 && self.domain.1 > 0.0) {
            return bad("domain lengths must be positive".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        Ok(())
    }

    pub fn precond_config(&self) -> PrecondConfig {
        PrecondConfig {
            kind: self.precond,
            overlap: self.overlap,
            corner_mode: self.corner_mode,
            use_fdm: self.use_fdm,
            mass: self.mass,
            k_min: self.k_min,
            eta_shift: self.eta_shift,
            param_scale: 1.0,
            robin_site: self.robin_site,
        }
    }

    pub fn krylov_options(&self) -> KrylovOptions {
        KrylovOptions { tol: self.tol, max_iter: self.max_iter }
    }

    fn corners_label(&self) -> &'static str {
        match (self.precond, self.corner_mode) {
            (PrecondKind::Identity | PrecondKind::BlockJacobi, _) => "na",
            (_, CornerMode::FullTensor) => "on",
            (_, CornerMode::Cross) => "off",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub precond: String,
    pub corners: String,
    pub fdm: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Nv")]
    pub nv: usize,
    #[serde(rename = "Ex")]
    pub ex: usize,
    #[serde(rename = "Ey")]
    pub ey: usize,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub final_rel_residual: f64,
    pub converged: bool,
}

/// A row together with what is not written to the CSV.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub row: ResultRow,
    pub setup_time_s: f64,
    pub report: KrylovReport,
}

/// Builds the operator and the right-hand side and initial guess of `config`.
pub fn build_problem(config: &RunConfig) -> Result<(PseudoLaplacian, Vec<f64>, Vec<f64>)> {
    config.validate()?;
    let mesh = Mesh2D::periodic(config.elements.0, config.elements.1, config.domain.0, config.domain.1)?;
    let op = PseudoLaplacian::new(Discretization::new(mesh, config.order)?);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut b = match config.rhs {
        RhsMode::Noise => (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        RhsMode::Manufactured => {
            let (lx, ly) = config.domain;
            let tau = 2.0 * std::f64::consts::PI;
            let mut p = op.disc().pressure_from_fn(|x, y| (tau * x / lx).sin() * (tau * y / ly).cos()).data;
            op.project_out_mean(&mut p);
            let mut b = vec![0.0; op.len()];
            op.apply_into(&p, &mut b)?;
            b
        }
    };
    op.remove_dual_mean(&mut b);
    let mut x0: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    op.project_out_mean(&mut x0);
    Ok((op, b, x0))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// One solve (repeated `config.repetitions` times for timing).
pub fn run_single_detailed(config: &RunConfig) -> Result<SingleRun> {
    let (op, b, x0) = build_problem(config)?;
    let start = Instant::now();
    let precond = Preconditioner::build(&op, &config.precond_config())?;
    let setup_time_s = start.elapsed().as_secs_f64();
    let opts = config.krylov_options();
    let mut times = Vec::with_capacity(config.repetitions);
    let mut first: Option<KrylovReport> = None;
    for _ in 0..config.repetitions {
        let (_, report) = solve_pressure(&op, &precond, &b, &x0, &opts)?;
        times.push(report.wall_time_s);
        match &first {
            Some(f) if f.iterations != report.iterations => {
                return Err(Error::Krylov(format!(
                    "repeated solve changed iteration count ({} vs {})",
                    f.iterations, report.iterations
                )));
            }
            Some(_) => {}
            None => first = Some(report),
        }
    }
    let report = first.expect("at least one repetition");
    let row = ResultRow {
        experiment: config.experiment.clone(),
        precond: config.precond.name().into(),
        corners: config.corners_label().into(),
        fdm: if config.use_fdm { "on" } else { "off" }.into(),
        n: config.order,
        nv: config.order + 1,
        ex: config.elements.0,
        ey: config.elements.1,
        iterations: report.iterations,
        wall_time_s: median(times),
        final_rel_residual: report.final_relative_residual(),
        converged: report.converged,
    };
    Ok(SingleRun { row, setup_time_s, report })
}

pub fn run_single(config: &RunConfig) -> Result<ResultRow> {
    Ok(run_single_detailed(config)?.row)
}

/// Writes rows with the fixed header and LF line endings.
pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
}

/// Configuration that failed to run, with the error message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub precond: PrecondKind,
    pub corners: String,
    pub order: usize,
    pub message: String,
}

/// `time(RAS) / time(ORAS-O0)` at one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speedup {
    pub order: usize,
    pub ras_time_s: f64,
    pub oras_o0_time_s: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<Failure>,
    pub speedups: Vec<Speedup>,
    /// Every file written.
    pub files: Vec<PathBuf>,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.{suffix}"))
}

/// Runs the full sweep of `kind` over `orders` on top of `base` (whose
/// precond, corners and order are overridden per row) and writes, next to
/// `out`: the CSV, one `<stem>.<precond>-<corners>.dat` per curve, a
/// `<stem>.speedup.csv` for the timing study, and `<stem>.failures.txt` when
/// any configuration errored.
pub fn run_experiment(kind: ExperimentKind, base: &RunConfig, orders: &[usize], out: &Path) -> Result<ExperimentOutput> {
    if orders.is_empty() {
        return Err(Error::Config("order list is empty".into()));
    }
    if let Some(&n) = orders.iter().find(|&&n| n < 4) {
        return Err(Error::Config(format!("experiment orders must be >= 4, got {n}")));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &(precond, corners) in &kind.curves() {
        for &order in orders {
            let mut cfg = base.clone();
            cfg.experiment = kind.name().into();
            cfg.precond = precond;
            cfg.order = order;
            if let Some(mode) = corners {
                cfg.corner_mode = mode;
            }
            match run_single(&cfg) {
                Ok(row) => rows.push(row),
                Err(e) => failures.push(Failure {
                    precond,
                    corners: cfg.corners_label().into(),
                    order,
                    message: e.to_string(),
                }),
            }
        }
    }

    let mut files = Vec::new();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(&rows, fs::File::create(out)?)?;
    files.push(out.to_path_buf());

    for &(precond, corners) in &kind.curves() {
        let label = match corners {
            None => "na",
            Some(CornerMode::FullTensor) => "on",
            Some(CornerMode::Cross) => "off",
        };
        let path = sibling(out, &format!("{}-{label}.dat", precond.name()));
        let mut text = String::from("# Nv iterations wall_time_s\n");
        for r in rows.iter().filter(|r| r.precond == precond.name() && r.corners == label) {
            text += &format!("{} {} {:.6e}\n", r.nv, r.iterations, r.wall_time_s);
        }
        fs::write(&path, text)?;
        files.push(path);
    }

    let mut speedups = Vec::new();
    if kind == ExperimentKind::FdmTiming {
        for &order in orders {
            let time = |k: PrecondKind| rows.iter().find(|r| r.n == order && r.precond == k.name()).map(|r| r.wall_time_s);
            if let (Some(ras), Some(o0)) = (time(PrecondKind::Ras), time(PrecondKind::OrasO0)) {
                speedups.push(Speedup { order, ras_time_s: ras, oras_o0_time_s: o0, speedup: ras / o0 });
            }
        }
        let path = sibling(out, "speedup.csv");
        let mut text = String::from("N,Nv,ras_time_s,oras_o0_time_s,speedup\n");
        for s in &speedups {
            text += &format!("{},{},{},{},{}\n", s.order, s.order + 1, s.ras_time_s, s.oras_o0_time_s, s.speedup);
        }
        fs::write(&path, text)?;
        files.push(path);
    }

    let manifest = sibling(out, "failures.txt");
    if failures.is_empty() {
        if manifest.exists() {
            fs::remove_file(&manifest)?;
        }
    } else {
        let text: String = failures
            .iter()
            .map(|f| format!("{} corners={} N={}: {}\n", f.precond, f.corners, f.order, f.message))
            .collect();
        fs::write(&manifest, text)?;
        files.push(manifest);
    }
    Ok(ExperimentOutput { rows, failures, speedups, files })
}
