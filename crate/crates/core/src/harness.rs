//! Convergence experiments: configuration, parallel α sweeps, error tables and
//! output files.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{brillouin_samples, Synthesis};
use crate::error::{Error, Result};
use crate::fields::{
    halfspace_green, halfspace_green_gradient, HerglotzDensity, HerglotzKernel, Point, SeriesOptions, SourcePoint,
    WaveParams,
};
use crate::geometry::{build_unit_cell_mesh, Locator, ProfileKind, SurfaceProfile, UnitCellMesh};
use crate::postproc::{fit_rate, relative_error, relative_error_with_gradient, ErrorRecord, SynthesizedField};
use crate::qpfem::{assemble, read_solution, solve_qp, write_solution, IncidentSpec, Mode, QPSolution};

/// Balancing constant for `h = c0 N^{-1/2}`; gives (0.04, 20), (0.02, 80), (0.01, 320).
pub fn default_c0() -> f64 {
    2.0 / (5.0 * 5f64.sqrt())
}

/// Named surface (`gamma1`, `gamma2`, `gamma3`, `flat:<h>`), a path to a JSON
/// or TOML profile file, or an inline profile table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurfaceSpec {
    Named(String),
    Inline(ProfileKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityShape {
    Bump,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// Point source of the half-plane Green's function.
    Point { y: [f64; 2] },
    /// Herglotz beam; `width` is the half width of a bump or the standard
    /// deviation of a Gaussian.
    Herglotz {
        shape: DensityShape,
        center: f64,
        width: f64,
        #[serde(default = "unit_amplitude")]
        amplitude: [f64; 2],
        #[serde(default = "default_grazing")]
        epsilon: f64,
    },
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_grazing() -> f64 {
    crate::fields::DEFAULT_GRAZING_CUTOFF
}

/// Preset sizes for the N and h ladders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunProfile {
    /// N ≤ 80, h ≥ 0.04: minutes on one core.
    Ci,
    /// The full N = 20..320, h = 0.16..0.01 matrix: hours.
    Full,
}

impl std::str::FromStr for RunProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Self::Ci),
            "full" => Ok(Self::Full),
            _ => Err(Error::Config(format!("profile must be ci or full, got {s:?}"))),
        }
    }
}

/// Everything needed to reproduce one experiment. Missing TOML keys take the
/// defaults of the reference setup: Γ1, k = 1, y = (-1, 0.4), H = 3, M = 80.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: SurfaceSpec,
    pub k: f64,
    pub period: f64,
    #[serde(rename = "H")]
    pub height: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub source: SourceSpec,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub h: Vec<f64>,
    /// Run the pairs `(c0 N^{-1/2}, N)` instead of the full matrix.
    pub balanced: bool,
    pub c0: f64,
    /// Cells `j + [-Λ/2, Λ/2]` over which errors are measured.
    pub shifts: Vec<i64>,
    pub series_tol: f64,
    pub min_separation: f64,
    /// Record wall-clock times; switch off for byte-reproducible tables.
    pub timings: bool,
    pub workers: usize,
    pub out: PathBuf,
    /// Directory for per-α solution dumps used to resume interrupted runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dumps: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opts = SeriesOptions::default();
        Self {
            surface: SurfaceSpec::Named("gamma1".into()),
            k: 1.0,
            period: TAU,
            height: 3.0,
            m: 80,
            source: SourceSpec::Point { y: [-1.0, 0.4] },
            mode: Mode::B,
            n: vec![20, 40, 80],
            h: vec![0.16, 0.08, 0.04],
            balanced: false,
            c0: default_c0(),
            shifts: vec![0],
            series_tol: opts.tol,
            min_separation: opts.min_separation,
            timings: true,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("out"),
            dumps: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Sets the N and h ladders of a preset. At k ≥ 10 the coarsest mesh is
    /// dropped because it does not resolve the wavelength.
    pub fn apply_profile(&mut self, profile: RunProfile) {
        let (n, mut h) = match (profile, self.balanced) {
            (RunProfile::Ci, false) => (vec![20, 40, 80], vec![0.16, 0.08, 0.04]),
            (RunProfile::Ci, true) => (vec![20, 80], vec![]),
            (RunProfile::Full, false) => (vec![20, 40, 80, 160, 320], vec![0.16, 0.08, 0.04, 0.02, 0.01]),
            (RunProfile::Full, true) => (vec![20, 80, 320], vec![]),
        };
        if self.k >= 10.0 {
            h.retain(|&h| h < 0.16);
        }
        self.n = n;
        self.h = h;
    }

    /// The (h, N) pairs of a run, in output order.
    pub fn cells(&self) -> Vec<(f64, usize)> {
        if self.balanced {
            self.n
                .iter()
                .map(|&n| {
                    // round so that c0/√20 prints as 0.04
                    let h = self.c0 / (n as f64).sqrt();
                    ((h * 1e12).round() / 1e12, n)
                })
                .collect()
        } else {
            self.n
                .iter()
                .flat_map(|&n| self.h.iter().map(move |&h| (h, n)))
                .collect()
        }
    }

    fn surface_name(&self) -> String {
        match &self.surface {
            SurfaceSpec::Named(s) => s.clone(),
            SurfaceSpec::Inline(_) => "inline".into(),
        }
    }

    fn profile(&self) -> Result<SurfaceProfile> {
        match &self.surface {
            SurfaceSpec::Inline(kind) => SurfaceProfile::new(kind.clone(), self.period),
            SurfaceSpec::Named(name) => {
                let path = Path::new(name);
                if !path.exists() {
                    let p = SurfaceProfile::by_name(name)?;
                    if (p.period() - self.period).abs() > 1e-12 * self.period {
                        return Err(Error::Config(format!(
                            "surface {name} has period {}, configuration asks for {}",
                            p.period(),
                            self.period
                        )));
                    }
                    return Ok(p);
                }
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {name}: {e}")))?;
                let kind: ProfileKind = if name.ends_with(".toml") {
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{name}: {e}")))?
                } else {
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{name}: {e}")))?
                };
                SurfaceProfile::new(kind, self.period)
            }
        }
    }

    /// Checks the configuration and builds the objects a run needs.
    pub fn resolve(&self) -> Result<Experiment> {
        let cfg = |msg: String| Error::Config(msg);
        let params = WaveParams::new(self.k, self.period).map_err(|e| cfg(e.to_string()))?;
        let profile = self.profile().map_err(|e| cfg(e.to_string()))?;
        if !(self.height > profile.max_height()) {
            return Err(cfg(format!(
                "H = {} must exceed the surface maximum {}",
                self.height,
                profile.max_height()
            )));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(cfg("N needs at least one positive entry".into()));
        }
        if !self.balanced && (self.h.is_empty() || self.h.iter().any(|&h| !(h > 0.0))) {
            return Err(cfg("h needs at least one positive entry".into()));
        }
        if self.balanced && !(self.c0 > 0.0) {
            return Err(cfg(format!("c0 must be positive, got {}", self.c0)));
        }
        if self.shifts.is_empty() {
            return Err(cfg("at least one cell shift is needed".into()));
        }
        if self.workers == 0 {
            return Err(cfg("workers must be at least 1".into()));
        }
        let incident = match &self.source {
            SourceSpec::Point { y } => {
                if self.mode == Mode::A {
                    return Err(cfg("a point source below the surface drives Mode B only".into()));
                }
                IncidentSpec::PointSourceBelow(SourcePoint::new(y[0], y[1]).map_err(|e| cfg(e.to_string()))?)
            }
            SourceSpec::Herglotz {
                shape,
                center,
                width,
                amplitude,
                epsilon,
            } => {
                let amplitude = Complex64::new(amplitude[0], amplitude[1]);
                let density = match shape {
                    DensityShape::Bump => HerglotzDensity::Bump {
                        center: *center,
                        half_width: *width,
                        amplitude,
                    },
                    DensityShape::Gaussian => HerglotzDensity::Gaussian {
                        center: *center,
                        width: *width,
                        amplitude,
                    },
                };
                IncidentSpec::Herglotz(HerglotzKernel::new(density, *epsilon).map_err(|e| cfg(e.to_string()))?)
            }
        };
        Ok(Experiment {
            config: self.clone(),
            params,
            profile,
            incident,
            series: SeriesOptions {
                tol: self.series_tol,
                min_separation: self.min_separation,
            },
        })
    }
}

/// A validated configuration with its derived objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub params: WaveParams,
    pub profile: SurfaceProfile,
    pub incident: IncidentSpec,
    pub series: SeriesOptions,
}

impl Experiment {
    /// Whether a closed-form total field is available for error measurement.
    pub fn has_exact_reference(&self) -> bool {
        matches!(self.incident, IncidentSpec::PointSourceBelow(_)) && self.config.mode == Mode::B
    }

    pub fn mesh(&self, h: f64) -> Result<UnitCellMesh> {
        build_unit_cell_mesh(&self.profile, self.config.height, h)
    }

    fn dump_path(&self, h: f64, n: usize, m: usize) -> Option<PathBuf> {
        self.config
            .dumps
            .as_ref()
            .map(|dir| dir.join(format!("N{n}_h{h}")).join(format!("alpha{m:05}.txt")))
    }

    fn restore(&self, path: &Path, alpha: f64, nodes: usize) -> Option<QPSolution> {
        let file = fs::File::open(path).ok()?;
        let sol = read_solution(BufReader::new(file)).ok()?;
        (sol.alpha() == alpha && sol.values().len() == nodes && sol.mode() == self.config.mode).then_some(sol)
    }

    fn solve_alpha(&self, mesh: &UnitCellMesh, h: f64, n: usize, m: usize, alpha: f64) -> Result<Vec<Complex64>> {
        let dump = self.dump_path(h, n, m);
        if let Some(sol) = dump.as_ref().and_then(|p| self.restore(p, alpha, mesh.nodes().len())) {
            log::debug!("restored alpha {alpha} from {}", dump.as_ref().unwrap().display());
            return Ok(sol.values().to_vec());
        }
        let system = assemble(
            mesh,
            &self.params,
            alpha,
            self.config.m,
            self.config.mode,
            &self.incident,
        )?;
        let sol = solve_qp(&system)?;
        if let Some(path) = dump {
            let mut out = BufWriter::new(fs::File::create(&path)?);
            write_solution(&sol, &mut out)?;
            out.flush()?;
        }
        Ok(sol.values().to_vec())
    }

    /// Solves all N cell problems on `mesh` and synthesizes the configured cells.
    ///
    /// Quasimomenta are solved in parallel in batches and reduced in ascending
    /// order, so the result does not depend on the number of workers.
    pub fn synthesize(&self, mesh: &UnitCellMesh, h: f64, n: usize) -> Result<SynthesizedField> {
        let grid = brillouin_samples(self.params.period(), n)?;
        if let Some(path) = self.dump_path(h, n, 0) {
            fs::create_dir_all(path.parent().expect("dump file has a parent"))?;
        }
        let mut synthesis = Synthesis::new(&grid, &self.config.shifts, mesh.nodes().len());
        let batch = 4 * rayon::current_num_threads();
        let indexed: Vec<(usize, f64)> = grid.alphas().iter().copied().enumerate().collect();
        for chunk in indexed.chunks(batch) {
            let fields: Vec<Vec<Complex64>> = chunk
                .par_iter()
                .map(|&(m, alpha)| self.solve_alpha(mesh, h, n, m, alpha))
                .collect::<Result<_>>()?;
            for field in &fields {
                synthesis.push(field)?;
            }
        }
        SynthesizedField::from_cells(grid, &self.config.shifts, synthesis.finish())
    }

    /// Relative errors against the closed-form field, `None` without one.
    pub fn exact_errors(&self, mesh: &UnitCellMesh, field: &SynthesizedField) -> Result<Option<(f64, f64)>> {
        if !self.has_exact_reference() {
            return Ok(None);
        }
        let IncidentSpec::PointSourceBelow(y) = &self.incident else {
            unreachable!("exact reference needs a point source");
        };
        let period = self.params.period();
        let mut parts = Vec::new();
        for &j in field.shifts() {
            let shift = |x: Point| [x[0] + j as f64 * period, x[1]];
            let values = field.cell(j).expect("synthesized shift");
            parts.push(relative_error_with_gradient(
                mesh,
                values,
                |x| halfspace_green(&self.params, shift(x), y),
                |x| halfspace_green_gradient(&self.params, shift(x), y),
            )?);
        }
        Ok(Some(combine(&parts)))
    }
}

/// Combines per-cell relative errors of equally weighted cells.
fn combine(parts: &[(f64, f64)]) -> (f64, f64) {
    if parts.len() == 1 {
        return parts[0];
    }
    let n = parts.len() as f64;
    let rms = |f: fn(&(f64, f64)) -> f64| (parts.iter().map(|p| f(p).powi(2)).sum::<f64>() / n).sqrt();
    (rms(|p| p.0), rms(|p| p.1))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn record(cfg: &ExperimentConfig, h: f64, n: usize, mesh: Option<&UnitCellMesh>) -> ErrorRecord {
    ErrorRecord {
        surface: cfg.surface_name(),
        k: cfg.k,
        n,
        h,
        m: cfg.m,
        rel_l2: None,
        rel_h1: None,
        runtime: None,
        status: "ok".into(),
        hmax: mesh.map(|m| m.h()),
    }
}

fn failed(rec: &mut ErrorRecord, e: &Error) {
    log::warn!("N = {}, h = {}: {e}", rec.n, rec.h);
    rec.status = format!("failed: {e}");
}

/// Solves every (N, h) cell of the configuration and measures its error.
///
/// With a point source in Mode B the synthesized field is compared against
/// the half-plane Green's function. Otherwise the finest cell (largest N,
/// smallest h) serves as reference and is itself reported with status
/// `reference`. Failing cells are recorded and the run continues.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ErrorRecord>> {
    let exp = cfg.resolve()?;
    pool(cfg.workers)?.install(|| run_cells(&exp))
}

fn run_cells(exp: &Experiment) -> Result<Vec<ErrorRecord>> {
    let cfg = &exp.config;
    let cells = cfg.cells();
    let mut meshes: Vec<(f64, Result<UnitCellMesh>)> = Vec::new();
    for &(h, _) in &cells {
        if !meshes.iter().any(|(g, _)| *g == h) {
            meshes.push((h, exp.mesh(h)));
        }
    }
    let mesh_for = |h: f64| &meshes.iter().find(|(g, _)| *g == h).expect("mesh built").1;

    let reference = if exp.has_exact_reference() {
        None
    } else {
        let h = cells.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let n = cells.iter().map(|c| c.1).max().expect("cells");
        let mesh = mesh_for(h)
            .as_ref()
            .map_err(|e| Error::Mesh(format!("reference mesh: {e}")))?;
        log::info!("self-convergence reference: N = {n}, h = {h}");
        Some((h, n, mesh, exp.synthesize(mesh, h, n)?))
    };

    let mut records = Vec::with_capacity(cells.len());
    for (h, n) in cells {
        let mesh = mesh_for(h);
        let mut rec = record(cfg, h, n, mesh.as_ref().ok());
        let start = Instant::now();
        let outcome = match mesh {
            Err(e) => Err(Error::Mesh(e.to_string())),
            Ok(mesh) => match &reference {
                None => exp.synthesize(mesh, h, n).and_then(|f| exp.exact_errors(mesh, &f)),
                Some((rh, rn, _, _)) if *rh == h && *rn == n => Ok(None),
                Some((_, _, rmesh, rfield)) => {
                    let field = exp.synthesize(mesh, h, n)?;
                    self_errors(mesh, &field, rmesh, rfield).map(Some)
                }
            },
        };
        match outcome {
            Ok(Some((l2, h1))) => {
                rec.rel_l2 = Some(l2);
                rec.rel_h1 = Some(h1);
            }
            Ok(None) => rec.status = "reference".into(),
            Err(e) => failed(&mut rec, &e),
        }
        if cfg.timings {
            rec.runtime = Some(start.elapsed().as_secs_f64());
        }
        log::info!(
            "N = {n:>4}, h = {h:<5}: relL2 {:?}, relH1 {:?}, {}",
            rec.rel_l2,
            rec.rel_h1,
            rec.status
        );
        records.push(rec);
    }
    Ok(records)
}

fn self_errors(
    mesh: &UnitCellMesh,
    field: &SynthesizedField,
    rmesh: &UnitCellMesh,
    rfield: &SynthesizedField,
) -> Result<(f64, f64)> {
    let locator = Locator::new(rmesh);
    let mut parts = Vec::new();
    for &j in field.shifts() {
        let values = field.cell(j).expect("synthesized shift");
        let reference = rfield.cell(j).expect("synthesized shift");
        parts.push(relative_error(mesh, values, |x| {
            locator
                .extrapolate(rmesh, reference, x)
                .ok_or_else(|| Error::Mesh(format!("({}, {}) lies outside the reference mesh", x[0], x[1])))
        })?);
    }
    Ok(combine(&parts))
}

/// Result of a balanced run: one record per (h, N) pair and the fitted slope
/// of relL2 against N, if at least two pairs succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedRun {
    pub records: Vec<ErrorRecord>,
    pub slope: Option<f64>,
}

/// Runs the pairs `(c0 N^{-1/2}, N)` and fits the error decay rate in N.
pub fn run_balanced(cfg: &ExperimentConfig) -> Result<BalancedRun> {
    if !cfg.balanced {
        return Err(Error::Config("balanced run requested without balanced = true".into()));
    }
    let records = run_convergence(cfg)?;
    let points: Vec<(f64, f64)> = records.iter().filter_map(|r| Some((r.n as f64, r.rel_l2?))).collect();
    let slope = if points.len() >= 2 {
        Some(fit_rate(&points)?)
    } else {
        None
    };
    Ok(BalancedRun { records, slope })
}

pub const CSV_HEADER: [&str; 9] = ["surface", "k", "N", "h", "M", "relL2", "relH1", "runtime", "status"];

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plot: PathBuf,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes `results.csv`, `results.json` and `rates.dat` into `cfg.out`.
///
/// The CSV starts with the resolved configuration as `#` comments, leaving out
/// the worker count and paths so that tables from different machines compare
/// byte for byte.
pub fn emit_outputs(records: &[ErrorRecord], cfg: &ExperimentConfig, slope: Option<f64>) -> Result<OutputPaths> {
    if records.is_empty() {
        return Err(Error::Argument("no records to write".into()));
    }
    fs::create_dir_all(&cfg.out)?;
    let paths = OutputPaths {
        csv: cfg.out.join("results.csv"),
        json: cfg.out.join("results.json"),
        plot: cfg.out.join("rates.dat"),
    };

    let toml::Value::Table(mut echo) = toml::Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))? else {
        unreachable!("a struct serializes to a table");
    };
    for key in ["workers", "out", "dumps"] {
        echo.remove(key);
    }
    let echo = toml::to_string(&echo).map_err(|e| Error::Config(e.to_string()))?;
    let mut file = BufWriter::new(fs::File::create(&paths.csv)?);
    for line in echo.lines() {
        writeln!(file, "# {line}")?;
    }
    let mut csv = csv::Writer::from_writer(file);
    csv.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in records {
        csv.write_record([
            r.surface.clone(),
            r.k.to_string(),
            r.n.to_string(),
            r.h.to_string(),
            r.m.to_string(),
            opt(r.rel_l2),
            opt(r.rel_h1),
            opt(r.runtime),
            r.status.clone(),
        ])
        .map_err(csv_error)?;
    }
    csv.flush()?;

    let json = serde_json::json!({
        "config": cfg,
        "records": records,
        "slope": slope,
    });
    fs::write(
        &paths.json,
        serde_json::to_string_pretty(&json).map_err(|e| Error::Parse(e.to_string()))?,
    )?;

    let mut plot = BufWriter::new(fs::File::create(&paths.plot)?);
    writeln!(plot, "# N relL2 relH1, one block per mesh size")?;
    if let Some(s) = slope {
        writeln!(plot, "# fitted slope {s}")?;
    }
    let mut hs: Vec<f64> = Vec::new();
    for r in records {
        if !hs.contains(&r.h) {
            hs.push(r.h);
        }
    }
    let blocks: Vec<Vec<&ErrorRecord>> = if cfg.balanced {
        vec![records.iter().collect()]
    } else {
        hs.iter()
            .map(|&h| records.iter().filter(|r| r.h == h).collect())
            .collect()
    };
    for block in blocks {
        writeln!(
            plot,
            "\n# h = {}",
            block.iter().map(|r| r.h.to_string()).collect::<Vec<_>>().join(",")
        )?;
        for r in block {
            if let (Some(l2), Some(h1)) = (r.rel_l2, r.rel_h1) {
                writeln!(plot, "{} {l2:e} {h1:e}", r.n)?;
            }
        }
    }
    plot.flush()?;
    Ok(paths)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Reads the records of a `results.csv` back; `hmax` is not part of the table.
pub fn read_csv(path: &Path) -> Result<Vec<ErrorRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_error)?;
    reader.deserialize().map(|r| r.map_err(csv_error)).collect()
}

/// Outcome of one self-test check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Quick invariant checks on small problems: transform round trip, Green's
/// function cross-check, discrete Gårding identity and a flat-plane solve.
pub fn selftest() -> Result<Vec<Check>> {
    use crate::bloch::{roundtrip_check, CellSequence};
    use crate::fields::{bloch_incident_point_source, qp_green_spectral};
    use crate::qpfem::energy_balance;

    let mut checks = Vec::new();

    let mut seq = CellSequence::new(3);
    for j in -3..=3i64 {
        let v = (0..3)
            .map(|i| Complex64::new((j * 3 + i) as f64, (i - j) as f64 * 0.5))
            .collect();
        seq.insert(j, v)?;
    }
    checks.push(Check {
        name: "bloch round trip",
        value: roundtrip_check(&seq, 10, TAU)?,
        tolerance: 1e-12,
    });

    let params = WaveParams::new(1.0, TAU)?;
    let y = SourcePoint::new(-1.0, 0.4)?;
    let opts = SeriesOptions::default();
    let (alpha, x) = (0.21, [0.7, 2.3]);
    let sinc = bloch_incident_point_source(&params, alpha, x, &y, &opts)?;
    let phi = qp_green_spectral(&params, alpha, x, y.point(), &opts)?
        - qp_green_spectral(&params, alpha, x, y.mirror(), &opts)?;
    checks.push(Check {
        name: "green's function forms agree",
        value: (sinc - (params.period() / TAU).sqrt() * phi).norm() / sinc.norm(),
        tolerance: 1e-10,
    });

    let mesh = build_unit_cell_mesh(&SurfaceProfile::gamma1(), 3.0, 0.3)?;
    let sys = assemble(&mesh, &params, alpha, 20, Mode::B, &IncidentSpec::PointSourceBelow(y))?;
    let v: Vec<Complex64> = (0..sys.dofs())
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    let expected: f64 = -(sys.dof_fourier(&v).iter().zip(sys.dtn().modes()))
        .filter(|(_, r)| r.is_propagating())
        .map(|(c, r)| r.beta.re * c.norm_sqr())
        .sum::<f64>();
    checks.push(Check {
        name: "garding identity",
        value: (sys.form(&v, &v).im - expected).abs() / expected.abs(),
        tolerance: 1e-10,
    });

    let flat = build_unit_cell_mesh(&SurfaceProfile::flat(2.0, TAU)?, 3.0, 0.2)?;
    let incident = IncidentSpec::PlaneWaveDown {
        order: 0,
        amplitude: Complex64::new(1.0, 0.0),
    };
    let sol = solve_qp(&assemble(&flat, &params, 0.3, 20, Mode::A, &incident)?)?;
    checks.push(Check {
        name: "flat plane energy balance",
        value: energy_balance(&sol, &incident.downward_modes(&params, 0.3, 3.0)?)?,
        tolerance: 1e-6,
    });
    Ok(checks)
}
