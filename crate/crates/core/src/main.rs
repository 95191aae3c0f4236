use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_scatter::geometry::write_mesh;
use floquet_scatter::harness::{
    emit_outputs, run_balanced, run_convergence, selftest, ExperimentConfig, RunProfile, SourceSpec, SurfaceSpec,
};
use floquet_scatter::postproc::ErrorRecord;
use floquet_scatter::qpfem::Mode;
use floquet_scatter::{Error, Result};

#[derive(Parser)]
#[command(
    version,
    about = "Scattering of aperiodic waves by periodic surfaces via the Floquet-Bloch transform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one (N, h) pair and write the synthesized field.
    Solve(Options),
    /// Error matrix over all N and h.
    Converge(Options),
    /// Balanced pairs h = c0 N^(-1/2) and the fitted rate.
    Balanced(Options),
    /// Write the unit-cell mesh for the first h.
    Mesh(Options),
    /// Run quick invariant checks.
    Selftest,
}

#[derive(Args)]
struct Options {
    /// TOML experiment file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// gamma1, gamma2, gamma3, flat:<height> or a profile file.
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long = "H")]
    height: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Point source position `y1,y2`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    source: Option<[f64; 2]>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Preset N and h ladders.
    #[arg(long)]
    profile: Option<RunProfile>,
    /// Leave the runtime column empty so tables compare byte for byte.
    #[arg(long)]
    no_timings: bool,
    /// Keep per-α solutions here and reuse them on the next run.
    #[arg(long)]
    dumps: Option<PathBuf>,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [a, b] => match (a.trim().parse(), b.trim().parse()) {
            (Ok(a), Ok(b)) => Ok([a, b]),
            _ => Err(format!("expected two numbers, got {s:?}")),
        },
        _ => Err(format!("expected `y1,y2`, got {s:?}")),
    }
}

impl Options {
    fn resolve(self, balanced: bool) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if balanced {
            cfg.balanced = true;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(p) = self.profile {
            cfg.apply_profile(p);
        } else if balanced && self.config.is_none() {
            cfg.apply_profile(RunProfile::Ci);
        }
        if let Some(s) = self.surface {
            cfg.surface = SurfaceSpec::Named(s);
        }
        if let Some(v) = self.height {
            cfg.height = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(y) = self.source {
            cfg.source = SourceSpec::Point { y };
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.h {
            cfg.h = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if self.no_timings {
            cfg.timings = false;
        }
        if self.dumps.is_some() {
            cfg.dumps = self.dumps;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Parse(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn report(records: &[ErrorRecord]) -> ExitCode {
    for r in records {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
        println!(
            "N = {:>4}  h = {:<6} relL2 = {:<10} relH1 = {:<10} {}",
            r.n,
            r.h,
            fmt(r.rel_l2),
            fmt(r.rel_h1),
            r.status
        );
    }
    if records.iter().any(|r| r.status.starts_with("failed")) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn solve(cfg: ExperimentConfig) -> Result<ExitCode> {
    if cfg.n.len() != 1 || cfg.h.len() != 1 {
        return Err(Error::Config("solve takes exactly one N and one h".into()));
    }
    let (n, h) = (cfg.n[0], cfg.h[0]);
    let exp = cfg.resolve()?;
    let mesh = exp.mesh(h).map_err(|e| Error::Config(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let start = std::time::Instant::now();
    let field = pool.install(|| exp.synthesize(&mesh, h, n))?;
    let errors = pool.install(|| exp.exact_errors(&mesh, &field))?;
    let record = ErrorRecord {
        surface: match &cfg.surface {
            SurfaceSpec::Named(s) => s.clone(),
            SurfaceSpec::Inline(_) => "inline".into(),
        },
        k: cfg.k,
        n,
        h,
        m: cfg.m,
        rel_l2: errors.map(|e| e.0),
        rel_h1: errors.map(|e| e.1),
        runtime: cfg.timings.then(|| start.elapsed().as_secs_f64()),
        status: "ok".into(),
        hmax: Some(mesh.h()),
    };
    let paths = emit_outputs(std::slice::from_ref(&record), &cfg, None)?;
    for &j in field.shifts() {
        let path = cfg.out.join(format!("field_{j}.txt"));
        let mut out = BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "# x1 x2 re im on cell shift {j}")?;
        for (x, v) in mesh.nodes().iter().zip(field.cell(j).expect("shift")) {
            writeln!(out, "{:e} {:e} {:e} {:e}", x[0], x[1], v.re, v.im)?;
        }
        out.flush()?;
    }
    println!("wrote {} and field files in {}", paths.csv.display(), cfg.out.display());
    Ok(report(&[record]))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(opts) => solve(opts.resolve(false)?),
        Command::Converge(opts) => {
            let cfg = opts.resolve(false)?;
            let records = run_convergence(&cfg)?;
            let paths = emit_outputs(&records, &cfg, None)?;
            println!("wrote {}", paths.csv.display());
            Ok(report(&records))
        }
        Command::Balanced(opts) => {
            let cfg = opts.resolve(true)?;
            let run = run_balanced(&cfg)?;
            let paths = emit_outputs(&run.records, &cfg, run.slope)?;
            println!("wrote {}", paths.csv.display());
            let code = report(&run.records);
            match run.slope {
                Some(s) => println!("fitted slope {s:.3}"),
                None => println!("fewer than two successful pairs, no slope"),
            }
            Ok(code)
        }
        Command::Mesh(opts) => {
            let cfg = opts.resolve(false)?;
            let h = *cfg.h.first().ok_or_else(|| Error::Config("mesh needs --h".into()))?;
            let mesh = cfg.resolve()?.mesh(h).map_err(|e| Error::Config(e.to_string()))?;
            fs::create_dir_all(&cfg.out)?;
            let path = cfg.out.join("mesh.txt");
            let mut out = BufWriter::new(fs::File::create(&path)?);
            write_mesh(&mesh, &mut out)?;
            out.flush()?;
            let q = mesh.quality();
            println!(
                "{} nodes, {} triangles, max edge {:.4}, min angle {:.1} deg -> {}",
                mesh.nodes().len(),
                mesh.triangles().len(),
                mesh.h(),
                q.min_angle_deg,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let checks = selftest()?;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {:<30} {:.3e} (tolerance {:.0e})",
                    c.name, c.value, c.tolerance
                );
            }
            Ok(if checks.iter().all(|c| c.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
