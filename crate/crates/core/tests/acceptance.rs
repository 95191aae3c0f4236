//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines always show up.
//! The slow full-profile balanced run is included with `--include-ignored`
//! or `FLOQUET_PROFILE=full`.

mod common;

use std::f64::consts::TAU;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use floquet_scatter::bloch::{roundtrip_check, CellSequence};
use floquet_scatter::fields::{
    bloch_incident_point_source, halfspace_green, qp_green_spectral, SeriesOptions, SourcePoint, WaveParams,
};
use floquet_scatter::harness::{run_balanced, run_convergence, ExperimentConfig, RunProfile};
use floquet_scatter::qpfem::assemble;
use floquet_scatter::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{flat_mode_a, gamma1_mode_b, garding_cases, garding_defect, random_vector, ratios};

const ROUNDTRIP_TOL: f64 = 1e-12;
const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(1);
const LATTICE_TOL: f64 = 5e-3;
const LATTICE_TERMS: i64 = 50_000;
const MIRROR_TOL: f64 = 1e-10;
const SERIES_BUDGET: Duration = Duration::from_secs(120);
const SCAN_STEP: f64 = 1e-4;
const SCAN_JUMP_FACTOR: f64 = 10.0;
const SCAN_WINDOW: usize = 5;
const SCAN_BUDGET: Duration = Duration::from_secs(10);
const GARDING_TOL: f64 = 1e-10;
const L2_RATIO: (f64, f64) = (3.2, 4.8);
const H1_RATIO: (f64, f64) = (1.7, 2.4);
const FLUX_TOL: f64 = 1e-6;
const TABLE_FACTOR: f64 = 3.0;
const CI_SLOPE_MAX: f64 = -1.0;
const FULL_SLOPE: (f64, f64) = (-1.8, -1.2);

/// Reference relL2 on gamma1, k = 1, y = (-1, 0.4); rows N = 20, 40, 80,
/// columns h = 0.16, 0.08, 0.04.
const TABLE: [(usize, [f64; 3]); 3] = [
    (20, [1.65e-2, 1.59e-2, 1.59e-2]),
    (40, [6.09e-3, 5.70e-3, 5.62e-3]),
    (80, [2.68e-3, 2.10e-3, 2.00e-3]),
];
const TABLE_H: [f64; 3] = [0.16, 0.08, 0.04];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(r: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&r)
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let radius = rng.gen_range(0..=8i64);
        let n = rng.gen_range((2 * radius as usize + 2).max(2)..=64);
        let samples = rng.gen_range(1..=40);
        let mut seq = CellSequence::new(samples);
        for j in -radius..=radius {
            let values = random_vector(&mut rng, samples);
            seq.insert(j, values).unwrap();
        }
        worst = worst.max(roundtrip_check(&seq, n, TAU).unwrap());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= ROUNDTRIP_TOL && elapsed < ROUNDTRIP_BUDGET,
        format!(
            "max deviation {worst:.2e} over 100 sequences in {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn series() -> Outcome {
    let params = WaveParams::new(1.0, TAU).unwrap();
    let opts = SeriesOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let start = Instant::now();
    let (mut lattice_worst, mut mirror_worst) = (0.0f64, 0.0f64);
    let mut taken = 0;
    while taken < 20 {
        let alpha = rng.gen_range(-0.5..0.5);
        let y = SourcePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..1.0)).unwrap();
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(3.0..4.0)];
        // the spectral series is undefined exactly on an anomaly; draw again
        let direct = match qp_green_spectral(&params, alpha, x, y.point(), &opts) {
            Err(Error::Anomaly { .. }) => continue,
            r => r.unwrap(),
        };
        let mirror = match qp_green_spectral(&params, alpha, x, y.mirror(), &opts) {
            Err(Error::Anomaly { .. }) => continue,
            r => r.unwrap(),
        };
        let w = bloch_incident_point_source(&params, alpha, x, &y, &opts).unwrap();
        let expected = (params.period() / TAU).sqrt() * (direct - mirror);
        mirror_worst = mirror_worst.max((w - expected).norm() / expected.norm());

        let mut lattice = Complex64::new(0.0, 0.0);
        for m in -LATTICE_TERMS..LATTICE_TERMS {
            let shift = TAU * m as f64;
            lattice += halfspace_green(&params, [x[0] + shift, x[1]], &y).unwrap()
                * Complex64::from_polar(1.0, -shift * alpha);
        }
        lattice_worst = lattice_worst.max((w - lattice).norm() / w.norm());
        taken += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        lattice_worst <= LATTICE_TOL && mirror_worst <= MIRROR_TOL && elapsed < SERIES_BUDGET,
        format!(
            "lattice sum {lattice_worst:.2e}, mirrored spectral sum {mirror_worst:.2e}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

/// Largest increment relative to the mean of its neighbours within
/// `SCAN_WINDOW` samples on either side. The field has a square-root branch
/// at the anomaly, so a window much wider than that compares a finite kink
/// with increments from far away.
fn jump_ratio(values: &[Complex64]) -> f64 {
    let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let mut worst = 0.0f64;
    for (i, &s) in steps.iter().enumerate() {
        let lo = i.saturating_sub(SCAN_WINDOW);
        let hi = (i + SCAN_WINDOW + 1).min(steps.len());
        let neighbours: Vec<f64> = (lo..hi).filter(|&j| j != i).map(|j| steps[j]).collect();
        let mean = neighbours.iter().sum::<f64>() / neighbours.len() as f64;
        worst = worst.max(s / mean);
    }
    worst
}

fn anomaly_scan() -> Outcome {
    let opts = SeriesOptions::default();
    let y = SourcePoint::new(-1.0, 0.4).unwrap();
    let start = Instant::now();
    let mut worst = 0.0f64;
    // (k, α at which some |α + j| = k)
    for (k, centre) in [(1.0, 0.0), (1.3, 0.3), (2.5, 0.5), (10.2, -0.2)] {
        let params = WaveParams::new(k, TAU).unwrap();
        for x in [[0.5, 2.0], [-1.7, 3.1]] {
            let values: Vec<Complex64> = (-50..=50)
                .map(|i| bloch_incident_point_source(&params, centre + i as f64 * SCAN_STEP, x, &y, &opts).unwrap())
                .collect();
            worst = worst.max(jump_ratio(&values));
        }
    }
    // control: the same scan with a genuine jump of 1e-2 must be caught
    let params = WaveParams::new(1.0, TAU).unwrap();
    let jumped: Vec<Complex64> = (-50..=50)
        .map(|i| {
            let v = bloch_incident_point_source(&params, i as f64 * SCAN_STEP, [0.5, 2.0], &y, &opts).unwrap();
            if i > 0 {
                v + 1e-2
            } else {
                v
            }
        })
        .collect();
    let control = jump_ratio(&jumped);
    let elapsed = start.elapsed();
    outcome(
        worst <= SCAN_JUMP_FACTOR && control > SCAN_JUMP_FACTOR && elapsed < SCAN_BUDGET,
        format!(
            "largest step / local mean {worst:.2} (injected jump scores {control:.1}) in {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn garding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    let cases = garding_cases();
    for case in &cases {
        let sys = assemble(&case.mesh, &case.params, case.alpha, 40, case.mode, &case.incident).unwrap();
        for _ in 0..20 {
            let v = random_vector(&mut rng, sys.dofs());
            worst = worst.max(garding_defect(&sys, &v));
        }
    }
    outcome(
        worst <= GARDING_TOL,
        format!(
            "max relative defect {worst:.2e} over {} systems x 20 vectors",
            cases.len()
        ),
    )
}

fn flat_plane() -> Outcome {
    let (errors, defect, modulus) = flat_mode_a(0.3, &[0.16, 0.08, 0.04, 0.02]);
    let r = ratios(&errors);
    outcome(
        r.iter().all(|&x| within(x, L2_RATIO)) && defect <= FLUX_TOL,
        format!(
            "L2 ratios {}, flux defect {defect:.1e}, |R| = {modulus:.6}",
            fmt_list(&r)
        ),
    )
}

fn gamma1_rates() -> Outcome {
    let hs = [0.16, 0.08, 0.04, 0.02];
    let mut passed = true;
    let mut parts = Vec::new();
    // α = 1e-3 sits next to the anomaly at α = 0
    for alpha in [0.13, -0.31, 1e-3] {
        let errs = gamma1_mode_b(alpha, &hs);
        let l2 = ratios(&errs.iter().map(|e| e.0).collect::<Vec<_>>());
        let h1 = ratios(&errs.iter().map(|e| e.1).collect::<Vec<_>>());
        passed &= l2.iter().all(|&x| within(x, L2_RATIO)) && h1.iter().all(|&x| within(x, H1_RATIO));
        parts.push(format!("alpha {alpha}: L2 {} H1 {}", fmt_list(&l2), fmt_list(&h1)));
    }
    outcome(passed, parts.join("; "))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn table() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        timings: false,
        workers: workers(),
        out: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let records = match run_convergence(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let lookup = |n: usize, h: f64| records.iter().find(|r| r.n == n && r.h == h).and_then(|r| r.rel_l2);
    let mut passed = true;
    let mut worst = 1.0f64;
    for (n, row) in TABLE {
        for (&h, &reference) in TABLE_H.iter().zip(&row) {
            match lookup(n, h) {
                Some(e) => {
                    let factor = (e / reference).max(reference / e);
                    worst = worst.max(factor);
                    passed &= factor <= TABLE_FACTOR;
                }
                None => passed = false,
            }
        }
    }
    for h in TABLE_H {
        let column: Vec<Option<f64>> = TABLE.iter().map(|&(n, _)| lookup(n, h)).collect();
        passed &= column.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b < a));
    }
    outcome(
        passed,
        format!("largest factor from reference table {worst:.2}, decreasing in N"),
    )
}

fn balanced(profile: RunProfile) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        balanced: true,
        timings: false,
        workers: workers(),
        out: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    cfg.apply_profile(profile);
    let run = match run_balanced(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let errors: Vec<String> = run
        .records
        .iter()
        .map(|r| format!("(h {}, N {}) {:.3e}", r.h, r.n, r.rel_l2.unwrap_or(f64::NAN)))
        .collect();
    let Some(slope) = run.slope else {
        return outcome(false, format!("no slope; {}", errors.join(", ")));
    };
    let passed = match profile {
        RunProfile::Ci => slope <= CI_SLOPE_MAX,
        RunProfile::Full => slope <= CI_SLOPE_MAX && within(slope, FULL_SLOPE),
    };
    outcome(passed, format!("slope {slope:.3}; {}", errors.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |w: &str| {
        let out = dir.path().join(format!("workers{w}"));
        let status = Command::new(env!("CARGO_BIN_EXE_floquet-scatter"))
            .args([
                "converge",
                "--no-timings",
                "--N",
                "8,16",
                "--h",
                "0.16,0.08",
                "--workers",
                w,
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        status.success().then(|| fs::read(out.join("results.csv")).unwrap())
    };
    match (run("1"), run("8")) {
        (Some(a), Some(b)) => outcome(a == b, format!("results.csv {} bytes, identical: {}", a.len(), a == b)),
        _ => outcome(false, "CLI run failed".into()),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var("FLOQUET_PROFILE").is_ok_and(|v| v == "full");
    // `cargo test -- --list` and similar probes expect no work
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }

    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        (1, "bloch round trip", roundtrip),
        (2, "incident series", series),
        (3, "continuity across anomalies", anomaly_scan),
        (4, "Garding identity", garding),
        (5, "flat plane rates and flux", flat_plane),
        (6, "gamma1 point-source rates", gamma1_rates),
        (7, "error table", table),
        (8, "balanced slope (ci)", || balanced(RunProfile::Ci)),
        (9, "worker-count determinism", determinism),
    ];
    let mut failures = 0;
    for (id, name, check) in criteria {
        let result = check();
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id} {name}: {}", result.detail);
        failures += usize::from(!result.passed);
    }
    if full {
        let result = balanced(RunProfile::Full);
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!("{verdict} criterion 8 balanced slope (full): {}", result.detail);
        failures += usize::from(!result.passed);
    } else {
        println!("skipped criterion 8 balanced slope (full): pass --include-ignored to run it");
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
