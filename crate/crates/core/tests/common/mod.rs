//! Closed-form fields and helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use floquet_scatter::fields::{
    beta, bloch_incident_point_source, bloch_incident_point_source_gradient, Point, SeriesOptions, SourcePoint,
    WaveParams,
};
use floquet_scatter::geometry::{build_unit_cell_mesh, SurfaceProfile};
use floquet_scatter::postproc::{relative_error, relative_error_with_gradient};
use floquet_scatter::qpfem::{assemble, energy_balance, solve_qp, IncidentSpec, Mode, QPSystem};
use floquet_scatter::Result;
use num_complex::Complex64;
use rand::Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unit downward mode of order `j` reflected by the Dirichlet plane `x2 = c`,
/// normalized like the incident Rayleigh mode at `x2 = height`.
pub struct FlatReflection {
    xi: f64,
    beta: Complex64,
    c: f64,
    height: f64,
    scale: f64,
}

impl FlatReflection {
    pub fn new(params: &WaveParams, alpha: f64, j: i64, c: f64, height: f64) -> Self {
        let r = beta(params, alpha, j);
        Self {
            xi: r.xi,
            beta: r.beta,
            c,
            height,
            scale: params.period().sqrt().recip(),
        }
    }

    /// Reflection coefficient of the upward mode, phase-referenced at `height`.
    pub fn reflection(&self) -> Complex64 {
        -(2.0 * I * self.beta * (self.height - self.c)).exp()
    }

    fn parts(&self, x: Point) -> (Complex64, Complex64, Complex64) {
        let s = self.scale * Complex64::from_polar(1.0, self.xi * x[0]);
        let down = (-I * self.beta * (x[1] - self.height)).exp();
        let up = self.reflection() * (I * self.beta * (x[1] - self.height)).exp();
        (s, down, up)
    }

    pub fn value(&self, x: Point) -> Result<Complex64> {
        let (s, down, up) = self.parts(x);
        Ok(s * (down + up))
    }

    pub fn gradient(&self, x: Point) -> Result<[Complex64; 2]> {
        let (s, down, up) = self.parts(x);
        Ok([I * self.xi * s * (down + up), I * self.beta * s * (up - down)])
    }
}

/// Relative L² errors over the mesh ladder, plus the flux defect and |R| on the
/// finest mesh.
pub fn flat_mode_a(alpha: f64, hs: &[f64]) -> (Vec<f64>, f64, f64) {
    let params = WaveParams::new(1.0, TAU).unwrap();
    let (c, height) = (2.0, 3.0);
    let profile = SurfaceProfile::flat(c, TAU).unwrap();
    let incident = IncidentSpec::PlaneWaveDown {
        order: 0,
        amplitude: Complex64::new(1.0, 0.0),
    };
    let exact = FlatReflection::new(&params, alpha, 0, c, height);
    let mut errors = Vec::new();
    let (mut defect, mut modulus) = (f64::NAN, f64::NAN);
    for &h in hs {
        let mesh = build_unit_cell_mesh(&profile, height, h).unwrap();
        let sys = assemble(&mesh, &params, alpha, 20, Mode::A, &incident).unwrap();
        let sol = solve_qp(&sys).unwrap();
        let (l2, _) = relative_error(&mesh, sol.values(), |x| exact.value(x)).unwrap();
        errors.push(l2);
        let down = incident.downward_modes(&params, alpha, height).unwrap();
        defect = energy_balance(&sol, &down).unwrap();
        modulus = (sol.rayleigh_coeff(0).unwrap() - down[0].1).norm() / down[0].1.norm();
    }
    (errors, defect, modulus)
}

/// Relative (L², H¹) errors of Mode B on Γ1 against the exact quasiperiodic
/// point-source field, with the H¹ part measured against the true gradient.
pub fn gamma1_mode_b(alpha: f64, hs: &[f64]) -> Vec<(f64, f64)> {
    let params = WaveParams::new(1.0, TAU).unwrap();
    let y = SourcePoint::new(-1.0, 0.4).unwrap();
    let opts = SeriesOptions::default();
    let profile = SurfaceProfile::gamma1();
    hs.iter()
        .map(|&h| {
            let mesh = build_unit_cell_mesh(&profile, 3.0, h).unwrap();
            let sys = assemble(&mesh, &params, alpha, 80, Mode::B, &IncidentSpec::PointSourceBelow(y)).unwrap();
            let sol = solve_qp(&sys).unwrap();
            relative_error_with_gradient(
                &mesh,
                sol.values(),
                |x| bloch_incident_point_source(&params, alpha, x, &y, &opts),
                |x| bloch_incident_point_source_gradient(&params, alpha, x, &y, &opts),
            )
            .unwrap()
        })
        .collect()
}

pub fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Relative mismatch between `Im a(v, v)` and minus the propagating flux of `v`.
pub fn garding_defect(sys: &QPSystem, v: &[Complex64]) -> f64 {
    let flux: f64 = sys
        .dof_fourier(v)
        .iter()
        .zip(sys.dtn().modes())
        .filter(|(_, r)| r.is_propagating())
        .map(|(c, r)| r.beta.re * c.norm_sqr())
        .sum();
    (sys.form(v, v).im + flux).abs() / flux
}

pub struct Case {
    pub mesh: floquet_scatter::geometry::UnitCellMesh,
    pub params: WaveParams,
    pub alpha: f64,
    pub mode: Mode,
    pub incident: IncidentSpec,
}

/// Five assembled configurations covering every profile kind, both modes and
/// a higher wavenumber.
pub fn garding_cases() -> Vec<Case> {
    use floquet_scatter::fields::{HerglotzDensity, HerglotzKernel};
    let y = IncidentSpec::PointSourceBelow(SourcePoint::new(-1.0, 0.4).unwrap());
    let beam = IncidentSpec::Herglotz(
        HerglotzKernel::new(
            HerglotzDensity::Bump {
                center: 0.2,
                half_width: 0.5,
                amplitude: Complex64::new(1.0, 0.0),
            },
            0.1,
        )
        .unwrap(),
    );
    let k1 = WaveParams::new(1.0, TAU).unwrap();
    let k10 = WaveParams::new(10.0, TAU).unwrap();
    let mesh = |p: SurfaceProfile, h: f64| build_unit_cell_mesh(&p, 3.0, h).unwrap();
    vec![
        Case {
            mesh: mesh(SurfaceProfile::gamma1(), 0.2),
            params: k1,
            alpha: 0.13,
            mode: Mode::B,
            incident: y.clone(),
        },
        Case {
            mesh: mesh(SurfaceProfile::gamma2(), 0.2),
            params: k1,
            alpha: -0.42,
            mode: Mode::A,
            incident: beam.clone(),
        },
        Case {
            mesh: mesh(SurfaceProfile::gamma3(), 0.2),
            params: k1,
            alpha: 0.0,
            mode: Mode::B,
            incident: y,
        },
        Case {
            mesh: mesh(SurfaceProfile::flat(2.0, TAU).unwrap(), 0.25),
            params: k1,
            alpha: 0.5,
            mode: Mode::A,
            incident: beam.clone(),
        },
        Case {
            mesh: mesh(SurfaceProfile::gamma1(), 0.1),
            params: k10,
            alpha: 0.27,
            mode: Mode::A,
            incident: beam,
        },
    ]
}
