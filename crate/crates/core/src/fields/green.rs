use std::f64::consts::TAU;

use num_complex::Complex64;

use super::special::{hankel1_0, hankel1_0_difference, hankel1_1, sinc, sinhc};
use super::{beta, Point, RayleighIndex, SourcePoint, WaveParams};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncation controls for the Rayleigh-series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Relative size below which a pair of tail terms stops the summation.
    pub tol: f64,
    /// Smallest admissible `|x2 - y2|`.
    pub min_separation: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            min_separation: 1e-3,
        }
    }
}

/// Dirichlet Green's function of the half plane `{x2 > 0}`:
/// `G(x, y) = (i/4)[H0(k|x - y|) - H0(k|x - y'|)]`.
pub fn halfspace_green(params: &WaveParams, x: Point, y: &SourcePoint) -> Result<Complex64> {
    let [y1, y2] = y.point();
    let dx = x[0] - y1;
    let r_direct = dx.hypot(x[1] - y2);
    let r_mirror = dx.hypot(x[1] + y2);
    if r_direct == 0.0 || r_mirror == 0.0 {
        return Err(Error::Domain(format!(
            "Green's function evaluated at its source point ({}, {})",
            x[0], x[1]
        )));
    }
    // r_direct² - r_mirror² = -4 x2 y2 exactly, so the difference carries no cancellation.
    let diff = -4.0 * x[1] * y2 / (r_direct + r_mirror);
    let k = params.k();
    let h = hankel1_0_difference(k * r_direct, k * r_mirror, k * diff)?;
    Ok(0.25 * I * h)
}

/// Gradient of [`halfspace_green`] in `x`.
pub fn halfspace_green_gradient(params: &WaveParams, x: Point, y: &SourcePoint) -> Result<[Complex64; 2]> {
    let [y1, y2] = y.point();
    let k = params.k();
    let dx = x[0] - y1;
    let mut grad = [Complex64::new(0.0, 0.0); 2];
    for (height, sign) in [(y2, 1.0), (-y2, -1.0)] {
        let dy = x[1] - height;
        let r = dx.hypot(dy);
        if r == 0.0 {
            return Err(Error::Domain(format!(
                "Green's function evaluated at its source point ({}, {})",
                x[0], x[1]
            )));
        }
        // d/dx H0(k r) = -k H1(k r) (x - y)/r
        let f = -0.25 * I * sign * k * hankel1_1(k * r)? / r;
        grad[0] += f * dx;
        grad[1] += f * dy;
    }
    Ok(grad)
}

/// Sums `term(j)` symmetrically in `j` until a `±n` pair beyond the propagating
/// range falls below `tol` relative to the running sum.
fn rayleigh_sum<F>(params: &WaveParams, alpha: f64, decay_distance: f64, tol: f64, mut term: F) -> Result<Complex64>
where
    F: FnMut(&RayleighIndex) -> Result<Complex64>,
{
    let lambda_star = params.dual_period();
    let propagating = params.max_propagating_order(alpha);
    let cap = (10.0 * (params.k() / lambda_star + (1.0 / tol).ln() / (lambda_star * decay_distance)))
        .ceil()
        .max((propagating + 2) as f64) as i64;
    let mut sum = term(&beta(params, alpha, 0))?;
    for n in 1..=cap {
        let plus = term(&beta(params, alpha, n))?;
        let minus = term(&beta(params, alpha, -n))?;
        sum += plus;
        sum += minus;
        let bound = tol * sum.norm();
        if n > propagating && plus.norm() <= bound && minus.norm() <= bound {
            break;
        }
    }
    Ok(sum)
}

/// Quasiperiodic Green's function in Rayleigh form,
/// `Φ_α(x, y) = i/(2Λ) Σ_j β(j)^{-1} exp(i ξ_j (x1 - y1) + i β(j) |x2 - y2|)`.
///
/// Fails at Wood anomalies, where the sinc form of
/// [`bloch_incident_point_source`] has to be used instead.
pub fn qp_green_spectral(
    params: &WaveParams,
    alpha: f64,
    x: Point,
    y: Point,
    opts: &SeriesOptions,
) -> Result<Complex64> {
    let separation = (x[1] - y[1]).abs();
    if separation < opts.min_separation {
        return Err(Error::Separation {
            separation,
            minimum: opts.min_separation,
        });
    }
    let dx = x[0] - y[0];
    let sum = rayleigh_sum(params, alpha, separation, opts.tol, |r| {
        if r.anomaly {
            return Err(Error::Anomaly { alpha, order: r.j });
        }
        Ok((I * (r.xi * dx) + I * r.beta * separation).exp() / r.beta)
    })?;
    Ok(I / (2.0 * params.period()) * sum)
}

/// Quasiperiodic Green's function as a partial image sum,
/// `(i/4) Σ_{|m| <= jmax} H0(k |x - y - Λ m e1|) exp(i Λ m α)`.
///
/// The image series converges only conditionally; this is a slow cross-check,
/// not an evaluator.
pub fn qp_green_spatial(params: &WaveParams, alpha: f64, x: Point, y: Point, jmax: u64) -> Result<Complex64> {
    let period = params.period();
    let jmax = jmax as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in -jmax..=jmax {
        let shift = period * m as f64;
        let r = (x[0] - y[0] - shift).hypot(x[1] - y[1]);
        if r <= 1e-14 * (1.0 + x[0].abs() + x[1].abs()) {
            return Err(Error::Domain(format!(
                "target ({}, {}) hits the source lattice at image {m}",
                x[0], x[1]
            )));
        }
        sum += hankel1_0(params.k() * r)? * Complex64::from_polar(1.0, shift * alpha);
    }
    Ok(0.25 * I * sum)
}

/// `exp(iβ hi) sin(β lo)/β` for `0 < lo <= hi`, continuous through `β = 0`.
fn layer_factor(beta: Complex64, hi: f64, lo: f64) -> Complex64 {
    if beta.im == 0.0 {
        let b = beta.re;
        Complex64::from_polar(lo * sinc(b * lo), b * hi)
    } else {
        let g = beta.im;
        if g * lo < 1e-4 {
            Complex64::new((-g * hi).exp() * lo * sinhc(g * lo), 0.0)
        } else {
            Complex64::new(((-g * (hi - lo)).exp() - (-g * (hi + lo)).exp()) / (2.0 * g), 0.0)
        }
    }
}

/// Bloch transform of the half-space point source `G(·, y)` in the sinc form,
/// `(2πΛ)^{-1/2} Σ_j exp(i ξ_j (x1 - y1)) exp(iβ(j) x2) sinc(β(j) y2) y2` for `x2 > y2`
/// (the roles of `x2` and `y2` swap below the source height).
///
/// Every term is entire in `β(j)²`, so the sum is finite and continuous across
/// Wood anomalies.
pub fn bloch_incident_point_source(
    params: &WaveParams,
    alpha: f64,
    x: Point,
    y: &SourcePoint,
    opts: &SeriesOptions,
) -> Result<Complex64> {
    let (dx, hi, lo, separation) = split_heights(x, y, opts)?;
    let sum = rayleigh_sum(params, alpha, separation, opts.tol, |r| {
        Ok(Complex64::from_polar(1.0, r.xi * dx) * layer_factor(r.beta, hi, lo))
    })?;
    Ok(sum / (TAU * params.period()).sqrt())
}

/// Gradient of [`bloch_incident_point_source`] with respect to `x`.
pub fn bloch_incident_point_source_gradient(
    params: &WaveParams,
    alpha: f64,
    x: Point,
    y: &SourcePoint,
    opts: &SeriesOptions,
) -> Result<[Complex64; 2]> {
    let (dx, hi, lo, separation) = split_heights(x, y, opts)?;
    let above = x[1] > y.point()[1];
    let grad_x1 = rayleigh_sum(params, alpha, separation, opts.tol, |r| {
        Ok(I * r.xi * Complex64::from_polar(1.0, r.xi * dx) * layer_factor(r.beta, hi, lo))
    })?;
    let grad_x2 = rayleigh_sum(params, alpha, separation, opts.tol, |r| {
        let phase = Complex64::from_polar(1.0, r.xi * dx);
        let vertical = match (above, r.beta.im == 0.0) {
            (true, true) => I * r.beta * layer_factor(r.beta, hi, lo),
            (false, true) => Complex64::from_polar((r.beta.re * lo).cos(), r.beta.re * hi),
            (true, false) => {
                let g = r.beta.im;
                Complex64::new(-0.5 * ((-g * (hi - lo)).exp() - (-g * (hi + lo)).exp()), 0.0)
            }
            (false, false) => {
                let g = r.beta.im;
                Complex64::new(0.5 * ((-g * (hi - lo)).exp() + (-g * (hi + lo)).exp()), 0.0)
            }
        };
        Ok(phase * vertical)
    })?;
    let scale = 1.0 / (TAU * params.period()).sqrt();
    Ok([grad_x1 * scale, grad_x2 * scale])
}

fn split_heights(x: Point, y: &SourcePoint, opts: &SeriesOptions) -> Result<(f64, f64, f64, f64)> {
    if !(x[1] > 0.0) {
        return Err(Error::Domain(format!(
            "incident Bloch transform needs x2 > 0, got {}",
            x[1]
        )));
    }
    let [y1, y2] = y.point();
    let separation = (x[1] - y2).abs();
    if separation < opts.min_separation {
        return Err(Error::Separation {
            separation,
            minimum: opts.min_separation,
        });
    }
    Ok((x[0] - y1, x[1].max(y2), x[1].min(y2), separation))
}
