//! Special functions, Green's functions and incident fields.

mod green;
mod herglotz;
pub mod special;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use green::{
    bloch_incident_point_source, bloch_incident_point_source_gradient, halfspace_green, halfspace_green_gradient,
    qp_green_spatial, qp_green_spectral, SeriesOptions,
};
pub use herglotz::{
    herglotz_bloch_field, herglotz_bloch_modes, herglotz_eval, HerglotzDensity, HerglotzKernel, DEFAULT_GRAZING_CUTOFF,
};
pub use special::{hankel1_0, hankel1_1, sinc};

/// A point `(x1, x2)` in the plane.
pub type Point = [f64; 2];

/// Wavenumber and period of a scattering configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    k: f64,
    period: f64,
    dual_period: f64,
}

impl WaveParams {
    pub fn new(k: f64, period: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Argument(format!("wavenumber must be positive, got {k}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Argument(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            k,
            period,
            dual_period: TAU / period,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Period `Λ` of the surface.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Dual period `Λ* = 2π/Λ`.
    pub fn dual_period(&self) -> f64 {
        self.dual_period
    }

    /// Horizontal wavenumber `Λ* j + α` of Rayleigh order `j`.
    pub fn xi(&self, alpha: f64, j: i64) -> f64 {
        self.dual_period * j as f64 + alpha
    }

    /// Highest `|j|` that can be propagating for quasimomentum `alpha`.
    pub fn max_propagating_order(&self, alpha: f64) -> i64 {
        ((self.k + alpha.abs()) / self.dual_period).floor() as i64 + 1
    }
}

/// A source point strictly above the mirror line `{x2 = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePoint {
    y: Point,
}

impl SourcePoint {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        if !(y2 > 0.0) || !y1.is_finite() || !y2.is_finite() {
            return Err(Error::Domain(format!(
                "source point must lie above x2 = 0, got ({y1}, {y2})"
            )));
        }
        Ok(Self { y: [y1, y2] })
    }

    pub fn point(&self) -> Point {
        self.y
    }

    /// Reflection `(y1, -y2)` across the mirror line.
    pub fn mirror(&self) -> Point {
        [self.y[0], -self.y[1]]
    }
}

/// One Rayleigh order: horizontal frequency and vertical wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighIndex {
    pub j: i64,
    pub xi: f64,
    /// `sqrt(k² - xi²)` with `Im >= 0`, real and non-negative for `|xi| <= k`.
    pub beta: Complex64,
    /// `|xi| = k` within `1e-12 k`.
    pub anomaly: bool,
}

impl RayleighIndex {
    pub fn is_propagating(&self) -> bool {
        self.beta.im == 0.0
    }
}

/// Relative tolerance for classifying a grazing order.
pub const ANOMALY_TOLERANCE: f64 = 1e-12;

/// Vertical wavenumber of order `j` at quasimomentum `alpha`.
pub fn beta(params: &WaveParams, alpha: f64, j: i64) -> RayleighIndex {
    let xi = params.xi(alpha, j);
    let k = params.k();
    let gap = k - xi.abs();
    // (k - |xi|)(k + |xi|) avoids cancellation near grazing.
    let product = gap * (k + xi.abs());
    let beta = if gap >= 0.0 {
        Complex64::new(product.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-product).sqrt())
    };
    RayleighIndex {
        j,
        xi,
        beta,
        anomaly: gap.abs() <= ANOMALY_TOLERANCE * k,
    }
}
