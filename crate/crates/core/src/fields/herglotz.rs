use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use super::special::gauss_legendre;
use super::{beta, Point, WaveParams};
use crate::error::{Error, Result};

/// Default angular margin kept away from grazing incidence.
pub const DEFAULT_GRAZING_CUTOFF: f64 = 0.1;

const DEFAULT_ORDER: usize = 32;

/// Angular density of a Herglotz wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HerglotzDensity {
    /// `amplitude · exp(-1/(1 - s²))`, `s = (θ - center)/half_width`, zero for `|s| >= 1`.
    Bump {
        center: f64,
        half_width: f64,
        amplitude: Complex64,
    },
    /// `amplitude · exp(-((θ - center)/width)²)`, cut off at the grazing margin.
    Gaussian {
        center: f64,
        width: f64,
        amplitude: Complex64,
    },
}

impl HerglotzDensity {
    fn value(&self, theta: f64) -> Complex64 {
        match *self {
            Self::Bump {
                center,
                half_width,
                amplitude,
            } => {
                let s = (theta - center) / half_width;
                if s.abs() >= 1.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    amplitude * (-1.0 / (1.0 - s * s)).exp()
                }
            }
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let s = (theta - center) / width;
                amplitude * (-s * s).exp()
            }
        }
    }
}

/// A downward Herglotz wave `v_g(x) = ∫ exp(ik(sin θ x1 - cos θ x2)) g(θ) dθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HerglotzKernel {
    density: HerglotzDensity,
    epsilon: f64,
    order: usize,
    support: (f64, f64),
}

impl HerglotzKernel {
    /// Builds a kernel whose support stays `epsilon` away from `±π/2`.
    pub fn new(density: HerglotzDensity, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
            return Err(Error::Argument(format!(
                "grazing cutoff must lie in (0, π/2), got {epsilon}"
            )));
        }
        let limit = FRAC_PI_2 - epsilon;
        let support = match density {
            HerglotzDensity::Bump { center, half_width, .. } => {
                if !(half_width > 0.0) {
                    return Err(Error::Argument("bump half width must be positive".into()));
                }
                let support = (center - half_width, center + half_width);
                if support.0 < -limit || support.1 > limit {
                    return Err(Error::Grazing(format!(
                        "bump support [{:.4}, {:.4}] reaches within {epsilon} of grazing",
                        support.0, support.1
                    )));
                }
                support
            }
            HerglotzDensity::Gaussian { center, width, .. } => {
                if !(width > 0.0) {
                    return Err(Error::Argument("Gaussian width must be positive".into()));
                }
                if center.abs() >= limit {
                    return Err(Error::Grazing(format!(
                        "Gaussian centre {center} lies within {epsilon} of grazing"
                    )));
                }
                (-limit, limit)
            }
        };
        Ok(Self {
            density,
            epsilon,
            order: DEFAULT_ORDER,
            support,
        })
    }

    /// Gauss-Legendre points per panel.
    pub fn with_order(mut self, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::Argument("quadrature order must be at least 2".into()));
        }
        self.order = order;
        Ok(self)
    }

    pub fn density(&self) -> &HerglotzDensity {
        &self.density
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Closed angular interval outside which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn g(&self, theta: f64) -> Complex64 {
        let (a, b) = self.support;
        if theta < a || theta > b {
            Complex64::new(0.0, 0.0)
        } else {
            self.density.value(theta)
        }
    }
}

/// Evaluates the Herglotz wave at `x` by composite Gauss-Legendre quadrature.
///
/// The panel count grows with `k|x|` so the oscillation stays resolved far
/// from the origin.
pub fn herglotz_eval(kernel: &HerglotzKernel, params: &WaveParams, x: Point) -> Complex64 {
    let (a, b) = kernel.support;
    let k = params.k();
    let phase_range = k * (x[0].abs() + x[1].abs()) * (b - a);
    let panels = (phase_range / TAU).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let rule = gauss_legendre(kernel.order, 0.0, width);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let left = a + width * p as f64;
        for &(t, w) in &rule {
            let theta = left + t;
            let (s, c) = theta.sin_cos();
            sum += w * kernel.g(theta) * Complex64::from_polar(1.0, k * (s * x[0] - c * x[1]));
        }
    }
    sum
}

/// Downward Rayleigh coefficients of the Bloch-transformed Herglotz wave at
/// quasimomentum `alpha`: `(2π/Λ)^{1/2} g(θ_j)/(k cos θ_j)` with `sin θ_j = ξ_j/k`.
///
/// Only propagating orders whose angle falls in the support appear.
pub fn herglotz_bloch_modes(kernel: &HerglotzKernel, params: &WaveParams, alpha: f64) -> Result<Vec<(i64, Complex64)>> {
    let k = params.k();
    let (a, b) = kernel.support;
    let limit = FRAC_PI_2 - kernel.epsilon;
    let scale = (TAU / params.period()).sqrt();
    let top = params.max_propagating_order(alpha);
    let mut modes = Vec::new();
    for j in -top..=top {
        let xi = params.xi(alpha, j);
        if xi.abs() >= k {
            continue;
        }
        let theta = (xi / k).asin();
        if theta <= a || theta >= b {
            continue;
        }
        if theta.abs() > limit {
            return Err(Error::Grazing(format!(
                "order {j} at angle {theta:.6} lies inside the grazing margin"
            )));
        }
        let g = kernel.g(theta);
        if g != Complex64::new(0.0, 0.0) {
            modes.push((j, scale * g / (k * theta.cos())));
        }
    }
    Ok(modes)
}

/// Bloch transform of the Herglotz wave at `x`, summed from its Rayleigh modes.
pub fn herglotz_bloch_field(kernel: &HerglotzKernel, params: &WaveParams, alpha: f64, x: Point) -> Result<Complex64> {
    let modes = herglotz_bloch_modes(kernel, params, alpha)?;
    Ok(modes
        .iter()
        .map(|&(j, d)| {
            let r = beta(params, alpha, j);
            d * Complex64::from_polar(1.0, r.xi * x[0] - r.beta.re * x[1])
        })
        .sum())
}
