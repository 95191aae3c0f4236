use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of one period of the surface graph over `[-Λ/2, Λ/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `c1 sin(Λ* t) + c2 cos(2Λ* t) + c0`.
    Sinusoidal { c1: f64, c2: f64, c0: f64 },
    /// Continuous polyline through `(t, height)` vertices, closed periodically.
    PiecewiseLinear { breakpoints: Vec<[f64; 2]> },
    /// `base` except on the closed intervals `[a, b]` where the plateau level
    /// applies; at a jump the higher level wins.
    PiecewiseConstant { base: f64, plateaus: Vec<[f64; 3]> },
    /// Equispaced heights starting at `-Λ/2`, linearly interpolated.
    Tabulated { samples: Vec<f64> },
}

/// A periodic surface `x2 = p(x1)` lying strictly above `{x2 = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceProfile {
    kind: ProfileKind,
    period: f64,
}

impl SurfaceProfile {
    pub fn new(kind: ProfileKind, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Argument(format!("period must be positive, got {period}")));
        }
        let half = 0.5 * period;
        match &kind {
            ProfileKind::Sinusoidal { .. } => {}
            ProfileKind::PiecewiseLinear { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(Error::Argument("piecewise-linear profile needs breakpoints".into()));
                }
                if breakpoints.iter().any(|b| b[0] < -half || b[0] >= half) {
                    return Err(Error::Argument("breakpoints must lie in [-period/2, period/2)".into()));
                }
                if breakpoints.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::Argument("breakpoints must increase strictly".into()));
                }
            }
            ProfileKind::PiecewiseConstant { plateaus, .. } => {
                for p in plateaus {
                    if !(p[0] > -half && p[1] < half && p[0] < p[1]) {
                        return Err(Error::Argument(format!(
                            "plateau [{}, {}] must lie strictly inside the cell",
                            p[0], p[1]
                        )));
                    }
                }
                let mut sorted = plateaus.clone();
                sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
                if sorted.windows(2).any(|w| w[1][0] <= w[0][1]) {
                    return Err(Error::Argument("plateaus must be disjoint".into()));
                }
            }
            ProfileKind::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Argument("tabulated profile needs two samples".into()));
                }
            }
        }
        let profile = Self { kind, period };
        if !(profile.min_height() > 0.0) || !profile.max_height().is_finite() {
            return Err(Error::Domain(format!(
                "surface must stay above x2 = 0, minimum height is {}",
                profile.min_height()
            )));
        }
        Ok(profile)
    }

    /// Smooth test surface `sin t/3 - cos 2t/4 + 1.9`.
    pub fn gamma1() -> Self {
        Self::new(
            ProfileKind::Sinusoidal {
                c1: 1.0 / 3.0,
                c2: -0.25,
                c0: 1.9,
            },
            TAU,
        )
        .expect("built-in profile is valid")
    }

    /// Lipschitz test surface with two bumps and a plateau.
    pub fn gamma2() -> Self {
        let breakpoints = [
            (-1.0, 2.0),
            (-0.6, 2.0),
            (-0.4, 2.4),
            (-0.2, 2.0),
            (0.0, 2.0),
            (0.2, 2.6),
            (0.6, 2.6),
            (0.8, 2.0),
        ]
        .iter()
        .map(|&(t, f)| [t * PI, f])
        .collect();
        Self::new(ProfileKind::PiecewiseLinear { breakpoints }, TAU).expect("built-in profile is valid")
    }

    /// Step surface: 2.5 on `[-π/2, π/2]`, 2 elsewhere.
    pub fn gamma3() -> Self {
        Self::new(
            ProfileKind::PiecewiseConstant {
                base: 2.0,
                plateaus: vec![[-0.5 * PI, 0.5 * PI, 2.5]],
            },
            TAU,
        )
        .expect("built-in profile is valid")
    }

    pub fn flat(height: f64, period: f64) -> Result<Self> {
        Self::new(
            ProfileKind::Sinusoidal {
                c1: 0.0,
                c2: 0.0,
                c0: height,
            },
            period,
        )
    }

    /// Resolves `gamma1`, `gamma2`, `gamma3` or `flat:<height>` (period 2π).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gamma1" => Ok(Self::gamma1()),
            "gamma2" => Ok(Self::gamma2()),
            "gamma3" => Ok(Self::gamma3()),
            other => match other.strip_prefix("flat:") {
                Some(h) => {
                    let h: f64 = h
                        .parse()
                        .map_err(|_| Error::Config(format!("bad flat surface height {h:?}")))?;
                    Self::flat(h, TAU)
                }
                None => Err(Error::Config(format!(
                    "unknown surface {other:?}; expected gamma1, gamma2, gamma3 or flat:<height>"
                ))),
            },
        }
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::PiecewiseConstant { .. })
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, ProfileKind::Sinusoidal { .. })
    }

    /// Maps `t` to the representative in `[-Λ/2, Λ/2)`.
    fn wrap(&self, t: f64) -> f64 {
        let half = 0.5 * self.period;
        let r = (t + half).rem_euclid(self.period) - half;
        if r >= half {
            r - self.period
        } else {
            r
        }
    }

    /// Height of the surface above `t`, extended periodically.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Sinusoidal { c1, c2, c0 } => {
                let w = TAU / self.period;
                c1 * (w * t).sin() + c2 * (2.0 * w * t).cos() + c0
            }
            ProfileKind::PiecewiseLinear { breakpoints } => {
                let t = self.wrap(t);
                polyline(breakpoints, self.period, t)
            }
            ProfileKind::PiecewiseConstant { base, plateaus } => {
                let t = self.wrap(t);
                match plateaus.iter().find(|p| t >= p[0] && t <= p[1]) {
                    Some(p) if t > p[0] && t < p[1] => p[2],
                    Some(p) => p[2].max(*base),
                    None => *base,
                }
            }
            ProfileKind::Tabulated { samples } => {
                let t = self.wrap(t);
                let n = samples.len();
                let s = (t + 0.5 * self.period) / self.period * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let frac = s - i as f64;
                samples[i] * (1.0 - frac) + samples[(i + 1) % n] * frac
            }
        }
    }

    /// Abscissae in `[-Λ/2, Λ/2)` where the profile has a kink or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let half = 0.5 * self.period;
        let mut points = match &self.kind {
            ProfileKind::Sinusoidal { .. } => Vec::new(),
            ProfileKind::PiecewiseLinear { breakpoints } => breakpoints.iter().map(|b| b[0]).collect(),
            ProfileKind::PiecewiseConstant { plateaus, .. } => plateaus.iter().flat_map(|p| [p[0], p[1]]).collect(),
            ProfileKind::Tabulated { samples } => {
                let n = samples.len();
                (0..n).map(|i| -half + self.period * i as f64 / n as f64).collect()
            }
        };
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    /// Distinct heights of a piecewise-constant profile, ascending.
    pub fn levels(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::PiecewiseConstant { base, plateaus } => {
                let mut levels: Vec<f64> = std::iter::once(*base).chain(plateaus.iter().map(|p| p[2])).collect();
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                levels
            }
            _ => Vec::new(),
        }
    }

    pub fn min_height(&self) -> f64 {
        self.extreme(f64::min, f64::INFINITY)
    }

    pub fn max_height(&self) -> f64 {
        self.extreme(f64::max, f64::NEG_INFINITY)
    }

    fn extreme(&self, pick: fn(f64, f64) -> f64, init: f64) -> f64 {
        match &self.kind {
            ProfileKind::Sinusoidal { .. } => {
                // dense sampling; both harmonics are resolved far below 1e-9
                let n = 20_000;
                (0..n)
                    .map(|i| self.eval(-0.5 * self.period + self.period * i as f64 / n as f64))
                    .fold(init, pick)
            }
            ProfileKind::PiecewiseLinear { breakpoints } => breakpoints.iter().map(|b| b[1]).fold(init, pick),
            ProfileKind::PiecewiseConstant { .. } => self.levels().into_iter().fold(init, pick),
            ProfileKind::Tabulated { samples } => samples.iter().copied().fold(init, pick),
        }
    }

    /// `∫ p(t) dt` over one period; exact except for the sinusoidal case,
    /// whose oscillating terms integrate to zero.
    pub fn integral(&self) -> f64 {
        match &self.kind {
            ProfileKind::Sinusoidal { c0, .. } => c0 * self.period,
            ProfileKind::PiecewiseLinear { breakpoints } => {
                let n = breakpoints.len();
                (0..n)
                    .map(|i| {
                        let a = breakpoints[i];
                        let b = breakpoints[(i + 1) % n];
                        let mut dt = b[0] - a[0];
                        if i + 1 == n {
                            dt += self.period;
                        }
                        0.5 * dt * (a[1] + b[1])
                    })
                    .sum()
            }
            ProfileKind::PiecewiseConstant { base, plateaus } => {
                base * self.period + plateaus.iter().map(|p| (p[2] - base) * (p[1] - p[0])).sum::<f64>()
            }
            ProfileKind::Tabulated { samples } => samples.iter().sum::<f64>() * self.period / samples.len() as f64,
        }
    }
}

fn polyline(breakpoints: &[[f64; 2]], period: f64, t: f64) -> f64 {
    let n = breakpoints.len();
    let idx = breakpoints.partition_point(|b| b[0] <= t);
    // segment from breakpoint idx-1 to idx, wrapping around the period
    let (a, b) = if idx == 0 {
        let last = breakpoints[n - 1];
        ([last[0] - period, last[1]], breakpoints[0])
    } else if idx == n {
        let first = breakpoints[0];
        (breakpoints[n - 1], [first[0] + period, first[1]])
    } else {
        (breakpoints[idx - 1], breakpoints[idx])
    };
    if b[0] == a[0] {
        return a[1];
    }
    a[1] + (b[1] - a[1]) * (t - a[0]) / (b[0] - a[0])
}
