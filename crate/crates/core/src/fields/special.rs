//! Bessel and Hankel functions of orders 0 and 1, `sinc`, and Gauss-Legendre rules.
//!
//! Bessel functions use the ascending series for `z <= 12` and the Hankel
//! asymptotic expansion beyond.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Argument above which the asymptotic expansion replaces the power series.
pub const SERIES_LIMIT: f64 = 12.0;

/// Values `(J0, Y0, J1, Y1)` at a positive real argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j0: f64,
    pub y0: f64,
    pub j1: f64,
    pub y1: f64,
}

impl BesselPair {
    pub fn hankel0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn hankel1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

/// Evaluates `J0, Y0, J1, Y1` at `z > 0`.
pub fn bessel_01(z: f64) -> Result<BesselPair> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "Bessel functions of the second kind need z > 0, got {z}"
        )));
    }
    if z <= SERIES_LIMIT {
        Ok(series(z))
    } else {
        let (h0, h1) = asymptotic(z);
        Ok(BesselPair {
            j0: h0.re,
            y0: h0.im,
            j1: h1.re,
            y1: h1.im,
        })
    }
}

fn series(z: f64) -> BesselPair {
    let q = 0.25 * z * z;
    let half = 0.5 * z;

    // term_m = (-1)^m q^m / (m!)^2 and tail_m = (-1)^m q^m / (m! (m+1)!)
    let mut term = 1.0;
    let mut tail = 1.0;
    let mut harmonic = 0.0;
    let mut j0 = 1.0;
    let mut y0_sum = 0.0;
    let mut j1_sum = 1.0;
    // Y1 needs (H_m + H_{m+1}); start with m = 0: H_0 + H_1 = 1
    let mut y1_sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        tail *= -q / (mf * (mf + 1.0));
        harmonic += 1.0 / mf;
        j0 += term;
        // (-1)^{m+1} H_m q^m/(m!)^2 = -H_m * term
        y0_sum -= harmonic * term;
        j1_sum += tail;
        y1_sum += (harmonic + harmonic + 1.0 / (mf + 1.0)) * tail;
        if term.abs() < 1e-18 * j0.abs().max(1e-300) && tail.abs() < 1e-18 && mf > q.sqrt() {
            break;
        }
    }
    let log_term = (half).ln() + EULER_GAMMA;
    let j1 = half * j1_sum;
    let y0 = FRAC_2_PI * (log_term * j0 + y0_sum);
    let y1 = FRAC_2_PI * log_term * j1 - FRAC_2_PI / z - half * y1_sum / PI;
    BesselPair { j0, y0, j1, y1 }
}

/// Hankel asymptotic expansion for `H0^(1)` and `H1^(1)`.
fn asymptotic(z: f64) -> (Complex64, Complex64) {
    let prefactor = (FRAC_2_PI / z).sqrt();
    let mut sum0 = Complex64::new(1.0, 0.0);
    let mut sum1 = Complex64::new(1.0, 0.0);
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    let i_over = Complex64::new(0.0, 1.0 / (8.0 * z));
    let mut last0 = f64::INFINITY;
    let mut last1 = f64::INFINITY;
    let mut grow0 = false;
    let mut grow1 = false;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let kf = k as f64;
        if !grow0 {
            let next = t0 * i_over * (-(odd * odd)) / kf;
            if next.norm() >= last0 {
                grow0 = true;
            } else {
                last0 = next.norm();
                t0 = next;
                sum0 += t0;
            }
        }
        if !grow1 {
            let next = t1 * i_over * (4.0 - odd * odd) / kf;
            if next.norm() >= last1 {
                grow1 = true;
            } else {
                last1 = next.norm();
                t1 = next;
                sum1 += t1;
            }
        }
        if (grow0 || last0 < 1e-17) && (grow1 || last1 < 1e-17) {
            break;
        }
    }
    let phase0 = Complex64::from_polar(prefactor, z - FRAC_PI_4);
    let phase1 = Complex64::from_polar(prefactor, z - 3.0 * FRAC_PI_4);
    (phase0 * sum0, phase1 * sum1)
}

/// `H0^(1)(z) = J0(z) + i Y0(z)` for `z > 0`.
pub fn hankel1_0(z: f64) -> Result<Complex64> {
    bessel_01(z).map(|b| b.hankel0())
}

/// `H1^(1)(z) = J1(z) + i Y1(z)` for `z > 0`.
pub fn hankel1_1(z: f64) -> Result<Complex64> {
    bessel_01(z).map(|b| b.hankel1())
}

/// `H0^(1)(a) - H0^(1)(b)` for `a, b > 0`, accurate when `a` and `b` nearly coincide.
///
/// Uses a Taylor expansion about the midpoint once `|a - b| <= 1e-6 * max(a, b)`.
/// `diff` must equal `a - b` and may be supplied from a cancellation-free formula.
pub fn hankel1_0_difference(a: f64, b: f64, diff: f64) -> Result<Complex64> {
    if diff == 0.0 {
        // Both arguments must still be valid.
        bessel_01(a)?;
        return Ok(Complex64::new(0.0, 0.0));
    }
    if diff.abs() > 1e-6 * a.max(b) {
        return Ok(hankel1_0(a)? - hankel1_0(b)?);
    }
    let mid = 0.5 * (a + b);
    let pair = bessel_01(mid)?;
    let h0 = pair.hankel0();
    let h1 = pair.hankel1();
    // H0' = -H1,  H0''' = H1 + H0/m - 2 H1/m^2
    let third = h1 + h0 / mid - h1 * (2.0 / (mid * mid));
    Ok(-h1 * diff + third * (diff * diff * diff / 24.0))
}

/// `sin(t)/t` with the removable singularity filled in.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 * (1.0 - t2 / 20.0)
    } else {
        t.sin() / t
    }
}

/// `sinh(t)/t`, the continuation of `sinc` to the imaginary axis.
pub fn sinhc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 + t2 / 6.0 * (1.0 + t2 / 20.0)
    } else {
        t.sinh() / t
    }
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = order.max(1);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((mid - half * x, half * w));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
