use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{beta, RayleighIndex, WaveParams};
use crate::geometry::{BoundaryTag, UnitCellMesh};

/// Evanescent orders required beyond the last propagating one.
pub const MIN_EVANESCENT_ORDERS: i64 = 10;

/// Truncated periodic Dirichlet-to-Neumann map with symbol `iβ(j)`, `|j| <= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNOperator {
    alpha: f64,
    m: usize,
    period: f64,
    modes: Vec<RayleighIndex>,
}

impl DtNOperator {
    pub fn new(params: &WaveParams, alpha: f64, m: usize) -> Result<Self> {
        let needed = propagating_range(params, alpha) + MIN_EVANESCENT_ORDERS;
        if (m as i64) < needed {
            return Err(Error::Config(format!(
                "DtN truncation M = {m} too small: orders up to {} propagate, need M >= {needed}",
                needed - MIN_EVANESCENT_ORDERS
            )));
        }
        let mi = m as i64;
        Ok(Self {
            alpha,
            m,
            period: params.period(),
            modes: (-mi..=mi).map(|j| beta(params, alpha, j)).collect(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Orders `-M..=M` in ascending `j`.
    pub fn modes(&self) -> &[RayleighIndex] {
        &self.modes
    }

    /// Symbol `iβ(j)` of mode index `i` (order `j = i - M`); zero at an anomaly.
    pub fn symbol(&self, i: usize) -> Complex64 {
        Complex64::new(0.0, 1.0) * self.modes[i].beta
    }
}

/// Largest `|j|` with `|Λ* j + α| <= k`, or `-1` if no order propagates.
pub fn propagating_range(params: &WaveParams, alpha: f64) -> i64 {
    let top = params.max_propagating_order(alpha);
    (-top..=top)
        .filter(|&j| params.xi(alpha, j).abs() <= params.k())
        .map(i64::abs)
        .max()
        .unwrap_or(-1)
}

/// `∫_0^1 e^{ut} dt` and `∫_0^1 t e^{ut} dt`.
fn edge_moments(u: Complex64) -> (Complex64, Complex64) {
    if u.norm() < 1.0 {
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0); // u^n / n!
        for n in 0..24 {
            i0 += power / (n + 1) as f64;
            i1 += power / (n + 2) as f64;
            power *= u / (n + 1) as f64;
        }
        (i0, i1)
    } else {
        let e = u.exp();
        ((e - 1.0) / u, (e * (u - 1.0) + 1.0) / (u * u))
    }
}

/// Fourier coefficients of the hat functions on the top boundary:
/// `coeffs[i][p] = Λ^{-1/2} ∫ φ_p(x1) e^{-i(Λ* j + α) x1} dx1` for mode `i`.
#[derive(Debug, Clone)]
pub(crate) struct TraceTransform {
    pub top: Vec<usize>,
    pub coeffs: Vec<Vec<Complex64>>,
}

impl TraceTransform {
    pub fn new(mesh: &UnitCellMesh, dtn: &DtNOperator) -> Self {
        let nodes = mesh.nodes();
        let mut edges: Vec<[usize; 2]> = mesh
            .boundary()
            .iter()
            .filter(|e| e.tag == BoundaryTag::Top)
            .map(|e| {
                let [a, b] = e.nodes;
                if nodes[a][0] <= nodes[b][0] {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect();
        edges.sort_by(|p, q| nodes[p[0]][0].total_cmp(&nodes[q[0]][0]));
        let mut top: Vec<usize> = edges.iter().map(|e| e[0]).collect();
        if let Some(last) = edges.last() {
            top.push(last[1]);
        }
        let scale = 1.0 / dtn.period().sqrt();
        let coeffs = dtn
            .modes()
            .iter()
            .map(|mode| {
                let mut row = vec![Complex64::new(0.0, 0.0); top.len()];
                for (k, &[a, b]) in edges.iter().enumerate() {
                    let (xa, xb) = (nodes[a][0], nodes[b][0]);
                    let len = xb - xa;
                    let (i0, i1) = edge_moments(Complex64::new(0.0, -mode.xi * len));
                    let base = Complex64::from_polar(scale * len, -mode.xi * xa);
                    // edges are consecutive, so a sits at k and b at k + 1
                    row[k] += base * (i0 - i1);
                    row[k + 1] += base * i1;
                }
                row
            })
            .collect();
        Self { top, coeffs }
    }

    /// `ĉ(j)` for nodal values given on the whole mesh.
    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|row| row.iter().zip(&self.top).map(|(b, &p)| b * values[p]).sum())
            .collect()
    }
}

/// Fourier coefficients `ĉ(j)`, `j = -M..=M`, of the piecewise-linear top
/// trace, `ĉ(j) = Λ^{-1/2} ∫ v(x1) e^{-i(Λ* j + α) x1} dx1`, integrated exactly.
pub fn trace_fourier_coeffs(
    mesh: &UnitCellMesh,
    values: &[Complex64],
    params: &WaveParams,
    alpha: f64,
    m: usize,
) -> Result<Vec<Complex64>> {
    if values.len() != mesh.nodes().len() {
        return Err(Error::Argument(format!(
            "{} values for {} nodes",
            values.len(),
            mesh.nodes().len()
        )));
    }
    let mi = m as i64;
    let dtn = DtNOperator {
        alpha,
        m,
        period: params.period(),
        modes: (-mi..=mi).map(|j| beta(params, alpha, j)).collect(),
    };
    Ok(TraceTransform::new(mesh, &dtn).apply(values))
}
