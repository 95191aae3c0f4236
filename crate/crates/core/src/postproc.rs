//! Norms, relative errors, convergence rates and synthesized cell fields.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{inverse_bloch_discrete, BlochFamily, BrillouinGrid};
use crate::error::{Error, Result};
use crate::fields::Point;
use crate::geometry::UnitCellMesh;

// Element sums are formed chunk by chunk and then added in order, so results do
// not depend on the rayon thread count.
const CHUNK: usize = 2048;

fn element_sum<F>(mesh: &UnitCellMesh, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let n = mesh.triangles().len();
    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let partial: Vec<f64> = starts
        .par_iter()
        .map(|&s| (s..(s + CHUNK).min(n)).map(&f).sum())
        .collect();
    partial.iter().sum()
}

/// Constant gradient of the P1 interpolant on triangle `t`.
fn p1_gradient(mesh: &UnitCellMesh, t: usize, values: &[Complex64]) -> [Complex64; 2] {
    let [a, b, c] = mesh.triangles()[t];
    let [pa, pb, pc] = [a, b, c].map(|i| mesh.nodes()[i]);
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
    let (ua, ub, uc) = (values[a], values[b], values[c]);
    let gx = ((ub - ua) * (pc[1] - pa[1]) - (uc - ua) * (pb[1] - pa[1])) / det;
    let gy = ((uc - ua) * (pb[0] - pa[0]) - (ub - ua) * (pc[0] - pa[0])) / det;
    [gx, gy]
}

fn edge_midpoints(mesh: &UnitCellMesh, t: usize) -> [Point; 3] {
    let [a, b, c] = mesh.triangles()[t].map(|i| mesh.nodes()[i]);
    let mid = |p: Point, q: Point| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    [mid(a, b), mid(b, c), mid(c, a)]
}

fn check_len(mesh: &UnitCellMesh, values: &[Complex64]) -> Result<()> {
    if values.len() != mesh.nodes().len() {
        return Err(Error::Argument(format!(
            "{} nodal values for a mesh with {} nodes",
            values.len(),
            mesh.nodes().len()
        )));
    }
    Ok(())
}

fn l2_squared(mesh: &UnitCellMesh, values: &[Complex64]) -> f64 {
    element_sum(mesh, |t| {
        let [a, b, c] = mesh.triangles()[t].map(|i| values[i]);
        let q = (0.5 * (a + b)).norm_sqr() + (0.5 * (b + c)).norm_sqr() + (0.5 * (c + a)).norm_sqr();
        mesh.triangle_area(t) * q / 3.0
    })
}

fn h1_squared(mesh: &UnitCellMesh, values: &[Complex64]) -> f64 {
    element_sum(mesh, |t| {
        let [gx, gy] = p1_gradient(mesh, t, values);
        mesh.triangle_area(t) * (gx.norm_sqr() + gy.norm_sqr())
    })
}

/// L² norm of the piecewise-linear field with the given nodal values.
///
/// Panics if `values` does not have one entry per node.
pub fn l2_norm(mesh: &UnitCellMesh, values: &[Complex64]) -> f64 {
    assert_eq!(values.len(), mesh.nodes().len(), "one value per node");
    l2_squared(mesh, values).sqrt()
}

/// H¹ seminorm `‖∇v‖` of the piecewise-linear field.
pub fn h1_seminorm(mesh: &UnitCellMesh, values: &[Complex64]) -> f64 {
    assert_eq!(values.len(), mesh.nodes().len(), "one value per node");
    h1_squared(mesh, values).sqrt()
}

fn sample<F>(mesh: &UnitCellMesh, reference: F) -> Result<Vec<Complex64>>
where
    F: Fn(Point) -> Result<Complex64> + Sync,
{
    mesh.nodes().par_iter().map(|&x| reference(x)).collect()
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den > 0.0) {
        return Err(Error::Domain(format!("reference field has zero {what} norm")));
    }
    Ok(num / den)
}

/// Relative L² and H¹-seminorm errors of `numeric` against the nodal
/// interpolant of `reference`.
pub fn relative_error<F>(mesh: &UnitCellMesh, numeric: &[Complex64], reference: F) -> Result<(f64, f64)>
where
    F: Fn(Point) -> Result<Complex64> + Sync,
{
    check_len(mesh, numeric)?;
    let exact = sample(mesh, reference)?;
    let diff: Vec<Complex64> = numeric.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let l2 = ratio(l2_squared(mesh, &diff).sqrt(), l2_squared(mesh, &exact).sqrt(), "L2")?;
    let h1 = ratio(h1_squared(mesh, &diff).sqrt(), h1_squared(mesh, &exact).sqrt(), "H1")?;
    Ok((l2, h1))
}

/// Like [`relative_error`], but the H¹ part compares against the true gradient
/// at the edge midpoints instead of the gradient of the interpolant.
///
/// On structured meshes the finite element solution is superclose to the nodal
/// interpolant, so only this variant shows the first-order gradient error.
pub fn relative_error_with_gradient<F, G>(
    mesh: &UnitCellMesh,
    numeric: &[Complex64],
    reference: F,
    gradient: G,
) -> Result<(f64, f64)>
where
    F: Fn(Point) -> Result<Complex64> + Sync,
    G: Fn(Point) -> Result<[Complex64; 2]> + Sync,
{
    check_len(mesh, numeric)?;
    let exact = sample(mesh, reference)?;
    let diff: Vec<Complex64> = numeric.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let l2 = ratio(l2_squared(mesh, &diff).sqrt(), l2_squared(mesh, &exact).sqrt(), "L2")?;

    let n = mesh.triangles().len();
    let per_element: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|t| -> Result<(f64, f64)> {
            let gh = p1_gradient(mesh, t, numeric);
            let (mut err, mut norm) = (0.0, 0.0);
            for x in edge_midpoints(mesh, t) {
                let g = gradient(x)?;
                err += (gh[0] - g[0]).norm_sqr() + (gh[1] - g[1]).norm_sqr();
                norm += g[0].norm_sqr() + g[1].norm_sqr();
            }
            let w = mesh.triangle_area(t) / 3.0;
            Ok((w * err, w * norm))
        })
        .collect::<Result<_>>()?;
    // ordered reduction, independent of scheduling
    let (err, norm) = per_element.iter().fold((0.0, 0.0), |(e, m), &(a, b)| (e + a, m + b));
    let h1 = ratio(err.sqrt(), norm.sqrt(), "H1")?;
    Ok((l2, h1))
}

/// Least-squares slope of `log(error)` against `log(n)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Argument("a rate needs at least two points".into()));
    }
    if let Some(&(n, e)) = points.iter().find(|&&(n, e)| !(n > 0.0 && e > 0.0)) {
        return Err(Error::Domain(format!("cannot take logs of ({n}, {e})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

/// One row of a convergence study. Errors are absent for failed cells and for
/// the reference cell of a self-convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub surface: String,
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Requested mesh size.
    pub h: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "relL2")]
    pub rel_l2: Option<f64>,
    #[serde(rename = "relH1")]
    pub rel_h1: Option<f64>,
    /// Wall-clock seconds; absent when timings are disabled.
    pub runtime: Option<f64>,
    pub status: String,
    /// Longest edge of the mesh actually used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hmax: Option<f64>,
}

impl ErrorRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Nodal values of a synthesized field on the shifted cells `j + [0, Λ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedField {
    grid: BrillouinGrid,
    shifts: Vec<i64>,
    cells: Vec<Vec<Complex64>>,
}

impl SynthesizedField {
    /// Applies the discrete inverse transform shift by shift.
    pub fn from_family(family: &BlochFamily, shifts: &[i64]) -> Self {
        let cells = shifts.iter().map(|&j| inverse_bloch_discrete(family, j)).collect();
        Self {
            grid: family.grid().clone(),
            shifts: shifts.to_vec(),
            cells,
        }
    }

    /// Wraps cells already produced by a streaming synthesis over `grid`.
    pub fn from_cells(grid: BrillouinGrid, shifts: &[i64], cells: Vec<Vec<Complex64>>) -> Result<Self> {
        if cells.len() != shifts.len() {
            return Err(Error::Argument(format!(
                "{} cells for {} shifts",
                cells.len(),
                shifts.len()
            )));
        }
        Ok(Self {
            grid,
            shifts: shifts.to_vec(),
            cells,
        })
    }

    pub fn grid(&self) -> &BrillouinGrid {
        &self.grid
    }

    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn cell(&self, shift: i64) -> Option<&[Complex64]> {
        let i = self.shifts.iter().position(|&j| j == shift)?;
        Some(&self.cells[i])
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use super::*;
    use crate::geometry::{build_unit_cell_mesh, ProfileKind, SurfaceProfile};

    fn flat_mesh() -> UnitCellMesh {
        build_unit_cell_mesh(&SurfaceProfile::flat(2.0, TAU).unwrap(), 3.0, 0.3).unwrap()
    }

    fn nodal(mesh: &UnitCellMesh, f: impl Fn(Point) -> f64) -> Vec<Complex64> {
        mesh.nodes().iter().map(|&x| Complex64::new(f(x), 0.0)).collect()
    }

    #[test]
    fn constant_field() {
        let mesh = flat_mesh();
        let one = nodal(&mesh, |_| 1.0);
        assert!((l2_norm(&mesh, &one).powi(2) - TAU).abs() < 1e-12);
        assert_eq!(h1_seminorm(&mesh, &one), 0.0);
    }

    #[test]
    fn linear_field_on_polygon() {
        // tent-shaped surface; integrate x1² and |∇x1|² exactly
        let p = SurfaceProfile::new(
            ProfileKind::PiecewiseLinear {
                breakpoints: vec![[-PI, 1.0], [0.0, 2.0]],
            },
            TAU,
        )
        .unwrap();
        let mesh = build_unit_cell_mesh(&p, 3.0, 0.25).unwrap();
        let v = nodal(&mesh, |x| x[0]);
        // column height 1 + |x1|/π over [-π, π]
        let exact = 7.0 * PI.powi(3) / 6.0;
        assert!((l2_norm(&mesh, &v).powi(2) - exact).abs() < 1e-10 * exact);
        let area = 1.5 * TAU;
        assert!((h1_seminorm(&mesh, &v).powi(2) - area).abs() < 1e-10 * area);
    }

    #[test]
    fn relative_error_basics() {
        let mesh = flat_mesh();
        let f = |x: Point| Ok(Complex64::new(x[0].sin(), x[1]));
        let v: Vec<_> = mesh.nodes().iter().map(|&x| f(x).unwrap()).collect();
        assert_eq!(relative_error(&mesh, &v, f).unwrap(), (0.0, 0.0));

        let perturbed: Vec<_> = v.iter().map(|z| z * 1.01).collect();
        let (l2, h1) = relative_error(&mesh, &perturbed, f).unwrap();
        let c = Complex64::new(0.3, -2.0);
        let scaled: Vec<_> = perturbed.iter().map(|z| z * c).collect();
        let (l2c, h1c) = relative_error(&mesh, &scaled, |x| Ok(f(x)? * c)).unwrap();
        assert!((l2 - l2c).abs() < 1e-14 && (h1 - h1c).abs() < 1e-14);
        assert!((l2 - 0.01).abs() < 1e-12);

        let zero = relative_error(&mesh, &v, |_| Ok(Complex64::new(0.0, 0.0)));
        assert!(matches!(zero, Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_variant_agrees_on_linear_fields() {
        let mesh = flat_mesh();
        let f = |x: Point| Ok(Complex64::new(2.0 * x[0] - x[1], 0.5));
        let g = |_: Point| Ok([Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let v: Vec<_> = mesh.nodes().iter().map(|&x| f(x).unwrap() * 1.1).collect();
        let a = relative_error(&mesh, &v, f).unwrap();
        let b = relative_error_with_gradient(&mesh, &v, f, g).unwrap();
        assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-12);
    }

    #[test]
    fn rates() {
        let pts: Vec<_> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n| (n, 3.0 / n)).collect();
        assert!((fit_rate(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(fit_rate(&[(1.0, 0.0), (2.0, 1.0)]), Err(Error::Domain(_))));
        assert!(fit_rate(&[(1.0, 1.0)]).is_err());
    }
}
