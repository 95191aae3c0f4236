//! Quasiperiodic cell problems: P1 finite elements on the unit cell with the
//! side walls identified up to the Bloch phase and a truncated
//! Dirichlet-to-Neumann condition on the top boundary.

mod io;
mod sparse;
mod trace;

use std::str::FromStr;
use std::sync::Once;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    beta, bloch_incident_point_source, herglotz_bloch_field, herglotz_bloch_modes, HerglotzKernel, Point,
    SeriesOptions, SourcePoint, WaveParams,
};
use crate::geometry::{BoundaryTag, UnitCellMesh};
use sparse::CsrMatrix;
use trace::TraceTransform;

pub use io::{read_solution, write_solution};
pub use trace::{propagating_range, trace_fourier_coeffs, DtNOperator, MIN_EVANESCENT_ORDERS};

/// Relative algebraic residual every solve must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// How the incident field enters the cell problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Homogeneous Dirichlet surface; the incident field drives the top boundary.
    A,
    /// Radiating field with the incident trace prescribed on the surface.
    B,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            _ => Err(Error::Config(format!("mode must be A or B, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::A => "A",
            Self::B => "B",
        })
    }
}

/// Incident wave.
#[derive(Debug, Clone, PartialEq)]
pub enum IncidentSpec {
    /// Half-plane point source below the surface.
    PointSourceBelow(SourcePoint),
    Herglotz(HerglotzKernel),
    /// Single downward Rayleigh order `Λ^{-1/2} a e^{iξx1 - iβ(x2 - H)}`, same for every α.
    PlaneWaveDown {
        order: i64,
        amplitude: Complex64,
    },
}

impl IncidentSpec {
    /// Downward Rayleigh coefficients at `x2 = height`.
    pub fn downward_modes(&self, params: &WaveParams, alpha: f64, height: f64) -> Result<Vec<(i64, Complex64)>> {
        match self {
            // the point source radiates upward everywhere above it
            Self::PointSourceBelow(_) => Ok(Vec::new()),
            Self::Herglotz(kernel) => Ok(herglotz_bloch_modes(kernel, params, alpha)?
                .into_iter()
                .map(|(j, d)| {
                    let b = beta(params, alpha, j).beta.re;
                    (j, params.period().sqrt() * d * Complex64::from_polar(1.0, -b * height))
                })
                .collect()),
            Self::PlaneWaveDown { order, amplitude } => {
                let r = beta(params, alpha, *order);
                if !r.is_propagating() || r.anomaly {
                    return Err(Error::Argument(format!(
                        "order {order} does not propagate at alpha = {alpha}"
                    )));
                }
                Ok(vec![(*order, *amplitude)])
            }
        }
    }

    /// Bloch transform of the incident field at `x`.
    pub fn bloch_value(&self, params: &WaveParams, alpha: f64, x: Point, height: f64) -> Result<Complex64> {
        match self {
            Self::PointSourceBelow(y) => bloch_incident_point_source(params, alpha, x, y, &SeriesOptions::default()),
            Self::Herglotz(kernel) => herglotz_bloch_field(kernel, params, alpha, x),
            Self::PlaneWaveDown { order, amplitude } => {
                let r = beta(params, alpha, *order);
                Ok(amplitude / params.period().sqrt()
                    * Complex64::from_polar(1.0, r.xi * x[0])
                    * (-I * r.beta * (x[1] - height)).exp())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeRole {
    Free(usize),
    /// Right-wall node: the left partner's unknown times the Bloch phase.
    Periodic(usize, Complex64),
    Fixed(Complex64),
}

impl NodeRole {
    fn dof(&self) -> Option<(usize, Complex64)> {
        match *self {
            Self::Free(d) => Some((d, Complex64::new(1.0, 0.0))),
            Self::Periodic(d, c) => Some((d, c)),
            Self::Fixed(_) => None,
        }
    }
}

/// Linear system of one quasiperiodic cell problem.
#[derive(Debug, Clone)]
pub struct QPSystem<'m> {
    mesh: &'m UnitCellMesh,
    params: WaveParams,
    alpha: f64,
    mode: Mode,
    roles: Vec<NodeRole>,
    n_dof: usize,
    interior: CsrMatrix,
    dtn: DtNOperator,
    trace: TraceTransform,
    /// Unknowns carrying the top boundary, one column of `dof_trace` each.
    top_dofs: Vec<usize>,
    /// Fourier coefficients of the quasiperiodic basis functions on the top.
    dof_trace: Vec<Vec<Complex64>>,
    load: Vec<Complex64>,
    /// Downward Rayleigh coefficients at the top that drive a Mode A problem.
    incident: Vec<(i64, Complex64)>,
}

fn element_matrix(mesh: &UnitCellMesh, t: usize, k2: f64) -> [[f64; 3]; 3] {
    let tri = mesh.triangles()[t];
    let p = tri.map(|i| mesh.nodes()[i]);
    let area = mesh.triangle_area(t);
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let stiffness = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            let mass = area / 12.0 * if i == j { 2.0 } else { 1.0 };
            k[i][j] = stiffness - k2 * mass;
        }
    }
    k
}

/// Assembles the cell problem at quasimomentum `alpha` with DtN truncation `m`.
pub fn assemble<'m>(
    mesh: &'m UnitCellMesh,
    params: &WaveParams,
    alpha: f64,
    m: usize,
    mode: Mode,
    incident: &IncidentSpec,
) -> Result<QPSystem<'m>> {
    if (mesh.period() - params.period()).abs() > 1e-12 * params.period() {
        return Err(Error::Argument(format!(
            "mesh period {} differs from wave period {}",
            mesh.period(),
            params.period()
        )));
    }
    if let IncidentSpec::PointSourceBelow(y) = incident {
        let floor = mesh.profile().min_height();
        if y.point()[1] >= floor {
            return Err(Error::Domain(format!(
                "point source at height {} must lie below the surface minimum {floor}",
                y.point()[1]
            )));
        }
    }
    let dtn = DtNOperator::new(params, alpha, m)?;
    let height = mesh.height();
    let nodes = mesh.nodes();

    let mut roles = vec![NodeRole::Free(usize::MAX); nodes.len()];
    for i in mesh.tagged_nodes(BoundaryTag::Surface) {
        let value = match mode {
            Mode::A => ZERO,
            Mode::B => incident.bloch_value(params, alpha, nodes[i], height)?,
        };
        roles[i] = NodeRole::Fixed(value);
    }
    let phase = Complex64::from_polar(1.0, params.period() * alpha);
    let mut partner = vec![None; nodes.len()];
    for &(l, r) in mesh.periodic_pairs() {
        partner[r] = Some(l);
    }
    let mut n_dof = 0;
    for i in 0..nodes.len() {
        if partner[i].is_none() && roles[i] == NodeRole::Free(usize::MAX) {
            roles[i] = NodeRole::Free(n_dof);
            n_dof += 1;
        }
    }
    for i in 0..nodes.len() {
        if let Some(l) = partner[i] {
            roles[i] = match (roles[l], roles[i]) {
                (NodeRole::Free(d), NodeRole::Free(_)) => NodeRole::Periodic(d, phase),
                // a corner on the surface: both values are data, already quasiperiodic
                (NodeRole::Fixed(_), NodeRole::Fixed(v)) => NodeRole::Fixed(v),
                _ => {
                    return Err(Error::Mesh(format!(
                        "side nodes {l} and {i} have different boundary roles"
                    )))
                }
            };
        }
    }
    if n_dof == 0 {
        return Err(Error::Mesh("mesh has no free nodes".into()));
    }

    let k2 = params.k() * params.k();
    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    let mut load = vec![ZERO; n_dof];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let ke = element_matrix(mesh, t, k2);
        for a in 0..3 {
            let Some((d, cn)) = roles[tri[a]].dof() else {
                continue;
            };
            for b in 0..3 {
                match roles[tri[b]] {
                    NodeRole::Fixed(g) => load[d] -= cn.conj() * ke[a][b] * g,
                    role => {
                        let (e, cm) = role.dof().expect("not fixed");
                        triplets.push((d, e, cn.conj() * cm * ke[a][b]));
                    }
                }
            }
        }
    }
    let interior = CsrMatrix::from_triplets(n_dof, triplets);
    log::debug!("alpha {alpha}: {n_dof} unknowns, {} nonzeros", interior.nnz());

    let trace = TraceTransform::new(mesh, &dtn);
    let mut top_dofs: Vec<usize> = Vec::new();
    let mut columns: Vec<(usize, usize, Complex64)> = Vec::new();
    for (p, &node) in trace.top.iter().enumerate() {
        let (d, c) = roles[node]
            .dof()
            .ok_or_else(|| Error::Mesh("top boundary touches the surface".into()))?;
        let col = match top_dofs.iter().position(|&x| x == d) {
            Some(col) => col,
            None => {
                top_dofs.push(d);
                top_dofs.len() - 1
            }
        };
        columns.push((p, col, c));
    }
    let dof_trace: Vec<Vec<Complex64>> = trace
        .coeffs
        .iter()
        .map(|row| {
            let mut out = vec![ZERO; top_dofs.len()];
            for &(p, col, c) in &columns {
                out[col] += c * row[p];
            }
            out
        })
        .collect();

    let mut downward = Vec::new();
    if mode == Mode::A {
        downward = incident.downward_modes(params, alpha, height)?;
        let m = m as i64;
        for &(j, d_hat) in &downward {
            if j.abs() > m {
                continue;
            }
            let i = (j + m) as usize;
            let f_hat = -2.0 * I * dtn.modes()[i].beta * d_hat;
            for (col, &d) in top_dofs.iter().enumerate() {
                load[d] += f_hat * dof_trace[i][col].conj();
            }
        }
    }

    Ok(QPSystem {
        mesh,
        params: *params,
        alpha,
        mode,
        roles,
        n_dof,
        interior,
        dtn,
        trace,
        top_dofs,
        dof_trace,
        load,
        incident: downward,
    })
}

impl QPSystem<'_> {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dofs(&self) -> usize {
        self.n_dof
    }

    pub fn load(&self) -> &[Complex64] {
        &self.load
    }

    pub fn dtn(&self) -> &DtNOperator {
        &self.dtn
    }

    /// Entry `(row, col)` of the interior (volume) part of the matrix.
    pub fn interior_entry(&self, row: usize, col: usize) -> Complex64 {
        self.interior.get(row, col)
    }

    /// Nonzero interior entries, row-major.
    pub fn interior_entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.interior.entries()
    }

    /// Fourier coefficients on the top boundary of the field with unknowns `v`.
    pub fn dof_fourier(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.dof_trace
            .iter()
            .map(|row| row.iter().zip(&self.top_dofs).map(|(b, &d)| b * v[d]).sum())
            .collect()
    }

    /// `A v`, with the DtN part applied in factored form.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.n_dof];
        self.interior.mul_add(v, &mut out);
        let coeffs = self.dof_fourier(v);
        for (i, (row, c)) in self.dof_trace.iter().zip(coeffs).enumerate() {
            let s = self.dtn.symbol(i) * c;
            if s == ZERO {
                continue;
            }
            for (b, &d) in row.iter().zip(&self.top_dofs) {
                out[d] -= s * b.conj();
            }
        }
        out
    }

    /// Sesquilinear form `a(w, v) = v^H A w`.
    pub fn form(&self, w: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.apply(w).iter().zip(v).map(|(a, b)| a * b.conj()).sum()
    }

    /// Nodal values on the whole mesh from the unknowns.
    pub fn expand(&self, dofs: &[Complex64]) -> Vec<Complex64> {
        self.roles
            .iter()
            .map(|role| match *role {
                NodeRole::Free(d) => dofs[d],
                NodeRole::Periodic(d, c) => c * dofs[d],
                NodeRole::Fixed(g) => g,
            })
            .collect()
    }

    /// Unknowns of a full nodal vector; the inverse of [`QPSystem::expand`] on
    /// fields that satisfy the constraints.
    pub fn restrict(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut dofs = vec![ZERO; self.n_dof];
        for (role, v) in self.roles.iter().zip(values) {
            if let NodeRole::Free(d) = *role {
                dofs[d] = *v;
            }
        }
        dofs
    }

    fn factorization_triplets(&self) -> Vec<Triplet<usize, usize, Complex64>> {
        let mut out: Vec<Triplet<usize, usize, Complex64>> =
            self.interior.entries().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let n_top = self.top_dofs.len();
        let mut block = vec![ZERO; n_top * n_top];
        for (i, row) in self.dof_trace.iter().enumerate() {
            let s = self.dtn.symbol(i);
            if s == ZERO {
                continue;
            }
            for (a, ba) in row.iter().enumerate() {
                let left = s * ba.conj();
                for (b, bb) in row.iter().enumerate() {
                    block[a * n_top + b] -= left * bb;
                }
            }
        }
        for a in 0..n_top {
            for b in 0..n_top {
                out.push(Triplet::new(self.top_dofs[a], self.top_dofs[b], block[a * n_top + b]));
            }
        }
        out
    }
}

/// Solution of one cell problem.
#[derive(Debug, Clone, PartialEq)]
pub struct QPSolution {
    pub(crate) alpha: f64,
    pub(crate) mode: Mode,
    pub(crate) params: WaveParams,
    pub(crate) height: f64,
    pub(crate) values: Vec<Complex64>,
    pub(crate) rayleigh: Vec<Complex64>,
    pub(crate) incident: Vec<(i64, Complex64)>,
    pub(crate) residual: f64,
}

impl QPSolution {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    /// Nodal values on every mesh node, side walls included.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Truncation order `M`.
    pub fn m(&self) -> usize {
        self.rayleigh.len() / 2
    }

    /// Coefficients `ŵ(j)`, `j = -M..=M`, of the trace on `x2 = H`.
    pub fn rayleigh(&self) -> &[Complex64] {
        &self.rayleigh
    }

    /// Incident downward coefficients at the top (empty in Mode B).
    pub fn incident(&self) -> &[(i64, Complex64)] {
        &self.incident
    }

    pub fn rayleigh_coeff(&self, j: i64) -> Option<Complex64> {
        let i = j + self.m() as i64;
        usize::try_from(i).ok().and_then(|i| self.rayleigh.get(i).copied())
    }

    /// Relative algebraic residual reached by the solver.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

static SEQUENTIAL: Once = Once::new();

/// Direct sparse LU solve with iterative refinement.
pub fn solve_qp(system: &QPSystem) -> Result<QPSolution> {
    // parallelism comes from solving many α at once; keep each factorization serial
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let n = system.n_dof;
    let b_norm = norm(&system.load);
    let singular = |reason: String| Error::Singular {
        alpha: system.alpha,
        k: system.params.k(),
        reason,
    };
    let mut x = vec![ZERO; n];
    let mut residual = 0.0;
    if b_norm > 0.0 {
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &system.factorization_triplets())
            .map_err(|e| singular(format!("{e:?}")))?;
        let lu = matrix.sp_lu().map_err(|e| singular(format!("{e:?}")))?;
        let mut r = system.load.clone();
        for _ in 0..4 {
            let rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| r[i]);
            let dx = lu.solve(&rhs);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += dx[(i, 0)];
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(singular("factorization produced non-finite values".into()));
            }
            let ax = system.apply(&x);
            r = system.load.iter().zip(&ax).map(|(b, a)| b - a).collect();
            residual = norm(&r) / b_norm;
            if residual <= 0.01 * RESIDUAL_TOLERANCE {
                break;
            }
        }
        if residual > RESIDUAL_TOLERANCE {
            return Err(Error::SolverQuality {
                alpha: system.alpha,
                residual,
                tolerance: RESIDUAL_TOLERANCE,
            });
        }
    }
    let values = system.expand(&x);
    let rayleigh = system.trace.apply(&values);
    Ok(QPSolution {
        alpha: system.alpha,
        mode: system.mode,
        params: system.params,
        height: system.mesh.height(),
        values,
        rayleigh,
        incident: system.incident.clone(),
        residual,
    })
}

/// Field above the cell, `Λ^{-1/2} Σ e^{iξ_j x1} [u_j e^{iβ(j)(x2 - H)} + d_j e^{-iβ(j)(x2 - H)}]`,
/// where `d` are the incident downward coefficients (Mode A only) and `u` is
/// the rest of the computed trace.
pub fn extend_above(sol: &QPSolution, x: Point) -> Result<Complex64> {
    if x[1] < sol.height {
        return Err(Error::Domain(format!(
            "Rayleigh extension needs x2 >= {}, got {}",
            sol.height, x[1]
        )));
    }
    let m = sol.m() as i64;
    let wave = |j: i64, up: bool| {
        let r = beta(&sol.params, sol.alpha, j);
        let dir = if up { I } else { -I };
        Complex64::from_polar(1.0, r.xi * x[0]) * (dir * r.beta * (x[1] - sol.height)).exp()
    };
    let mut upward = sol.rayleigh.clone();
    let mut sum = ZERO;
    for &(j, d) in &sol.incident {
        if j.abs() <= m {
            upward[(j + m) as usize] -= d;
        }
        sum += d * wave(j, false);
    }
    sum += (-m..=m).zip(&upward).map(|(j, u)| u * wave(j, true)).sum::<Complex64>();
    Ok(sum / sol.params.period().sqrt())
}

/// Relative flux defect between outgoing and incident propagating orders.
///
/// `incident` holds the downward coefficients at `x2 = H`; the outgoing part is
/// what remains of the computed trace after removing them.
pub fn energy_balance(sol: &QPSolution, incident: &[(i64, Complex64)]) -> Result<f64> {
    let m = sol.m() as i64;
    let mut outgoing = sol.rayleigh.clone();
    let mut incoming_flux = 0.0;
    for &(j, d) in incident {
        let r = beta(&sol.params, sol.alpha, j);
        if r.is_propagating() {
            incoming_flux += r.beta.re * d.norm_sqr();
        }
        if j.abs() <= m {
            outgoing[(j + m) as usize] -= d;
        }
    }
    if !(incoming_flux > 0.0) {
        return Err(Error::Undefined(
            "no propagating incident energy; flux balance is undefined".into(),
        ));
    }
    let outgoing_flux: f64 = (-m..=m)
        .zip(&outgoing)
        .map(|(j, r)| {
            let b = beta(&sol.params, sol.alpha, j);
            if b.is_propagating() {
                b.beta.re * r.norm_sqr()
            } else {
                0.0
            }
        })
        .sum();
    Ok((outgoing_flux - incoming_flux).abs() / incoming_flux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_unit_cell_mesh, SurfaceProfile};
    use std::f64::consts::TAU;

    #[test]
    fn zero_incident_gives_zero_solution() {
        let mesh = build_unit_cell_mesh(&SurfaceProfile::gamma1(), 3.0, 0.4).unwrap();
        let p = WaveParams::new(1.0, TAU).unwrap();
        let incident = IncidentSpec::PlaneWaveDown {
            order: 0,
            amplitude: ZERO,
        };
        let sys = assemble(&mesh, &p, 0.2, 20, Mode::A, &incident).unwrap();
        assert!(sys.load().iter().all(|v| *v == ZERO));
        let sol = solve_qp(&sys).unwrap();
        assert!(sol.values().iter().all(|v| *v == ZERO));
        assert!(matches!(energy_balance(&sol, &[]), Err(Error::Undefined(_))));
    }

    #[test]
    fn source_above_surface_rejected() {
        let mesh = build_unit_cell_mesh(&SurfaceProfile::gamma1(), 3.0, 0.4).unwrap();
        let p = WaveParams::new(1.0, TAU).unwrap();
        let y = SourcePoint::new(0.0, 2.8).unwrap();
        let err = assemble(&mesh, &p, 0.1, 20, Mode::B, &IncidentSpec::PointSourceBelow(y));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn right_wall_follows_bloch_phase() {
        let mesh = build_unit_cell_mesh(&SurfaceProfile::gamma2(), 3.0, 0.3).unwrap();
        let p = WaveParams::new(1.0, TAU).unwrap();
        let y = SourcePoint::new(-1.0, 0.4).unwrap();
        let alpha = 0.37;
        let sys = assemble(&mesh, &p, alpha, 20, Mode::B, &IncidentSpec::PointSourceBelow(y)).unwrap();
        let sol = solve_qp(&sys).unwrap();
        let phase = Complex64::from_polar(1.0, TAU * alpha);
        for &(l, r) in mesh.periodic_pairs() {
            assert!((sol.values()[r] - phase * sol.values()[l]).norm() < 1e-15 * (1.0 + sol.values()[l].norm()));
        }
        assert!(sol.residual() <= RESIDUAL_TOLERANCE);
    }

    fn single_mode(j: i64) -> QPSolution {
        let m = 20i64;
        let mut rayleigh = vec![ZERO; (2 * m + 1) as usize];
        rayleigh[(j + m) as usize] = Complex64::new(1.0, 0.0);
        QPSolution {
            alpha: 0.2,
            mode: Mode::A,
            params: WaveParams::new(1.0, TAU).unwrap(),
            height: 3.0,
            values: Vec::new(),
            rayleigh,
            incident: Vec::new(),
            residual: 0.0,
        }
    }

    #[test]
    fn extension_of_single_modes() {
        // |0.2 + 3| > k: evanescent
        let sol = single_mode(3);
        let decay = beta(&sol.params, 0.2, 3).beta.im;
        for d in [0.0, 0.5, 1.5] {
            let w = extend_above(&sol, [0.4, 3.0 + d]).unwrap();
            let expected = (-decay * d).exp() / TAU.sqrt();
            assert!((w.norm() - expected).abs() < 1e-15, "d = {d}");
        }
        let sol = single_mode(0);
        for d in [0.0, 0.5, 7.0] {
            let w = extend_above(&sol, [-1.1, 3.0 + d]).unwrap();
            assert!((w.norm() - 1.0 / TAU.sqrt()).abs() < 1e-15);
        }
        assert!(matches!(extend_above(&sol, [0.0, 2.9]), Err(Error::Domain(_))));
    }
}
