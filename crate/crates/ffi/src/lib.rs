//! C interface to the quasiperiodic solver.
//!
//! Meshes and solutions are opaque handles created and released through this
//! API. Every fallible call returns an [`FsStatus`]; on failure the message is
//! kept per thread and can be copied out with [`fs_last_error`]. Complex
//! arrays cross the boundary as interleaved `re, im` pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use floquet_scatter::fields::{SourcePoint, WaveParams};
use floquet_scatter::geometry::{build_unit_cell_mesh, SurfaceProfile, UnitCellMesh};
use floquet_scatter::qpfem::{assemble, energy_balance, extend_above, solve_qp, IncidentSpec, Mode, QPSolution};
use floquet_scatter::Error;
use num_complex::Complex64;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Mesh generation failed.
    Mesh = 3,
    /// Singular system, residual too large, or an anomaly where none is allowed.
    Numerical = 4,
    /// Output buffer too small; the required length is reported where possible.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Unit-cell mesh.
pub struct FsMesh {
    mesh: UnitCellMesh,
}

/// Solution of one quasiperiodic problem.
pub struct FsSolution {
    sol: QPSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::Argument(_)
        | Error::Domain(_)
        | Error::Config(_)
        | Error::Parse(_)
        | Error::Separation { .. }
        | Error::Grazing(_) => FsStatus::InvalidArgument,
        Error::Mesh(_) => FsStatus::Mesh,
        _ => FsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FsStatus, String)>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside floquet-scatter");
            FsStatus::Internal
        }
    }
}

fn lib(e: Error) -> (FsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FsStatus, String) {
    (FsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_complex(values: &[Complex64], out: *mut f64, len: usize) -> Result<(), (FsStatus, String)> {
    if len < 2 * values.len() {
        return Err((
            FsStatus::BufferTooSmall,
            format!("buffer holds {len} doubles, {} needed", 2 * values.len()),
        ));
    }
    if out.is_null() {
        return Err(null("out"));
    }
    let buf = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (pair, v) in buf.chunks_exact_mut(2).zip(values) {
        pair[0] = v.re;
        pair[1] = v.im;
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to fit) and returns its full length in bytes without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Meshes the unit cell above a named surface (`gamma1`, `gamma2`, `gamma3`,
/// `flat:<height>`) up to `height` with target edge length `h`.
///
/// # Safety
/// `surface` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_new(surface: *const c_char, height: f64, h: f64, out: *mut *mut FsMesh) -> FsStatus {
    guard(|| {
        if surface.is_null() {
            return Err(null("surface"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(surface)
            .to_str()
            .map_err(|_| (FsStatus::InvalidArgument, "surface name is not UTF-8".to_string()))?;
        let profile = SurfaceProfile::by_name(name).map_err(lib)?;
        let mesh = build_unit_cell_mesh(&profile, height, h).map_err(lib)?;
        *out = Box::into_raw(Box::new(FsMesh { mesh }));
        Ok(())
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from [`fs_mesh_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_free(mesh: *mut FsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of mesh nodes, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_node_count(mesh: *const FsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.nodes().len())
}

/// Number of triangles, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_triangle_count(mesh: *const FsMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.triangles().len())
}

/// Writes node coordinates as `x1, x2` pairs; `len` counts doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_nodes(mesh: *const FsMesh, out: *mut f64, len: usize) -> FsStatus {
    guard(|| {
        let nodes = deref(mesh, "mesh")?.mesh.nodes();
        if len < 2 * nodes.len() {
            return Err((FsStatus::BufferTooSmall, format!("{} doubles needed", 2 * nodes.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = std::slice::from_raw_parts_mut(out, 2 * nodes.len());
        for (pair, x) in buf.chunks_exact_mut(2).zip(nodes) {
            pair.copy_from_slice(x);
        }
        Ok(())
    })
}

/// Writes triangle node indices, three per triangle; `len` counts entries.
///
/// # Safety
/// `out` must point to `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn fs_mesh_triangles(mesh: *const FsMesh, out: *mut usize, len: usize) -> FsStatus {
    guard(|| {
        let tris = deref(mesh, "mesh")?.mesh.triangles();
        if len < 3 * tris.len() {
            return Err((FsStatus::BufferTooSmall, format!("{} entries needed", 3 * tris.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = std::slice::from_raw_parts_mut(out, 3 * tris.len());
        for (chunk, t) in buf.chunks_exact_mut(3).zip(tris) {
            chunk.copy_from_slice(t);
        }
        Ok(())
    })
}

unsafe fn solve(
    mesh: *const FsMesh,
    k: f64,
    alpha: f64,
    m: usize,
    mode: Mode,
    incident: IncidentSpec,
    out: *mut *mut FsSolution,
) -> Result<(), (FsStatus, String)> {
    let mesh = &deref(mesh, "mesh")?.mesh;
    if out.is_null() {
        return Err(null("out"));
    }
    let params = WaveParams::new(k, mesh.period()).map_err(lib)?;
    let sys = assemble(mesh, &params, alpha, m, mode, &incident).map_err(lib)?;
    let sol = solve_qp(&sys).map_err(lib)?;
    *out = Box::into_raw(Box::new(FsSolution { sol }));
    Ok(())
}

/// Solves for the field radiated by the Bloch transform of a half-plane
/// point source at `(y1, y2)`, with `m` Fourier modes in the boundary
/// operator.
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_solve_point_source(
    mesh: *const FsMesh,
    k: f64,
    alpha: f64,
    m: usize,
    y1: f64,
    y2: f64,
    out: *mut *mut FsSolution,
) -> FsStatus {
    guard(|| {
        let y = SourcePoint::new(y1, y2).map_err(lib)?;
        solve(mesh, k, alpha, m, Mode::B, IncidentSpec::PointSourceBelow(y), out)
    })
}

/// Solves for the total field of a downward Rayleigh mode of the given
/// order and amplitude.
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_solve_plane_wave(
    mesh: *const FsMesh,
    k: f64,
    alpha: f64,
    m: usize,
    order: i64,
    amplitude_re: f64,
    amplitude_im: f64,
    out: *mut *mut FsSolution,
) -> FsStatus {
    guard(|| {
        let incident = IncidentSpec::PlaneWaveDown {
            order,
            amplitude: Complex64::new(amplitude_re, amplitude_im),
        };
        solve(mesh, k, alpha, m, Mode::A, incident, out)
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `sol` must come from a solve call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_free(sol: *mut FsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of nodal values, 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_len(sol: *const FsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.sol.values().len())
}

/// Writes the nodal values as interleaved pairs; `len` counts doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_values(sol: *const FsSolution, out: *mut f64, len: usize) -> FsStatus {
    guard(|| write_complex(deref(sol, "solution")?.sol.values(), out, len))
}

/// Writes the outgoing Rayleigh coefficients for orders `-M..=M`;
/// `len` counts doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_rayleigh(sol: *const FsSolution, out: *mut f64, len: usize) -> FsStatus {
    guard(|| write_complex(deref(sol, "solution")?.sol.rayleigh(), out, len))
}

/// Evaluates the field at a point on or above the top of the cell.
///
/// # Safety
/// `sol` must be a live handle, `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_eval_above(
    sol: *const FsSolution,
    x1: f64,
    x2: f64,
    re: *mut f64,
    im: *mut f64,
) -> FsStatus {
    guard(|| {
        let sol = &deref(sol, "solution")?.sol;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let v = extend_above(sol, [x1, x2]).map_err(lib)?;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Relative defect of the energy balance between incident and outgoing
/// propagating modes. Only defined for plane-wave solves.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_solution_energy_defect(sol: *const FsSolution, out: *mut f64) -> FsStatus {
    guard(|| {
        let sol = &deref(sol, "solution")?.sol;
        if out.is_null() {
            return Err(null("out"));
        }
        if sol.incident().is_empty() {
            return Err((FsStatus::InvalidArgument, "no incident plane wave".into()));
        }
        *out = energy_balance(sol, sol.incident()).map_err(lib)?;
        Ok(())
    })
}
