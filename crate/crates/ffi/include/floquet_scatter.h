#ifndef FLOQUET_SCATTER_H
#define FLOQUET_SCATTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  // Mesh generation failed.
  FS_STATUS_MESH = 3,
  // Singular system, residual too large, or an anomaly where none is allowed.
  FS_STATUS_NUMERICAL = 4,
  // Output buffer too small; the required length is reported where possible.
  FS_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  FS_STATUS_INTERNAL = 6,
} FsStatus;

// Unit-cell mesh.
typedef struct FsMesh FsMesh;

// Solution of one quasiperiodic problem.
typedef struct FsSolution FsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL terminated,
// truncated to fit) and returns its full length in bytes without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t fs_last_error(char *buf, size_t len);

// Meshes the unit cell above a named surface (`gamma1`, `gamma2`, `gamma3`,
// `flat:<height>`) up to `height` with target edge length `h`.
//
// # Safety
// `surface` must be a NUL-terminated string and `out` a valid pointer.
enum FsStatus fs_mesh_new(const char *surface, double height, double h, struct FsMesh **out);

// Releases a mesh. Null is ignored.
//
// # Safety
// `mesh` must come from [`fs_mesh_new`] and not be used afterwards.
void fs_mesh_free(struct FsMesh *mesh);

// Number of mesh nodes, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t fs_mesh_node_count(const struct FsMesh *mesh);

// Number of triangles, 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live handle.
size_t fs_mesh_triangle_count(const struct FsMesh *mesh);

// Writes node coordinates as `x1, x2` pairs; `len` counts doubles.
//
// # Safety
// `out` must point to `len` writable doubles.
enum FsStatus fs_mesh_nodes(const struct FsMesh *mesh, double *out, size_t len);

// Writes triangle node indices, three per triangle; `len` counts entries.
//
// # Safety
// `out` must point to `len` writable entries.
enum FsStatus fs_mesh_triangles(const struct FsMesh *mesh, size_t *out, size_t len);

// Solves for the field radiated by the Bloch transform of a half-plane
// point source at `(y1, y2)`, with `m` Fourier modes in the boundary
// operator.
//
// # Safety
// `mesh` must be a live handle and `out` a valid pointer.
enum FsStatus fs_solve_point_source(const struct FsMesh *mesh,
                                    double k,
                                    double alpha,
                                    size_t m,
                                    double y1,
                                    double y2,
                                    struct FsSolution **out);

// Solves for the total field of a downward Rayleigh mode of the given
// order and amplitude.
//
// # Safety
// `mesh` must be a live handle and `out` a valid pointer.
enum FsStatus fs_solve_plane_wave(const struct FsMesh *mesh,
                                  double k,
                                  double alpha,
                                  size_t m,
                                  int64_t order,
                                  double amplitude_re,
                                  double amplitude_im,
                                  struct FsSolution **out);

// Releases a solution. Null is ignored.
//
// # Safety
// `sol` must come from a solve call and not be used afterwards.
void fs_solution_free(struct FsSolution *sol);

// Number of nodal values, 0 for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
size_t fs_solution_len(const struct FsSolution *sol);

// Writes the nodal values as interleaved pairs; `len` counts doubles.
//
// # Safety
// `out` must point to `len` writable doubles.
enum FsStatus fs_solution_values(const struct FsSolution *sol, double *out, size_t len);

// Writes the outgoing Rayleigh coefficients for orders `-M..=M`;
// `len` counts doubles.
//
// # Safety
// `out` must point to `len` writable doubles.
enum FsStatus fs_solution_rayleigh(const struct FsSolution *sol, double *out, size_t len);

// Evaluates the field at a point on or above the top of the cell.
//
// # Safety
// `sol` must be a live handle, `re` and `im` valid pointers.
enum FsStatus fs_solution_eval_above(const struct FsSolution *sol,
                                     double x1,
                                     double x2,
                                     double *re,
                                     double *im);

// Relative defect of the energy balance between incident and outgoing
// propagating modes. Only defined for plane-wave solves.
//
// # Safety
// `sol` must be a live handle and `out` a valid pointer.
enum FsStatus fs_solution_energy_defect(const struct FsSolution *sol, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOQUET_SCATTER_H */
