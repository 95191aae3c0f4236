//! Periodic surface profiles and unit-cell triangulations.

mod io;
mod locate;
mod mesh;
mod profile;

pub use io::{read_mesh, write_mesh};
pub use locate::Locator;
pub use mesh::{
    build_unit_cell_mesh, build_unit_cell_mesh_with, refine, BoundaryEdge, BoundaryTag, MeshOptions, MeshQuality,
    UnitCellMesh,
};
pub use profile::{ProfileKind, SurfaceProfile};
