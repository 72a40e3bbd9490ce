//! Disk meshes, material fields, incident waves, and the finite element
//! discretization of the transparent-boundary variational problem.

mod assemble;
mod incident;
mod material;
mod mesh;

pub use assemble::{
    assemble_system, boundary_weight, derivative_volume_load, gradient_raw, load_from_boundary,
    trace_of, volume_part_matvec, FemSystem, VolumeParts,
};
pub use incident::{boundary_load, incident_field, incident_traction, Incidence, WaveKind};
pub use material::{MaterialField, MaterialIncrement, LOWER_BOUND};
pub use mesh::{boundary_points_for_level, build_disk_mesh, DiskMesh};
