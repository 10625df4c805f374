//! Partial-cell volumes and interface integrals for marching-cubes
//! isosurfaces on Cartesian grids.
//!
//! The volume on one side of the reconstructed interface is obtained from
//! the flux of `(x, y, z)` through a closed triangulated surface per cell,
//! built from 23 rotation-unique corner patterns expanded to all 256 configs.

pub mod cases;
pub mod grid;
pub mod io;
pub mod measure;
pub mod oracles;
pub mod point;
pub mod topology;

pub use cases::{lookup_table, CaseEntry, Component, LookupTable, NodeRef, Tag, TriangleRef};
pub use grid::{
    adjacent_face_agreement, convergence_study, measure_grid, sample_field, FieldSource, GridMeasures,
    GridSpec, ImplicitField, NodeField, TriMesh,
};
pub use measure::{measure_cell, CellGeometry, CellMeasures};
pub use point::Point3;
pub use topology::{Config, EdgeId, Face, Rotation, VertexId};
