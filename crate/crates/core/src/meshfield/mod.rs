//! Piecewise degree-7 Hermite representation on a moving 1D mesh.

mod boundary;
mod field;
pub mod shape;
mod snapshot;

pub use boundary::{
    boundary_rows, BoundaryNode, BoundarySpec, Condition, Geometry, NodalConstraint,
};
pub use field::{Mesh, MeshField};
pub use shape::{gauss_points, gauss_weights, shape_value, Family};
pub use snapshot::{read_snapshot, snapshot_csv, write_snapshot, SnapshotMeta, CSV_HEADER};
