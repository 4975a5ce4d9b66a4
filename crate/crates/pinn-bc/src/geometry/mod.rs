//! Geometry: boundary segments, approximate distance functions, transfinite
//! extension of boundary data, and the built-in domains.

pub mod adf;
pub mod boundary;
pub mod domains;
pub mod quadrant;
pub mod segment;
pub mod transfinite;

pub use adf::{AdfField, AdfMode, FieldSample};
pub use boundary::PolygonalBoundary;
pub use domains::Domain;
pub use segment::{Point, Segment};
pub use transfinite::TransfiniteExtension;
