//! Triangulations, Lagrange spaces, quadrature and error norms.

pub mod error_norm;
pub mod lagrange;
pub mod quadrature;
pub mod tri;

pub use error_norm::{error_rule_for_degree, h1_error, h1_error_on_mesh, h1_norm};
pub use lagrange::{interpolate, LagrangeSpace, ReferenceBasis, TrialFunction};
pub use quadrature::{gauss_legendre_01, quadrature_for_order, QuadratureRule};
pub use tri::{generate_mesh, refine_to_pair, BoundaryEdge, NestedMeshPair, TriMesh};
