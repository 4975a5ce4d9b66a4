//! A desk-scale laboratory for Dirichlet boundary condition enforcement in
//! physics-informed neural network solvers.
//!
//! The crate provides four ways to impose Dirichlet conditions on a neural
//! network ansatz: a penalty term, two exact constructions built from
//! approximate distance functions (normalized and product form), and Nitsche's
//! method for variational solvers. Around them sit the supporting pieces:
//! polygonal geometry with approximate distance functions and transfinite
//! boundary-data interpolation, nested triangle meshes with Lagrange spaces
//! and quadrature, a small fully-connected network with forward jets and a
//! recorded reverse pass, two-phase training, a catalog of benchmark problems,
//! and an experiment harness with a command-line front end.

pub mod autodiff;
pub mod error;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod network;
pub mod optim;
pub mod problems;
pub mod residual;

pub use error::{Error, Result};
