//! Differentiation engines: forward-mode jets for spatial derivatives and a
//! recordable reverse-mode program for weight gradients.

pub mod graph;
pub mod jet;

pub use graph::{Expr, Graph, Program, Workspace};
pub use jet::{Jet2, Scalar};
