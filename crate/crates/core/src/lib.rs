//! Biharmonic Dirichlet problem on the unit disk: kernel representation of
//! the solution, derivative formulas, bi-Lipschitz constants, and numerical
//! diagnostics.

pub mod analysis;
pub mod constants;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod solver;

pub use error::{Error, Result};
pub use kernels::{CirclePoint, ComplexValue, DiskPoint};
