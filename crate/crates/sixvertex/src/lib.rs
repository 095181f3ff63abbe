//! Numerical toolkit for the inhomogeneous six-vertex model: R-matrices,
//! L-operators, quantum monodromy and transfer matrices, Bethe-ansatz data,
//! torus partition functions, and action-angle functionals, each paired with
//! an independent brute-force verification route at desk scale.

pub mod action_angle;
pub mod bethe;
pub mod error;
pub mod expansion;
pub mod harness;
pub mod lattice;
pub mod monodromy;
pub mod tensor;
pub mod weights;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, Convention, QuantumSpace};
