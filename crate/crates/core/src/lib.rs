//! Mixed finite elements for the Hellinger–Reissner formulation of linear
//! elasticity on macro-element meshes, with verification tools for the
//! discrete spaces.

pub mod assembly;
pub mod converge;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod poly;
pub mod problems;
pub mod solver;
pub mod spaces;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
