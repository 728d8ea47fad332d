//! Finite element spaces: stresses, displacements, rigid motions, bubbles
//! and the composite H^2 space.

pub mod bubble;
pub mod constraints;
pub mod displacement;
pub mod h2;
pub mod nodes;
pub mod piecewise;
pub mod rigid;
pub mod stress;

pub use bubble::{element_bubble_space, macro_bubble_space, BubbleSpace};
pub use displacement::DisplacementSpace;
pub use nodes::NodeMap;
pub use piecewise::PiecewisePoly;
pub use rigid::{rm_perp_basis, CellVectorBasis, RigidMotionBasis};
pub use stress::{LocalDof, StressFamily, StressSpace};
