//! Quadrature, material law, bilinear forms and error norms.

pub mod forms;
pub mod material;
pub mod norms;
pub mod quadrature;
pub mod sparse;

pub use forms::{assemble_boundary_load, assemble_div, assemble_load, assemble_mass, dual_mass_blocks, RefTables};
pub use material::Material;
pub use norms::{error_norms, ErrorNorms};
pub use quadrature::{simplex_quadrature, QuadratureRule};
pub use sparse::CsrMatrix;
