//! Numerical verification of the discrete spaces: Piola maps, divergence
//! rank certificates, the H^2 element, the 2D exact sequence, the
//! discrete inf-sup constant and the patch test.

pub mod affine;
pub mod airy;
pub mod certificate;
pub mod infsup;
pub mod properties;
pub mod sequence;
pub mod unisolvence;

pub use affine::{covariant_vector, piola_divergence_residual, piola_stress, AffineMap};
pub use airy::airy;
pub use certificate::{certificate_on, random_geometry_certificate, rank_certificate, Certificate, DEFAULT_SEED};
pub use infsup::{infsup_constant, infsup_report, InfSupReport};
pub use properties::{bubble_rm_orthogonality, div_containment, patch_test, patch_test_with, PatchReport};
pub use sequence::{sequence_audit, SequenceReport};
pub use unisolvence::{unisolvence_check, UnisolvenceReport};
