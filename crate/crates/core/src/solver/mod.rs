//! Saddle-point solves and dense verification kernels.

pub mod dense;
pub mod saddle;

pub use dense::{dense_rank, generalized_eig_min, nullspace, singular_values, RANK_TOL};
pub use saddle::{solve_saddle, solve_saddle_with, SaddleSolution, SaddleSystem};
