//! Reduction of commuting tuples with a cyclic member to block-Toeplitz form.

pub mod eigen;
pub mod reduction;

pub use eigen::{
    aberth_roots, char_poly, eigen_estimates, eigenvalues_clustered, eigenvalues_clustered_with, EigenCluster,
    EigenMethod,
};
pub use reduction::{
    commutes, dense_orbit_point, is_cyclic, jordan_form, relative_commutator, toeplitzize, CyclicityReport,
    EigenRank, JordanForm, JordanStructure, ReductionResult,
};
