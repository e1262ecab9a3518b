//! Multimode pure Gaussian states and the frustration of their
//! multipartite entanglement.
//!
//! States are parametrized by a unitary `U ∈ U(n)` and a squeezing spectrum;
//! entanglement across a bipartition is measured by the purity of the
//! reduced state, and the normalized potential `χ` averages it over every
//! bipartition of a given size. The [`optimizer`] minimizes these costs
//! over `U(n)`.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bipartition;
pub mod chart;
pub mod error;
pub mod gaussian;
pub mod landscape;
pub mod linalg;
pub mod measures;
pub mod optimizer;

pub use bipartition::{enumerate_bipartitions, extract_submatrix, Bipartition};
pub use error::{Error, Result};
pub use gaussian::{
    build_auxiliary_matrices, build_pure_cm, build_uniform_squeezing_cm, check_purity_condition,
    mode_energy, symplectic_form, symplectic_orthogonal_from_unitary, unitary_from_generator,
    AuxiliaryMatrices, CovarianceMatrix, EnergyBudget, SqueezingSpectrum, SymplecticOrthogonal,
    SystemShape, Tolerances, UnitaryMatrix,
};
pub use landscape::{CostKind, Landscape};
pub use measures::{
    chi, chi_restricted, det_second_order, min_purity, subsystem_purity, w_objective, z_objective,
    CostValue,
};
