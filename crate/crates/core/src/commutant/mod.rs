//! The commutant of `k`-fold Clifford and unitary actions: Pauli monomials,
//! Gram and Weingarten tables, twirls and the Vandermonde row-sum check.

pub mod archive;
pub mod haar;
pub mod monomial;
pub mod vandermonde;
pub mod weingarten;

pub use archive::TableArchive;
pub use haar::{approx_haar_twirl, haar_choi, haar_twirl, PermutationOp};
pub use monomial::{
    alpha, commutant_dimension, enumerate_monomials, permutation_monomials, trace_norm_exponent,
    PauliMonomial,
};
pub use vandermonde::{vandermonde_bound_check, VandermondeReport};
pub use weingarten::{
    clifford_twirl, exhaustive_twirl, gram_matrix, weingarten_table, CliffordTwirl,
    WeingartenTable,
};
