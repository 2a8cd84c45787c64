//! Dynamics of tuples of upper triangular Toeplitz matrices.
//!
//! * [`toeplitz`] and [`combinat`]: the algebra of upper triangular Toeplitz
//!   matrices in the nilpotent-shift basis, with the weak-composition and
//!   multinomial enumerators behind their powers.
//! * [`closed_form`]: entries of `A_1^{k_1} ... A_m^{k_m}` by multinomial
//!   expansion, by repeated squaring, and by explicit formulas for `n <= 4`.
//! * [`logcoords`]: the nilpotent logarithm that turns those products into
//!   sums, plus the equivalence points and diagonal surrogate tuples built
//!   from it.
//! * [`jordan`]: reduction of a commuting tuple with a cyclic member to
//!   simultaneous block-Toeplitz form.
//! * [`orbit`]: orbit enumeration, grid coverage, and the experiments that
//!   use coverage as a numerical density proxy.
//!
//! Everything generic is parameterized by a [`Scalar`] backend: [`C64`] for
//! speed and [`Exact`] (Gaussian rationals) for checking identities with `==`.

pub mod closed_form;
pub mod combinat;
pub mod dense;
pub mod error;
pub mod io;
pub mod jordan;
pub mod logcoords;
pub mod orbit;
pub mod scalar;
pub mod toeplitz;
pub mod tolerances;
pub mod tuple;

pub use closed_form::{
    lemma_entries, lemma_forms, pow_entries_multinomial, product_entries, product_entries_incremental,
    product_entries_oracle, LemmaForms, ProductEntries,
};
pub use combinat::{compositions_with_weight, multinomial, weak_compositions, Multinomial, WeakComposition};
pub use dense::Dense;
pub use error::{Error, Result};
pub use logcoords::{
    diagonal_surrogate, equivalence_point, explicit_log_forms, nilpotent_exp, nilpotent_log, DiagonalTuple,
    EquivalencePoint, LogCoordinates,
};
pub use scalar::{Exact, Scalar, C64};
pub use toeplitz::{shift_dense, ShiftPower, ToeplitzCoeffs, MAX_DIM};
pub use tolerances::Tolerances;
pub use tuple::{MultiIndex, TupleSpec};
