//! Exact verification engine for two families of integrable models built from
//! twisted generating series: inner/outer twisted Gaudin magnets and
//! Calogero-type particle models on a star graph.
//!
//! Everything the library asserts is checked in exact arithmetic over a
//! cyclotomic field; the only floating-point code is the optional spectra
//! cross-check in [`spectra`].
//!
//! The layers, bottom up:
//!
//! - [`cyclotomic`]: the scalar field `Q(zeta_m)` with arbitrary-precision
//!   rational coefficients.
//! - [`polyrat`]: multivariate polynomials and rational functions over the
//!   field, with denominators kept as factored multisets of linear forms.
//! - [`tensor`]: exact sparse operators on tensor products of site spaces
//!   plus auxiliary spaces, and a dense brute-force oracle used to cross
//!   check every sparse operation.
//! - [`gaudin`]: operator-valued partial fractions in the spectral
//!   parameter, the twisted series `T(u)`, `B(u)`, `S(u)`, the Gaudin
//!   Hamiltonians, and the exact identity suites.
//! - [`dunkl`]: the normal-form engine for the wreath-product operator
//!   algebra, star-graph Dunkl operators, conserved charges, statistics and
//!   quasi-parity projectors.
//! - [`model`], [`report`], [`spectra`]: model-file parsing, structured
//!   reports, and the floating simultaneous-diagonalization cross-check.
//!
//! See the crate examples for runnable entry points into each capability.

pub mod cyclotomic;
pub mod polyrat;
pub mod tensor;
pub mod gaudin;
pub mod dunkl;
pub mod model;
pub mod report;
pub mod spectra;




