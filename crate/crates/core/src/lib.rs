//! Numerical toolkit for commuting operator tuples on the symmetrized polydisc.
//!
//! The crate works with finite-dimensional commuting matrix tuples
//! `(S₁,…,Sₙ)` and provides:
//!
//! * geometry of the symmetrized polydisc Γₙ ([`symdomain`]),
//! * dense operator primitives such as defects, joint spectra and numerical radii ([`opcore`]),
//! * falsification-style certification of Γₙ-contraction classes ([`gammaclass`]),
//! * solvers for the fundamental operator equations ([`fundops`]),
//! * truncated Hardy spaces, Wold decompositions and the canonical Γₙ-unitary ([`hardy`]),
//! * Douglas, Sz.-Nagy-Foias and Schäffer type dilation models and the maps between them ([`models`]).
//!
//! JSON interchange lives in [`io`], reproducible test corpora in [`recipes`],
//! and the commands behind the `gamma-models` binary in [`cli`].

pub mod cli;
pub mod error;
pub mod fundops;
pub mod gammaclass;
pub mod hardy;
pub mod io;
pub mod models;
pub mod opcore;
pub mod recipes;
pub mod symdomain;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use opcore::OperatorTuple;

/// Dense complex matrix used throughout.
pub type Mat = nalgebra::DMatrix<C64>;

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
