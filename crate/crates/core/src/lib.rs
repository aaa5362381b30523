//! Truncated Fock-space simulation of a single photon interacting with a
//! mechanical membrane inside an interferometer, with dark-port
//! post-selection and weak-value amplification of the radiation-pressure
//! displacement.
//!
//! Layout:
//! - [`hilbert`]: composite spaces, states, operators, spectral exponentials
//! - [`modes`]: ladder operators, single-photon basis, coherent states
//! - [`params`]: validated parameter record and derived quantities
//! - [`dynamics`]: Hamiltonians, propagators, Dyson-coefficient certificate
//! - [`weak`]: pre-/post-selection, weak values, amplification
//! - [`wigner`]: Wigner functions by displaced parity
//! - [`validation`]: the invariant suite shared by tests and the CLI

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod modes;
pub mod params;
pub mod quadrature;
pub mod validation;
pub mod weak;
pub mod wigner;

pub use error::{Error, Result};
pub use hilbert::{CompositeSpace, LinearOp, StateVector};
pub use num_complex::Complex64 as C64;
pub use params::{KerrConvention, ParamsSpec, SystemParams};
