//! Fermionic reaction-coordinate (RC) mapping for structured spectral
//! densities, and a Born-Markov transport stack built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] holds spectral densities, their Cauchy transforms and the
//!   single-step / iterated RC mapping.
//! * [`fock`] builds fermionic operators on small Fock spaces and assembles the
//!   two-dot Maxwell-demon impurity models (with and without RCs).
//! * [`redfield`] assembles the non-secular Born-Markov generator, with optional
//!   Lamb-shift and secular variants.
//! * [`dynamics`] solves for steady states and evaluates currents, heat flows,
//!   entropy production and mutual information.
//! * [`set_oracle`] gives exact single-electron-transistor currents for
//!   Lorentzian leads.
//! * [`scenario`] drives parameter sweeps and writes CSV/JSON tables.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod parallel;
pub mod quadrature;
pub mod redfield;
pub mod scenario;
pub mod set_oracle;
pub mod spectral;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix used for operators and superoperators.
pub type CMatrix = nalgebra::DMatrix<C64>;
