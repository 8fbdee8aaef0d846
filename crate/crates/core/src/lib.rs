//! imlab: a spectral-Galerkin laboratory for conservative bilinear flows
//! (2D/3D Euler, generalized SQG, Sabra/GOY shell models) driven by a
//! fluctuation-dissipation regularization. The library simulates the
//! truncated dynamics, estimates stationary measures by long-time averaging,
//! and checks the exact identities, conservation laws, ensemble
//! constructions and non-degeneracy diagnostics that the construction
//! guarantees.

mod error;

pub mod dissipation;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
