//! Exact jet calculus for planar diffeomorphisms tangent to the identity:
//! coefficient arithmetic over Q(i)(tau), truncated power series, the
//! Exp/Log correspondence with vector fields, group-structure diagnostics,
//! quasi-polynomial holonomy computations, and floating-point orbit
//! experiments for the model families.

pub mod cli;
pub mod error;
pub mod group;
pub mod holonomy;
pub mod jet;
pub mod lie;
pub mod orbit;
pub mod parse;
pub mod polyxyz;
pub mod quasipoly;
pub mod scalar;
pub mod testutil;

pub use error::{EngineError, Result};
pub use jet::{Jet2, ORDER_INFINITE};
pub use lie::{Diffeo2, VField2};
pub use scalar::Scalar;
