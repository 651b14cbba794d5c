//! Linearization and orbit experiments for finitely generated abelian groups
//! of polynomial automorphisms of `C^n` with a common fixed point.

pub mod cli;
pub mod error;
pub mod group;
pub mod jet;
pub mod linalg;
pub mod linearization;
pub mod orbit;
pub mod scenario;
pub mod serde_util;
pub mod word;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;
