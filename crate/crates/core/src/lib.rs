//! Exceptional curves on del Pezzo surfaces, their Weyl groups, and the arithmetic of
//! cubic surfaces over finite fields and over `F_q(u)`.

pub mod error;
pub mod lattice;
pub mod permgroup;
pub mod refine;
pub mod config;
pub mod gf;
pub mod surface;
pub mod certify;
pub mod experiment;
pub mod input;
pub mod report;

pub use error::{Error, Result};
