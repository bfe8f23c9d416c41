//! Numerical laboratory for finite-time collapse of radial compressible
//! flows with attractive, repulsive, or absent self-consistent forcing.
//!
//! The crate provides scalar comparison curves with closed-form blowup
//! times, radial field and potential evaluation, integral diagnostics, a
//! Lagrangian shell solver with online blowup detection, and a CLI that
//! emits byte-stable traces and reports.

pub mod cli;
pub mod error;
pub mod functionals;
pub mod greens;
pub mod lagrangian;
pub mod model;
mod numerics;
pub mod riccati;

pub use error::{Error, Result};

/// The long-form guide, one module per chapter of `book/`.
///
/// The chapter sources are included verbatim, which keeps every code block
/// in the rendered book compiling and passing as a doc-test of this crate.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    pub mod model {}
    #[doc = include_str!("../../../book/src/comparison-curves.md")]
    pub mod comparison_curves {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    pub mod potentials {}
    #[doc = include_str!("../../../book/src/shells.md")]
    pub mod shells {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    pub mod functionals {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
