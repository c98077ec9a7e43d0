//! Spectra of the half-disk Laplacian with a sign-changing Robin coefficient.
//!
//! The exact spectra of the self-adjoint extensions come from [`oracle`]. The
//! regularized problem is solved by finite elements in [`fem`] on the meshes of
//! [`mesh`], and [`wandering`] compares the two as the regularization vanishes.
//! The guide in `book/` walks through each part with runnable examples.

pub mod acceptance;
pub mod error;
pub mod fem;
pub mod kernel;
pub mod mesh;
pub mod oracle;
pub mod plot;
pub mod quadrature;
pub mod roots;
pub mod spectrum;
pub mod transverse;
pub mod wandering;

pub use error::{Error, Result};

/// Reduces an angle to [0, 2π).
pub fn wrap_angle(x: f64) -> f64 {
    let t = x.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU { 0.0 } else { t }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transverse.md")]
    mod transverse {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/extension.md")]
    mod extension {}
    #[doc = include_str!("../../../book/src/fem.md")]
    mod fem {}
    #[doc = include_str!("../../../book/src/wandering.md")]
    mod wandering {}
    #[doc = include_str!("../../../book/src/plots.md")]
    mod plots {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
