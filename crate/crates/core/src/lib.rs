//! Hermite-function bases, collocation and neural-network solvers for the
//! 2D time-independent Schrödinger equation.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collocation;
pub mod error;
pub mod hermite;
pub mod network;
pub mod problems;
pub mod train;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hermite.md")]
    mod hermite {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/collocation.md")]
    mod collocation {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
