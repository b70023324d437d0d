//! A numerical laboratory for three stochastic properties of the
//! Laplace–Beltrami operator: **parabolicity**, **stochastic completeness**,
//! and the **Feller property**.
//!
//! The library decides these properties — numerically, with explicit
//! tolerances and cross-checks — on three families of spaces:
//!
//! * **Rotationally symmetric model manifolds** `M = [0, ∞) × S^{m-1}` with
//!   metric `dr² + σ(r)² dθ²`, described by a warping profile `σ`
//!   ([`profile`]).  Radial ODE boundary-value problems and Khas'minskii-type
//!   test functions ([`solver`]) feed tri-state verdicts ([`verdicts`]),
//!   which are cross-verified by Monte Carlo simulation of the radial
//!   diffusion ([`montecarlo`]).
//! * **Weighted graphs and discrete warped products** ([`graph`],
//!   [`submersion`]): heat semigroups via the matrix exponential, mass
//!   deficits, product/lifting identities, and discretised model manifolds.
//! * **Immersed patches of nonpositively curved ambient models**
//!   ([`immersion`]): mean curvature from finite-difference second
//!   fundamental forms, composed-distance Laplacian comparisons, and the
//!   bounded-geometry chain of inequalities behind Feller-type criteria.
//!
//! Everything downstream of a [`profile::WarpingProfile`] works in
//! *log space* (`log σ`, `σ'/σ`), so profiles with `σ ~ exp(r³)` or
//! `σ ~ exp(-r³)` are handled without overflow.
//!
//! The `stochlab` binary exposes the whole pipeline as a CLI; see the
//! repository book for a guided tour.

// Validation code throughout the crate writes `!(x > 0.0)` instead of
// `x <= 0.0` on purpose: the negated form is also true for NaN, so a single
// branch rejects both non-positive and non-finite inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod graph;
pub mod immersion;
pub mod montecarlo;
pub mod numerics;
pub mod profile;
pub mod report;
pub mod runner;
pub mod solver;
pub mod special;
pub mod submersion;
pub mod verdicts;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
