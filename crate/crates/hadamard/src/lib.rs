//! Numerical models of Hadamard spaces and the operator-algebraic
//! machinery that lives on them.
//!
//! The crate provides, at desk scale:
//!
//! - [`spaces`]: finite-dimensional CAT(0) models (Euclidean, SPD matrix
//!   cones, weighted products) with exact geodesics, logarithm maps,
//!   comparison angles and Schoenberg Gram matrices;
//! - [`continuum`]: finite measure spaces, measurable partitions with
//!   refinement, simple functions and the `L^2` continuum product metric,
//!   together with constructive approximation bounds;
//! - [`clifford`]: matrix-represented complex Clifford algebras, vector
//!   functional calculus, Clifford operator fields, the Bott map and the
//!   oscillation functionals that control its base-point dependence;
//! - [`actions`]: isometries of the models, their derivatives and induced
//!   fiberwise automorphisms, length functions, the `[0,1]` deformation
//!   homotopy, word-ball properness profiles and rescaled-invariance
//!   profiles;
//! - [`diffeo`]: sampled volume-preserving torus diffeomorphisms, Jacobian
//!   fields, quadrature of the length function `lambda`, and the
//!   pushforward action on `L^2` metric fields;
//! - [`report`]: deterministic CSV reports for all of the above.
//!
//! Every quantitative statement shipped here is backed by a test at a
//! pinned tolerance; the tolerances live in [`tol`].

pub mod actions;
pub mod clifford;
pub mod continuum;
pub mod diffeo;
mod error;
pub mod linalg;
pub mod report;
pub mod spaces;
pub mod tol;

pub use error::{Error, Result};
pub use spaces::{Point, SpaceModel, TangentVector};

#[cfg(doctest)]
mod guide;
