//! Isometries of the models and of their continuum products: concrete
//! descriptors with derivatives, induced fiberwise automorphisms, length
//! functions, the `[0,1]` deformation homotopy, and the properness and
//! asymptotic-invariance analyzers built on top of them.

mod deform;
mod isometry;
mod profiles;

pub use deform::{apply_to_simple, continuum_lift, refine_at, DeformedIsometry};
pub use isometry::{induced_automorphism, length_function, piecewise_dial_lambda, Isometry};
pub use profiles::{
    asymptotic_invariance_profile, properness_profile, InvarianceProfile, InvarianceRow,
    PropernessProfile, PropernessRow,
};
