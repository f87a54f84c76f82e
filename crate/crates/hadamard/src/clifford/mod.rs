//! Matrix-represented complex Clifford algebras, vector functional
//! calculus, the Clifford operator field over a Hadamard model, the Bott
//! map, and the oscillation functionals controlling its base-point
//! dependence.

mod algebra;
mod bott;
mod testfn;

pub use algebra::{hermitian_functional_calculus, CliffordAlgebra, CliffordElement};
pub use bott::{
    base_point_bound, base_point_bound_check, bott_eval, clifford_operator, tangent_fiber_vector,
    BoundCheckReport, BoundCheckRow, FiberPoint,
};
pub use testfn::{GridFunction, Parity, TestFunction};
