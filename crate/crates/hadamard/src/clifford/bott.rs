//! The Clifford operator field and the Bott map over a Hadamard model.
//!
//! Over the fiber space `M x [0, inf)` the Clifford operator centered at
//! `x0` is the vector field `C_{x0}(x, t) = (-log_x(x0), t)`, viewed inside
//! the Clifford algebra of the tangent space at `x` extended by one slot
//! for the `t` line. The Bott map sends `f` to the field
//! `beta_{x0}(f)(x, t) = f(C_{x0}(x, t))` by functional calculus; its
//! dependence on the base point is controlled by the oscillation
//! functionals of `f` through
//!
//! ```text
//! |beta_{x0}(f) - beta_{x1}(f)| <=
//!     2 Omega_r f + max( sqrt(2 Omega_r f Omega_{2r} f), Theta_r f )
//! ```
//!
//! with `r = d(x0, x1)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spaces::{Point, SpaceModel};
use crate::tol;

use super::algebra::{CliffordAlgebra, CliffordElement};
use super::testfn::TestFunction;

/// A point of the fiber space `M x [0, inf)`.
#[derive(Clone, Debug)]
pub struct FiberPoint {
    pub x: Point,
    pub t: f64,
}

impl FiberPoint {
    pub fn new(x: Point, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::usage(format!("fiber parameter must be >= 0, got {t}")));
        }
        Ok(FiberPoint { x, t })
    }
}

/// Coordinates of `C_{x0}(x, t) = (-log_x(x0), t)` in the tangent basis at
/// `x` extended by the `t` slot.
pub fn tangent_fiber_vector(
    model: &SpaceModel,
    x0: &Point,
    p: &FiberPoint,
) -> Result<DVector<f64>> {
    let log = model.log_map(&p.x, x0)?;
    let dim = log.coords.len();
    let mut coords = DVector::zeros(dim + 1);
    for i in 0..dim {
        coords[i] = -log.coords[i];
    }
    coords[dim] = p.t;
    Ok(coords)
}

/// The Clifford operator `C_{x0}(x, t)` as an algebra element; its norm is
/// `sqrt(d(x0, x)^2 + t^2)`.
pub fn clifford_operator(
    model: &SpaceModel,
    alg: &CliffordAlgebra,
    x0: &Point,
    p: &FiberPoint,
) -> Result<CliffordElement> {
    alg.vector_element(&tangent_fiber_vector(model, x0, p)?)
}

/// The Bott map evaluated at one fiber: `beta_{x0}(f)(x, t) = f(C_{x0}(x, t))`.
pub fn bott_eval(
    model: &SpaceModel,
    alg: &CliffordAlgebra,
    f: &TestFunction,
    x0: &Point,
    p: &FiberPoint,
) -> Result<CliffordElement> {
    alg.functional_calculus(f, &tangent_fiber_vector(model, x0, p)?)
}

/// The base-point change bound
/// `2 Omega_r f + max(sqrt(2 Omega_r f Omega_{2r} f), Theta_r f)`,
/// with the `r = 0` case resolved to `0`.
pub fn base_point_bound(f: &TestFunction, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::usage(format!("base-point distance must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let o_r = f.oscillation(r)?;
    let o_2r = f.oscillation(2.0 * r)?;
    let theta = f.mean_functional(r)?;
    Ok(2.0 * o_r + (2.0 * o_r * o_2r).sqrt().max(theta))
}

/// One sampled fiber of a base-point bound check.
#[derive(Clone, Debug)]
pub struct BoundCheckRow {
    pub sample: usize,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Report of a sampled base-point change check. The measured values are
/// maxima over the sampled fibers, hence lower bounds on the true sup-norm
/// difference; a sample exceeding the bound disproves the inequality, while
/// passing samples support it one-sidedly.
#[derive(Clone, Debug)]
pub struct BoundCheckReport {
    pub r: f64,
    pub bound: f64,
    pub rows: Vec<BoundCheckRow>,
    pub max_measured: f64,
    pub max_ratio: f64,
    pub all_pass: bool,
}

/// Evaluates `|beta_{x0}(f)(p) - beta_{x1}(f)(p)|` on every sample and
/// compares against [`base_point_bound`] at `r = d(x0, x1)`, with slack
/// [`tol::BOTT_BOUND_SLACK`].
pub fn base_point_bound_check(
    model: &SpaceModel,
    alg: &CliffordAlgebra,
    f: &TestFunction,
    x0: &Point,
    x1: &Point,
    samples: &[FiberPoint],
) -> Result<BoundCheckReport> {
    if samples.is_empty() {
        return Err(Error::usage("need at least one sample fiber"));
    }
    let r = model.distance(x0, x1)?;
    let bound = base_point_bound(f, r)?;
    let mut rows = Vec::with_capacity(samples.len());
    let mut max_measured = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut all_pass = true;
    for (i, p) in samples.iter().enumerate() {
        let a = bott_eval(model, alg, f, x0, p)?;
        let b = bott_eval(model, alg, f, x1, p)?;
        let measured = (&a - &b).operator_norm();
        let pass = measured <= bound + tol::BOTT_BOUND_SLACK;
        let ratio = if bound > 0.0 { measured / bound } else { 0.0 };
        max_measured = max_measured.max(measured);
        max_ratio = max_ratio.max(ratio);
        all_pass &= pass;
        rows.push(BoundCheckRow {
            sample: i,
            measured,
            bound,
            ratio,
            pass,
        });
    }
    Ok(BoundCheckReport {
        r,
        bound,
        rows,
        max_measured,
        max_ratio,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::hermitian_functional_calculus;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fiber(model: &SpaceModel, rng: &mut ChaCha8Rng, spread: f64) -> FiberPoint {
        FiberPoint::new(model.random_point(rng, spread), rng.random::<f64>() * 2.0).unwrap()
    }

    #[test]
    fn euclidean_clifford_operator_is_the_euler_field() {
        let model = SpaceModel::euclidean(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let x0 = model.euclidean_point(&[0.3, -0.4]).unwrap();
        let x = model.euclidean_point(&[1.0, 1.0]).unwrap();
        let p = FiberPoint::new(x.clone(), 0.7).unwrap();
        let c = clifford_operator(&model, &alg, &x0, &p).unwrap();
        let v = DVector::from_row_slice(&[1.0 - 0.3, 1.0 + 0.4, 0.7]);
        let direct = alg.vector_element(&v).unwrap();
        assert!((&c - &direct).operator_norm() <= 1e-14);
        let norm = c.operator_norm();
        let d = model.distance(&x0, &x).unwrap();
        assert!((norm - (d * d + 0.49).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn clifford_operator_vanishes_at_the_center_fiber() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let x0 = model.base_point();
        let p = FiberPoint::new(x0.clone(), 0.0).unwrap();
        let c = clifford_operator(&model, &alg, &x0, &p).unwrap();
        assert!(c.operator_norm() <= 1e-14);
    }

    #[test]
    fn base_point_shift_is_metrically_semi_decreasing() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(211);
        for _ in 0..100 {
            let x0 = model.random_point(&mut rng, 0.7);
            let x1 = model.random_point(&mut rng, 0.7);
            let p = fiber(&model, &mut rng, 0.7);
            let c0 = clifford_operator(&model, &alg, &x0, &p).unwrap();
            let c1 = clifford_operator(&model, &alg, &x1, &p).unwrap();
            let diff = (&c0 - &c1).operator_norm();
            let d = model.distance(&x0, &x1).unwrap();
            assert!(diff <= d + 1e-9, "diff {diff} > d {d}");
        }
    }

    #[test]
    fn even_functions_give_scalar_fields_of_the_squared_distance() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(223);
        let f = TestFunction::gaussian(1.0);
        for _ in 0..20 {
            let x0 = model.random_point(&mut rng, 0.6);
            let p = fiber(&model, &mut rng, 0.6);
            let e = bott_eval(&model, &alg, &f, &x0, &p).unwrap();
            assert!(e.scalar_defect() <= 1e-12);
            let d = model.distance(&x0, &p.x).unwrap();
            let expected = (-(d * d + p.t * p.t)).exp();
            let got = e.matrix()[(0, 0)];
            assert!((got - Complex64::new(expected, 0.0)).norm() <= 1e-12);
        }
        // At the center fiber the value is f(0) Id.
        let x0 = model.base_point();
        let p = FiberPoint::new(x0.clone(), 0.0).unwrap();
        let e = bott_eval(&model, &alg, &f, &x0, &p).unwrap();
        assert!((&e - &alg.identity_element()).operator_norm() <= 1e-14);
    }

    #[test]
    fn bott_eval_is_multiplicative_and_norm_contractive() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(227);
        let family = TestFunction::family();
        for _ in 0..50 {
            let x0 = model.random_point(&mut rng, 0.7);
            let p = fiber(&model, &mut rng, 0.7);
            let i = rng.random_range(0..family.len());
            let j = rng.random_range(0..family.len());
            let prod = TestFunction::product(family[i].clone(), family[j].clone());
            let lhs = bott_eval(&model, &alg, &prod, &x0, &p).unwrap();
            let rhs = &bott_eval(&model, &alg, &family[i], &x0, &p).unwrap()
                * &bott_eval(&model, &alg, &family[j], &x0, &p).unwrap();
            assert!((&lhs - &rhs).operator_norm() <= 1e-10);
            for f in &family {
                let e = bott_eval(&model, &alg, f, &x0, &p).unwrap();
                assert!(e.operator_norm() <= f.sup_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn one_dimensional_euclidean_fiber_matches_eigen_oracle() {
        let model = SpaceModel::euclidean(1);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let x0 = model.euclidean_point(&[0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(229);
        for f in TestFunction::family() {
            for _ in 0..20 {
                let x = model
                    .euclidean_point(&[rng.random::<f64>() * 4.0 - 2.0])
                    .unwrap();
                let p = FiberPoint::new(x, rng.random::<f64>() * 2.0).unwrap();
                let e = bott_eval(&model, &alg, &f, &x0, &p).unwrap();
                let c = clifford_operator(&model, &alg, &x0, &p).unwrap();
                let oracle = hermitian_functional_calculus(c.matrix(), |s| f.value(s));
                assert!((e.matrix() - &oracle).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn base_point_bound_holds_on_random_spd_fibers() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(233);
        for f in TestFunction::family() {
            let x0 = model.random_point(&mut rng, 0.6);
            let x1 = model.random_point(&mut rng, 0.6);
            let samples: Vec<FiberPoint> =
                (0..50).map(|_| fiber(&model, &mut rng, 0.8)).collect();
            let report = base_point_bound_check(&model, &alg, &f, &x0, &x1, &samples).unwrap();
            assert!(report.all_pass, "violations for {f:?}");
            assert!(report.max_ratio <= 1.0 + 1e-9);
            // Coincident base points: zero difference against a zero bound.
            let same = base_point_bound_check(&model, &alg, &f, &x0, &x0, &samples).unwrap();
            assert!(same.bound <= 1e-12 && same.all_pass);
        }
    }

    #[test]
    fn bott_map_is_continuous_in_the_base_point() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(239);
        let f = TestFunction::gaussian(1.0);
        let x0 = model.random_point(&mut rng, 0.5);
        let far = model.random_point(&mut rng, 0.9);
        let samples: Vec<FiberPoint> = (0..20).map(|_| fiber(&model, &mut rng, 0.7)).collect();
        // x_n -> x0 along the geodesic from `far`; the sampled sup-difference
        // decreases to 0.
        let mut previous = f64::INFINITY;
        for n in 0..8 {
            let xn = model.geodesic(&x0, &far, 0.5_f64.powi(n)).unwrap();
            let mut worst = 0.0_f64;
            for p in &samples {
                let a = bott_eval(&model, &alg, &f, &x0, p).unwrap();
                let b = bott_eval(&model, &alg, &f, &xn, p).unwrap();
                worst = worst.max((&a - &b).operator_norm());
            }
            assert!(worst <= previous + 1e-6, "not monotone at n = {n}");
            previous = worst;
        }
        assert!(previous <= 1e-2, "difference did not decay: {previous}");
    }

    #[test]
    fn zero_t_fiber_of_an_odd_tangent_dimension_splits_into_two_blocks() {
        // SPD(2) has tangent dimension 3; at t = 0 the fields take values in
        // the subalgebra generated by the first three of four generators,
        // which is M_2 (+) M_2 in the eigenbasis of the central element
        // i g1 g2 g3.
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        assert_eq!(alg.generator_count(), 4);
        let central =
            (alg.gamma(0) * alg.gamma(1) * alg.gamma(2)) * Complex64::new(0.0, 1.0);
        // Central element: self-adjoint involution commuting with the first
        // three generators.
        assert!((&central - central.adjoint()).norm() <= 1e-12);
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!(((&central * &central) - &id).norm() <= 1e-12);
        for i in 0..3 {
            let comm = &central * alg.gamma(i) - alg.gamma(i) * &central;
            assert!(comm.norm() <= 1e-12, "generator {i} does not commute");
        }
        let eig = central.clone().symmetric_eigen();
        // Sort the eigenbasis by eigenvalue so the two blocks are contiguous.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap()
        });
        let mut u = DMatrix::<Complex64>::zeros(4, 4);
        for (col, &src) in order.iter().enumerate() {
            u.set_column(col, &eig.eigenvectors.column(src));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(241);
        let x0 = model.random_point(&mut rng, 0.6);
        for f in TestFunction::family() {
            for _ in 0..5 {
                let p = FiberPoint::new(model.random_point(&mut rng, 0.6), 0.0).unwrap();
                let e = bott_eval(&model, &alg, &f, &x0, &p).unwrap();
                let conj = u.adjoint() * e.matrix() * &u;
                let mut off = 0.0_f64;
                for i in 0..2 {
                    for j in 2..4 {
                        off = off.max(conj[(i, j)].norm()).max(conj[(j, i)].norm());
                    }
                }
                assert!(off <= 1e-12, "off-diagonal block {off}");
            }
        }
    }
}
