//! Concrete isometry descriptors and their derivatives.

use nalgebra::{DMatrix, DVector};

use crate::clifford::{CliffordAlgebra, CliffordElement, FiberPoint, TestFunction};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spaces::{self, Point, SpaceModel};
use crate::tol;

/// An isometry of a [`SpaceModel`], given by explicit data.
#[derive(Clone, Debug)]
pub enum Isometry {
    /// `A -> T A T^t` on an SPD model, `|det T| = 1`.
    SpdCongruence { t: DMatrix<f64> },
    /// `x -> Q x + b` on a Euclidean model, `Q` orthogonal.
    EuclideanAffine { q: DMatrix<f64>, b: DVector<f64> },
    /// One isometry per factor of a product model.
    ProductComponentwise(Vec<Isometry>),
    /// Permutation of product components of equal weight and model; sends
    /// the value at slot `j` to slot `perm[j]`.
    AtomPermutation(Vec<usize>),
    /// Per-component "dial": like `ProductComponentwise`, used for
    /// pointwise congruence actions on continuum products.
    PiecewiseDial(Vec<Isometry>),
}

impl Isometry {
    /// The identity isometry of a model.
    pub fn identity(model: &SpaceModel) -> Isometry {
        match model {
            SpaceModel::Euclidean { dim } => Isometry::EuclideanAffine {
                q: DMatrix::identity(*dim, *dim),
                b: DVector::zeros(*dim),
            },
            SpaceModel::Spd { n, .. } => Isometry::SpdCongruence {
                t: DMatrix::identity(*n, *n),
            },
            SpaceModel::Product { factors } => Isometry::ProductComponentwise(
                factors.iter().map(|(m, _)| Isometry::identity(m)).collect(),
            ),
        }
    }

    pub fn spd_congruence(t: DMatrix<f64>) -> Isometry {
        Isometry::SpdCongruence { t }
    }

    pub fn euclidean_affine(q: DMatrix<f64>, b: DVector<f64>) -> Isometry {
        Isometry::EuclideanAffine { q, b }
    }

    /// Validates the descriptor against a model.
    pub fn validate(&self, model: &SpaceModel) -> Result<()> {
        match (self, model) {
            (Isometry::SpdCongruence { t }, SpaceModel::Spd { n, .. }) => {
                if t.nrows() != *n || t.ncols() != *n {
                    return Err(Error::mismatch("congruence matrix size mismatch"));
                }
                let det = t.determinant().abs();
                if (det - 1.0).abs() > tol::UNIMODULAR_MAP_DET {
                    return Err(Error::domain(format!(
                        "congruence matrix must have |det| = 1, got {det}"
                    )));
                }
                Ok(())
            }
            (Isometry::EuclideanAffine { q, b }, SpaceModel::Euclidean { dim }) => {
                if q.nrows() != *dim || q.ncols() != *dim || b.len() != *dim {
                    return Err(Error::mismatch("affine isometry size mismatch"));
                }
                let defect = (q.transpose() * q - DMatrix::identity(*dim, *dim)).norm();
                if defect > tol::DERIVATIVE_ORTHOGONALITY {
                    return Err(Error::domain(format!(
                        "linear part must be orthogonal (defect {defect:.3e})"
                    )));
                }
                Ok(())
            }
            (
                Isometry::ProductComponentwise(parts) | Isometry::PiecewiseDial(parts),
                SpaceModel::Product { factors },
            ) => {
                if parts.len() != factors.len() {
                    return Err(Error::mismatch("one component isometry per factor required"));
                }
                for (part, (m, _)) in parts.iter().zip(factors) {
                    part.validate(m)?;
                }
                Ok(())
            }
            (Isometry::AtomPermutation(perm), SpaceModel::Product { factors }) => {
                if perm.len() != factors.len() {
                    return Err(Error::mismatch("permutation length mismatch"));
                }
                let mut seen = vec![false; perm.len()];
                for (j, &i) in perm.iter().enumerate() {
                    if i >= perm.len() || seen[i] {
                        return Err(Error::usage("not a permutation"));
                    }
                    seen[i] = true;
                    let (mj, wj) = &factors[j];
                    let (mi, wi) = &factors[i];
                    if mj != mi {
                        return Err(Error::domain(
                            "permutation may only exchange factors with equal models",
                        ));
                    }
                    if (wj - wi).abs() > 1e-12 * (1.0 + wj.abs()) {
                        return Err(Error::domain(
                            "permutation may only exchange atoms of equal weight",
                        ));
                    }
                }
                Ok(())
            }
            _ => Err(Error::mismatch("descriptor does not fit the model variant")),
        }
    }

    /// Applies the isometry to a point.
    pub fn apply(&self, model: &SpaceModel, x: &Point) -> Result<Point> {
        match (self, model, x) {
            (Isometry::SpdCongruence { t }, SpaceModel::Spd { .. }, Point::Spd(a)) => Ok(
                Point::Spd(linalg::symmetrize(&(t * a * t.transpose()))),
            ),
            (Isometry::EuclideanAffine { q, b }, SpaceModel::Euclidean { .. }, Point::Euclidean(v)) => {
                Ok(Point::Euclidean(q * v + b))
            }
            (
                Isometry::ProductComponentwise(parts) | Isometry::PiecewiseDial(parts),
                SpaceModel::Product { factors },
                Point::Product(xs),
            ) => {
                if parts.len() != factors.len() || xs.len() != factors.len() {
                    return Err(Error::mismatch("component count mismatch"));
                }
                let out = parts
                    .iter()
                    .zip(factors)
                    .zip(xs)
                    .map(|((part, (m, _)), xi)| part.apply(m, xi))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Point::Product(out))
            }
            (Isometry::AtomPermutation(perm), SpaceModel::Product { .. }, Point::Product(xs)) => {
                if perm.len() != xs.len() {
                    return Err(Error::mismatch("permutation length mismatch"));
                }
                let mut out = xs.clone();
                for (j, &i) in perm.iter().enumerate() {
                    out[i] = xs[j].clone();
                }
                Ok(Point::Product(out))
            }
            _ => Err(Error::mismatch("descriptor, model and point do not align")),
        }
    }

    /// The inverse isometry.
    pub fn inverse(&self) -> Result<Isometry> {
        match self {
            Isometry::SpdCongruence { t } => {
                let inv = t
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::domain("congruence matrix is singular"))?;
                Ok(Isometry::SpdCongruence { t: inv })
            }
            Isometry::EuclideanAffine { q, b } => {
                let qt = q.transpose();
                let nb = -(&qt * b);
                Ok(Isometry::EuclideanAffine { q: qt, b: nb })
            }
            Isometry::ProductComponentwise(parts) => Ok(Isometry::ProductComponentwise(
                parts.iter().map(|p| p.inverse()).collect::<Result<_>>()?,
            )),
            Isometry::PiecewiseDial(parts) => Ok(Isometry::PiecewiseDial(
                parts.iter().map(|p| p.inverse()).collect::<Result<_>>()?,
            )),
            Isometry::AtomPermutation(perm) => {
                let mut inv = vec![0; perm.len()];
                for (j, &i) in perm.iter().enumerate() {
                    inv[i] = j;
                }
                Ok(Isometry::AtomPermutation(inv))
            }
        }
    }

    /// Composition `self . other` (apply `other` first). Supported for
    /// descriptors of the same kind.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        match (self, other) {
            (Isometry::SpdCongruence { t: t1 }, Isometry::SpdCongruence { t: t2 }) => {
                Ok(Isometry::SpdCongruence { t: t1 * t2 })
            }
            (
                Isometry::EuclideanAffine { q: q1, b: b1 },
                Isometry::EuclideanAffine { q: q2, b: b2 },
            ) => Ok(Isometry::EuclideanAffine {
                q: q1 * q2,
                b: q1 * b2 + b1,
            }),
            (Isometry::ProductComponentwise(a), Isometry::ProductComponentwise(b))
            | (Isometry::PiecewiseDial(a), Isometry::PiecewiseDial(b)) => {
                if a.len() != b.len() {
                    return Err(Error::mismatch("component count mismatch"));
                }
                let parts = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| x.compose(y))
                    .collect::<Result<Vec<_>>>()?;
                Ok(match self {
                    Isometry::PiecewiseDial(_) => Isometry::PiecewiseDial(parts),
                    _ => Isometry::ProductComponentwise(parts),
                })
            }
            (Isometry::AtomPermutation(s), Isometry::AtomPermutation(t)) => {
                // (s . t)[j] = s[t[j]]
                Ok(Isometry::AtomPermutation(t.iter().map(|&j| s[j]).collect()))
            }
            _ => Err(Error::usage(
                "composition across descriptor kinds is not representable",
            )),
        }
    }

    /// The derivative at `x` as an orthogonal matrix in tangent-basis
    /// coordinates (from the basis at `x` to the basis at `self(x)`).
    pub fn derivative(&self, model: &SpaceModel, x: &Point) -> Result<DMatrix<f64>> {
        match (self, model, x) {
            (Isometry::EuclideanAffine { q, .. }, SpaceModel::Euclidean { .. }, _) => Ok(q.clone()),
            (Isometry::SpdCongruence { t }, SpaceModel::Spd { n, unimodular }, Point::Spd(a)) => {
                // On tangents the congruence acts by X -> T X T^t; in the
                // normalized bases at A and B = T A T^t this becomes
                // S -> Qc S Qc^t with the orthogonal Qc = B^{-1/2} T A^{1/2}.
                let b = linalg::symmetrize(&(t * a * t.transpose()));
                let qc = linalg::sym_inv_sqrt(&b) * t * linalg::sym_sqrt(a);
                let d = model.tangent_dim();
                let mut out = DMatrix::zeros(d, d);
                for k in 0..d {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    let s = spaces::coords_to_sym(*n, *unimodular, &e);
                    let mapped = linalg::symmetrize(&(&qc * s * qc.transpose()));
                    let col = spaces::sym_to_coords(*n, *unimodular, &mapped);
                    out.set_column(k, &col);
                }
                Ok(out)
            }
            (
                Isometry::ProductComponentwise(parts) | Isometry::PiecewiseDial(parts),
                SpaceModel::Product { factors },
                Point::Product(xs),
            ) => {
                let dim = model.tangent_dim();
                let mut out = DMatrix::zeros(dim, dim);
                let mut offset = 0;
                for ((part, (m, _)), xi) in parts.iter().zip(factors).zip(xs) {
                    let dk = m.tangent_dim();
                    let block = part.derivative(m, xi)?;
                    out.view_mut((offset, offset), (dk, dk)).copy_from(&block);
                    offset += dk;
                }
                Ok(out)
            }
            (Isometry::AtomPermutation(perm), SpaceModel::Product { factors }, _) => {
                // Equal weights and models, so tangent blocks just move.
                let dims: Vec<usize> = factors.iter().map(|(m, _)| m.tangent_dim()).collect();
                let offsets: Vec<usize> = dims
                    .iter()
                    .scan(0, |acc, &d| {
                        let o = *acc;
                        *acc += d;
                        Some(o)
                    })
                    .collect();
                let total: usize = dims.iter().sum();
                let mut out = DMatrix::zeros(total, total);
                for (j, &i) in perm.iter().enumerate() {
                    for a in 0..dims[j] {
                        out[(offsets[i] + a, offsets[j] + a)] = 1.0;
                    }
                }
                Ok(out)
            }
            _ => Err(Error::mismatch("descriptor, model and point do not align")),
        }
    }
}

/// The length function `l_x(phi) = d(x, phi(x))`.
pub fn length_function(model: &SpaceModel, x: &Point, phi: &Isometry) -> Result<f64> {
    model.distance(x, &phi.apply(model, x)?)
}

/// The induced fiberwise automorphism applied to a Bott field:
/// `phi_*(beta_{x0}(f))(x, t) = Cl(D phi (+) id)(beta_{x0}(f)(phi^{-1} x, t))`,
/// evaluated through functional calculus of the transported vector. Equals
/// `beta_{phi(x0)}(f)(x, t)` up to rounding.
pub fn induced_automorphism(
    model: &SpaceModel,
    alg: &CliffordAlgebra,
    phi: &Isometry,
    x0: &Point,
    f: &TestFunction,
    p: &FiberPoint,
) -> Result<CliffordElement> {
    let pre = phi.inverse()?.apply(model, &p.x)?;
    let v = crate::clifford::tangent_fiber_vector(
        model,
        x0,
        &FiberPoint::new(pre.clone(), p.t)?,
    )?;
    let dim = model.tangent_dim();
    let d = phi.derivative(model, &pre)?;
    let moved = &d * v.rows(0, dim);
    let mut w = DVector::zeros(dim + 1);
    for i in 0..dim {
        w[i] = moved[i];
    }
    w[dim] = p.t;
    alg.functional_calculus(f, &w)
}

///`(lambda_+(f), lambda_+(f^{-1}))` of a piecewise dial over a product
/// model: `lambda_+ = (sum_i w_i log^2 ||T_i||)^{1/2}` with the operator
/// norm taken fiberwise.
pub fn piecewise_dial_lambda(model: &SpaceModel, dial: &Isometry) -> Result<(f64, f64)> {
    let (parts, factors) = match (dial, model) {
        (
            Isometry::PiecewiseDial(parts) | Isometry::ProductComponentwise(parts),
            SpaceModel::Product { factors },
        ) => (parts, factors),
        _ => {
            return Err(Error::usage(
                "lambda functionals are defined for dials over product models",
            ))
        }
    };
    if parts.len() != factors.len() {
        return Err(Error::mismatch("component count mismatch"));
    }
    let mut fwd = 0.0;
    let mut bwd = 0.0;
    for (part, (_, w)) in parts.iter().zip(factors) {
        match part {
            Isometry::SpdCongruence { t } => {
                let n = linalg::operator_norm(t).ln();
                let inv = t
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::domain("singular dial entry"))?;
                let ni = linalg::operator_norm(&inv).ln();
                fwd += w * n * n;
                bwd += w * ni * ni;
            }
            _ => {
                return Err(Error::usage(
                    "lambda functionals need congruence dials in every fiber",
                ))
            }
        }
    }
    Ok((fwd.sqrt(), bwd.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{bott_eval, CliffordAlgebra};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        g.qr().q()
    }

    fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        loop {
            let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let det = g.determinant().abs();
            if det > 0.05 {
                return g / det.powf(1.0 / n as f64);
            }
        }
    }

    #[test]
    fn identity_descriptor_fixes_points() {
        let model = SpaceModel::spd(2);
        let id = Isometry::identity(&model);
        id.validate(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(301);
        let x = model.random_point(&mut rng, 0.7);
        let y = id.apply(&model, &x).unwrap();
        assert!(model.distance(&x, &y).unwrap() <= 1e-14);
    }

    #[test]
    fn congruence_moves_identity_to_ttt() {
        let model = SpaceModel::spd(2);
        let e = std::f64::consts::E;
        let t = DMatrix::from_row_slice(2, 2, &[e.sqrt(), 0.0, 0.0, 1.0 / e.sqrt()]);
        let phi = Isometry::spd_congruence(t);
        phi.validate(&model).unwrap();
        let moved = phi.apply(&model, &model.base_point()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]);
        assert!((moved.as_spd().unwrap() - expected).norm() <= 1e-12);
    }

    #[test]
    fn descriptors_act_by_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(307);
        let spd = SpaceModel::spd(2);
        let eucl = SpaceModel::euclidean(3);
        let prod = SpaceModel::product(vec![(spd.clone(), 0.5), (spd.clone(), 0.5)]).unwrap();

        for _ in 0..100 {
            let phi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
            let x = spd.random_point(&mut rng, 0.7);
            let y = spd.random_point(&mut rng, 0.7);
            let d0 = spd.distance(&x, &y).unwrap();
            let d1 = spd
                .distance(&phi.apply(&spd, &x).unwrap(), &phi.apply(&spd, &y).unwrap())
                .unwrap();
            assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
        }
        for _ in 0..50 {
            let q = random_orthogonal(3, &mut rng);
            let b = DVector::from_fn(3, |_, _| rng.random::<f64>());
            let phi = Isometry::euclidean_affine(q, b);
            phi.validate(&eucl).unwrap();
            let x = eucl.random_point(&mut rng, 1.0);
            let y = eucl.random_point(&mut rng, 1.0);
            let d0 = eucl.distance(&x, &y).unwrap();
            let d1 = eucl
                .distance(
                    &phi.apply(&eucl, &x).unwrap(),
                    &phi.apply(&eucl, &y).unwrap(),
                )
                .unwrap();
            assert!((d0 - d1).abs() <= 1e-9 * (1.0 + d0));
        }
        // Permutation of equal-weight factors.
        let perm = Isometry::AtomPermutation(vec![1, 0]);
        perm.validate(&prod).unwrap();
        for _ in 0..20 {
            let x = prod.random_point(&mut rng, 0.6);
            let y = prod.random_point(&mut rng, 0.6);
            let d0 = prod.distance(&x, &y).unwrap();
            let d1 = prod
                .distance(
                    &perm.apply(&prod, &x).unwrap(),
                    &perm.apply(&prod, &y).unwrap(),
                )
                .unwrap();
            assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0));
        }
    }

    #[test]
    fn unequal_weights_reject_permutations() {
        let spd = SpaceModel::spd(2);
        let prod = SpaceModel::product(vec![(spd.clone(), 0.3), (spd, 0.7)]).unwrap();
        let perm = Isometry::AtomPermutation(vec![1, 0]);
        assert!(perm.validate(&prod).is_err());
    }

    #[test]
    fn derivatives_are_orthogonal_and_functorial() {
        let mut rng = ChaCha8Rng::seed_from_u64(311);
        let model = SpaceModel::spd(2);
        let d = model.tangent_dim();
        for _ in 0..50 {
            let phi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
            let psi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
            let x = model.random_point(&mut rng, 0.6);
            let dp = phi.derivative(&model, &x).unwrap();
            assert!(
                (dp.transpose() * &dp - DMatrix::identity(d, d)).norm() <= 1e-9,
                "derivative not orthogonal"
            );
            // Chain rule: D(phi psi)(x) = D phi(psi x) D psi(x).
            let comp = phi.compose(&psi).unwrap();
            let lhs = comp.derivative(&model, &x).unwrap();
            let psix = psi.apply(&model, &x).unwrap();
            let rhs = phi.derivative(&model, &psix).unwrap() * psi.derivative(&model, &x).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9);
        }
    }

    #[test]
    fn identity_and_euclidean_derivatives() {
        let eucl = SpaceModel::euclidean(3);
        let mut rng = ChaCha8Rng::seed_from_u64(313);
        let q = random_orthogonal(3, &mut rng);
        let phi = Isometry::euclidean_affine(q.clone(), DVector::from_row_slice(&[1.0, 2.0, 3.0]));
        let x = eucl.random_point(&mut rng, 1.0);
        assert!((phi.derivative(&eucl, &x).unwrap() - q).norm() <= 1e-14);

        let spd = SpaceModel::spd(2);
        let id = Isometry::identity(&spd);
        let x = spd.random_point(&mut rng, 0.5);
        let d = spd.tangent_dim();
        assert!((id.derivative(&spd, &x).unwrap() - DMatrix::identity(d, d)).norm() <= 1e-12);
    }

    #[test]
    fn congruence_derivative_matches_finite_differences() {
        let model = SpaceModel::spd(2);
        let mut rng = ChaCha8Rng::seed_from_u64(317);
        let phi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
        let x = model.random_point(&mut rng, 0.5);
        let phix = phi.apply(&model, &x).unwrap();
        let deriv = phi.derivative(&model, &x).unwrap();
        let d = model.tangent_dim();
        let h = 1e-6;
        for k in 0..d {
            let mut coords = DVector::zeros(d);
            coords[k] = h;
            let v = crate::spaces::TangentVector {
                base: x.clone(),
                coords,
            };
            let moved = phi.apply(&model, &model.exp_map(&x, &v).unwrap()).unwrap();
            let fd = model.log_map(&phix, &moved).unwrap().coords / h;
            let col = deriv.column(k);
            assert!((fd - col).norm() <= 1e-5, "finite differences disagree at column {k}");
        }
    }

    #[test]
    fn induced_automorphism_intertwines_bott_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(331);
        for model in [
            SpaceModel::spd(2),
            SpaceModel::euclidean(3),
        ] {
            let alg = CliffordAlgebra::for_model(&model).unwrap();
            for _ in 0..40 {
                let phi = match model {
                    SpaceModel::Spd { .. } => {
                        Isometry::spd_congruence(random_unimodular(2, &mut rng))
                    }
                    _ => Isometry::euclidean_affine(
                        random_orthogonal(3, &mut rng),
                        DVector::from_fn(3, |_, _| rng.random::<f64>()),
                    ),
                };
                let x0 = model.random_point(&mut rng, 0.6);
                let p = FiberPoint::new(
                    model.random_point(&mut rng, 0.6),
                    rng.random::<f64>() * 2.0,
                )
                .unwrap();
                for f in TestFunction::family() {
                    let lhs = induced_automorphism(&model, &alg, &phi, &x0, &f, &p).unwrap();
                    let moved = phi.apply(&model, &x0).unwrap();
                    let rhs = bott_eval(&model, &alg, &f, &moved, &p).unwrap();
                    let defect = (&lhs - &rhs).operator_norm();
                    assert!(defect <= 1e-8, "equivariance defect {defect}");
                }
            }
        }
    }

    #[test]
    fn induced_automorphism_with_identity_is_bott_eval() {
        let model = SpaceModel::spd(2);
        let alg = CliffordAlgebra::for_model(&model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(337);
        let id = Isometry::identity(&model);
        let x0 = model.random_point(&mut rng, 0.6);
        let p = FiberPoint::new(model.random_point(&mut rng, 0.6), 0.4).unwrap();
        let f = TestFunction::odd_hat(1.0);
        let lhs = induced_automorphism(&model, &alg, &id, &x0, &f, &p).unwrap();
        let rhs = bott_eval(&model, &alg, &f, &x0, &p).unwrap();
        assert!((&lhs - &rhs).operator_norm() <= 1e-12);
    }

    #[test]
    fn length_function_examples_and_bounds() {
        let model = SpaceModel::spd(2);
        let mut rng = ChaCha8Rng::seed_from_u64(347);
        let id = Isometry::identity(&model);
        let i2 = model.base_point();
        assert_eq!(length_function(&model, &i2, &id).unwrap(), 0.0);

        // l_I(congruence by T) = ||log(T^t T)||_HS.
        for _ in 0..20 {
            let t = random_unimodular(2, &mut rng);
            let phi = Isometry::spd_congruence(t.clone());
            let l = length_function(&model, &i2, &phi).unwrap();
            let ttt = linalg::symmetrize(&(t.transpose() * &t));
            let oracle = linalg::hs_norm(&linalg::sym_log(&ttt));
            assert!((l - oracle).abs() <= 1e-9);
        }

        // |l_x - l_x'| <= 2 d(x, x') and conjugation invariance.
        for _ in 0..50 {
            let phi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
            let psi = Isometry::spd_congruence(random_unimodular(2, &mut rng));
            let x = model.random_point(&mut rng, 0.6);
            let y = model.random_point(&mut rng, 0.6);
            let lx = length_function(&model, &x, &phi).unwrap();
            let ly = length_function(&model, &y, &phi).unwrap();
            let d = model.distance(&x, &y).unwrap();
            assert!((lx - ly).abs() <= 2.0 * d + 1e-9);

            let conj = psi.compose(&phi).unwrap().compose(&psi.inverse().unwrap()).unwrap();
            let moved = psi.apply(&model, &x).unwrap();
            let lc = length_function(&model, &moved, &conj).unwrap();
            assert!((lc - lx).abs() <= 1e-10 * (1.0 + lx), "conjugation invariance");
        }
    }

    #[test]
    fn dial_lambda_brackets_the_orbit_length() {
        // l_{const I}(dial) lies between lambda_+ and
        // sqrt(n) (1 + sqrt(n-1)) lambda_+ for n = 2 dials; for n = 3 the
        // valid constant is 2 sqrt(1 + (n-1)^3).
        let mut rng = ChaCha8Rng::seed_from_u64(349);
        for n in [2usize, 3] {
            let fiber = SpaceModel::spd(n);
            let atoms = 4usize;
            let model = SpaceModel::product(
                (0..atoms).map(|_| (fiber.clone(), 1.0 / atoms as f64)).collect(),
            )
            .unwrap();
            let upper = if n == 2 {
                (n as f64).sqrt() * (1.0 + ((n - 1) as f64).sqrt())
            } else {
                2.0 * (1.0 + ((n - 1) as f64).powi(3)).sqrt()
            };
            for _ in 0..40 {
                let dial = Isometry::PiecewiseDial(
                    (0..atoms)
                        .map(|_| Isometry::spd_congruence(random_unimodular(n, &mut rng)))
                        .collect(),
                );
                let (lp, _) = piecewise_dial_lambda(&model, &dial).unwrap();
                let base = model.base_point();
                let l = length_function(&model, &base, &dial).unwrap();
                assert!(l >= lp - 1e-9, "lower bound: l = {l}, lambda+ = {lp}");
                assert!(
                    l <= upper * lp + 1e-9,
                    "upper bound: l = {l}, lambda+ = {lp}, c = {upper}"
                );
            }
        }
    }
}
