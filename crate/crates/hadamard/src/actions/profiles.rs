//! Properness and asymptotic-invariance analyzers.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clifford::{
    base_point_bound, bott_eval, CliffordAlgebra, FiberPoint, TestFunction,
};
use crate::error::{Error, Result};
use crate::spaces::{Point, SpaceModel};
use crate::tol;

use super::isometry::{induced_automorphism, Isometry};

/// One word-length shell of a properness profile.
#[derive(Clone, Debug)]
pub struct PropernessRow {
    pub word_length: usize,
    /// Distinct group elements first reached at this length.
    pub elements: usize,
    /// Minimum of `l_x` over those elements.
    pub min_length: f64,
    /// Fraction of those elements whose translate of a ball of radius
    /// `overlap_radius` around `x` is disjoint from the ball itself, i.e.
    /// `d(x, g x) > 2 overlap_radius`. For an even bump function supported
    /// in that ball, disjointness makes the field and its translate
    /// orthogonal.
    pub overlap_free_fraction: f64,
}

/// Growth profile of orbit lengths over word balls.
#[derive(Clone, Debug)]
pub struct PropernessProfile {
    pub rows: Vec<PropernessRow>,
    pub overlap_radius: f64,
}

const PROBE_SEED: u64 = 0x50524f4245;
const MAX_ELEMENTS: usize = 200_000;

/// Enumerates the ball of the given radius in the group generated by the
/// descriptors (words over the generator alphabet as given; include
/// inverses explicitly if two-sided balls are wanted). Elements are
/// deduplicated by their action on a fixed probe tuple of four points,
/// quantized at [`tol::WORD_DEDUP_RESOLUTION`]. For each word length the
/// profile records the minimal orbit length of `x` among the elements
/// first reached at that length, together with the fraction that moves `x`
/// by more than `2 * overlap_radius`.
pub fn properness_profile(
    model: &SpaceModel,
    generators: &[Isometry],
    x: &Point,
    radius: usize,
    overlap_radius: f64,
) -> Result<PropernessProfile> {
    if radius > tol::MAX_WORD_RADIUS {
        return Err(Error::Resource(format!(
            "word radius {radius} exceeds the configured limit {}",
            tol::MAX_WORD_RADIUS
        )));
    }
    for g in generators {
        g.validate(model)?;
    }
    let mut probe_rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let probes: Vec<Point> = (0..4).map(|_| model.random_point(&mut probe_rng, 0.5)).collect();

    let signature = |pts: &[Point]| -> Result<Vec<i64>> {
        let mut sig = Vec::new();
        for p in pts {
            let v = crate::spaces::point_to_json(model, p)
                .map_err(|e| Error::domain(format!("signature failure: {e}")))?;
            let coords = v
                .get("coords")
                .and_then(|c| c.as_array())
                .expect("coords array");
            for c in coords {
                let x = c.as_f64().expect("numeric coordinate");
                sig.push((x / tol::WORD_DEDUP_RESOLUTION).round() as i64);
            }
        }
        Ok(sig)
    };

    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    // Frontier entries: the probe orbit plus the translate of `x`.
    let mut frontier: Vec<(Vec<Point>, Point)> = vec![(probes.clone(), x.clone())];
    seen.insert(signature(&probes)?, 0);

    let mut rows = vec![PropernessRow {
        word_length: 0,
        elements: 1,
        min_length: 0.0,
        overlap_free_fraction: 0.0,
    }];

    for k in 1..=radius {
        let mut next: Vec<(Vec<Point>, Point)> = Vec::new();
        let mut min_length = f64::INFINITY;
        let mut free = 0usize;
        for (orbit, gx) in &frontier {
            for gen in generators {
                let new_orbit = orbit
                    .iter()
                    .map(|p| gen.apply(model, p))
                    .collect::<Result<Vec<_>>>()?;
                let sig = signature(&new_orbit)?;
                if seen.contains_key(&sig) {
                    continue;
                }
                if seen.len() >= MAX_ELEMENTS {
                    return Err(Error::Resource(format!(
                        "word enumeration exceeded {MAX_ELEMENTS} distinct elements"
                    )));
                }
                seen.insert(sig, k);
                let new_gx = gen.apply(model, gx)?;
                let l = model.distance(x, &new_gx)?;
                min_length = min_length.min(l);
                if l > 2.0 * overlap_radius {
                    free += 1;
                }
                next.push((new_orbit, new_gx));
            }
        }
        if next.is_empty() {
            break;
        }
        rows.push(PropernessRow {
            word_length: k,
            elements: next.len(),
            min_length,
            overlap_free_fraction: free as f64 / next.len() as f64,
        });
        frontier = next;
    }

    Ok(PropernessProfile {
        rows,
        overlap_radius,
    })
}

/// One rescaling step of an asymptotic-invariance profile.
#[derive(Clone, Debug)]
pub struct InvarianceRow {
    pub s: f64,
    /// Max over the deformation grid and sample fibers of
    /// `|beta(sigma_s f) - alpha(H(phi, t))(beta(sigma_s f))|`.
    pub measured: f64,
    /// Max over the grid of the base-point change bound at
    /// `r_t = d(x0, H(phi, t) x0)`.
    pub bound: f64,
}

/// Profile of the rescaled Bott fields under a deformed isometry action.
#[derive(Clone, Debug)]
pub struct InvarianceProfile {
    pub rows: Vec<InvarianceRow>,
    /// `sup_t d(x0, H(phi, t) x0) = l_{x0}(phi)`.
    pub r_max: f64,
}

/// Measures how invariant the rescaled Bott fields `beta(sigma_s f)` are
/// under the deformed action of `phi` on the `[0,1]` continuum product of
/// the model, atomized into `atoms` equal intervals (so the tangent data
/// stays finite-dimensional). For every `s` the measured defect is the max
/// over the deformation grid `t in {0, 1/atoms, .., 1}` and over random
/// sample fibers, and is compared against the analytic bound
/// `2 Omega_r + max(sqrt(2 Omega_r Omega_2r), Theta_r)` at
/// `r = sqrt(t) l_{x0}(phi)`.
pub fn asymptotic_invariance_profile(
    model: &SpaceModel,
    phi: &Isometry,
    f: &TestFunction,
    x0: &Point,
    s_values: &[f64],
    atoms: usize,
    fibers: usize,
    rng: &mut ChaCha8Rng,
) -> Result<InvarianceProfile> {
    if s_values.is_empty() {
        return Err(Error::usage("need at least one rescaling factor"));
    }
    if s_values.windows(2).any(|w| w[1] <= w[0]) || s_values[0] <= 0.0 {
        return Err(Error::usage("rescaling factors must be positive and increasing"));
    }
    if atoms == 0 || fibers == 0 {
        return Err(Error::usage("need at least one atom and one fiber"));
    }
    phi.validate(model)?;

    let weight = 1.0 / atoms as f64;
    let product = SpaceModel::product(vec![(model.clone(), weight); atoms])?;
    let alg = CliffordAlgebra::for_model(&product)?;

    // Deformed actions on the product model: phi on the first j slots.
    let deformed: Vec<Isometry> = (0..=atoms)
        .map(|j| {
            Isometry::PiecewiseDial(
                (0..atoms)
                    .map(|i| {
                        if i < j {
                            phi.clone()
                        } else {
                            Isometry::identity(model)
                        }
                    })
                    .collect(),
            )
        })
        .collect();

    let base = Point::Product(vec![x0.clone(); atoms]);
    let r_ts: Vec<f64> = deformed
        .iter()
        .map(|d| {
            let moved = d.apply(&product, &base)?;
            product.distance(&base, &moved)
        })
        .collect::<Result<_>>()?;
    let r_max = r_ts.iter().cloned().fold(0.0, f64::max);

    let samples: Vec<FiberPoint> = (0..fibers)
        .map(|_| {
            FiberPoint::new(
                product.random_point(rng, 0.7),
                rng.random::<f64>() * 2.0,
            )
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let fs = f.rescale(s)?;
        let mut measured = 0.0_f64;
        let mut bound = 0.0_f64;
        for (j, d) in deformed.iter().enumerate() {
            bound = bound.max(base_point_bound(&fs, r_ts[j])?);
            if j == 0 {
                continue; // identity deformation: zero defect by definition
            }
            for p in &samples {
                let reference = bott_eval(&product, &alg, &fs, &base, p)?;
                let acted = induced_automorphism(&product, &alg, d, &base, &fs, p)?;
                measured = measured.max((&reference - &acted).operator_norm());
            }
        }
        rows.push(InvarianceRow { s, measured, bound });
    }

    Ok(InvarianceProfile { rows, r_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn trivial_group_profile_is_the_zero_row() {
        let model = SpaceModel::spd(2);
        let x = model.base_point();
        let profile = properness_profile(&model, &[], &x, 4, 0.5).unwrap();
        assert_eq!(profile.rows.len(), 1);
        assert_eq!(profile.rows[0].word_length, 0);
        assert_eq!(profile.rows[0].min_length, 0.0);
    }

    #[test]
    fn cyclic_congruence_group_grows_linearly() {
        let model = SpaceModel::spd(2);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let gen = Isometry::spd_congruence(a.clone());
        let x = model.base_point();
        let profile = properness_profile(&model, &[gen], &x, 6, 0.5).unwrap();
        assert_eq!(profile.rows.len(), 7);
        // l_I(A^k congruence) = ||log A^{2k}||_HS = 2k ||log A||_HS since A
        // is symmetric positive definite.
        let rate = 2.0 * crate::linalg::hs_norm(&crate::linalg::sym_log(
            &crate::linalg::symmetrize(&a),
        ));
        for row in &profile.rows {
            let expected = row.word_length as f64 * rate;
            // Distances ~ 16 amplify eigensolver rounding through the log.
            assert!(
                (row.min_length - expected).abs() <= 1e-8 * (1.0 + expected),
                "k = {}: {} vs {}",
                row.word_length,
                row.min_length,
                expected
            );
            assert_eq!(row.elements, 1);
        }
        // Every nontrivial shell moves the basepoint beyond the small
        // overlap radius.
        for row in &profile.rows[1..] {
            assert_eq!(row.overlap_free_fraction, 1.0);
        }
    }

    #[test]
    fn modular_group_ball_leaves_the_stabilizer() {
        // S fixes I (it is orthogonal), so the k = 1 shell has min length
        // 0; the stabilizer elements +-I, +-S are exhausted by length 3, so
        // the k = 4 shell has strictly positive min length.
        let model = SpaceModel::spd(2);
        let s = Isometry::spd_congruence(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let t = Isometry::spd_congruence(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        let x = model.base_point();
        let profile = properness_profile(&model, &[s, t], &x, 4, 0.5).unwrap();
        let row1 = &profile.rows[1];
        let row4 = &profile.rows[4];
        assert!(row1.min_length <= 1e-12, "S should fix the base point");
        assert!(
            row4.min_length > row1.min_length + 0.1,
            "k = 4 shell should move the base point: {} vs {}",
            row4.min_length,
            row1.min_length
        );
    }

    #[test]
    fn identity_action_has_zero_invariance_defect() {
        let model = SpaceModel::spd(2);
        let mut rng = ChaCha8Rng::seed_from_u64(501);
        let f = TestFunction::gaussian(1.0);
        let profile = asymptotic_invariance_profile(
            &model,
            &Isometry::identity(&model),
            &f,
            &model.base_point(),
            &[1.0, 10.0],
            2,
            5,
            &mut rng,
        )
        .unwrap();
        for row in &profile.rows {
            assert!(row.measured <= 1e-12);
        }
        assert!(profile.r_max <= 1e-12);
    }

    #[test]
    fn rescaled_fields_become_asymptotically_invariant() {
        let model = SpaceModel::spd(2);
        let mut rng = ChaCha8Rng::seed_from_u64(503);
        // A congruence moving the identity by approximately 1.
        let a = (1.0 / (2.0 * std::f64::consts::SQRT_2)).exp();
        let phi = Isometry::spd_congruence(DMatrix::from_row_slice(
            2,
            2,
            &[a, 0.0, 0.0, 1.0 / a],
        ));
        let x0 = model.base_point();
        let l = crate::actions::length_function(&model, &x0, &phi).unwrap();
        assert!((l - 1.0).abs() <= 1e-12);

        let f = TestFunction::gaussian(1.0);
        let profile = asymptotic_invariance_profile(
            &model,
            &phi,
            &f,
            &x0,
            &[1.0, 3.0, 10.0, 30.0, 100.0],
            3,
            10,
            &mut rng,
        )
        .unwrap();
        assert!((profile.r_max - 1.0).abs() <= 1e-9);
        for row in &profile.rows {
            assert!(
                row.measured <= row.bound + 1e-8,
                "s = {}: measured {} > bound {}",
                row.s,
                row.measured,
                row.bound
            );
        }
        for w in profile.rows.windows(2) {
            assert!(
                w[1].bound < w[0].bound,
                "bound should decrease: {} -> {}",
                w[0].bound,
                w[1].bound
            );
        }
        let first = &profile.rows[0];
        let last = &profile.rows[profile.rows.len() - 1];
        assert!(last.bound <= 0.2 * first.bound, "bound decay too slow");
        // Measured defects follow the same trend within slack.
        assert!(last.measured <= first.measured * 1.1 + 1e-9);
    }

    #[test]
    fn radius_limit_is_enforced() {
        let model = SpaceModel::spd(2);
        let x = model.base_point();
        assert!(properness_profile(&model, &[], &x, 9, 0.5).is_err());
    }
}
