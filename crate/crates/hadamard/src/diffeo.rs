//! Sampled volume-preserving diffeomorphisms of the flat torus and their
//! length functions.
//!
//! The deviation of a diffeomorphism from an isometry is measured by
//! `lambda_+(phi) = (int (log ||D phi||)^2 d omega)^{1/2}` and
//! `lambda(phi) = max(lambda_+(phi), lambda_+(phi^{-1}))`, quadratured by
//! midpoint Riemann sums on a uniform grid. `lambda` vanishes on
//! isometries, is symmetric and subadditive, and grows linearly along the
//! iterates of a hyperbolic toral automorphism, which is the operative
//! meaning of geometric discreteness at desk scale. Pushing metric fields
//! forward through a diffeomorphism dials each fiber by the Jacobian, which
//! connects `lambda` to the orbit length functions of the `L^2` product of
//! SPD fibers over the torus.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::continuum::{FiniteMeasureSpace, SimpleFunction};
use crate::error::{Error, Result};
use crate::linalg;
use crate::spaces::{Point, SpaceModel};

/// A volume-preserving diffeomorphism of the torus `R^n / Z^n` with a
/// closed-form inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorusDiffeo {
    /// `x -> A x mod 1` for an integer matrix with `|det A| = 1`.
    Linear { matrix: Vec<Vec<i64>> },
    /// `x_out += amplitude * sin(2 pi harmonics * x_in) mod 1`.
    Shear {
        dim: usize,
        coord_in: usize,
        coord_out: usize,
        amplitude: f64,
        harmonics: u32,
    },
    /// Composition, applied right to left.
    Composite { factors: Vec<TorusDiffeo> },
}

impl TorusDiffeo {
    pub fn linear(rows: &[&[i64]]) -> Result<TorusDiffeo> {
        let n = rows.len();
        let mut matrix = Vec::with_capacity(n);
        for r in rows {
            if r.len() != n {
                return Err(Error::usage("toral matrix must be square"));
            }
            matrix.push(r.to_vec());
        }
        let d = TorusDiffeo::Linear { matrix };
        d.validate()?;
        Ok(d)
    }

    /// The standard hyperbolic automorphism `[[2,1],[1,1]]`.
    pub fn cat_map() -> TorusDiffeo {
        TorusDiffeo::linear(&[&[2, 1], &[1, 1]]).expect("cat map is unimodular")
    }

    /// A quarter turn of the 2-torus; an isometry of the flat metric.
    pub fn quarter_turn() -> TorusDiffeo {
        TorusDiffeo::linear(&[&[0, -1], &[1, 0]]).expect("rotation is unimodular")
    }

    pub fn shear(
        dim: usize,
        coord_in: usize,
        coord_out: usize,
        amplitude: f64,
        harmonics: u32,
    ) -> Result<TorusDiffeo> {
        let d = TorusDiffeo::Shear {
            dim,
            coord_in,
            coord_out,
            amplitude,
            harmonics,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn composite(factors: Vec<TorusDiffeo>) -> Result<TorusDiffeo> {
        let d = TorusDiffeo::Composite { factors };
        d.validate()?;
        Ok(d)
    }

    /// The `k`-th iterate.
    pub fn iterate(&self, k: usize) -> TorusDiffeo {
        TorusDiffeo::Composite {
            factors: vec![self.clone(); k],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TorusDiffeo::Linear { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::usage("toral matrix must be square and nonempty"));
                }
                let det = int_det(matrix);
                if det.abs() != 1 {
                    return Err(Error::domain(format!(
                        "toral matrix must have det +-1, got {det}"
                    )));
                }
                Ok(())
            }
            TorusDiffeo::Shear {
                dim,
                coord_in,
                coord_out,
                amplitude,
                harmonics,
            } => {
                if *dim < 2 || *coord_in >= *dim || *coord_out >= *dim || coord_in == coord_out {
                    return Err(Error::usage("shear needs two distinct coordinates"));
                }
                if !amplitude.is_finite() || *harmonics == 0 {
                    return Err(Error::usage("shear needs finite amplitude and harmonics >= 1"));
                }
                Ok(())
            }
            TorusDiffeo::Composite { factors } => {
                if factors.is_empty() {
                    return Err(Error::usage("a composite needs at least one factor"));
                }
                let d = factors[0].dim()?;
                for f in factors {
                    f.validate()?;
                    if f.dim()? != d {
                        return Err(Error::mismatch("composite factors must share the dimension"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            TorusDiffeo::Linear { matrix } => Ok(matrix.len()),
            TorusDiffeo::Shear { dim, .. } => Ok(*dim),
            TorusDiffeo::Composite { factors } => factors
                .first()
                .map(|f| f.dim())
                .unwrap_or_else(|| Err(Error::usage("empty composite"))),
        }
    }

    /// Applies the map to a point of `[0,1)^n`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TorusDiffeo::Linear { matrix } => {
                let n = matrix.len();
                (0..n)
                    .map(|i| {
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += matrix[i][j] as f64 * x[j];
                        }
                        acc.rem_euclid(1.0)
                    })
                    .collect()
            }
            TorusDiffeo::Shear {
                coord_in,
                coord_out,
                amplitude,
                harmonics,
                ..
            } => {
                let mut out = x.to_vec();
                out[*coord_out] = (x[*coord_out]
                    + amplitude * (std::f64::consts::TAU * *harmonics as f64 * x[*coord_in]).sin())
                .rem_euclid(1.0);
                out
            }
            TorusDiffeo::Composite { factors } => {
                let mut out = x.to_vec();
                for f in factors.iter().rev() {
                    out = f.apply(&out);
                }
                out
            }
        }
    }

    /// Jacobian at a point; `|det| = 1` for every variant.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match self {
            TorusDiffeo::Linear { matrix } => {
                let n = matrix.len();
                DMatrix::from_fn(n, n, |i, j| matrix[i][j] as f64)
            }
            TorusDiffeo::Shear {
                dim,
                coord_in,
                coord_out,
                amplitude,
                harmonics,
            } => {
                let mut j = DMatrix::identity(*dim, *dim);
                let w = std::f64::consts::TAU * *harmonics as f64;
                j[(*coord_out, *coord_in)] = amplitude * w * (w * x[*coord_in]).cos();
                j
            }
            TorusDiffeo::Composite { factors } => {
                let n = self.dim().expect("validated");
                let mut j = DMatrix::identity(n, n);
                let mut y = x.to_vec();
                for f in factors.iter().rev() {
                    j = f.jacobian(&y) * j;
                    y = f.apply(&y);
                }
                j
            }
        }
    }

    /// The closed-form inverse.
    pub fn inverse(&self) -> Result<TorusDiffeo> {
        match self {
            TorusDiffeo::Linear { matrix } => Ok(TorusDiffeo::Linear {
                matrix: int_inverse(matrix)?,
            }),
            TorusDiffeo::Shear {
                dim,
                coord_in,
                coord_out,
                amplitude,
                harmonics,
            } => Ok(TorusDiffeo::Shear {
                dim: *dim,
                coord_in: *coord_in,
                coord_out: *coord_out,
                amplitude: -amplitude,
                harmonics: *harmonics,
            }),
            TorusDiffeo::Composite { factors } => Ok(TorusDiffeo::Composite {
                factors: factors
                    .iter()
                    .rev()
                    .map(|f| f.inverse())
                    .collect::<Result<_>>()?,
            }),
        }
    }
}

fn int_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut det = 0;
            for j in 0..n {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                det += sign * m[0][j] * int_det(&minor);
            }
            det
        }
    }
}

/// Exact inverse of an integer matrix with `det = +-1` via the adjugate.
fn int_inverse(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = m.len();
    let det = int_det(m);
    if det.abs() != 1 {
        return Err(Error::domain("matrix is not invertible over the integers"));
    }
    let mut inv = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            // Cofactor C_ji / det.
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c])
                        .collect()
                })
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            let cof = if n == 1 { 1 } else { sign * int_det(&minor) };
            inv[i][j] = cof * det.signum();
        }
    }
    Ok(inv)
}

/// Midpoint-grid field of Jacobians.
#[derive(Clone, Debug)]
pub struct JacobianField {
    pub grid: usize,
    pub dim: usize,
    pub matrices: Vec<DMatrix<f64>>,
    /// Largest deviation of `|det D phi|` from 1 over the grid.
    pub max_det_defect: f64,
}

/// Evaluates the Jacobian at the midpoints of a uniform grid with `grid`
/// cells per axis.
pub fn jacobian_field(phi: &TorusDiffeo, grid: usize) -> Result<JacobianField> {
    phi.validate()?;
    let dim = phi.dim()?;
    if grid == 0 {
        return Err(Error::usage("grid resolution must be positive"));
    }
    let cells = grid.pow(dim as u32);
    let mut matrices = Vec::with_capacity(cells);
    let mut max_det_defect = 0.0_f64;
    for c in 0..cells {
        let x = midpoint(c, grid, dim);
        let j = phi.jacobian(&x);
        max_det_defect = max_det_defect.max((j.determinant().abs() - 1.0).abs());
        matrices.push(j);
    }
    Ok(JacobianField {
        grid,
        dim,
        matrices,
        max_det_defect,
    })
}

fn midpoint(cell: usize, grid: usize, dim: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(dim);
    let mut c = cell;
    for _ in 0..dim {
        x.push((c % grid) as f64 / grid as f64 + 0.5 / grid as f64);
        c /= grid;
    }
    x
}

/// `lambda_+` with a resolution-doubling error estimate.
#[derive(Clone, Debug)]
pub struct LambdaPlusEstimate {
    pub value: f64,
    /// `|lambda_+ at g - lambda_+ at 2g|`; zero for constant Jacobians.
    pub refinement_error: f64,
}

fn lambda_plus_at(phi: &TorusDiffeo, grid: usize) -> Result<f64> {
    let field = jacobian_field(phi, grid)?;
    let cell_mass = 1.0 / field.matrices.len() as f64;
    let mut acc = 0.0;
    for j in &field.matrices {
        let l = linalg::operator_norm(j).ln();
        acc += cell_mass * l * l;
    }
    Ok(acc.sqrt())
}

/// `lambda_+(phi) = (int (log ||D phi||)^2 d omega)^{1/2}` by midpoint
/// quadrature, with the cross-check at doubled resolution. Exact (up to
/// rounding) for linear maps. Grid resolution must be at least 8.
pub fn lambda_plus(phi: &TorusDiffeo, grid: usize) -> Result<LambdaPlusEstimate> {
    if grid < 8 {
        return Err(Error::usage("lambda quadrature needs a grid of at least 8"));
    }
    let value = lambda_plus_at(phi, grid)?;
    let refined = lambda_plus_at(phi, grid * 2)?;
    Ok(LambdaPlusEstimate {
        value,
        refinement_error: (value - refined).abs(),
    })
}

/// `lambda(phi) = max(lambda_+(phi), lambda_+(phi^{-1}))`.
pub fn lambda(phi: &TorusDiffeo, grid: usize) -> Result<f64> {
    let fwd = lambda_plus(phi, grid)?.value;
    let bwd = lambda_plus(&phi.inverse()?, grid)?.value;
    Ok(fwd.max(bwd))
}

/// Report of the inverse inequality `lambda_+(phi^{-1}) <= c lambda_+(phi)`.
#[derive(Clone, Debug)]
pub struct InverseBoundReport {
    pub lambda_plus: f64,
    pub lambda_plus_inverse: f64,
    /// `sqrt(n-1) lambda_+(phi)`.
    pub bound: f64,
    /// Slack granted: the base quadrature slack plus three times the
    /// resolution-doubling error estimates of both quadratures.
    pub slack: f64,
    pub pass: bool,
}

/// Checks `lambda_+(phi^{-1}) <= sqrt(n-1) lambda_+(phi)`. The inequality
/// holds in the continuum with equality for `n = 2` (unimodular planar
/// Jacobians have `||J|| = ||J^{-1}||` pointwise), so the discrete check
/// budgets the quadrature error of both sides through their
/// resolution-doubling estimates. For spectra with a clustered pair the
/// `sqrt(n-1)` constant can genuinely fail (the sharp pointwise constant
/// is `n - 1`); the report carries the raw values for that diagnosis.
pub fn inverse_bound_check(phi: &TorusDiffeo, grid: usize) -> Result<InverseBoundReport> {
    let n = phi.dim()? as f64;
    let fwd = lambda_plus(phi, grid)?;
    let bwd = lambda_plus(&phi.inverse()?, grid)?;
    let bound = (n - 1.0).sqrt() * fwd.value;
    let slack = crate::tol::QUADRATURE_SLACK
        + 3.0 * ((n - 1.0).sqrt() * fwd.refinement_error + bwd.refinement_error);
    Ok(InverseBoundReport {
        lambda_plus: fwd.value,
        lambda_plus_inverse: bwd.value,
        bound,
        slack,
        pass: bwd.value <= bound + slack,
    })
}

/// Growth table of `lambda(phi^k)` with a linear fit.
#[derive(Clone, Debug)]
pub struct DiscretenessProfile {
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of `lambda(phi^k)` against `k`.
    pub slope: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    /// True when the fit is convincingly linear with positive slope.
    pub verdict: bool,
}

/// Tabulates `lambda(phi^k)` for `k = 0..=k_max` (`k_max <= 20`) and fits
/// a line; the verdict is positive when the slope exceeds `1e-6` with
/// `R^2 > 0.99`.
pub fn geometric_discreteness_profile(
    phi: &TorusDiffeo,
    k_max: usize,
    grid: usize,
) -> Result<DiscretenessProfile> {
    if k_max > 20 {
        return Err(Error::Resource("iterate profiles are limited to k <= 20".into()));
    }
    let mut rows = Vec::with_capacity(k_max + 1);
    rows.push((0, 0.0));
    for k in 1..=k_max {
        rows.push((k, lambda(&phi.iterate(k), grid)?));
    }
    let n = rows.len() as f64;
    let mean_k = rows.iter().map(|(k, _)| *k as f64).sum::<f64>() / n;
    let mean_l = rows.iter().map(|(_, l)| l).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (k, l) in &rows {
        let dk = *k as f64 - mean_k;
        let dl = l - mean_l;
        sxx += dk * dk;
        sxy += dk * dl;
        syy += dl * dl;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if syy > 1e-300 { (sxy * sxy) / (sxx * syy) } else { 0.0 };
    Ok(DiscretenessProfile {
        rows,
        slope,
        r_squared,
        verdict: slope > 1e-6 && r_squared > 0.99,
    })
}

/// The uniform lattice measure on the `grid^n` torus points, each of mass
/// `1 / grid^n`, with atoms labelled by their multi-index.
pub fn lattice_space(dim: usize, grid: usize) -> Result<FiniteMeasureSpace> {
    if grid == 0 || dim == 0 {
        return Err(Error::usage("need a positive grid and dimension"));
    }
    let cells = grid.pow(dim as u32);
    let mass = 1.0 / cells as f64;
    FiniteMeasureSpace::new(
        (0..cells)
            .map(|c| {
                let mut idx = Vec::with_capacity(dim);
                let mut cc = c;
                for _ in 0..dim {
                    idx.push((cc % grid).to_string());
                    cc /= grid;
                }
                (idx.join(","), mass)
            })
            .collect(),
    )
}

fn lattice_point(cell: usize, grid: usize, dim: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(dim);
    let mut c = cell;
    for _ in 0..dim {
        x.push((c % grid) as f64 / grid as f64);
        c /= grid;
    }
    x
}

fn lattice_cell(x: &[f64], grid: usize) -> (usize, f64) {
    // Snap to the nearest lattice point, reporting the snap distance.
    let mut cell = 0;
    let mut stride = 1;
    let mut defect: f64 = 0.0;
    for &xi in x {
        let scaled = xi * grid as f64;
        let snapped = scaled.round();
        defect = defect.max((scaled - snapped).abs() / grid as f64);
        let idx = (snapped as i64).rem_euclid(grid as i64) as usize;
        cell += stride * idx;
        stride *= grid;
    }
    (cell, defect)
}

/// Result of pushing a metric field through a diffeomorphism.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub field: SimpleFunction,
    /// Largest snap distance of `phi^{-1}(lattice)` to the lattice; zero
    /// for linear toral maps, positive values signal resampling.
    pub resample_defect: f64,
}

/// `phi_*(f)(x) = (D_{phi^{-1} x} phi) . f(phi^{-1} x)`, the congruence
/// dial of the fibers by the Jacobian along the inverse orbit. The field
/// must live on [`lattice_space`] atoms valued in an SPD model of matching
/// dimension.
pub fn pushforward_action(
    phi: &TorusDiffeo,
    xi: &SimpleFunction,
    grid: usize,
) -> Result<Pushforward> {
    phi.validate()?;
    let dim = phi.dim()?;
    let n = match xi.model() {
        SpaceModel::Spd { n, .. } => *n,
        _ => return Err(Error::mismatch("pushforward needs SPD-valued fields")),
    };
    if n != dim {
        return Err(Error::mismatch(format!(
            "field fibers are {n}x{n} but the torus has dimension {dim}"
        )));
    }
    let cells = grid.pow(dim as u32);
    if xi.space().len() != cells {
        return Err(Error::mismatch("field atoms do not match the lattice"));
    }
    let inv = phi.inverse()?;
    let mut values = Vec::with_capacity(cells);
    let mut resample_defect = 0.0_f64;
    for c in 0..cells {
        let x = lattice_point(c, grid, dim);
        let pre = inv.apply(&x);
        let (pre_cell, defect) = lattice_cell(&pre, grid);
        resample_defect = resample_defect.max(defect);
        let j = phi.jacobian(&pre);
        let g = xi.value(pre_cell).as_spd()?;
        values.push(Point::Spd(linalg::symmetrize(&(&j * g * j.transpose()))));
    }
    let field = SimpleFunction::new(xi.space().clone(), xi.model().clone(), values)?;
    Ok(Pushforward {
        field,
        resample_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cat_lambda() -> f64 {
        ((3.0 + 5.0_f64.sqrt()) / 2.0).ln()
    }

    #[test]
    fn identity_and_rotation_have_zero_length() {
        let id = TorusDiffeo::linear(&[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(lambda(&id, 8).unwrap(), 0.0);
        let rot = TorusDiffeo::quarter_turn();
        assert!(lambda(&rot, 8).unwrap() <= 1e-12);
    }

    #[test]
    fn cat_map_lambda_matches_the_golden_ratio_oracle() {
        // ||A|| is the largest eigenvalue (3 + sqrt 5) / 2 of the symmetric
        // cat matrix, by the 2x2 quadratic formula.
        let cat = TorusDiffeo::cat_map();
        let est = lambda_plus(&cat, 8).unwrap();
        assert!((est.value - cat_lambda()).abs() <= 1e-9);
        assert!(est.refinement_error <= 1e-12, "constant Jacobian is exact");
        // Iterates grow exactly linearly.
        for k in 1..=10 {
            let l = lambda(&cat.iterate(k), 8).unwrap();
            assert!(
                (l - k as f64 * cat_lambda()).abs() <= 1e-9,
                "k = {k}: {l} vs {}",
                k as f64 * cat_lambda()
            );
        }
    }

    #[test]
    fn lambda_is_a_length_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(601);
        let grid = 16;
        for _ in 0..25 {
            let phi = random_composite(2, &mut rng);
            let psi = random_composite(2, &mut rng);
            let l_phi = lambda(&phi, grid).unwrap();
            let l_inv = lambda(&phi.inverse().unwrap(), grid).unwrap();
            assert_relative_eq!(l_phi, l_inv, epsilon = 1e-12);
            let both = TorusDiffeo::composite(vec![phi.clone(), psi.clone()]).unwrap();
            let l_both = lambda(&both, grid).unwrap();
            assert!(
                l_both <= l_phi + lambda(&psi, grid).unwrap() + 1e-6,
                "subadditivity"
            );
        }
    }

    #[test]
    fn quadrature_converges_for_shears() {
        let shear = TorusDiffeo::shear(2, 0, 1, 0.4, 1).unwrap();
        let e8 = lambda_plus(&shear, 8).unwrap();
        let e32 = lambda_plus(&shear, 32).unwrap();
        assert!(e32.refinement_error <= e8.refinement_error);
        assert!(e32.refinement_error <= 1e-2);
        // Density preservation at every node.
        let field = jacobian_field(&shear, 32).unwrap();
        assert!(field.max_det_defect <= 1e-12);
    }

    #[test]
    fn inverse_bound_for_planar_maps_is_an_equality() {
        // For n = 2 unimodular Jacobians, singular values are (s, 1/s), so
        // lambda_+ of the inverse equals lambda_+. For linear maps the
        // quadrature reproduces this exactly; for shears both quadratures
        // sample the inverse orbit, so they agree up to quadrature error.
        let cat = TorusDiffeo::cat_map();
        let report = inverse_bound_check(&cat.iterate(3), 8).unwrap();
        assert!(report.pass);
        assert_relative_eq!(
            report.lambda_plus,
            report.lambda_plus_inverse,
            epsilon = 1e-9
        );

        let mut rng = ChaCha8Rng::seed_from_u64(607);
        for _ in 0..10 {
            let phi = random_composite(2, &mut rng);
            let report = inverse_bound_check(&phi, 32).unwrap();
            assert!(report.pass);
            let gap = (report.lambda_plus - report.lambda_plus_inverse).abs();
            assert!(gap <= 0.05, "quadratures diverged by {gap}");
        }
        let id = TorusDiffeo::linear(&[&[1, 0], &[0, 1]]).unwrap();
        let report = inverse_bound_check(&id, 8).unwrap();
        assert!(report.pass && report.lambda_plus_inverse == 0.0);
    }

    #[test]
    fn inverse_bound_for_gentle_three_dimensional_composites() {
        let mut rng = ChaCha8Rng::seed_from_u64(613);
        for _ in 0..10 {
            let phi = random_composite(3, &mut rng);
            let report = inverse_bound_check(&phi, 8).unwrap();
            assert!(
                report.pass,
                "lambda+ {} inverse {} bound {}",
                report.lambda_plus, report.lambda_plus_inverse, report.bound
            );
        }
    }

    #[test]
    fn discreteness_verdicts() {
        let id = TorusDiffeo::linear(&[&[1, 0], &[0, 1]]).unwrap();
        let p = geometric_discreteness_profile(&id, 6, 8).unwrap();
        assert!(!p.verdict);
        assert!(p.rows.iter().all(|(_, l)| *l == 0.0));

        let cat = geometric_discreteness_profile(&TorusDiffeo::cat_map(), 8, 8).unwrap();
        assert!(cat.verdict);
        assert!((cat.slope - cat_lambda()).abs() <= 1e-9);
        assert!(cat.r_squared > 0.999999);

        let rot = geometric_discreteness_profile(&TorusDiffeo::quarter_turn(), 6, 8).unwrap();
        assert!(!rot.verdict);
    }

    #[test]
    fn pushforward_dials_fibers_by_the_jacobian() {
        let grid = 8;
        let model = SpaceModel::spd(2);
        let space = lattice_space(2, grid).unwrap();
        let id2 = model.base_point();
        let xi = SimpleFunction::constant(space.clone(), model.clone(), id2).unwrap();

        // Identity: unchanged.
        let idm = TorusDiffeo::linear(&[&[1, 0], &[0, 1]]).unwrap();
        let out = pushforward_action(&idm, &xi, grid).unwrap();
        assert_eq!(out.resample_defect, 0.0);
        assert!(out.field.l2_distance(&xi).unwrap() <= 1e-12);

        // Linear toral map on the constant identity field: constant A A^t.
        let cat = TorusDiffeo::cat_map();
        let out = pushforward_action(&cat, &xi, grid).unwrap();
        assert_eq!(out.resample_defect, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let aat = &a * a.transpose();
        for v in out.field.values() {
            assert!((v.as_spd().unwrap() - &aat).norm() <= 1e-12);
        }

        // The orbit length of the constant identity equals
        // ||log(A^t A)||_HS for total mass one.
        let l = xi.l2_distance(&out.field).unwrap();
        let oracle = linalg::hs_norm(&linalg::sym_log(&linalg::symmetrize(
            &(a.transpose() * &a),
        )));
        assert!((l - oracle).abs() <= 1e-10);
    }

    #[test]
    fn pushforward_is_an_isometry_and_functorial_for_linear_maps() {
        let grid = 8;
        let model = SpaceModel::spd(2);
        let space = lattice_space(2, grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(617);
        let xi = SimpleFunction::random(space.clone(), model.clone(), &mut rng, 0.5);
        let eta = SimpleFunction::random(space.clone(), model.clone(), &mut rng, 0.5);
        let cat = TorusDiffeo::cat_map();
        let rot = TorusDiffeo::quarter_turn();

        let d0 = xi.l2_distance(&eta).unwrap();
        let xi1 = pushforward_action(&cat, &xi, grid).unwrap().field;
        let eta1 = pushforward_action(&cat, &eta, grid).unwrap().field;
        let d1 = xi1.l2_distance(&eta1).unwrap();
        assert!((d0 - d1).abs() <= 1e-8 * (1.0 + d0), "isometry defect");

        // (phi psi)_* = phi_* psi_*.
        let both = TorusDiffeo::composite(vec![cat.clone(), rot.clone()]).unwrap();
        let lhs = pushforward_action(&both, &xi, grid).unwrap().field;
        let step = pushforward_action(&rot, &xi, grid).unwrap().field;
        let rhs = pushforward_action(&cat, &step, grid).unwrap().field;
        assert!(lhs.l2_distance(&rhs).unwrap() <= 1e-8);
    }

    #[test]
    fn grid_incompatible_maps_report_their_defect() {
        let grid = 8;
        let model = SpaceModel::spd(2);
        let space = lattice_space(2, grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(619);
        let xi = SimpleFunction::random(space, model, &mut rng, 0.5);
        let shear = TorusDiffeo::shear(2, 0, 1, 0.21, 1).unwrap();
        let out = pushforward_action(&shear, &xi, grid).unwrap();
        assert!(out.resample_defect > 0.0);
    }

    #[test]
    fn large_scale_comparability_of_lambda_and_orbit_length() {
        // For the cat map iterates, both lambda(phi^k) and the orbit length
        // of the constant identity field grow linearly, with ratio exactly
        // 2 sqrt(2) = sqrt(n) (1 + sqrt(n - 1)) for n = 2.
        let grid = 8;
        let model = SpaceModel::spd(2);
        let space = lattice_space(2, grid).unwrap();
        let xi = SimpleFunction::constant(space, model, SpaceModel::spd(2).base_point()).unwrap();
        // k stops at 6 so the pushed-forward fibers stay within the SPD
        // conditioning limit (condition number e^{4 k log phi^2}).
        let cat = TorusDiffeo::cat_map();
        let c = 2.0_f64.sqrt() * 2.0;
        for k in [2usize, 4, 6] {
            let phik = cat.iterate(k);
            let l_lambda = lambda(&phik, grid).unwrap();
            let moved = pushforward_action(&phik, &xi, grid).unwrap().field;
            let l_orbit = xi.l2_distance(&moved).unwrap();
            let ratio = l_orbit / l_lambda;
            assert!(
                ratio >= 1.0 / c - 1e-9 && ratio <= c + 1e-9,
                "k = {k}: ratio {ratio}"
            );
        }
    }

    fn random_composite(dim: usize, rng: &mut ChaCha8Rng) -> TorusDiffeo {
        let mut factors = Vec::new();
        let count = rng.random_range(1..=3usize);
        for _ in 0..count {
            if dim == 2 && rng.random::<f64>() < 0.3 {
                factors.push(if rng.random::<f64>() < 0.5 {
                    TorusDiffeo::cat_map()
                } else {
                    TorusDiffeo::quarter_turn()
                });
            } else {
                let i = rng.random_range(0..dim);
                let mut j = rng.random_range(0..dim);
                while j == i {
                    j = rng.random_range(0..dim);
                }
                let amplitude = (rng.random::<f64>() - 0.5) * 0.8;
                let harmonics = rng.random_range(1..=2u32);
                factors.push(TorusDiffeo::shear(dim, i, j, amplitude, harmonics).unwrap());
            }
        }
        TorusDiffeo::composite(factors).unwrap()
    }
}
