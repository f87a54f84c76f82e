//! Finite-dimensional Hadamard-space models.
//!
//! Three model families are provided: Euclidean spaces, the symmetric
//! spaces `SPD(n)` of positive definite matrices with the affine-invariant
//! metric `d(A, B) = ||log(A^{-1/2} B A^{-1/2})||_HS` (optionally restricted
//! to determinant one), and finite weighted products with the weighted
//! `l^2` combination of the factor metrics. All three are complete CAT(0)
//! spaces with explicit geodesics and logarithm maps, which is exactly the
//! structure the rest of the crate builds on.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// A finite-dimensional Hadamard-space model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceModel {
    /// Euclidean space of the given dimension.
    Euclidean { dim: usize },
    /// Symmetric positive definite `n x n` matrices; with `unimodular` set,
    /// the totally geodesic determinant-one submanifold.
    Spd { n: usize, unimodular: bool },
    /// Weighted product of models, metrized by `sqrt(sum_i w_i d_i^2)`.
    Product { factors: Vec<(SpaceModel, f64)> },
}

/// A point of a [`SpaceModel`].
#[derive(Clone, Debug)]
pub enum Point {
    Euclidean(DVector<f64>),
    Spd(DMatrix<f64>),
    Product(Vec<Point>),
}

/// A tangent vector expressed in the fixed orthonormal basis of the tangent
/// space at its base point. The Euclidean norm of `coords` equals the
/// Riemannian norm of the vector.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: Point,
    pub coords: DVector<f64>,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

impl SpaceModel {
    pub fn euclidean(dim: usize) -> Self {
        SpaceModel::Euclidean { dim }
    }

    /// The full SPD cone (tangent dimension `n(n+1)/2`).
    pub fn spd(n: usize) -> Self {
        SpaceModel::Spd { n, unimodular: false }
    }

    /// Determinant-one SPD matrices (tangent dimension `n(n+1)/2 - 1`).
    pub fn spd_unimodular(n: usize) -> Self {
        SpaceModel::Spd { n, unimodular: true }
    }

    pub fn product(factors: Vec<(SpaceModel, f64)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::usage("a product model needs at least one factor"));
        }
        for (_, w) in &factors {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::usage(format!(
                    "product weights must be strictly positive and finite, got {w}"
                )));
            }
        }
        Ok(SpaceModel::Product { factors })
    }

    /// Dimension of the tangent space at any point.
    pub fn tangent_dim(&self) -> usize {
        match self {
            SpaceModel::Euclidean { dim } => *dim,
            SpaceModel::Spd { n, unimodular } => n * (n + 1) / 2 - usize::from(*unimodular),
            SpaceModel::Product { factors } => factors.iter().map(|(m, _)| m.tangent_dim()).sum(),
        }
    }

    /// Length of the flat coordinate vector used by the JSON encoding.
    pub fn ambient_len(&self) -> usize {
        match self {
            SpaceModel::Euclidean { dim } => *dim,
            SpaceModel::Spd { n, .. } => n * n,
            SpaceModel::Product { factors } => factors.iter().map(|(m, _)| m.ambient_len()).sum(),
        }
    }

    /// Validates that a point belongs to this model.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (SpaceModel::Euclidean { dim }, Point::Euclidean(v)) => {
                if v.len() != *dim {
                    return Err(Error::mismatch(format!(
                        "expected a vector of length {dim}, got {}",
                        v.len()
                    )));
                }
                Ok(())
            }
            (SpaceModel::Spd { n, unimodular }, Point::Spd(a)) => {
                if a.nrows() != *n {
                    return Err(Error::mismatch(format!(
                        "expected a {n}x{n} matrix, got {}x{}",
                        a.nrows(),
                        a.ncols()
                    )));
                }
                linalg::check_spd(a)?;
                if *unimodular {
                    let det = a.determinant();
                    if (det - 1.0).abs() > tol::UNIMODULAR_DET {
                        return Err(Error::domain(format!(
                            "unimodular point must have det 1, got {det}"
                        )));
                    }
                }
                Ok(())
            }
            (SpaceModel::Product { factors }, Point::Product(ps)) => {
                if factors.len() != ps.len() {
                    return Err(Error::mismatch(format!(
                        "expected {} components, got {}",
                        factors.len(),
                        ps.len()
                    )));
                }
                for ((m, _), q) in factors.iter().zip(ps) {
                    m.check_point(q)?;
                }
                Ok(())
            }
            _ => Err(Error::mismatch("point does not match the model variant")),
        }
    }

    /// Builds a Euclidean point.
    pub fn euclidean_point(&self, coords: &[f64]) -> Result<Point> {
        let p = Point::Euclidean(DVector::from_row_slice(coords));
        self.check_point(&p)?;
        Ok(p)
    }

    /// Builds an SPD point from a row-major matrix.
    pub fn spd_point(&self, mat: DMatrix<f64>) -> Result<Point> {
        let p = Point::Spd(mat);
        self.check_point(&p)?;
        Ok(p)
    }

    /// The canonical base point: the origin, the identity matrix, or the
    /// product of the factor base points.
    pub fn base_point(&self) -> Point {
        match self {
            SpaceModel::Euclidean { dim } => Point::Euclidean(DVector::zeros(*dim)),
            SpaceModel::Spd { n, .. } => Point::Spd(DMatrix::identity(*n, *n)),
            SpaceModel::Product { factors } => {
                Point::Product(factors.iter().map(|(m, _)| m.base_point()).collect())
            }
        }
    }

    /// Geodesic distance between two points of this model.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    fn distance_unchecked(&self, a: &Point, b: &Point) -> f64 {
        match (self, a, b) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(x), Point::Euclidean(y)) => {
                (x - y).norm()
            }
            (SpaceModel::Spd { .. }, Point::Spd(x), Point::Spd(y)) => {
                let isq = linalg::sym_inv_sqrt(x);
                let m = linalg::symmetrize(&(&isq * y * &isq));
                linalg::hs_norm(&linalg::sym_log(&m))
            }
            (SpaceModel::Product { factors }, Point::Product(xs), Point::Product(ys)) => {
                let mut acc = 0.0;
                for (((m, w), x), y) in factors.iter().zip(xs).zip(ys) {
                    let d = m.distance_unchecked(x, y);
                    acc += w * d * d;
                }
                acc.sqrt()
            }
            _ => unreachable!("shapes checked by caller"),
        }
    }

    /// The point `[a,b](t)` on the unique geodesic from `a` to `b`.
    pub fn geodesic(&self, a: &Point, b: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::usage(format!(
                "geodesic parameter must lie in [0,1], got {t}"
            )));
        }
        self.check_shape(a)?;
        self.check_shape(b)?;
        Ok(self.geodesic_unchecked(a, b, t))
    }

    fn geodesic_unchecked(&self, a: &Point, b: &Point, t: f64) -> Point {
        if t == 0.0 {
            return a.clone();
        }
        if t == 1.0 {
            return b.clone();
        }
        match (self, a, b) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(x), Point::Euclidean(y)) => {
                Point::Euclidean(x * (1.0 - t) + y * t)
            }
            (SpaceModel::Spd { .. }, Point::Spd(x), Point::Spd(y)) => {
                // A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}
                let sq = linalg::sym_sqrt(x);
                let isq = linalg::sym_inv_sqrt(x);
                let mid = linalg::symmetrize(&(&isq * y * &isq));
                Point::Spd(linalg::symmetrize(&(&sq * linalg::sym_pow(&mid, t) * &sq)))
            }
            (SpaceModel::Product { factors }, Point::Product(xs), Point::Product(ys)) => {
                Point::Product(
                    factors
                        .iter()
                        .zip(xs)
                        .zip(ys)
                        .map(|(((m, _), x), y)| m.geodesic_unchecked(x, y, t))
                        .collect(),
                )
            }
            _ => unreachable!("shapes checked by caller"),
        }
    }

    /// Logarithm map: the tangent vector at `base` pointing to `x`, with
    /// `|log_base(x)| = d(base, x)`.
    pub fn log_map(&self, base: &Point, x: &Point) -> Result<TangentVector> {
        self.check_shape(base)?;
        self.check_shape(x)?;
        Ok(TangentVector {
            base: base.clone(),
            coords: self.log_coords(base, x),
        })
    }

    fn log_coords(&self, base: &Point, x: &Point) -> DVector<f64> {
        match (self, base, x) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(b), Point::Euclidean(y)) => y - b,
            (SpaceModel::Spd { n, unimodular }, Point::Spd(a), Point::Spd(y)) => {
                let isq = linalg::sym_inv_sqrt(a);
                let s = linalg::sym_log(&linalg::symmetrize(&(&isq * y * &isq)));
                sym_to_coords(*n, *unimodular, &s)
            }
            (SpaceModel::Product { factors }, Point::Product(bs), Point::Product(ys)) => {
                let mut coords = Vec::with_capacity(self.tangent_dim());
                for (((m, w), b), y) in factors.iter().zip(bs).zip(ys) {
                    let c = m.log_coords(b, y);
                    let sw = w.sqrt();
                    coords.extend(c.iter().map(|v| v * sw));
                }
                DVector::from_vec(coords)
            }
            _ => unreachable!("shapes checked by caller"),
        }
    }

    /// Exponential map, inverse to [`SpaceModel::log_map`].
    pub fn exp_map(&self, base: &Point, v: &TangentVector) -> Result<Point> {
        self.check_shape(base)?;
        if v.coords.len() != self.tangent_dim() {
            return Err(Error::mismatch(format!(
                "tangent vector has {} coordinates, model needs {}",
                v.coords.len(),
                self.tangent_dim()
            )));
        }
        Ok(self.exp_coords(base, v.coords.as_slice()))
    }

    fn exp_coords(&self, base: &Point, coords: &[f64]) -> Point {
        match (self, base) {
            (SpaceModel::Euclidean { .. }, Point::Euclidean(b)) => {
                Point::Euclidean(b + DVector::from_row_slice(coords))
            }
            (SpaceModel::Spd { n, unimodular }, Point::Spd(a)) => {
                let s = coords_to_sym(*n, *unimodular, coords);
                let sq = linalg::sym_sqrt(a);
                Point::Spd(linalg::symmetrize(&(&sq * linalg::sym_exp(&s) * &sq)))
            }
            (SpaceModel::Product { factors }, Point::Product(bs)) => {
                let mut out = Vec::with_capacity(factors.len());
                let mut offset = 0;
                for ((m, w), b) in factors.iter().zip(bs) {
                    let k = m.tangent_dim();
                    let isw = 1.0 / w.sqrt();
                    let part: Vec<f64> = coords[offset..offset + k].iter().map(|c| c * isw).collect();
                    out.push(m.exp_coords(b, &part));
                    offset += k;
                }
                Point::Product(out)
            }
            _ => unreachable!("shapes checked by caller"),
        }
    }

    /// Euclidean comparison angle at `y` of the triangle `(x, y, z)`.
    pub fn comparison_angle(&self, x: &Point, y: &Point, z: &Point) -> Result<f64> {
        let dxy = self.distance(x, y)?;
        let dyz = self.distance(y, z)?;
        let dxz = self.distance(x, z)?;
        if dxy <= tol::DEGENERATE_DISTANCE || dyz <= tol::DEGENERATE_DISTANCE {
            return Err(Error::domain(
                "comparison angle needs three points with x != y and z != y",
            ));
        }
        let cos = ((dxy * dxy + dyz * dyz - dxz * dxz) / (2.0 * dxy * dyz)).clamp(-1.0, 1.0);
        Ok(cos.acos())
    }

    /// Residual of the CN (semi parallelogram) inequality:
    /// `d(p,q)^2 + d(p,r)^2 - 2 d(m,p)^2 - d(q,r)^2 / 2` with `m` the
    /// midpoint of `q` and `r`. Nonnegative (up to rounding) on CAT(0)
    /// spaces.
    pub fn cn_inequality_residual(&self, p: &Point, q: &Point, r: &Point) -> Result<f64> {
        let m = self.geodesic(q, r, 0.5)?;
        let dpq = self.distance(p, q)?;
        let dpr = self.distance(p, r)?;
        let dmp = self.distance(&m, p)?;
        let dqr = self.distance(q, r)?;
        Ok(dpq * dpq + dpr * dpr - 2.0 * dmp * dmp - 0.5 * dqr * dqr)
    }

    /// Comparison angles `angle(x_s, base, z_s)` with `x_s = [base,x](s)`,
    /// `z_s = [base,z](s)`, one per scale. On CAT(0) spaces these are
    /// nonincreasing along shrinking scales and converge to the angle
    /// between the geodesics.
    pub fn comparison_angles_at_scales(
        &self,
        base: &Point,
        x: &Point,
        z: &Point,
        scales: &[f64],
    ) -> Result<Vec<f64>> {
        if scales.is_empty() {
            return Err(Error::usage("need at least one scale"));
        }
        let mut out = Vec::with_capacity(scales.len());
        for &s in scales {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::usage(format!("scales must lie in (0,1], got {s}")));
            }
            let xs = self.geodesic(base, x, s)?;
            let zs = self.geodesic(base, z, s)?;
            out.push(self.comparison_angle(&xs, base, &zs)?);
        }
        Ok(out)
    }

    /// Angle between the geodesics `[base,x]` and `[base,z]`, evaluated as
    /// the comparison angle at the smallest of the given scales.
    pub fn angle_between(&self, base: &Point, x: &Point, z: &Point, scales: &[f64]) -> Result<f64> {
        let angles = self.comparison_angles_at_scales(base, x, z, scales)?;
        let (idx, _) = scales
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("scales are finite"))
            .expect("scales nonempty");
        Ok(angles[idx])
    }

    /// Gram matrix of the points `pts` seen from `base` through the
    /// Schoenberg form `<x - base, y - base> =
    /// -(d(x,y)^2 - d(x,base)^2 - d(y,base)^2) / 2`.
    ///
    /// For samples drawn from a shrinking neighborhood of `base` this is
    /// positive semidefinite up to curvature terms, witnessing that the
    /// tangent cone embeds into a Hilbert space.
    pub fn schoenberg_gram(&self, base: &Point, pts: &[Point]) -> Result<DMatrix<f64>> {
        if pts.is_empty() {
            return Err(Error::usage("schoenberg_gram needs at least one point"));
        }
        let n = pts.len();
        let db: Vec<f64> = pts
            .iter()
            .map(|p| self.distance(base, p))
            .collect::<Result<_>>()?;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let dij = self.distance(&pts[i], &pts[j])?;
                let v = -0.5 * (dij * dij - db[i] * db[i] - db[j] * db[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Draws a random point. `spread` controls the distance scale from the
    /// base point; sampling is deterministic given the generator state.
    pub fn random_point(&self, rng: &mut impl Rng, spread: f64) -> Point {
        match self {
            SpaceModel::Euclidean { dim } => {
                Point::Euclidean(DVector::from_fn(*dim, |_, _| normal(rng) * spread))
            }
            SpaceModel::Spd { n, unimodular } => {
                let g = DMatrix::from_fn(*n, *n, |_, _| normal(rng) * spread);
                let mut s = linalg::symmetrize(&g);
                if *unimodular {
                    let shift = s.trace() / *n as f64;
                    for i in 0..*n {
                        s[(i, i)] -= shift;
                    }
                }
                Point::Spd(linalg::sym_exp(&s))
            }
            SpaceModel::Product { factors } => Point::Product(
                factors
                    .iter()
                    .map(|(m, _)| m.random_point(rng, spread))
                    .collect(),
            ),
        }
    }

    /// Cheap structural compatibility check (full validation happens at
    /// construction time).
    fn check_shape(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (SpaceModel::Euclidean { dim }, Point::Euclidean(v)) if v.len() == *dim => Ok(()),
            (SpaceModel::Spd { n, .. }, Point::Spd(a)) if a.nrows() == *n && a.ncols() == *n => {
                Ok(())
            }
            (SpaceModel::Product { factors }, Point::Product(ps)) if factors.len() == ps.len() => {
                for ((m, _), q) in factors.iter().zip(ps) {
                    m.check_shape(q)?;
                }
                Ok(())
            }
            _ => Err(Error::mismatch("point does not belong to this model")),
        }
    }
}

/// Standard normal sample via Box-Muller; keeps the crate independent of a
/// distributions crate and stable across rand versions.
fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Coordinates of a symmetric matrix in the fixed orthonormal basis
/// `{E_ii} ∪ {(E_ij + E_ji)/sqrt(2)}` of the trace inner product; the
/// unimodular variant replaces the diagonal part by an orthonormal basis of
/// the trace-zero subspace.
pub(crate) fn sym_to_coords(n: usize, unimodular: bool, s: &DMatrix<f64>) -> DVector<f64> {
    let mut coords = Vec::with_capacity(n * (n + 1) / 2);
    if unimodular {
        // f_k = (e_1 + ... + e_k - k e_{k+1}) / sqrt(k(k+1)), k = 1..n-1
        let diag: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
        for k in 1..n {
            let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
            let c = diag[..k].iter().sum::<f64>() - k as f64 * diag[k];
            coords.push(c / norm);
        }
    } else {
        for i in 0..n {
            coords.push(s[(i, i)]);
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            coords.push(sqrt2 * s[(i, j)]);
        }
    }
    DVector::from_vec(coords)
}

pub(crate) fn coords_to_sym(n: usize, unimodular: bool, coords: &[f64]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(n, n);
    let mut idx = 0;
    if unimodular {
        for k in 1..n {
            let norm = (k as f64 * (k as f64 + 1.0)).sqrt();
            let c = coords[idx] / norm;
            idx += 1;
            for i in 0..k {
                s[(i, i)] += c;
            }
            s[(k, k)] -= k as f64 * c;
        }
    } else {
        for i in 0..n {
            s[(i, i)] = coords[idx];
            idx += 1;
        }
    }
    let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = coords[idx] * inv_sqrt2;
            idx += 1;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Serializes a point as `{"model": ..., "coords": [...]}` with SPD
/// matrices flattened row-major.
pub fn point_to_json(model: &SpaceModel, p: &Point) -> Result<Value> {
    model.check_shape(p)?;
    let mut coords = Vec::with_capacity(model.ambient_len());
    flatten_point(p, &mut coords);
    Ok(json!({
        "model": serde_json::to_value(model).map_err(|e| Error::Serialization(e.to_string()))?,
        "coords": coords,
    }))
}

/// Parses a point serialized by [`point_to_json`], validating it against
/// `model`.
pub fn point_from_json(model: &SpaceModel, v: &Value) -> Result<Point> {
    let stored: SpaceModel = serde_json::from_value(
        v.get("model")
            .ok_or_else(|| Error::Serialization("missing \"model\" field".into()))?
            .clone(),
    )
    .map_err(|e| Error::Serialization(e.to_string()))?;
    if &stored != model {
        return Err(Error::mismatch("serialized point belongs to another model"));
    }
    let coords: Vec<f64> = serde_json::from_value(
        v.get("coords")
            .ok_or_else(|| Error::Serialization("missing \"coords\" field".into()))?
            .clone(),
    )
    .map_err(|e| Error::Serialization(e.to_string()))?;
    if coords.len() != model.ambient_len() {
        return Err(Error::Serialization(format!(
            "expected {} coordinates, got {}",
            model.ambient_len(),
            coords.len()
        )));
    }
    let (p, _) = unflatten_point(model, &coords);
    model.check_point(&p)?;
    Ok(p)
}

fn flatten_point(p: &Point, out: &mut Vec<f64>) {
    match p {
        Point::Euclidean(v) => out.extend(v.iter()),
        Point::Spd(a) => {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    out.push(a[(i, j)]);
                }
            }
        }
        Point::Product(ps) => {
            for q in ps {
                flatten_point(q, out);
            }
        }
    }
}

fn unflatten_point(model: &SpaceModel, coords: &[f64]) -> (Point, usize) {
    match model {
        SpaceModel::Euclidean { dim } => {
            (Point::Euclidean(DVector::from_row_slice(&coords[..*dim])), *dim)
        }
        SpaceModel::Spd { n, .. } => {
            let mut a = DMatrix::zeros(*n, *n);
            for i in 0..*n {
                for j in 0..*n {
                    a[(i, j)] = coords[i * n + j];
                }
            }
            (Point::Spd(a), n * n)
        }
        SpaceModel::Product { factors } => {
            let mut ps = Vec::with_capacity(factors.len());
            let mut used = 0;
            for (m, _) in factors {
                let (p, k) = unflatten_point(m, &coords[used..]);
                ps.push(p);
                used += k;
            }
            (Point::Product(ps), used)
        }
    }
}

impl Point {
    pub fn as_euclidean(&self) -> Result<&DVector<f64>> {
        match self {
            Point::Euclidean(v) => Ok(v),
            _ => Err(Error::mismatch("expected a Euclidean point")),
        }
    }

    pub fn as_spd(&self) -> Result<&DMatrix<f64>> {
        match self {
            Point::Spd(a) => Ok(a),
            _ => Err(Error::mismatch("expected an SPD point")),
        }
    }

    pub fn as_product(&self) -> Result<&[Point]> {
        match self {
            Point::Product(ps) => Ok(ps),
            _ => Err(Error::mismatch("expected a product point")),
        }
    }
}
