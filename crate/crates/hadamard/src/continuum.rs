//! Finite measure spaces, measurable partitions, and the `L^2` continuum
//! product of a Hadamard-space model.
//!
//! A [`SimpleFunction`] is a finitely-supported map from the atoms of a
//! [`FiniteMeasureSpace`] into a model; the metric
//! `d(xi, eta) = (sum_y w(y) d(xi(y), eta(y))^2)^{1/2}` makes the set of
//! such maps a CAT(0) space again, with pointwise geodesics. The partition
//! machinery implements `epsilon`-refinement and the two constructive
//! approximation bounds used to exhaust a continuum product by
//! finite-dimensional pieces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Point, SpaceModel};

/// A finite measure space given by weighted atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasureSpace {
    atoms: Vec<(String, f64)>,
}

impl FiniteMeasureSpace {
    pub fn new(atoms: Vec<(String, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::usage("a measure space needs at least one atom"));
        }
        for (label, w) in &atoms {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::usage(format!(
                    "atom {label:?} must have a positive finite weight, got {w}"
                )));
            }
        }
        Ok(FiniteMeasureSpace { atoms })
    }

    /// Uniform space with `n` atoms of weight `total / n`.
    pub fn uniform(n: usize, total: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("need at least one atom"));
        }
        let w = total / n as f64;
        Self::new((0..n).map(|i| (format!("a{i}"), w)).collect())
    }

    /// The unit interval atomized at the given strictly increasing breaks
    /// `0 = b_0 < b_1 < ... < b_k = 1`; atom `i` carries the mass of
    /// `[b_i, b_{i+1})`.
    pub fn unit_interval(breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::usage("breaks must run from 0.0 to 1.0"));
        }
        let mut atoms = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::usage("breaks must be strictly increasing"));
            }
            atoms.push((format!("[{};{})", w[0], w[1]), w[1] - w[0]));
        }
        Self::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.atoms[i].1
    }

    pub fn label(&self, i: usize) -> &str {
        &self.atoms[i].0
    }

    pub fn atoms(&self) -> &[(String, f64)] {
        &self.atoms
    }

    /// Merges the atoms listed in `group` into a single atom carrying the
    /// summed weight (a measure-preserving quotient map).
    pub fn merge(&self, group: &[usize], merged_label: &str) -> Result<FiniteMeasureSpace> {
        if group.is_empty() {
            return Err(Error::usage("merge group must be nonempty"));
        }
        let mut seen = vec![false; self.len()];
        for &i in group {
            if i >= self.len() || seen[i] {
                return Err(Error::usage("merge group must list distinct atom indices"));
            }
            seen[i] = true;
        }
        let merged_weight: f64 = group.iter().map(|&i| self.weight(i)).sum();
        let mut atoms = vec![(merged_label.to_string(), merged_weight)];
        for (i, (label, w)) in self.atoms.iter().enumerate() {
            if !seen[i] {
                atoms.push((label.clone(), *w));
            }
        }
        FiniteMeasureSpace::new(atoms)
    }
}

/// A finite measurable partition, i.e. a map from atoms to a finite index
/// set `{0, .., cells-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    cells: usize,
    assign: Vec<usize>,
}

impl Partition {
    pub fn new(cells: usize, assign: Vec<usize>) -> Result<Self> {
        if cells == 0 {
            return Err(Error::usage("a partition needs at least one cell"));
        }
        if let Some(bad) = assign.iter().find(|&&c| c >= cells) {
            return Err(Error::usage(format!(
                "cell index {bad} out of range for {cells} cells"
            )));
        }
        Ok(Partition { cells, assign })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn cell_of(&self, atom: usize) -> usize {
        self.assign[atom]
    }
}

/// `delta(P1, P2) = sum_i mu(P1^{-1}(i) symdiff P2^{-1}(i))` for two
/// partitions over the same space with the same index set.
pub fn partition_delta(
    space: &FiniteMeasureSpace,
    p1: &Partition,
    p2: &Partition,
) -> Result<f64> {
    if p1.cells != p2.cells {
        return Err(Error::mismatch("partitions must share their index set"));
    }
    if p1.assign.len() != space.len() || p2.assign.len() != space.len() {
        return Err(Error::mismatch("partitions must cover every atom"));
    }
    let mut delta = 0.0;
    for cell in 0..p1.cells {
        for atom in 0..space.len() {
            let in1 = p1.assign[atom] == cell;
            let in2 = p2.assign[atom] == cell;
            if in1 != in2 {
                delta += space.weight(atom);
            }
        }
    }
    Ok(delta)
}

/// Result of an `epsilon`-refinement search.
#[derive(Clone, Debug)]
pub struct Refinement {
    /// Whether `delta <= epsilon` for the returned witness.
    pub holds: bool,
    /// Witness map from cells of the finer partition to cells of the
    /// coarser one.
    pub witness: Vec<usize>,
    /// `delta(P2, witness . P1)` for the returned witness.
    pub delta: f64,
}

/// Decides whether `p1` `epsilon`-refines `p2`, i.e. whether some map `f`
/// between the index sets satisfies `delta(p2, f . p1) <= epsilon`.
///
/// The witness is found greedily: each cell of `p1` maps to the cell of
/// `p2` with which it shares the most mass. Since
/// `delta(p2, f . p1) = 2 mu(Y) - 2 sum_i mu(p1^{-1}(i) cap p2^{-1}(f(i)))`,
/// the objective is separable over the cells of `p1`, so the greedy witness
/// is optimal (ties resolved toward the smaller index).
pub fn refines(
    space: &FiniteMeasureSpace,
    p1: &Partition,
    p2: &Partition,
    epsilon: f64,
) -> Result<Refinement> {
    if epsilon < 0.0 {
        return Err(Error::usage("epsilon must be nonnegative"));
    }
    if p1.assign.len() != space.len() || p2.assign.len() != space.len() {
        return Err(Error::mismatch("partitions must cover every atom"));
    }
    // overlap[i][j] = mu(p1^{-1}(i) cap p2^{-1}(j))
    let mut overlap = vec![vec![0.0; p2.cells]; p1.cells];
    for atom in 0..space.len() {
        overlap[p1.assign[atom]][p2.assign[atom]] += space.weight(atom);
    }
    let witness: Vec<usize> = overlap
        .iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    let composed = Partition::new(p2.cells, p1.assign.iter().map(|&i| witness[i]).collect())?;
    let delta = partition_delta(space, p2, &composed)?;
    Ok(Refinement {
        holds: delta <= epsilon,
        witness,
        delta,
    })
}

/// The indicator-pattern refining sequence generated by a list of atom
/// subsets: `P_n` maps an atom to its membership pattern with respect to
/// the first `n + 1` subsets. Consecutive partitions refine exactly, and
/// any partition generated by boolean combinations of the first `n + 1`
/// subsets is `0`-refined by `P_n`.
pub fn refining_sequence(
    space: &FiniteMeasureSpace,
    subsets: &[Vec<usize>],
) -> Result<Vec<Partition>> {
    if subsets.is_empty() {
        return Err(Error::usage("need at least one generating subset"));
    }
    let mut membership = vec![0u64; space.len()];
    let mut out = Vec::with_capacity(subsets.len());
    for (n, subset) in subsets.iter().enumerate() {
        if n >= 63 {
            return Err(Error::Resource(
                "indicator patterns limited to 63 generating subsets".into(),
            ));
        }
        for &atom in subset {
            if atom >= space.len() {
                return Err(Error::usage(format!("atom index {atom} out of range")));
            }
            membership[atom] |= 1 << n;
        }
        // Compress the occurring patterns to a dense index set; patterns are
        // ordered by value so the projection to the previous stage is a
        // well-defined witness map.
        let mut patterns: Vec<u64> = membership.clone();
        patterns.sort_unstable();
        patterns.dedup();
        let assign = membership
            .iter()
            .map(|p| patterns.binary_search(p).expect("pattern present"))
            .collect();
        out.push(Partition::new(patterns.len(), assign)?);
    }
    Ok(out)
}

/// A finitely-supported map from a measure space into a model.
#[derive(Clone, Debug)]
pub struct SimpleFunction {
    space: FiniteMeasureSpace,
    model: SpaceModel,
    values: Vec<Point>,
}

impl SimpleFunction {
    pub fn new(space: FiniteMeasureSpace, model: SpaceModel, values: Vec<Point>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::mismatch(format!(
                "need one value per atom: {} atoms, {} values",
                space.len(),
                values.len()
            )));
        }
        for v in &values {
            model.check_point(v)?;
        }
        Ok(SimpleFunction {
            space,
            model,
            values,
        })
    }

    /// The constant function with the given value.
    pub fn constant(space: FiniteMeasureSpace, model: SpaceModel, value: Point) -> Result<Self> {
        let values = vec![value; space.len()];
        Self::new(space, model, values)
    }

    /// Random values at every atom, deterministic given the generator.
    pub fn random(
        space: FiniteMeasureSpace,
        model: SpaceModel,
        rng: &mut impl Rng,
        spread: f64,
    ) -> Self {
        let values = (0..space.len())
            .map(|_| model.random_point(rng, spread))
            .collect();
        SimpleFunction {
            space,
            model,
            values,
        }
    }

    pub fn space(&self) -> &FiniteMeasureSpace {
        &self.space
    }

    pub fn model(&self) -> &SpaceModel {
        &self.model
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &Point {
        &self.values[atom]
    }

    fn check_compatible(&self, other: &SimpleFunction) -> Result<()> {
        if self.space != other.space {
            return Err(Error::mismatch("simple functions live on different spaces"));
        }
        if self.model != other.model {
            return Err(Error::mismatch("simple functions map to different models"));
        }
        Ok(())
    }

    /// `L^2` distance `(sum_y w(y) d(xi(y), eta(y))^2)^{1/2}`.
    pub fn l2_distance(&self, other: &SimpleFunction) -> Result<f64> {
        self.check_compatible(other)?;
        let mut acc = 0.0;
        for ((v, w), (_, weight)) in self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.space.atoms())
        {
            let d = self.model.distance(v, w)?;
            acc += weight * d * d;
        }
        Ok(acc.sqrt())
    }

    /// Pointwise geodesic `[xi, eta](t)(y) = [xi(y), eta(y)](t)`.
    pub fn l2_geodesic(&self, other: &SimpleFunction, t: f64) -> Result<SimpleFunction> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| self.model.geodesic(a, b, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(SimpleFunction {
            space: self.space.clone(),
            model: self.model.clone(),
            values,
        })
    }

    /// CN inequality residual at the `L^2` level, with the midpoint taken
    /// pointwise.
    pub fn cn_residual(&self, q: &SimpleFunction, r: &SimpleFunction) -> Result<f64> {
        let m = q.l2_geodesic(r, 0.5)?;
        let dpq = self.l2_distance(q)?;
        let dpr = self.l2_distance(r)?;
        let dmp = m.l2_distance(self)?;
        let dqr = q.l2_distance(r)?;
        Ok(dpq * dpq + dpr * dpr - 2.0 * dmp * dmp - 0.5 * dqr * dqr)
    }

    /// The product model carrying this function's graph: one factor per
    /// atom, weighted by the atom mass.
    pub fn product_model(&self) -> SpaceModel {
        SpaceModel::Product {
            factors: self
                .space
                .atoms()
                .iter()
                .map(|(_, w)| (self.model.clone(), *w))
                .collect(),
        }
    }

    /// This function as a point of [`SimpleFunction::product_model`].
    pub fn to_point(&self) -> Point {
        Point::Product(self.values.clone())
    }

    /// Inverse of [`SimpleFunction::to_point`].
    pub fn from_point(
        space: FiniteMeasureSpace,
        model: SpaceModel,
        point: &Point,
    ) -> Result<SimpleFunction> {
        let comps = point.as_product()?;
        SimpleFunction::new(space, model, comps.to_vec())
    }

    /// Pushes the function through a measure-preserving atom merge. Fails
    /// unless the function is constant on the merged fiber (pointwise
    /// distances below `1e-12`), so the quotient is isometric.
    pub fn merge_fibers(&self, group: &[usize], merged_label: &str) -> Result<SimpleFunction> {
        let space = self.space.merge(group, merged_label)?;
        let rep = &self.values[group[0]];
        for &i in group {
            let d = self.model.distance(rep, &self.values[i])?;
            if d > 1e-12 {
                return Err(Error::domain(format!(
                    "function is not constant on the merged fiber (spread {d:.3e})"
                )));
            }
        }
        let mut values = vec![rep.clone()];
        let mut seen = vec![false; self.space.len()];
        for &i in group {
            seen[i] = true;
        }
        for (i, v) in self.values.iter().enumerate() {
            if !seen[i] {
                values.push(v.clone());
            }
        }
        SimpleFunction::new(space, self.model.clone(), values)
    }

    /// The level partition of the function: atoms with the same value (up
    /// to distance `1e-12`) share a cell. Also returns the representative
    /// value of each cell.
    pub fn level_partition(&self) -> Result<(Partition, Vec<Point>)> {
        let mut reps: Vec<Point> = Vec::new();
        let mut assign = Vec::with_capacity(self.space.len());
        for v in &self.values {
            let mut found = None;
            for (ci, rep) in reps.iter().enumerate() {
                if self.model.distance(rep, v)? <= 1e-12 {
                    found = Some(ci);
                    break;
                }
            }
            match found {
                Some(ci) => assign.push(ci),
                None => {
                    reps.push(v.clone());
                    assign.push(reps.len() - 1);
                }
            }
        }
        Ok((Partition::new(reps.len(), assign)?, reps))
    }

    /// Diameter of the image (the largest pairwise distance of values).
    pub fn image_diameter(&self) -> Result<f64> {
        let mut diam = 0.0_f64;
        for i in 0..self.values.len() {
            for j in (i + 1)..self.values.len() {
                diam = diam.max(self.model.distance(&self.values[i], &self.values[j])?);
            }
        }
        Ok(diam)
    }
}

/// Snaps every value of `xi` to the first center within `epsilon`, walking
/// the greedy cells `X_i = B_eps(x_i) \ (X_0 u ... u X_{i-1})`. The result
/// satisfies `d(xi, eta) <= epsilon sqrt(mu(Y) + 1)`.
pub fn approximate_by_simple(
    xi: &SimpleFunction,
    centers: &[Point],
    epsilon: f64,
) -> Result<SimpleFunction> {
    if epsilon < 0.0 {
        return Err(Error::usage("epsilon must be nonnegative"));
    }
    if centers.is_empty() {
        return Err(Error::usage("need at least one center"));
    }
    let model = xi.model();
    let mut values = Vec::with_capacity(xi.space().len());
    for (atom, v) in xi.values().iter().enumerate() {
        let mut snapped = None;
        for c in centers {
            if model.distance(v, c)? <= epsilon {
                snapped = Some(c.clone());
                break;
            }
        }
        match snapped {
            Some(c) => values.push(c),
            None => {
                return Err(Error::Coverage {
                    atom: xi.space().label(atom).to_string(),
                    radius: epsilon,
                })
            }
        }
    }
    SimpleFunction::new(xi.space().clone(), model.clone(), values)
}

/// One stage of an exhaustion of the continuum product: a partition of the
/// base space together with a finite sample of the stage submanifold.
#[derive(Clone, Debug)]
pub struct ApproximationStage {
    pub partition: Partition,
    pub centers: Vec<Point>,
}

/// Outcome of [`admissible_approximation`].
#[derive(Clone, Debug)]
pub struct AdmissibleApproximation {
    /// Index of the first stage that worked.
    pub stage: usize,
    /// The approximant, constant on the stage partition and valued in the
    /// stage centers.
    pub approx: SimpleFunction,
    /// First-stage radius `eps' = eps / sqrt(2 mu(Y))`.
    pub eps_prime: f64,
    /// Partition budget `eps'' = eps^2 / (2 (diam(im xi) + eps')^2)`.
    pub eps_double_prime: f64,
    /// Measured `d(xi, eta)`.
    pub achieved: f64,
}

/// Two-stage approximation of `xi` by a function that is constant on the
/// cells of a stage partition and takes values in the stage centers: first
/// snap the values to centers within `eps' = eps / sqrt(2 mu(Y))`, then
/// replace the level partition by a stage partition that `eps''`-refines
/// it, with `eps'' = eps^2 / (2 (diam(im xi) + eps')^2)`. Returns the
/// first stage achieving `d(xi, eta) < eps`; both stage budgets are
/// reported for auditability.
pub fn admissible_approximation(
    xi: &SimpleFunction,
    stages: &[ApproximationStage],
    epsilon: f64,
) -> Result<AdmissibleApproximation> {
    if epsilon <= 0.0 {
        return Err(Error::usage("epsilon must be positive"));
    }
    let mu = xi.space().total();
    let eps_prime = epsilon / (2.0 * mu).sqrt();
    let diam = xi.image_diameter()?;
    let eps_double_prime = epsilon * epsilon / (2.0 * (diam + eps_prime).powi(2));

    let (level, reps) = xi.level_partition()?;
    let model = xi.model();
    let mut best_achieved = f64::INFINITY;

    for (stage_idx, stage) in stages.iter().enumerate() {
        // Stage 1: cover the image of xi by stage centers within eps'.
        let mut snap = Vec::with_capacity(reps.len());
        let mut covered = true;
        for rep in &reps {
            let mut found = None;
            for c in &stage.centers {
                if model.distance(rep, c)? <= eps_prime {
                    found = Some(c.clone());
                    break;
                }
            }
            match found {
                Some(c) => snap.push(c),
                None => {
                    covered = false;
                    break;
                }
            }
        }
        if !covered {
            continue;
        }
        // Stage 2: the stage partition must eps''-refine the level
        // partition of xi.
        let refinement = refines(xi.space(), &stage.partition, &level, eps_double_prime)?;
        if !refinement.holds {
            continue;
        }
        // eta = g . f . P_m
        let values: Vec<Point> = (0..xi.space().len())
            .map(|atom| {
                let cell = stage.partition.cell_of(atom);
                snap[refinement.witness[cell]].clone()
            })
            .collect();
        let eta = SimpleFunction::new(xi.space().clone(), model.clone(), values)?;
        let achieved = xi.l2_distance(&eta)?;
        best_achieved = best_achieved.min(achieved);
        if achieved < epsilon {
            return Ok(AdmissibleApproximation {
                stage: stage_idx,
                approx: eta,
                eps_prime,
                eps_double_prime,
                achieved,
            });
        }
    }
    Err(Error::ApproximationFailure {
        achieved: best_achieved,
        target: epsilon,
    })
}
