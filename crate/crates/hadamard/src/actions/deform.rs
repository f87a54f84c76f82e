//! The `[0,1]` deformation of an isometry and the canonical embedding into
//! isometries of a continuum product.
//!
//! For an isometry `phi` of `M` and `t` in `[0,1]`, the deformed isometry
//! `H(phi, t)` acts on functions `xi : [0,1] -> M` by applying `phi` on
//! `[0, t]` and leaving the rest untouched. At fixed `t` this is a group
//! homomorphism in `phi`, `H(phi, 0) = id`, and `H(phi, 1)` is the
//! canonical embedding `phi^{[0,1]}`. Its length obeys
//! `l_xi(H(phi, t)) = (int_0^t l_{xi(s)}(phi)^2 ds)^{1/2}`.
//!
//! Atoms straddling the cut are split lazily and deterministically (labels
//! gain `.l` / `.r` suffixes), so both sides of the homomorphism law build
//! the same refined space.

use crate::continuum::{FiniteMeasureSpace, SimpleFunction};
use crate::error::{Error, Result};
use crate::spaces::SpaceModel;

use super::isometry::Isometry;

/// An isometry of `L^2([0,1], M)` that applies the base isometry below the
/// cut and the identity above it.
#[derive(Clone, Debug)]
pub struct DeformedIsometry {
    base: Isometry,
    cut: f64,
}

impl DeformedIsometry {
    /// `H(phi, t)`; the cut must lie in `[0, 1]`.
    pub fn new(base: Isometry, cut: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cut) {
            return Err(Error::usage(format!(
                "deformation parameter must lie in [0,1], got {cut}"
            )));
        }
        Ok(DeformedIsometry { base, cut })
    }

    pub fn base(&self) -> &Isometry {
        &self.base
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    /// Applies the deformed isometry to a simple function over an atomized
    /// `[0,1]`.
    pub fn apply(&self, xi: &SimpleFunction) -> Result<SimpleFunction> {
        transform_below_cut(xi, self.cut, |model, v| self.base.apply(model, v))
    }

    /// Length `l_xi(H(phi, t))` measured directly as the `L^2` distance
    /// between `xi` and its image (both refined at the cut).
    pub fn length_at(&self, xi: &SimpleFunction) -> Result<f64> {
        let refined = refine_at(xi, self.cut)?;
        let moved = self.apply(xi)?;
        refined.l2_distance(&moved)
    }
}

/// Splits the atoms of `xi` at the cut without changing values.
pub fn refine_at(xi: &SimpleFunction, cut: f64) -> Result<SimpleFunction> {
    transform_below_cut(xi, cut, |_, v| Ok(v.clone()))
}

fn transform_below_cut(
    xi: &SimpleFunction,
    cut: f64,
    transform: impl Fn(&SpaceModel, &crate::spaces::Point) -> Result<crate::spaces::Point>,
) -> Result<SimpleFunction> {
    let space = xi.space();
    let total = space.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::usage(format!(
            "deformations need a unit-mass atomization of [0,1], total mass is {total}"
        )));
    }
    let model = xi.model();
    let mut atoms = Vec::with_capacity(space.len() + 1);
    let mut values = Vec::with_capacity(space.len() + 1);
    let mut start = 0.0_f64;
    for (i, (label, w)) in space.atoms().iter().enumerate() {
        let end = start + w;
        let v = xi.value(i);
        if end <= cut {
            atoms.push((label.clone(), *w));
            values.push(transform(model, v)?);
        } else if start >= cut {
            atoms.push((label.clone(), *w));
            values.push(v.clone());
        } else {
            // The cut falls strictly inside this atom: split it.
            atoms.push((format!("{label}.l"), cut - start));
            values.push(transform(model, v)?);
            atoms.push((format!("{label}.r"), end - cut));
            values.push(v.clone());
        }
        start = end;
    }
    SimpleFunction::new(FiniteMeasureSpace::new(atoms)?, model.clone(), values)
}

/// The canonical embedding of an isometry of `M` into the isometries of
/// `L^2(Y, mu, M)`: the same isometry dialed on every atom.
pub fn continuum_lift(phi: &Isometry, space: &FiniteMeasureSpace) -> Isometry {
    Isometry::PiecewiseDial(vec![phi.clone(); space.len()])
}

/// Applies a descriptor to a simple function: dials and permutations act on
/// the atom structure, single-model isometries act pointwise (the lift).
pub fn apply_to_simple(phi: &Isometry, xi: &SimpleFunction) -> Result<SimpleFunction> {
    let model = xi.model();
    match phi {
        Isometry::PiecewiseDial(parts) | Isometry::ProductComponentwise(parts) => {
            if parts.len() != xi.space().len() {
                return Err(Error::mismatch("one dial per atom required"));
            }
            let values = parts
                .iter()
                .zip(xi.values())
                .map(|(p, v)| p.apply(model, v))
                .collect::<Result<Vec<_>>>()?;
            SimpleFunction::new(xi.space().clone(), model.clone(), values)
        }
        Isometry::AtomPermutation(perm) => {
            if perm.len() != xi.space().len() {
                return Err(Error::mismatch("permutation length mismatch"));
            }
            let mut values = xi.values().to_vec();
            for (j, &i) in perm.iter().enumerate() {
                values[i] = xi.value(j).clone();
            }
            SimpleFunction::new(xi.space().clone(), model.clone(), values)
        }
        _ => {
            let values = xi
                .values()
                .iter()
                .map(|v| phi.apply(model, v))
                .collect::<Result<Vec<_>>>()?;
            SimpleFunction::new(xi.space().clone(), model.clone(), values)
        }
    }
}
