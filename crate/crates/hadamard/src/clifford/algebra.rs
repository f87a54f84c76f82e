//! Gamma-matrix representations of complex Clifford algebras.
//!
//! `Cl_C(R^m)` is represented on `C^{2^ceil(m/2)}` by self-adjoint
//! generators satisfying `g_i g_j + g_j g_i = 2 delta_ij`. Even `m` uses
//! the Pauli tensor recursion
//! `g_{2j-1} = sz^(j-1) (x) sx (x) I`, `g_{2j} = sz^(j-1) (x) sy (x) I`;
//! odd `m` doubles the representation of `m - 1` by
//! `g_i -> sx (x) g_i` and appends the diagonal generator `sz (x) I`,
//! so that `m = 1` yields `diag(1, -1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

use super::testfn::TestFunction;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// A fixed matrix representation of `Cl_C(R^m)`.
#[derive(Clone, Debug)]
pub struct CliffordAlgebra {
    m: usize,
    rep_dim: usize,
    gammas: Vec<CMatrix>,
    grading: CMatrix,
}

/// An element of a Clifford algebra in its matrix representation. The norm
/// is the largest singular value.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    matrix: CMatrix,
}

impl CliffordAlgebra {
    /// Builds the algebra with `m` generators, `0 <= m <= 12`.
    pub fn new(m: usize) -> Result<Self> {
        if m > tol::MAX_CLIFFORD_GENERATORS {
            return Err(Error::Resource(format!(
                "representation dimension 2^{} exceeds the configured limit (m = {m})",
                m.div_ceil(2)
            )));
        }
        let (gammas, grading) = build_gammas(m);
        let rep_dim = if m == 0 { 1 } else { gammas[0].nrows() };
        Ok(CliffordAlgebra {
            m,
            rep_dim,
            gammas,
            grading,
        })
    }

    /// Algebra sized for the tangent fibers `H_x M (+) t R` of a model: one
    /// generator per tangent dimension plus one for the `t` slot.
    pub fn for_model(model: &crate::spaces::SpaceModel) -> Result<Self> {
        Self::new(model.tangent_dim() + 1)
    }

    pub fn generator_count(&self) -> usize {
        self.m
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    pub fn gamma(&self, i: usize) -> &CMatrix {
        &self.gammas[i]
    }

    /// The unitary implementing the grading involution `v -> -v`.
    pub fn grading_operator(&self) -> &CMatrix {
        &self.grading
    }

    pub fn identity_element(&self) -> CliffordElement {
        CliffordElement {
            matrix: CMatrix::identity(self.rep_dim, self.rep_dim),
        }
    }

    pub fn scalar_element(&self, z: Complex64) -> CliffordElement {
        CliffordElement {
            matrix: CMatrix::identity(self.rep_dim, self.rep_dim) * z,
        }
    }

    /// The self-adjoint element `v^ = sum_i v_i g_i` with `v^2 = |v|^2`.
    pub fn vector_element(&self, v: &DVector<f64>) -> Result<CliffordElement> {
        if v.len() != self.m {
            return Err(Error::mismatch(format!(
                "vector has {} coordinates, algebra has {} generators",
                v.len(),
                self.m
            )));
        }
        let mut matrix = CMatrix::zeros(self.rep_dim, self.rep_dim);
        for (i, g) in self.gammas.iter().enumerate() {
            matrix += g * c(v[i], 0.0);
        }
        Ok(CliffordElement { matrix })
    }

    /// Functional calculus `f(v^)` evaluated by the even/odd rule: the even
    /// part contributes the scalar `f_0(|v|)`, the odd part the vector
    /// `(f_1(|v|) / |v|) v^`; at `v = 0` the value is `f(0)`.
    pub fn functional_calculus(
        &self,
        f: &TestFunction,
        v: &DVector<f64>,
    ) -> Result<CliffordElement> {
        if v.len() != self.m {
            return Err(Error::mismatch(format!(
                "vector has {} coordinates, algebra has {} generators",
                v.len(),
                self.m
            )));
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Ok(self.scalar_element(c(f.value(0.0), 0.0)));
        }
        let even = f.even_value(norm);
        let odd = f.odd_value(norm);
        let mut out = self.scalar_element(c(even, 0.0));
        let hat = self.vector_element(v)?;
        out.matrix += hat.matrix * c(odd / norm, 0.0);
        Ok(out)
    }

    /// Largest anticommutator defect `|g_i g_j + g_j g_i - 2 delta_ij|`
    /// together with the largest self-adjointness defect.
    pub fn relation_defect(&self) -> f64 {
        let id = CMatrix::identity(self.rep_dim, self.rep_dim);
        let mut worst = 0.0_f64;
        for i in 0..self.m {
            worst = worst.max((&self.gammas[i] - self.gammas[i].adjoint()).norm());
            for j in i..self.m {
                let anti = &self.gammas[i] * &self.gammas[j] + &self.gammas[j] * &self.gammas[i];
                let expected = if i == j { &id * c(2.0, 0.0) } else { CMatrix::zeros(self.rep_dim, self.rep_dim) };
                worst = worst.max((anti - expected).norm());
            }
        }
        worst
    }

    /// Defect of `e` being even (commuting with the grading operator).
    pub fn even_defect(&self, e: &CliffordElement) -> f64 {
        (&self.grading * &e.matrix - &e.matrix * &self.grading).norm()
    }

    /// Defect of `e` being odd (anticommuting with the grading operator).
    pub fn odd_defect(&self, e: &CliffordElement) -> f64 {
        (&self.grading * &e.matrix + &e.matrix * &self.grading).norm()
    }
}

/// Builds the generators and the grading unitary for `Cl_C(R^m)`.
fn build_gammas(m: usize) -> (Vec<CMatrix>, CMatrix) {
    if m == 0 {
        return (Vec::new(), CMatrix::identity(1, 1));
    }
    if m % 2 == 0 {
        let k = m / 2;
        let dim = 1 << k;
        let mut gammas = Vec::with_capacity(m);
        for j in 1..=k {
            gammas.push(pauli_chain(k, j, pauli_x()));
            gammas.push(pauli_chain(k, j, pauli_y()));
        }
        // The chirality element: the product of all generators, phased to be
        // a self-adjoint involution. It anticommutes with every generator.
        let mut prod = CMatrix::identity(dim, dim);
        for g in &gammas {
            prod = &prod * g;
        }
        let sq = &prod * &prod;
        let id = CMatrix::identity(dim, dim);
        let grading = if (&sq - &id).norm() < 1e-9 { prod } else { prod * c(0.0, 1.0) };
        (gammas, grading)
    } else {
        let (lower, _) = build_gammas(m - 1);
        let half = 1 << ((m - 1) / 2);
        let sx = pauli_x();
        let sz = pauli_z();
        let sy = pauli_y();
        let idh = CMatrix::identity(half, half);
        let mut gammas: Vec<CMatrix> = lower.iter().map(|g| sx.kronecker(g)).collect();
        gammas.push(sz.kronecker(&idh));
        // sy (x) I anticommutes with sx (x) g and sz (x) I, is self-adjoint
        // and squares to the identity, so it implements the grading.
        let grading = sy.kronecker(&idh);
        (gammas, grading)
    }
}

/// `sz^(j-1) (x) p (x) I` on `k` qubit slots.
fn pauli_chain(k: usize, j: usize, p: CMatrix) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for slot in 1..=k {
        let factor = if slot < j {
            pauli_z()
        } else if slot == j {
            p.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        out = out.kronecker(&factor);
    }
    out
}

/// Functional calculus of a hermitian matrix through its eigendecomposition.
/// Serves as the generic route against which the even/odd rule is checked.
pub fn hermitian_functional_calculus(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = a.clone().symmetric_eigen();
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|x| c(f(x), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

impl CliffordElement {
    pub fn from_matrix(matrix: CMatrix) -> Self {
        CliffordElement { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Operator norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        crate::linalg::operator_norm_complex(&self.matrix)
    }

    pub fn adjoint(&self) -> CliffordElement {
        CliffordElement {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Distance to the nearest scalar multiple of the identity.
    pub fn scalar_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let trace = self.matrix.trace() / c(n as f64, 0.0);
        let id = CMatrix::identity(n, n);
        crate::linalg::operator_norm_complex(&(&self.matrix - id * trace))
    }
}

impl std::ops::Add for &CliffordElement {
    type Output = CliffordElement;
    fn add(self, rhs: &CliffordElement) -> CliffordElement {
        CliffordElement {
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Sub for &CliffordElement {
    type Output = CliffordElement;
    fn sub(self, rhs: &CliffordElement) -> CliffordElement {
        CliffordElement {
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl std::ops::Mul for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: &CliffordElement) -> CliffordElement {
        CliffordElement {
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}
