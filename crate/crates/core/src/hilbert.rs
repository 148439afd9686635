//! Dense operator algebra on the composite atom-cavity space.
//!
//! Every full-space object uses the factor order (atom A, cavity A, atom B,
//! cavity B). Atom basis index 0 is the excited state |e⟩ and index 1 the
//! ground state |l⟩; the Fock basis ascends from |0⟩.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ATOM_DIM: usize = 2;
pub const EXCITED: usize = 0;
pub const GROUND: usize = 1;

#[cfg(test)]
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    AtomA,
    CavA,
    AtomB,
    CavB,
}

impl Factor {
    pub const CANONICAL: [Factor; 4] = [Factor::AtomA, Factor::CavA, Factor::AtomB, Factor::CavB];

    fn position(self) -> usize {
        match self {
            Factor::AtomA => 0,
            Factor::CavA => 1,
            Factor::AtomB => 2,
            Factor::CavB => 3,
        }
    }
}

/// Basis label of one product state: (atom A, photons in A, atom B, photons in B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub atom_a: usize,
    pub photons_a: usize,
    pub atom_b: usize,
    pub photons_b: usize,
}

/// The four-factor double Jaynes-Cummings layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    cutoff_a: usize,
    cutoff_b: usize,
}

impl HilbertSpace {
    pub fn new(cutoff_a: usize, cutoff_b: usize) -> Result<Self> {
        for cutoff in [cutoff_a, cutoff_b] {
            if cutoff < 2 {
                return Err(Error::InvalidDimension {
                    dim: cutoff,
                    reason: "Fock cutoff must be at least 2",
                });
            }
        }
        Ok(Self { cutoff_a, cutoff_b })
    }

    pub fn symmetric(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, cutoff)
    }

    pub fn cutoff_a(&self) -> usize {
        self.cutoff_a
    }

    pub fn cutoff_b(&self) -> usize {
        self.cutoff_b
    }

    pub fn factors(&self) -> [(Factor, usize); 4] {
        [
            (Factor::AtomA, ATOM_DIM),
            (Factor::CavA, self.cutoff_a),
            (Factor::AtomB, ATOM_DIM),
            (Factor::CavB, self.cutoff_b),
        ]
    }

    pub fn factor_dim(&self, factor: Factor) -> usize {
        self.factors()[factor.position()].1
    }

    pub fn dim(&self) -> usize {
        ATOM_DIM * self.cutoff_a * ATOM_DIM * self.cutoff_b
    }

    pub fn index(&self, s: BasisState) -> usize {
        ((s.atom_a * self.cutoff_a + s.photons_a) * ATOM_DIM + s.atom_b) * self.cutoff_b + s.photons_b
    }

    pub fn state(&self, mut index: usize) -> BasisState {
        let photons_b = index % self.cutoff_b;
        index /= self.cutoff_b;
        let atom_b = index % ATOM_DIM;
        index /= ATOM_DIM;
        let photons_a = index % self.cutoff_a;
        let atom_a = index / self.cutoff_a;
        BasisState {
            atom_a,
            photons_a,
            atom_b,
            photons_b,
        }
    }

    /// The same layout with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            cutoff_a: self.cutoff_b,
            cutoff_b: self.cutoff_a,
        }
    }
}

/// A full-space operator together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    data: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, data: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Layout(format!(
                "matrix is {}x{} but the space has dimension {dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { space, data })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let dim = space.dim();
        Self {
            space,
            data: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let dim = space.dim();
        Self {
            space,
            data: CMatrix::identity(dim, dim),
        }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space,
            data: self.data.adjoint(),
        }
    }

    pub fn commutator(&self, other: &Operator) -> CMatrix {
        &self.data * &other.data - &other.data * &self.data
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.data - self.data.adjoint()))
    }

    /// Fails unless `‖H − H†‖_max ≤ 1e-12 · ‖H‖_max`.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > 1e-12 * max_abs(&self.data).max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        Operator {
            space: self.space,
            data: &self.data + &rhs.data,
        }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        Operator {
            space: self.space,
            data: &self.data * &rhs.data,
        }
    }
}

impl std::ops::Mul<Complex64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: Complex64) -> Operator {
        Operator {
            space: self.space,
            data: &self.data * rhs,
        }
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Fock annihilation operator truncated to `dim` levels.
pub fn fock_destroy(dim: usize) -> Result<CMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "a Fock space needs at least two levels",
        });
    }
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Two-level operators in the (|e⟩, |l⟩) basis.
#[derive(Debug, Clone)]
pub struct QubitOps {
    pub sigma_plus: CMatrix,
    pub sigma_minus: CMatrix,
    pub sigma_3: CMatrix,
}

pub fn qubit_ops() -> QubitOps {
    let mut sigma_plus = CMatrix::zeros(2, 2);
    sigma_plus[(EXCITED, GROUND)] = ONE;
    let sigma_minus = sigma_plus.transpose();
    let mut sigma_3 = CMatrix::zeros(2, 2);
    sigma_3[(EXCITED, EXCITED)] = ONE;
    sigma_3[(GROUND, GROUND)] = -ONE;
    QubitOps {
        sigma_plus,
        sigma_minus,
        sigma_3,
    }
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of one operator per factor, in canonical order.
pub fn tensor(space: HilbertSpace, factors: &[&CMatrix]) -> Result<Operator> {
    let layout = space.factors();
    if factors.len() != layout.len() {
        return Err(Error::Layout(format!(
            "expected {} factor operators, got {}",
            layout.len(),
            factors.len()
        )));
    }
    for ((label, dim), op) in layout.iter().zip(factors) {
        if op.nrows() != *dim || op.ncols() != *dim {
            return Err(Error::Layout(format!(
                "factor {label:?} has dimension {dim} but the operator is {}x{}",
                op.nrows(),
                op.ncols()
            )));
        }
    }
    let data = factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, op| kron(&acc, op));
    Operator::new(space, data)
}

/// Place a single-factor operator at `site`, identities elsewhere.
pub fn embed(op: &CMatrix, site: Factor, space: HilbertSpace) -> Result<Operator> {
    let idents: Vec<CMatrix> = space
        .factors()
        .iter()
        .map(|(_, dim)| CMatrix::identity(*dim, *dim))
        .collect();
    let mut refs: Vec<&CMatrix> = idents.iter().collect();
    refs[site.position()] = op;
    tensor(space, &refs)
}

/// Quantum state on the full space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    data: CMatrix,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Wraps a matrix without checking the state invariants.
    pub fn from_matrix(space: HilbertSpace, data: CMatrix) -> Result<Self> {
        let op = Operator::new(space, data)?;
        Ok(Self {
            space,
            data: op.data,
        })
    }

    /// Pure state |ψ⟩⟨ψ|.
    pub fn pure(space: HilbertSpace, psi: &nalgebra::DVector<Complex64>) -> Result<Self> {
        Self::from_matrix(space, psi * psi.adjoint())
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let dim = space.dim();
        Self {
            space,
            data: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn symmetrize(&mut self) {
        let adj = self.data.adjoint();
        self.data = (&self.data + adj) * Complex64::new(0.5, 0.0);
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace and positivity at the standard tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = max_abs(&(&self.data - self.data.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!("Hermiticity deviation {herm:e}")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::Validation(format!("minimum eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}
