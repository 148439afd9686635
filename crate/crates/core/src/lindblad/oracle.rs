//! Matrix-exponential reference solution of the master equation.

use num_complex::Complex64;

use super::CollapseTerm;
use crate::error::{Error, Result};
use crate::hilbert::{kron, CMatrix, DensityMatrix, Operator};

/// Largest Hilbert-space dimension accepted by [`expm_oracle`].
pub const ORACLE_MAX_DIM: usize = 64;

/// Column-stacking Liouvillian: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
fn liouvillian(h: &Operator, terms: &[CollapseTerm]) -> CMatrix {
    let dim = h.dim();
    let id = CMatrix::identity(dim, dim);
    let hm = h.matrix();
    let mut l = (kron(&id, hm) - kron(&hm.transpose(), &id)) * Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    for term in terms {
        let c = term.collapse.matrix();
        let cdc = c.adjoint() * c;
        l += kron(&c.conjugate(), c) - (kron(&id, &cdc) + kron(&cdc.transpose(), &id)) * half;
    }
    l
}

/// ρ(t) = unvec(exp(L t) vec(ρ0)).
pub fn expm_oracle(h: &Operator, terms: &[CollapseTerm], rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let dim = h.dim();
    if dim > ORACLE_MAX_DIM {
        return Err(Error::DimensionGuard {
            dim,
            limit: ORACLE_MAX_DIM,
        });
    }
    if rho0.space() != h.space() {
        return Err(Error::Layout("initial state and Hamiltonian live on different spaces".into()));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let propagator = (liouvillian(h, terms) * Complex64::new(t, 0.0)).exp();
    let v0 = nalgebra::DVector::from_column_slice(rho0.matrix().as_slice());
    let v = propagator * v0;
    DensityMatrix::from_matrix(h.space(), CMatrix::from_column_slice(dim, dim, v.as_slice()))
}
