//! Hamiltonians of the double Jaynes-Cummings family and the two initial
//! atomic states.
//!
//! All quantities are in units where ℏ = 1 and the coupling `g_b` sets the
//! frequency scale.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed, fock_destroy, qubit_ops, tensor, BasisState, CMatrix, DensityMatrix, Factor,
    HilbertSpace, Operator, ATOM_DIM, EXCITED, GROUND, ONE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atomic transition frequency.
    pub omega0: f64,
    /// Cavity frequency (shared by both cavities).
    pub omega: f64,
    pub g_a: f64,
    pub g_b: f64,
    /// Photons exchanged per atomic transition.
    pub n_photon: u32,
}

impl ModelParams {
    /// Resonant, symmetric linear model: ω0 = ω = G_A = G_B = 1.
    pub fn resonant_symmetric() -> Self {
        Self {
            omega0: 1.0,
            omega: 1.0,
            g_a: 1.0,
            g_b: 1.0,
            n_photon: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_b > 0.0) {
            return Err(Error::InvalidParameter {
                field: "g_b",
                reason: format!("reference coupling must be positive, got {}", self.g_b),
            });
        }
        if !(self.g_a >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "g_a",
                reason: format!("coupling must be nonnegative, got {}", self.g_a),
            });
        }
        if self.n_photon < 1 {
            return Err(Error::InvalidParameter {
                field: "n_photon",
                reason: "multiphoton order must be at least 1".into(),
            });
        }
        for (field, v) in [("omega0", self.omega0), ("omega", self.omega)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn is_linear_resonant(&self) -> bool {
        (self.omega0 - self.omega).abs() <= 1e-12 * self.omega.abs().max(1.0)
    }

    /// ω0 = N ω.
    pub fn is_multiphoton_resonant(&self) -> bool {
        let target = self.n_photon as f64 * self.omega;
        (self.omega0 - target).abs() <= 1e-12 * target.abs().max(1.0)
    }
}

/// Which sign of the `M = N` pump resonance `Nω_P = Nω ± g√(N!)` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonanceBranch {
    #[default]
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub epsilon: f64,
    /// Pump phase χ in radians.
    pub chi: f64,
    pub m_order: u32,
    /// Δ_P = ω − ω_P.
    pub delta_p: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "epsilon",
                reason: format!("drive strength must be nonnegative, got {}", self.epsilon),
            });
        }
        if self.m_order < 1 {
            return Err(Error::InvalidParameter {
                field: "m_order",
                reason: "pump nonlinearity must be at least 1".into(),
            });
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Pump detuning Δ_P at resonance.
///
/// For `M < N` the pump sits on the cavity (ω_P = ω). For `M = N` the pump
/// addresses a dressed doublet, `Nω_P = Nω ± g√(N!)`, so `Δ_P = ∓ g√(N!)/N`.
pub fn resonant_pump_detuning(
    n_photon: u32,
    m_order: u32,
    g: f64,
    branch: ResonanceBranch,
) -> Result<f64> {
    if m_order < n_photon {
        Ok(0.0)
    } else if m_order == n_photon {
        let split = g * factorial(n_photon).sqrt() / n_photon as f64;
        Ok(match branch {
            ResonanceBranch::Plus => -split,
            ResonanceBranch::Minus => split,
        })
    } else {
        Err(Error::InvalidParameter {
            field: "m_order",
            reason: format!("no resonance rule for pump order M = {m_order} > N = {n_photon}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCase {
    /// sin α |l_A e_B⟩ + cos α |e_A l_B⟩
    NoSuddenDeath,
    /// sin α |l_A l_B⟩ + cos α |e_A e_B⟩
    SuddenDeath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    pub alpha: f64,
    pub case: InitialCase,
}

/// One atom-cavity pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::A, Side::B];

    pub fn coupling(self, p: &ModelParams) -> f64 {
        match self {
            Side::A => p.g_a,
            Side::B => p.g_b,
        }
    }

    pub fn atom(self) -> Factor {
        match self {
            Side::A => Factor::AtomA,
            Side::B => Factor::AtomB,
        }
    }

    pub fn cavity(self) -> Factor {
        match self {
            Side::A => Factor::CavA,
            Side::B => Factor::CavB,
        }
    }

    fn cutoff(self, space: HilbertSpace) -> usize {
        match self {
            Side::A => space.cutoff_a(),
            Side::B => space.cutoff_b(),
        }
    }
}

/// Builds `atom_op ⊗ cav_op` on one side with identities on the other pair.
fn pair_operator(space: HilbertSpace, side: Side, atom_op: &CMatrix, cav_op: &CMatrix) -> Result<Operator> {
    let i2 = CMatrix::identity(ATOM_DIM, ATOM_DIM);
    let ia = CMatrix::identity(space.cutoff_a(), space.cutoff_a());
    let ib = CMatrix::identity(space.cutoff_b(), space.cutoff_b());
    match side {
        Side::A => tensor(space, &[atom_op, cav_op, &i2, &ib]),
        Side::B => tensor(space, &[&i2, &ia, atom_op, cav_op]),
    }
}

fn cavity_power(space: HilbertSpace, side: Side, power: u32) -> Result<CMatrix> {
    let a = fock_destroy(side.cutoff(space))?;
    Ok((0..power).fold(CMatrix::identity(a.nrows(), a.ncols()), |acc, _| acc * &a))
}

fn number(space: HilbertSpace, side: Side) -> Result<Operator> {
    let a = fock_destroy(side.cutoff(space))?;
    embed(&(a.adjoint() * &a), side.cavity(), space)
}

/// g(σ+ a^N + σ− (a^N)†) on one side.
fn interaction(space: HilbertSpace, side: Side, g: f64, n_photon: u32) -> Result<Operator> {
    let q = qubit_ops();
    let a_n = cavity_power(space, side, n_photon)?;
    let absorb = pair_operator(space, side, &q.sigma_plus, &a_n)?;
    let coupled = &absorb + &absorb.dagger();
    Ok(&coupled * Complex64::new(g, 0.0))
}

fn free_part(p: &ModelParams, space: HilbertSpace) -> Result<Operator> {
    let q = qubit_ops();
    let mut h = Operator::zeros(space);
    for side in [Side::A, Side::B] {
        let sz = embed(&q.sigma_3, side.atom(), space)?;
        h = &h + &(&sz * Complex64::new(0.5 * p.omega0, 0.0));
        h = &h + &(&number(space, side)? * Complex64::new(p.omega, 0.0));
    }
    Ok(h)
}

fn ensure_cutoffs(space: HilbertSpace, n_photon: u32) -> Result<()> {
    let needed = n_photon as usize + 1;
    for (cutoff, side) in [(space.cutoff_a(), "A"), (space.cutoff_b(), "B")] {
        if cutoff < needed {
            return Err(Error::InvalidParameter {
                field: "cutoff",
                reason: format!(
                    "cavity {side} keeps {cutoff} Fock levels but {n_photon}-photon exchange needs at least {needed}"
                ),
            });
        }
    }
    Ok(())
}

/// The interaction terms G_A(σ+^A a^N + h.c.) + G_B(σ+^B b^N + h.c.).
pub fn interaction_part(p: &ModelParams, space: HilbertSpace) -> Result<Operator> {
    ensure_cutoffs(space, p.n_photon)?;
    let a = interaction(space, Side::A, p.g_a, p.n_photon)?;
    let b = interaction(space, Side::B, p.g_b, p.n_photon)?;
    Ok(&a + &b)
}

/// Linear double JC Hamiltonian under the rotating-wave approximation.
///
/// `p.n_photon` is ignored; the atoms exchange single photons.
pub fn build_double_jc(p: &ModelParams, space: HilbertSpace) -> Result<Operator> {
    build_multiphoton_double_jc(&ModelParams { n_photon: 1, ..*p }, space)
}

/// N-photon double JC Hamiltonian, N = `p.n_photon`.
pub fn build_multiphoton_double_jc(p: &ModelParams, space: HilbertSpace) -> Result<Operator> {
    let h = &free_part(p, space)? + &interaction_part(p, space)?;
    h.ensure_hermitian()?;
    Ok(h)
}

/// Multiphoton double JC with a nonlinear pump on each cavity, written in the
/// frame rotating at the pump frequency.
///
/// Per cavity: `Δ_P(n + Nσ3/2) + (ω0 − Nω)σ3/2 + ε e^{−iχ} a^M + G a^N σ+ + h.c.`
/// The second term vanishes at multiphoton resonance.
pub fn build_driven_double_jc(p: &ModelParams, d: &DriveParams, space: HilbertSpace) -> Result<Operator> {
    d.validate()?;
    let q = qubit_ops();
    let n = p.n_photon as f64;
    let atom_shift = 0.5 * (d.delta_p * n + p.omega0 - n * p.omega);
    let pump = Complex64::from_polar(d.epsilon, -d.chi);
    let mut h = interaction_part(p, space)?;
    for side in [Side::A, Side::B] {
        let sz = embed(&q.sigma_3, side.atom(), space)?;
        h = &h + &(&number(space, side)? * Complex64::new(d.delta_p, 0.0));
        h = &h + &(&sz * Complex64::new(atom_shift, 0.0));
        let a_m = cavity_power(space, side, d.m_order)?;
        let drive = embed(&a_m, side.cavity(), space)?;
        h = &h + &(&drive * pump);
        h = &h + &(&drive.dagger() * pump.conj());
    }
    h.ensure_hermitian()?;
    Ok(h)
}

/// The terms of the double-cavity Hamiltonian that act on `side` alone,
/// undriven or driven. The full Hamiltonian is the sum over both sides.
pub fn build_side(p: &ModelParams, drive: Option<&DriveParams>, side: Side, space: HilbertSpace) -> Result<Operator> {
    ensure_cutoffs(space, p.n_photon)?;
    let q = qubit_ops();
    let n = p.n_photon as f64;
    let sz = embed(&q.sigma_3, side.atom(), space)?;
    let mut h = interaction(space, side, side.coupling(p), p.n_photon)?;
    match drive {
        None => {
            h = &h + &(&sz * Complex64::new(0.5 * p.omega0, 0.0));
            h = &h + &(&number(space, side)? * Complex64::new(p.omega, 0.0));
        }
        Some(d) => {
            d.validate()?;
            let pump = Complex64::from_polar(d.epsilon, -d.chi);
            let drive = embed(&cavity_power(space, side, d.m_order)?, side.cavity(), space)?;
            h = &h + &(&number(space, side)? * Complex64::new(d.delta_p, 0.0));
            h = &h + &(&sz * Complex64::new(0.5 * (d.delta_p * n + p.omega0 - n * p.omega), 0.0));
            h = &h + &(&drive * pump);
            h = &h + &(&drive.dagger() * pump.conj());
        }
    }
    h.ensure_hermitian()?;
    Ok(h)
}

/// `N σ+σ−` on each atom plus the photon numbers; conserved by the undriven
/// N-photon Hamiltonian.
pub fn excitation_operator(space: HilbertSpace, n_photon: u32) -> Result<Operator> {
    let q = qubit_ops();
    let excited = &q.sigma_plus * &q.sigma_minus * Complex64::new(n_photon as f64, 0.0);
    let mut total = Operator::zeros(space);
    for side in [Side::A, Side::B] {
        total = &total + &embed(&excited, side.atom(), space)?;
        total = &total + &number(space, side)?;
    }
    Ok(total)
}

/// Glassy coupling disorder: G_j ← G_j (1 + δ_j).
pub fn apply_disorder(p: &ModelParams, delta_a: f64, delta_b: f64) -> ModelParams {
    ModelParams {
        g_a: p.g_a * (1.0 + delta_a),
        g_b: p.g_b * (1.0 + delta_b),
        ..*p
    }
}

/// Atomic two-qubit amplitudes in the order (|ee⟩, |el⟩, |le⟩, |ll⟩).
pub fn atomic_amplitudes(spec: &InitialStateSpec) -> [f64; 4] {
    let (s, c) = spec.alpha.sin_cos();
    match spec.case {
        InitialCase::NoSuddenDeath => [0.0, c, s, 0.0],
        InitialCase::SuddenDeath => [c, 0.0, 0.0, s],
    }
}

/// Pure initial state with both cavities in vacuum.
pub fn initial_state(spec: &InitialStateSpec, space: HilbertSpace) -> Result<DensityMatrix> {
    let amps = atomic_amplitudes(spec);
    let atoms = [(EXCITED, EXCITED), (EXCITED, GROUND), (GROUND, EXCITED), (GROUND, GROUND)];
    let mut psi = DVector::<Complex64>::zeros(space.dim());
    for (amp, (atom_a, atom_b)) in amps.iter().zip(atoms) {
        let idx = space.index(BasisState {
            atom_a,
            photons_a: 0,
            atom_b,
            photons_b: 0,
        });
        psi[idx] = Complex64::new(*amp, 0.0);
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("initial state norm {norm}")));
    }
    DensityMatrix::pure(space, &psi)
}

/// Permutation matrix taking |a, n_a, b, n_b⟩ in `space` to |b, n_b, a, n_a⟩ in
/// `space.swapped()`.
pub fn swap_permutation(space: HilbertSpace) -> CMatrix {
    let target = space.swapped();
    let mut p = CMatrix::zeros(space.dim(), space.dim());
    for i in 0..space.dim() {
        let s = space.state(i);
        let j = target.index(BasisState {
            atom_a: s.atom_b,
            photons_a: s.photons_b,
            atom_b: s.atom_a,
            photons_b: s.photons_a,
        });
        p[(j, i)] = ONE;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::max_abs;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn idx(space: HilbertSpace, atom_a: usize, photons_a: usize, atom_b: usize, photons_b: usize) -> usize {
        space.index(BasisState { atom_a, photons_a, atom_b, photons_b })
    }

    #[test]
    fn double_jc_matrix_element() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let p = ModelParams { g_a: 0.7, ..ModelParams::resonant_symmetric() };
        let h = build_double_jc(&p, space).unwrap();
        let bra = idx(space, EXCITED, 0, GROUND, 0);
        let ket = idx(space, GROUND, 1, GROUND, 0);
        assert_relative_eq!(h.matrix()[(bra, ket)].re, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn double_jc_conserves_excitations() {
        let space = HilbertSpace::new(3, 4).unwrap();
        let p = ModelParams { g_a: 0.9, omega0: 1.3, ..ModelParams::resonant_symmetric() };
        let h = build_double_jc(&p, space).unwrap();
        let n = excitation_operator(space, 1).unwrap();
        assert!(max_abs(&h.commutator(&n)) <= 1e-12);
    }

    #[test]
    fn uncoupled_hamiltonian_is_diagonal() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let p = ModelParams { g_a: 0.0, g_b: 0.0, ..ModelParams::resonant_symmetric() };
        let h = build_double_jc(&p, space).unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.matrix()[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn multiphoton_reduces_to_linear() {
        let space = HilbertSpace::symmetric(4).unwrap();
        let p = ModelParams { g_a: 0.9, ..ModelParams::resonant_symmetric() };
        let linear = build_double_jc(&p, space).unwrap();
        let multi = build_multiphoton_double_jc(&p, space).unwrap();
        assert_eq!(linear, multi);
    }

    #[test]
    fn two_photon_matrix_element() {
        let space = HilbertSpace::symmetric(4).unwrap();
        let p = ModelParams { omega0: 2.0, n_photon: 2, ..ModelParams::resonant_symmetric() };
        let h = build_multiphoton_double_jc(&p, space).unwrap();
        let bra = idx(space, EXCITED, 0, GROUND, 0);
        let ket = idx(space, GROUND, 2, GROUND, 0);
        // ⟨0|a²|2⟩ = √(2·1)
        assert_relative_eq!(h.matrix()[(bra, ket)].re, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn multiphoton_conserves_generalized_excitations() {
        for n in [2u32, 3] {
            let space = HilbertSpace::symmetric(n as usize + 3).unwrap();
            let p = ModelParams { omega0: n as f64, n_photon: n, g_a: 0.8, ..ModelParams::resonant_symmetric() };
            let h = build_multiphoton_double_jc(&p, space).unwrap();
            let exc = excitation_operator(space, n).unwrap();
            assert!(max_abs(&h.commutator(&exc)) <= 1e-12, "N = {n}");
        }
    }

    #[test]
    fn multiphoton_rejects_short_cutoff() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let p = ModelParams { n_photon: 3, ..ModelParams::resonant_symmetric() };
        assert!(matches!(
            build_multiphoton_double_jc(&p, space),
            Err(Error::InvalidParameter { field: "cutoff", .. })
        ));
    }

    #[test]
    fn driven_without_pump_is_interaction_part() {
        let space = HilbertSpace::symmetric(4).unwrap();
        let p = ModelParams { omega0: 2.0, n_photon: 2, ..ModelParams::resonant_symmetric() };
        let d = DriveParams { epsilon: 0.0, chi: 0.3, m_order: 1, delta_p: 0.0 };
        let driven = build_driven_double_jc(&p, &d, space).unwrap();
        let interaction = interaction_part(&p, space).unwrap();
        assert!(max_abs(&(driven.matrix() - interaction.matrix())) <= 1e-15);
    }

    #[test]
    fn linear_pump_element_on_vacuum() {
        let space = HilbertSpace::symmetric(4).unwrap();
        let p = ModelParams { omega0: 2.0, n_photon: 2, ..ModelParams::resonant_symmetric() };
        let chi = 0.4;
        let d = DriveParams { epsilon: 0.01, chi, m_order: 1, delta_p: 0.0 };
        let h = build_driven_double_jc(&p, &d, space).unwrap();
        let vac = idx(space, GROUND, 0, GROUND, 0);
        let one = idx(space, GROUND, 1, GROUND, 0);
        // ⟨0| ε e^{−iχ} a |1⟩
        let expect = Complex64::from_polar(0.01, -chi);
        assert!((h.matrix()[(vac, one)] - expect).norm() < 1e-15);
        assert!((h.matrix()[(one, vac)] - expect.conj()).norm() < 1e-15);
    }

    #[test]
    fn driven_breaks_excitation_conservation() {
        let space = HilbertSpace::symmetric(5).unwrap();
        let p = ModelParams { omega0: 2.0, n_photon: 2, ..ModelParams::resonant_symmetric() };
        let d = DriveParams { epsilon: 0.01, chi: 0.0, m_order: 1, delta_p: 0.0 };
        let h = build_driven_double_jc(&p, &d, space).unwrap();
        let exc = excitation_operator(space, 2).unwrap();
        assert!(max_abs(&h.commutator(&exc)) > 1e-3);
    }

    #[test]
    fn pump_resonance_rules() {
        assert_eq!(resonant_pump_detuning(2, 1, 1.0, ResonanceBranch::Plus).unwrap(), 0.0);
        assert_eq!(resonant_pump_detuning(3, 1, 1.0, ResonanceBranch::Minus).unwrap(), 0.0);
        // N ω_P = N ω + g √(N!)  ⇒  Δ_P = −g √(N!) / N
        let d22 = resonant_pump_detuning(2, 2, 1.0, ResonanceBranch::Plus).unwrap();
        assert_relative_eq!(d22, -(2f64.sqrt()) / 2.0, epsilon = 1e-15);
        let d33 = resonant_pump_detuning(3, 3, 1.0, ResonanceBranch::Minus).unwrap();
        assert_relative_eq!(d33, 6f64.sqrt() / 3.0, epsilon = 1e-15);
        assert!(resonant_pump_detuning(1, 2, 1.0, ResonanceBranch::Plus).is_err());
    }

    #[test]
    fn disorder_scales_couplings() {
        let p = ModelParams::resonant_symmetric();
        assert_eq!(apply_disorder(&p, 0.0, 0.0), p);
        let q = apply_disorder(&p, 0.1, 0.0);
        assert_relative_eq!(q.g_a, 1.1, epsilon = 1e-15);
        assert_eq!(q.g_b, 1.0);
        assert_eq!(q.omega0, p.omega0);
        assert_eq!(apply_disorder(&p, -1.0, 0.0).g_a, 0.0);
    }

    #[test]
    fn disorder_shifts_only_the_interaction() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let p = ModelParams::resonant_symmetric();
        let delta = 0.23;
        let h0 = build_double_jc(&p, space).unwrap();
        let h1 = build_double_jc(&apply_disorder(&p, delta, delta), space).unwrap();
        let v = interaction_part(&p, space).unwrap();
        let diff = h1.matrix() - h0.matrix() - v.matrix() * Complex64::new(delta, 0.0);
        assert!(max_abs(&diff) < 1e-14);
    }

    #[test]
    fn swapping_sides_conjugates_by_permutation() {
        let space = HilbertSpace::new(3, 4).unwrap();
        let p = ModelParams { g_a: 0.6, g_b: 1.0, omega0: 2.0, n_photon: 2, omega: 1.0 };
        let swapped_p = ModelParams { g_a: p.g_b, g_b: p.g_a, ..p };
        let h = build_multiphoton_double_jc(&p, space).unwrap();
        let hs = build_multiphoton_double_jc(&swapped_p, space.swapped()).unwrap();
        let perm = swap_permutation(space);
        let conj = &perm * h.matrix() * perm.adjoint();
        assert!(max_abs(&(conj - hs.matrix())) < 1e-14);
    }

    #[test]
    fn initial_states_are_normalized_pure() {
        let space = HilbertSpace::symmetric(3).unwrap();
        for case in [InitialCase::NoSuddenDeath, InitialCase::SuddenDeath] {
            let rho = initial_state(&InitialStateSpec { alpha: PI / 6.0, case }, space).unwrap();
            rho.validate().unwrap();
            assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        }
        let spec = InitialStateSpec { alpha: PI / 6.0, case: InitialCase::NoSuddenDeath };
        let rho = initial_state(&spec, space).unwrap();
        let le = idx(space, GROUND, 0, EXCITED, 0);
        let el = idx(space, EXCITED, 0, GROUND, 0);
        assert_relative_eq!(rho.matrix()[(le, le)].re, 0.25, epsilon = 1e-15);
        assert_relative_eq!(rho.matrix()[(el, el)].re, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn sides_sum_to_full_hamiltonian() {
        let space = HilbertSpace::new(4, 5).unwrap();
        let p = ModelParams { g_a: 0.8, omega0: 2.1, n_photon: 2, ..ModelParams::resonant_symmetric() };
        let d = DriveParams { epsilon: 0.03, chi: 0.4, m_order: 1, delta_p: 0.2 };
        for drive in [None, Some(&d)] {
            let full = match drive {
                None => build_multiphoton_double_jc(&p, space).unwrap(),
                Some(d) => build_driven_double_jc(&p, d, space).unwrap(),
            };
            let a = build_side(&p, drive, Side::A, space).unwrap();
            let b = build_side(&p, drive, Side::B, space).unwrap();
            assert!(max_abs(&(full.matrix() - (&a + &b).matrix())) < 1e-14);
            // the two sides act on disjoint factors
            assert!(max_abs(&a.commutator(&b)) < 1e-12);
        }
    }

    #[test]
    fn model_param_validation() {
        assert!(ModelParams::resonant_symmetric().validate().is_ok());
        assert!(ModelParams { g_b: 0.0, ..ModelParams::resonant_symmetric() }.validate().is_err());
        assert!(ModelParams { g_a: -0.1, ..ModelParams::resonant_symmetric() }.validate().is_err());
        assert!(ModelParams { n_photon: 0, ..ModelParams::resonant_symmetric() }.validate().is_err());
        let p = ModelParams { omega0: 3.0, n_photon: 3, ..ModelParams::resonant_symmetric() };
        assert!(p.is_multiphoton_resonant());
        assert!(!p.is_linear_resonant());
    }
}
