//! Atom-atom concurrence and sudden-death detection.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{BasisState, DensityMatrix, HERMITIAN_TOL};

pub type CMatrix4 = Matrix4<Complex64>;

/// Reduced state of the two atoms in the basis (|ee⟩, |el⟩, |le⟩, |ll⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(pub CMatrix4);

impl TwoQubitState {
    pub fn matrix(&self) -> &CMatrix4 {
        &self.0
    }

    /// |ψ⟩⟨ψ| for amplitudes on (|ee⟩, |el⟩, |le⟩, |ll⟩).
    pub fn pure(amps: [Complex64; 4]) -> Self {
        let v = nalgebra::Vector4::from(amps);
        Self(v * v.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

/// Partial trace over both cavities.
pub fn reduce_to_atoms(rho: &DensityMatrix) -> TwoQubitState {
    let space = rho.space();
    let m = rho.matrix();
    let mut out = CMatrix4::zeros();
    for atoms_row in 0..4 {
        for atoms_col in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for na in 0..space.cutoff_a() {
                for nb in 0..space.cutoff_b() {
                    let r = space.index(BasisState {
                        atom_a: atoms_row / 2,
                        photons_a: na,
                        atom_b: atoms_row % 2,
                        photons_b: nb,
                    });
                    let c = space.index(BasisState {
                        atom_a: atoms_col / 2,
                        photons_a: na,
                        atom_b: atoms_col % 2,
                        photons_b: nb,
                    });
                    acc += m[(r, c)];
                }
            }
            out[(atoms_row, atoms_col)] = acc;
        }
    }
    TwoQubitState(out)
}

fn sigma_y_sigma_y() -> CMatrix4 {
    let one = Complex64::new(1.0, 0.0);
    let mut m = CMatrix4::zeros();
    m[(0, 3)] = -one;
    m[(1, 2)] = one;
    m[(2, 1)] = one;
    m[(3, 0)] = -one;
    m
}

/// ρ̃ = (σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)
pub fn spin_flip(rho: &TwoQubitState) -> CMatrix4 {
    let yy = sigma_y_sigma_y();
    yy * rho.0.conjugate() * yy
}

fn check_hermitian(rho: &TwoQubitState) -> Result<()> {
    let dev = (rho.0 - rho.0.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if dev > HERMITIAN_TOL.max(1e-9 * rho.0.norm()) {
        return Err(Error::Validation(format!("two-qubit state is not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

fn wootters(mut roots: [f64; 4]) -> f64 {
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0)
}

/// Square roots of the eigenvalues of ρρ̃.
///
/// With ρ = A A† from the eigendecomposition, those roots are the singular
/// values of the complex-symmetric matrix `Aᵀ (σ_y ⊗ σ_y) A`. Working with
/// singular values keeps round-off in near-zero eigenvalues of ρ from
/// entering the roots at square-root magnitude.
pub fn spin_flip_roots(rho: &TwoQubitState) -> [f64; 4] {
    let herm = (rho.0 + rho.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let weights = eig.eigenvalues.map(|p| Complex64::new(p.max(0.0).sqrt(), 0.0));
    let a = eig.eigenvectors * CMatrix4::from_diagonal(&weights);
    let tau = a.transpose() * sigma_y_sigma_y() * a;
    let sv = tau.singular_values();
    [sv[0], sv[1], sv[2], sv[3]]
}

/// Wootters concurrence `max{0, √λ1 − √λ2 − √λ3 − √λ4}`.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    check_hermitian(rho)?;
    Ok(wootters(spin_flip_roots(rho)))
}

/// Same quantity from a general eigensolver applied directly to ρρ̃, with
/// negative or complex round-off clamped to the nonnegative real axis.
pub fn concurrence_general(rho: &TwoQubitState) -> Result<f64> {
    check_hermitian(rho)?;
    let product = rho.0 * spin_flip(rho);
    let ev = product
        .eigenvalues()
        .ok_or_else(|| Error::Validation("eigenvalues of ρρ̃ did not converge".into()))?;
    Ok(wootters([0, 1, 2, 3].map(|i| ev[i].re.max(0.0).sqrt())))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceMeta {
    pub scenario_hash: String,
    pub seed: Option<u64>,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceTrace {
    pub times: Vec<f64>,
    /// `G_B t / 2π`
    pub scaled_times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: TraceMeta,
}

impl ConcurrenceTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the sample nearest to the given scaled time.
    pub fn at_scaled(&self, s: f64) -> Option<f64> {
        let k = self
            .scaled_times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))?
            .0;
        Some(self.values[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EsdKind {
    Death,
    Revival,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsdEvent {
    pub kind: EsdKind,
    pub time: f64,
    pub scaled_time: f64,
    /// One-sided finite difference on the earlier side of the transition.
    pub pre_slope: f64,
    /// One-sided finite difference on the later side.
    pub post_slope: f64,
}

pub const ESD_THRESHOLD: f64 = 1e-6;
/// Samples a trace must stay at or below the threshold to count as dead.
pub const ESD_PERSISTENCE: usize = 3;
const MIN_TRACE_LEN: usize = 5;

fn slope(trace: &ConcurrenceTrace, from: usize, to: usize) -> f64 {
    if to >= trace.len() || from >= trace.len() || from == to {
        return 0.0;
    }
    (trace.values[to] - trace.values[from]) / (trace.times[to] - trace.times[from])
}

fn crossing(trace: &ConcurrenceTrace, before: usize, after: usize, threshold: f64) -> (f64, f64) {
    let (v0, v1) = (trace.values[before], trace.values[after]);
    let frac = if v1 != v0 { ((threshold - v0) / (v1 - v0)).clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |xs: &[f64]| xs[before] + frac * (xs[after] - xs[before]);
    (lerp(&trace.times), lerp(&trace.scaled_times))
}

/// Finds entanglement sudden deaths and revivals.
///
/// A death at sample `k` needs `C[k−1] > threshold ≥ C[k]` with the trace
/// staying at or below the threshold for at least three samples from `k`.
/// A revival mirrors it: three or more dead samples up to `k−1`, then
/// `C[k] > threshold`.
pub fn detect_events(trace: &ConcurrenceTrace, threshold: f64) -> Result<Vec<EsdEvent>> {
    let n = trace.len();
    if n < MIN_TRACE_LEN {
        return Err(Error::TraceTooShort { len: n, min: MIN_TRACE_LEN });
    }
    let dead: Vec<bool> = trace.values.iter().map(|v| *v <= threshold).collect();
    let dead_run = |from: usize, to: usize| (from..to).all(|i| dead[i]);
    let mut events = Vec::new();
    for k in 1..n {
        if !dead[k - 1] && dead[k] && k + ESD_PERSISTENCE <= n && dead_run(k, k + ESD_PERSISTENCE) {
            let (time, scaled_time) = crossing(trace, k - 1, k, threshold);
            events.push(EsdEvent {
                kind: EsdKind::Death,
                time,
                scaled_time,
                pre_slope: if k >= 2 { slope(trace, k - 2, k - 1) } else { slope(trace, k - 1, k) },
                post_slope: slope(trace, k, k + 1),
            });
        }
        if dead[k - 1] && !dead[k] && k >= ESD_PERSISTENCE && dead_run(k - ESD_PERSISTENCE, k) {
            let (time, scaled_time) = crossing(trace, k - 1, k, threshold);
            events.push(EsdEvent {
                kind: EsdKind::Revival,
                time,
                scaled_time,
                pre_slope: slope(trace, k - 2, k - 1),
                post_slope: if k + 1 < n { slope(trace, k, k + 1) } else { slope(trace, k - 1, k) },
            });
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{HilbertSpace, EXCITED, GROUND};
    use crate::models::{initial_state, InitialCase, InitialStateSpec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_unitary2(rng: &mut ChaCha8Rng) -> nalgebra::Matrix2<Complex64> {
        let m = nalgebra::Matrix2::<Complex64>::from_fn(|_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        m.qr().q()
    }

    fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
        let a = CMatrix4::from_fn(|_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = a * a.adjoint();
        let tr = rho.trace();
        TwoQubitState(rho / tr)
    }

    fn kron2(u: &nalgebra::Matrix2<Complex64>, v: &nalgebra::Matrix2<Complex64>) -> CMatrix4 {
        CMatrix4::from_fn(|r, col| u[(r / 2, col / 2)] * v[(r % 2, col % 2)])
    }

    fn werner(p: f64) -> TwoQubitState {
        let s = 0.5f64.sqrt();
        let phi = TwoQubitState::pure([c(s), c(0.0), c(0.0), c(s)]);
        TwoQubitState(phi.0 * c(p) + CMatrix4::identity() * c((1.0 - p) / 4.0))
    }

    #[test]
    fn bell_and_product_states() {
        let s = 0.5f64.sqrt();
        let bell = TwoQubitState::pure([c(0.0), c(s), c(s), c(0.0)]);
        assert_relative_eq!(concurrence(&bell).unwrap(), 1.0, epsilon = 1e-10);
        let product = TwoQubitState::pure([c(0.6), c(0.8), c(0.0), c(0.0)]);
        assert!(concurrence(&product).unwrap() < 1e-7);
    }

    #[test]
    fn tilted_state_concurrence() {
        let alpha = PI / 6.0;
        let rho = TwoQubitState::pure([c(0.0), c(alpha.cos()), c(alpha.sin()), c(0.0)]);
        assert_relative_eq!(concurrence(&rho).unwrap(), 0.866025403784, epsilon = 1e-9);
    }

    #[test]
    fn werner_state_by_brute_force() {
        // Oracle: characteristic-polynomial-free route through the general
        // eigensolver of ρρ̃, compared with the closed form (3p − 1)/2.
        for &p in &[0.0, 0.2, 1.0 / 3.0, 0.6, 0.9, 1.0] {
            let rho = werner(p);
            let expect = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert_relative_eq!(concurrence_general(&rho).unwrap(), expect, epsilon = 1e-7);
            assert_relative_eq!(concurrence(&rho).unwrap(), expect, epsilon = 1e-9);
        }
        assert_relative_eq!(concurrence(&werner(0.6)).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut m = CMatrix4::identity() * c(0.25);
        m[(0, 1)] = c(0.1);
        assert!(matches!(concurrence(&TwoQubitState(m)), Err(Error::Validation(_))));
    }

    #[test]
    fn reduce_product_with_vacuum() {
        let space = HilbertSpace::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let atoms = random_state(&mut rng);
        let mut full = crate::hilbert::CMatrix::zeros(space.dim(), space.dim());
        for r in 0..4 {
            for col in 0..4 {
                let i = space.index(BasisState { atom_a: r / 2, photons_a: 0, atom_b: r % 2, photons_b: 0 });
                let j = space.index(BasisState { atom_a: col / 2, photons_a: 0, atom_b: col % 2, photons_b: 0 });
                full[(i, j)] = atoms.0[(r, col)];
            }
        }
        let rho = DensityMatrix::from_matrix(space, full).unwrap();
        let reduced = reduce_to_atoms(&rho);
        assert!((reduced.0 - atoms.0).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn reduce_maximally_mixed() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let reduced = reduce_to_atoms(&DensityMatrix::maximally_mixed(space));
        assert!((reduced.0 - CMatrix4::identity() * c(0.25)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn reduce_initial_state() {
        let space = HilbertSpace::symmetric(3).unwrap();
        let alpha = PI / 6.0;
        let rho = initial_state(&InitialStateSpec { alpha, case: InitialCase::NoSuddenDeath }, space).unwrap();
        let reduced = reduce_to_atoms(&rho);
        let el = EXCITED * 2 + GROUND;
        let le = GROUND * 2 + EXCITED;
        let mut amps = [c(0.0); 4];
        amps[el] = c(alpha.cos());
        amps[le] = c(alpha.sin());
        let expect = TwoQubitState::pure(amps);
        assert!((reduced.0 - expect.0).iter().all(|z| z.norm() < 1e-15));
        assert_relative_eq!(concurrence(&reduced).unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-9);

        let product = initial_state(&InitialStateSpec { alpha: 0.0, case: InitialCase::NoSuddenDeath }, space).unwrap();
        assert!(concurrence(&reduce_to_atoms(&product)).unwrap() < 1e-7);
        let bell = initial_state(&InitialStateSpec { alpha: PI / 4.0, case: InitialCase::NoSuddenDeath }, space).unwrap();
        assert_relative_eq!(concurrence(&reduce_to_atoms(&bell)).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn hermitian_and_general_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let rho = random_state(&mut rng);
            let a = concurrence(&rho).unwrap();
            let b = concurrence_general(&rho).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> ConcurrenceTrace {
        let times: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
        ConcurrenceTrace {
            scaled_times: times.iter().map(|t| t / (2.0 * PI)).collect(),
            values: times.iter().map(|t| f(*t)).collect(),
            times,
            meta: TraceMeta::default(),
        }
    }

    #[test]
    fn detects_death_and_revival() {
        let trace = synthetic(|t| (t.cos().powi(2) - 0.25).max(0.0), PI, 1000);
        let events = detect_events(&trace, ESD_THRESHOLD).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].kind, EsdKind::Death);
        assert_eq!(events[1].kind, EsdKind::Revival);
        let dt = PI / 999.0;
        assert!((events[0].time - 0.5f64.acos()).abs() < dt);
        assert!((events[1].time - 2.0 * PI / 3.0).abs() < dt);
        // slopes inside the dead window are bounded by threshold / dt
        assert!(events[0].pre_slope < -0.1 && events[0].post_slope.abs() < 1e-3);
        assert!(events[1].pre_slope.abs() < 1e-3 && events[1].post_slope > 0.1);
    }

    #[test]
    fn no_events_without_transitions() {
        let positive = synthetic(|t| 0.5 + 0.4 * t.cos(), 10.0, 200);
        assert!(detect_events(&positive, ESD_THRESHOLD).unwrap().is_empty());
        let zero = synthetic(|_| 0.0, 10.0, 200);
        assert!(detect_events(&zero, ESD_THRESHOLD).unwrap().is_empty());
        // isolated touch of zero is not a death
        let touch = synthetic(|t| t.cos().powi(2), PI, 101);
        assert!(detect_events(&touch, ESD_THRESHOLD).unwrap().is_empty());
    }

    #[test]
    fn short_trace_is_rejected() {
        let trace = synthetic(|_| 1.0, 1.0, 4);
        assert!(matches!(detect_events(&trace, ESD_THRESHOLD), Err(Error::TraceTooShort { .. })));
    }

    proptest::proptest! {
        #[test]
        fn local_unitary_invariance(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(&mut rng);
            let (u, v) = (random_unitary2(&mut rng), random_unitary2(&mut rng));
            let w = kron2(&u, &v);
            let rotated = TwoQubitState(w * rho.0 * w.adjoint());
            let (a, b) = (concurrence(&rho).unwrap(), concurrence(&rotated).unwrap());
            proptest::prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }

        #[test]
        fn pure_state_formula(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut amps = [Complex64::new(0.0, 0.0); 4];
            for a in amps.iter_mut() {
                *a = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in amps.iter_mut() {
                *a /= norm;
            }
            let expect = 2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm();
            let got = concurrence(&TwoQubitState::pure(amps)).unwrap();
            proptest::prop_assert!((got - expect).abs() < 1e-9, "{} vs {}", got, expect);
        }
    }
}
