//! A fully specified physical experiment and its single-realization run.
//!
//! Two routes compute the same concurrence trace. The full route integrates
//! the density matrix of both pairs. The factorized route uses that the pairs
//! never interact and every noise channel is local: the evolution map is a
//! product `Φ_A ⊗ Φ_B`, so each pair is propagated on its own from the
//! atomic operators `|i,0⟩⟨k,0|` and the reduced atomic blocks recombined.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entanglement::{concurrence, reduce_to_atoms, CMatrix4, ConcurrenceTrace, TraceMeta, TwoQubitState};
use crate::error::{Error, Result};
use crate::hilbert::{BasisState, CMatrix, HilbertSpace, Operator, EXCITED, GROUND};
use crate::lindblad::{
    check_tracked, collapse_catalog, evolve_observed, propagate, Diagnostics, EvolveOptions, Generator, NoiseRates,
    TimeGrid, POSITIVITY_LIMIT, TAIL_LIMIT, TRACE_LIMIT,
};
use crate::models::{
    atomic_amplitudes, build_driven_double_jc, build_multiphoton_double_jc, build_side, initial_state, DriveParams,
    InitialStateSpec, ModelParams, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Reference route over the full two-pair density matrix.
    Full,
    #[default]
    Factorized,
}

/// Cavity cutoff used first when the dynamics can add excitations.
pub const OPEN_SECTOR_CUTOFF: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub model: ModelParams,
    pub drive: Option<DriveParams>,
    pub noise: NoiseRates,
    pub initial: InitialStateSpec,
    pub grid: TimeGrid,
    /// Fock levels kept per cavity; `None` picks one from the dynamics.
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub route: Route,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: ConcurrenceTrace,
    pub diagnostics: Diagnostics,
    pub cutoff: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(d) = &self.drive {
            d.validate()?;
        }
        self.noise.validate()?;
        self.grid.validate()?;
        if let Some(c) = self.cutoff {
            if c < 2 {
                return Err(Error::InvalidDimension { dim: c, reason: "Fock cutoff must be at least 2" });
            }
        }
        Ok(())
    }

    /// No pump and no thermal gain: the excitation number can only fall, so
    /// a cutoff above the initial excitation represents the dynamics exactly.
    pub fn conserves_sectors(&self) -> bool {
        self.drive.is_none() && self.noise.is_excitation_lowering()
    }

    /// Each atom carries at most one excitation, worth N photons.
    pub fn default_cutoff(&self) -> usize {
        let exact = self.model.n_photon as usize + 2;
        if self.conserves_sectors() {
            exact
        } else {
            OPEN_SECTOR_CUTOFF.max(exact)
        }
    }

    pub fn hamiltonian(&self, model: &ModelParams, space: HilbertSpace) -> Result<Operator> {
        match &self.drive {
            Some(d) => build_driven_double_jc(model, d, space),
            None => build_multiphoton_double_jc(model, space),
        }
    }

    /// Short stable digest of the scenario.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn simulate(&self) -> Result<Simulation> {
        self.simulate_model(&self.model)
    }

    /// Runs the scenario with `model` in place of the nominal parameters while
    /// keeping the nominal `G_B` as the time unit.
    ///
    /// Without a fixed cutoff, a run that leaks past the automatic cutoff is
    /// repeated once with twice as many Fock levels.
    pub fn simulate_model(&self, model: &ModelParams) -> Result<Simulation> {
        self.validate()?;
        let run = |cutoff| match self.route {
            Route::Full => self.simulate_full(model, cutoff),
            Route::Factorized => self.simulate_factorized(model, cutoff),
        };
        match self.cutoff {
            Some(c) => run(c),
            None => {
                let first = self.default_cutoff();
                match run(first) {
                    Err(Error::Truncation { .. }) => run(2 * first),
                    other => other,
                }
            }
        }
    }

    fn options(&self) -> EvolveOptions {
        EvolveOptions {
            g_ref: self.model.g_b,
            tail_limit: if self.conserves_sectors() { None } else { Some(TAIL_LIMIT) },
            ..EvolveOptions::default()
        }
    }

    fn trace(&self, values: Vec<f64>) -> ConcurrenceTrace {
        ConcurrenceTrace {
            times: self.grid.raw_times(self.model.g_b),
            scaled_times: self.grid.scaled_times(),
            values,
            meta: TraceMeta {
                scenario_hash: self.hash(),
                seed: None,
                realizations: 1,
            },
        }
    }

    fn simulate_full(&self, model: &ModelParams, cutoff: usize) -> Result<Simulation> {
        let space = HilbertSpace::symmetric(cutoff)?;
        let h = self.hamiltonian(model, space)?;
        let terms = collapse_catalog(&self.noise, space)?;
        let rho0 = initial_state(&self.initial, space)?;
        let mut values = Vec::with_capacity(self.grid.n_samples);
        let diagnostics = evolve_observed(&h, &terms, &rho0, &self.grid, &self.options(), |_, _, rho| {
            values.push(concurrence(&reduce_to_atoms(rho))?);
            Ok(())
        })?;
        Ok(Simulation {
            trace: self.trace(values),
            diagnostics,
            cutoff,
        })
    }

    fn simulate_factorized(&self, model: &ModelParams, cutoff: usize) -> Result<Simulation> {
        let (blocks_a, mut diagnostics) = self.propagate_side(model, Side::A, cutoff)?;
        let (blocks_b, diag_b) = self.propagate_side(model, Side::B, cutoff)?;
        let support = diagnostics.support_size + diag_b.support_size;
        diagnostics.merge(&diag_b);
        diagnostics.support_size = support;
        let amps = atomic_amplitudes(&self.initial);
        let mut values = Vec::with_capacity(self.grid.n_samples);
        for (k, (ra, rb)) in blocks_a.iter().zip(&blocks_b).enumerate() {
            let rho = recombine(&amps, ra, rb);
            let trace_dev = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
            let min_eig = rho.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
            let t = self.grid.raw_times(self.model.g_b)[k];
            if trace_dev > TRACE_LIMIT {
                return Err(Error::Validation(format!("atomic trace deviation {trace_dev:e} at t = {t}")));
            }
            if min_eig < -POSITIVITY_LIMIT {
                return Err(Error::Validation(format!("negative atomic eigenvalue {min_eig:e} at t = {t}")));
            }
            values.push(concurrence(&TwoQubitState(rho))?);
        }
        Ok(Simulation {
            trace: self.trace(values),
            diagnostics,
            cutoff,
        })
    }

    /// Reduced atomic blocks `Tr_cav Φ(|i,0⟩⟨k,0|)` of one pair at every
    /// sample, indexed `[i][k]`. The other pair is held in its ground state,
    /// on which its own terms have no effect.
    fn propagate_side(&self, model: &ModelParams, side: Side, cutoff: usize) -> Result<(Vec<SideBlocks>, Diagnostics)> {
        let frozen = model.n_photon as usize + 2;
        let space = match side {
            Side::A => HilbertSpace::new(cutoff, frozen)?,
            Side::B => HilbertSpace::new(frozen, cutoff)?,
        };
        let h = build_side(model, self.drive.as_ref(), side, space)?;
        let terms = collapse_catalog(&local_noise(&self.noise, side), space)?;
        let index = |atom: usize, photons: usize| {
            let (active, idle) = ((atom, photons), (GROUND, 0));
            let ((atom_a, photons_a), (atom_b, photons_b)) = match side {
                Side::A => (active, idle),
                Side::B => (idle, active),
            };
            space.index(BasisState { atom_a, photons_a, atom_b, photons_b })
        };
        let unit = |i: usize, k: usize| {
            let mut m = CMatrix::zeros(space.dim(), space.dim());
            m[(index(i, 0), index(k, 0))] = Complex64::new(1.0, 0.0);
            m
        };
        let reduce = |generator: &Generator, y: &[Complex64]| {
            Matrix2::from_fn(|a, b| (0..cutoff).map(|n| generator.element(y, index(a, n), index(b, n))).sum())
        };
        let opts = self.options();
        let last = self.grid.n_samples - 1;
        let mut blocks = vec![[[Matrix2::zeros(); 2]; 2]; self.grid.n_samples];
        let mut diagnostics: Option<Diagnostics> = None;
        for atom in [EXCITED, GROUND] {
            let x0 = unit(atom, atom);
            let generator = Generator::new(&h, &terms, &x0)?;
            let mut diag = Diagnostics::empty(generator.support_size());
            let stats = propagate(&generator, &x0, &self.grid, &opts, true, |k, t, y| {
                let exact = opts.eigen_stride > 0 && (k % opts.eigen_stride == 0 || k == last);
                check_tracked(&generator, y, space, t, &opts, exact, &mut diag)?;
                blocks[k][atom][atom] = reduce(&generator, y);
                Ok(())
            })?;
            diag.accepted_steps = stats.accepted;
            diag.rejected_steps = stats.rejected;
            match diagnostics.as_mut() {
                Some(d) => {
                    let support = d.support_size + diag.support_size;
                    d.merge(&diag);
                    d.support_size = support;
                }
                None => diagnostics = Some(diag),
            }
        }
        let x0 = unit(EXCITED, GROUND);
        let generator = Generator::new(&h, &terms, &(&x0 + x0.adjoint()))?;
        let stats = propagate(&generator, &x0, &self.grid, &opts, false, |k, _, y| {
            let r = reduce(&generator, y);
            blocks[k][EXCITED][GROUND] = r;
            blocks[k][GROUND][EXCITED] = r.adjoint();
            Ok(())
        })?;
        let mut diagnostics = diagnostics.expect("two diagonal inputs were propagated");
        diagnostics.accepted_steps += stats.accepted;
        diagnostics.rejected_steps += stats.rejected;
        diagnostics.support_size += generator.support_size();
        Ok((blocks, diagnostics))
    }
}

/// `[i][k]` → reduced atomic block of one pair.
type SideBlocks = [[Matrix2<Complex64>; 2]; 2];

fn local_noise(noise: &NoiseRates, side: Side) -> NoiseRates {
    match side {
        Side::A => NoiseRates { kappa_b: 0.0, gamma_b: 0.0, gamma_phi_b: 0.0, ..*noise },
        Side::B => NoiseRates { kappa_a: 0.0, gamma_a: 0.0, gamma_phi_a: 0.0, ..*noise },
    }
}

/// `ρ = Σ c_ij c_kl R_A^{ik} ⊗ R_B^{jl}` for real amplitudes `c`.
fn recombine(amps: &[f64; 4], ra: &SideBlocks, rb: &SideBlocks) -> CMatrix4 {
    let mut rho = CMatrix4::zeros();
    for (ij, &c_ij) in amps.iter().enumerate() {
        for (kl, &c_kl) in amps.iter().enumerate() {
            let w = c_ij * c_kl;
            if w == 0.0 {
                continue;
            }
            let (block_a, block_b) = (&ra[ij / 2][kl / 2], &rb[ij % 2][kl % 2]);
            for r in 0..4 {
                for c in 0..4 {
                    rho[(r, c)] += block_a[(r / 2, c / 2)] * block_b[(r % 2, c % 2)] * w;
                }
            }
        }
    }
    rho
}
