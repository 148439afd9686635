//! Markovian master-equation dynamics.
//!
//! `dρ/dt = −i[H, ρ] + Σ_n ½(2 C_n ρ C_n† − ρ C_n† C_n − C_n† C_n ρ)`
//!
//! [`rhs`] is the dense reference form of the generator. [`evolve`] compiles
//! the same generator into a sparse superoperator restricted to the matrix
//! elements reachable from the initial state and integrates it with an
//! embedded Runge-Kutta pair.

mod generator;
mod integrator;
mod oracle;

pub use generator::Generator;
pub use integrator::{Dopri5, StepStats, Tolerances};
pub use oracle::{expm_oracle, ORACLE_MAX_DIM};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{embed, fock_destroy, qubit_ops, CMatrix, DensityMatrix, Factor, HilbertSpace, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseRates {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_phi_a: f64,
    pub gamma_phi_b: f64,
    /// Mean thermal photon number of both cavity baths.
    pub n_th: f64,
}

impl NoiseRates {
    pub fn clean() -> Self {
        Self::default()
    }

    /// Same rates on both sides.
    pub fn symmetric(kappa: f64, gamma: f64, gamma_phi: f64, n_th: f64) -> Self {
        Self {
            kappa_a: kappa,
            kappa_b: kappa,
            gamma_a: gamma,
            gamma_b: gamma,
            gamma_phi_a: gamma_phi,
            gamma_phi_b: gamma_phi,
            n_th,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("gamma_phi_a", self.gamma_phi_a),
            ("gamma_phi_b", self.gamma_phi_b),
            ("n_th", self.n_th),
        ];
        for (field, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be a nonnegative finite number, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// True when no channel can raise the excitation number.
    pub fn is_excitation_lowering(&self) -> bool {
        self.n_th == 0.0 || (self.kappa_a == 0.0 && self.kappa_b == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    PhotonLoss,
    ThermalGain,
    AtomicDecay,
    Dephasing,
}

/// One dissipation channel `C = √rate · A`.
#[derive(Debug, Clone)]
pub struct CollapseTerm {
    pub channel: Channel,
    pub site: Factor,
    pub rate: f64,
    /// Bare coupling operator `A`, embedded in the full space.
    pub operator: Operator,
    /// `√rate · A`.
    pub collapse: Operator,
}

impl CollapseTerm {
    pub fn new(channel: Channel, site: Factor, rate: f64, operator: Operator) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "rate",
                reason: format!("collapse rate must be nonnegative, got {rate}"),
            });
        }
        let collapse = &operator * Complex64::new(rate.sqrt(), 0.0);
        Ok(Self {
            channel,
            site,
            rate,
            operator,
            collapse,
        })
    }
}

/// Cavity loss and thermal gain per cavity, decay and dephasing per atom.
/// Channels with zero rate are left out.
pub fn collapse_catalog(rates: &NoiseRates, space: HilbertSpace) -> Result<Vec<CollapseTerm>> {
    rates.validate()?;
    let q = qubit_ops();
    let mut terms = Vec::new();
    for (site, kappa) in [(Factor::CavA, rates.kappa_a), (Factor::CavB, rates.kappa_b)] {
        let a = fock_destroy(space.factor_dim(site))?;
        let loss = kappa * (1.0 + rates.n_th);
        let gain = kappa * rates.n_th;
        if loss > 0.0 {
            terms.push(CollapseTerm::new(Channel::PhotonLoss, site, loss, embed(&a, site, space)?)?);
        }
        if gain > 0.0 {
            terms.push(CollapseTerm::new(Channel::ThermalGain, site, gain, embed(&a.adjoint(), site, space)?)?);
        }
    }
    for (site, gamma, gamma_phi) in [
        (Factor::AtomA, rates.gamma_a, rates.gamma_phi_a),
        (Factor::AtomB, rates.gamma_b, rates.gamma_phi_b),
    ] {
        if gamma > 0.0 {
            terms.push(CollapseTerm::new(Channel::AtomicDecay, site, gamma, embed(&q.sigma_minus, site, space)?)?);
        }
        if gamma_phi > 0.0 {
            terms.push(CollapseTerm::new(Channel::Dephasing, site, gamma_phi, embed(&q.sigma_3, site, space)?)?);
        }
    }
    Ok(terms)
}

/// Dense right-hand side of the master equation.
pub fn rhs(h: &Operator, terms: &[CollapseTerm], rho: &CMatrix) -> Result<CMatrix> {
    let dim = h.dim();
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::Layout(format!(
            "state is {}x{} but the Hamiltonian has dimension {dim}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    let hm = h.matrix();
    let mut out = (hm * rho - rho * hm) * minus_i;
    for term in terms {
        let c = term.collapse.matrix();
        if c.nrows() != dim {
            return Err(Error::Layout("collapse operator dimension mismatch".into()));
        }
        let cd = c.adjoint();
        let cdc = &cd * c;
        out += c * rho * &cd - (rho * &cdc + &cdc * rho) * half;
    }
    Ok(out)
}

/// Output sampling and integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Final time in units of 2π/G_B.
    pub t_end: f64,
    pub n_samples: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    1e-8
}

fn default_atol() -> f64 {
    1e-10
}

impl TimeGrid {
    pub fn new(t_end: f64, n_samples: usize) -> Self {
        Self {
            t_end,
            n_samples,
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "t_end",
                reason: format!("must be positive, got {}", self.t_end),
            });
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter {
                field: "n_samples",
                reason: format!("need at least 2 samples, got {}", self.n_samples),
            });
        }
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "rtol",
                reason: "integrator tolerances must be positive".into(),
            });
        }
        Ok(())
    }

    /// Uniform samples of scaled time `G_B t / 2π` on `[0, t_end]`.
    pub fn scaled_times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples).map(|k| self.t_end * k as f64 / last).collect()
    }

    /// Raw times for a reference coupling `g_ref`.
    pub fn raw_times(&self, g_ref: f64) -> Vec<f64> {
        self.scaled_times()
            .into_iter()
            .map(|s| s * std::f64::consts::TAU / g_ref)
            .collect()
    }
}

pub const TRACE_LIMIT: f64 = 1e-7;
pub const POSITIVITY_LIMIT: f64 = 1e-7;
pub const TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Reference coupling that converts scaled time to raw time.
    pub g_ref: f64,
    /// Maximum population allowed in the two highest Fock levels of each
    /// cavity. `None` skips the check, e.g. when the dynamics cannot leave
    /// the represented excitation sectors.
    pub tail_limit: Option<f64>,
    pub max_steps: usize,
    /// Exact spectra are computed every `eigen_stride` samples and at the
    /// last one; positivity is certified at every sample regardless. Zero
    /// disables the exact spectra.
    pub eigen_stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            g_ref: 1.0,
            tail_limit: Some(TAIL_LIMIT),
            max_steps: 10_000_000,
            eigen_stride: 10,
        }
    }
}

impl EvolveOptions {
    pub fn without_tail_check(self) -> Self {
        Self {
            tail_limit: None,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_trace_deviation: f64,
    /// Smallest eigenvalue over the samples whose spectrum was computed.
    pub min_eigenvalue: f64,
    pub max_tail_population: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub support_size: usize,
}

impl Diagnostics {
    /// Diagnostics before any sample has been checked.
    pub fn empty(support_size: usize) -> Self {
        Self {
            max_trace_deviation: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_tail_population: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
            support_size,
        }
    }

    /// Worst case over several runs.
    pub fn merge(&mut self, other: &Diagnostics) {
        self.max_trace_deviation = self.max_trace_deviation.max(other.max_trace_deviation);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.max_tail_population = self.max_tail_population.max(other.max_tail_population);
        self.accepted_steps += other.accepted_steps;
        self.rejected_steps += other.rejected_steps;
        self.support_size = self.support_size.max(other.support_size);
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Diagnostics,
}

/// Integrates the master equation and returns every sampled state.
pub fn evolve(
    h: &Operator,
    terms: &[CollapseTerm],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let mut times = Vec::with_capacity(grid.n_samples);
    let mut states = Vec::with_capacity(grid.n_samples);
    let diagnostics = evolve_observed(h, terms, rho0, grid, opts, |_, t, rho| {
        times.push(t);
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        states,
        diagnostics,
    })
}

/// Integrates the master equation, handing each sampled state to `observer`
/// instead of storing it.
pub fn evolve_observed<F>(
    h: &Operator,
    terms: &[CollapseTerm],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
    mut observer: F,
) -> Result<Diagnostics>
where
    F: FnMut(usize, f64, &DensityMatrix) -> Result<()>,
{
    grid.validate()?;
    rho0.validate()?;
    if rho0.space() != h.space() {
        return Err(Error::Layout("initial state and Hamiltonian live on different spaces".into()));
    }
    let space = h.space();
    let generator = Generator::new(h, terms, rho0.matrix())?;
    let mut diag = Diagnostics::empty(generator.support_size());
    let last = grid.n_samples - 1;
    let stats = propagate(&generator, rho0.matrix(), grid, opts, true, |k, t, y| {
        let exact = opts.eigen_stride > 0 && (k % opts.eigen_stride == 0 || k == last);
        check_tracked(&generator, y, space, t, opts, exact, &mut diag)?;
        observer(k, t, &DensityMatrix::from_matrix(space, generator.scatter(y))?)
    })?;
    diag.accepted_steps = stats.accepted;
    diag.rejected_steps = stats.rejected;
    Ok(diag)
}

/// Integrates `dX/dt = L(X)` for an arbitrary operator `x0` on the support of
/// `generator`, passing the tracked elements at every sample time.
///
/// With `hermitian` the elements are re-symmetrized at each sample, which is
/// only meaningful when `x0` is Hermitian.
pub fn propagate<F>(
    generator: &Generator,
    x0: &CMatrix,
    grid: &TimeGrid,
    opts: &EvolveOptions,
    hermitian: bool,
    mut observer: F,
) -> Result<StepStats>
where
    F: FnMut(usize, f64, &[Complex64]) -> Result<()>,
{
    grid.validate()?;
    let mut y = generator.gather(x0);
    let tol = Tolerances {
        rtol: grid.rtol,
        atol: grid.atol,
    };
    let mut solver = Dopri5::new(tol, opts.max_steps);
    let mut t = 0.0;
    for (k, &target) in grid.raw_times(opts.g_ref).iter().enumerate() {
        if target > t {
            solver.integrate(|x, dx| generator.apply(x, dx), &mut y, t, target)?;
            t = target;
        }
        if hermitian {
            generator.symmetrize(&mut y);
        }
        observer(k, t, &y)?;
    }
    Ok(solver.stats())
}

/// Trace, truncation and positivity checks of the state held in `y`,
/// folded into `diag`.
pub fn check_tracked(
    generator: &Generator,
    y: &[Complex64],
    space: HilbertSpace,
    t: f64,
    opts: &EvolveOptions,
    exact_spectrum: bool,
    diag: &mut Diagnostics,
) -> Result<()> {
    let trace_dev = (generator.trace(y) - Complex64::new(1.0, 0.0)).norm();
    diag.max_trace_deviation = diag.max_trace_deviation.max(trace_dev);
    if trace_dev > TRACE_LIMIT {
        return Err(Error::Validation(format!("trace deviation {trace_dev:e} at t = {t}")));
    }
    // truncation first: a state leaking past the cutoff is not worth certifying
    let tail = tail_of(space, |i| generator.element(y, i, i).re);
    diag.max_tail_population = diag.max_tail_population.max(tail);
    if let Some(limit) = opts.tail_limit {
        if tail > limit {
            return Err(Error::Truncation {
                max_tail: tail,
                limit,
                time: t,
                suggested_cutoff: 2 * space.cutoff_a().max(space.cutoff_b()),
            });
        }
    }
    // ρ + τI positive definite ⇔ λ_min(ρ) > −τ
    if !generator.certify_positive(y, POSITIVITY_LIMIT) {
        let min_eig = generator.min_eigenvalue(y);
        diag.min_eigenvalue = diag.min_eigenvalue.min(min_eig);
        return Err(Error::Validation(format!("negative eigenvalue {min_eig:e} at t = {t}")));
    }
    if exact_spectrum {
        diag.min_eigenvalue = diag.min_eigenvalue.min(generator.min_eigenvalue(y));
    }
    Ok(())
}

fn tail_of(space: HilbertSpace, population: impl Fn(usize) -> f64) -> f64 {
    let (mut tail_a, mut tail_b) = (0.0, 0.0);
    for i in 0..space.dim() {
        let s = space.state(i);
        let p = population(i);
        if s.photons_a + 2 >= space.cutoff_a() {
            tail_a += p;
        }
        if s.photons_b + 2 >= space.cutoff_b() {
            tail_b += p;
        }
    }
    f64::max(tail_a, tail_b)
}

/// Largest population held by the two highest Fock levels of either cavity.
pub fn tail_population(rho: &DensityMatrix) -> f64 {
    tail_of(rho.space(), |i| rho.matrix()[(i, i)].re)
}
