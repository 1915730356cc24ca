//! Ladder-system master equation.
//!
//! The Hamiltonian is `H = (ħ/2) M` with `M` the real symmetric interaction
//! matrix of a nearest-neighbour ladder, and dissipation follows a cascade in
//! which level `i` decays into level `i - 1` while every coherence `ρᵢⱼ` decays
//! at `γᵢⱼ = (Γᵢ + Γⱼ)/2`. Levels are indexed from 0 (the ground state), so the
//! probe coherence ρ₂₁ is element `(1, 0)`.
//!
//! The steady state comes from a dense LU solve of the vectorised generator
//! with the ground-population equation replaced by the trace constraint.
//! [`time_evolve`] integrates the same equation with fixed-step RK4 and is
//! kept as an independent check on that solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Rabi frequency `μĒ/ħ` in rad/s for a dipole moment (C·m) and a field
/// amplitude (V/m).
pub fn rabi_from_field(mu: f64, field: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::invalid(
            "mu",
            format!("dipole moment must be positive and finite, got {mu}"),
        ));
    }
    if !field.is_finite() || field < 0.0 {
        return Err(Error::invalid(
            "field",
            format!("field amplitude must be non-negative and finite, got {field}"),
        ));
    }
    Ok(mu * field / HBAR)
}

/// One value per applied field of the five-level ladder.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerField {
    pub probe: f64,
    pub coupling: f64,
    pub rf: f64,
    pub interference: f64,
}

impl PerField {
    pub fn new(probe: f64, coupling: f64, rf: f64, interference: f64) -> Self {
        Self {
            probe,
            coupling,
            rf,
            interference,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.probe, self.coupling, self.rf, self.interference]
    }
}

/// Dipole moments of the ladder-adjacent transitions plus the probe wavelength.
///
/// `dipoles[k]` belongs to the transition between levels `k` and `k + 1`; no
/// other pair carries a dipole moment.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScheme {
    dipoles: Vec<f64>,
    probe_wavelength: f64,
}

impl LevelScheme {
    pub fn new(dipoles: Vec<f64>, probe_wavelength: f64) -> Result<Self> {
        if dipoles.is_empty() {
            return Err(Error::invalid("dipoles", "a ladder needs at least one transition"));
        }
        for (k, &mu) in dipoles.iter().enumerate() {
            if !mu.is_finite() || mu <= 0.0 {
                return Err(Error::invalid(
                    "dipoles",
                    format!("transition {}-{} has non-positive dipole {mu}", k + 1, k + 2),
                ));
            }
        }
        if !probe_wavelength.is_finite() || probe_wavelength <= 0.0 {
            return Err(Error::invalid("probe_wavelength", "must be positive"));
        }
        Ok(Self {
            dipoles,
            probe_wavelength,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.dipoles.len() + 1
    }

    /// Dipole moment between levels `i` and `j` (0-based), `None` unless the
    /// levels are ladder neighbours.
    pub fn dipole(&self, i: usize, j: usize) -> Option<f64> {
        let lo = i.min(j);
        if i.abs_diff(j) == 1 {
            self.dipoles.get(lo).copied()
        } else {
            None
        }
    }

    pub fn dipoles(&self) -> &[f64] {
        &self.dipoles
    }

    pub fn probe_wavelength(&self) -> f64 {
        self.probe_wavelength
    }
}

/// Rabi frequencies and detunings (rad/s) of the probe, coupling, RF and
/// interference fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSet {
    pub rabi: PerField,
    pub detuning: PerField,
}

impl DriveSet {
    pub fn new(rabi: PerField, detuning: PerField) -> Result<Self> {
        for r in rabi.to_array() {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::invalid(
                    "rabi",
                    format!("Rabi frequencies must be finite and >= 0, got {r}"),
                ));
            }
        }
        for d in detuning.to_array() {
            if !d.is_finite() {
                return Err(Error::invalid("detuning", "detunings must be finite"));
            }
        }
        Ok(Self { rabi, detuning })
    }

    pub fn with_coupling_detuning(mut self, delta_c: f64) -> Self {
        self.detuning.coupling = delta_c;
        self
    }
}

/// Population decay rates `Γᵢ` (rad/s), ground state first.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySpec {
    gamma: Vec<f64>,
}

impl DecaySpec {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::invalid("gamma", "need at least two levels"));
        }
        if gamma[0] != 0.0 {
            return Err(Error::invalid("gamma", "ground-state decay rate must be exactly 0"));
        }
        if let Some(g) = gamma.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("decay rates must be finite and >= 0, got {g}"),
            ));
        }
        Ok(Self { gamma })
    }

    pub fn n_levels(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma_level(&self, i: usize) -> f64 {
        self.gamma[i]
    }

    pub fn gamma_levels(&self) -> &[f64] {
        &self.gamma
    }

    /// Decoherence rate `(Γᵢ + Γⱼ)/2`.
    pub fn gamma_pair(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.gamma[i] + self.gamma[j])
    }

    fn max_rate(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }
}

/// Real symmetric interaction matrix `M` in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix(DMatrix<f64>);

impl InteractionMatrix {
    /// Ladder matrix with `couplings[k]` between levels `k` and `k+1` and the
    /// diagonal `-2 Σ_{j<k} detunings[j]`.
    pub fn ladder(couplings: &[f64], detunings: &[f64]) -> Self {
        assert_eq!(couplings.len(), detunings.len(), "one detuning per coupling");
        let n = couplings.len() + 1;
        let mut m = DMatrix::zeros(n, n);
        let mut cumulative = 0.0;
        for k in 0..couplings.len() {
            m[(k, k + 1)] = couplings[k];
            m[(k + 1, k)] = couplings[k];
            cumulative += detunings[k];
            m[(k + 1, k + 1)] = -2.0 * cumulative;
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    fn to_complex(&self) -> CMatrix {
        self.0.map(|x| Complex64::new(x, 0.0))
    }
}

impl std::ops::Index<(usize, usize)> for InteractionMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Five-level interaction matrix for a probe/coupling/RF/interference ladder.
pub fn build_interaction_matrix(drives: &DriveSet) -> InteractionMatrix {
    InteractionMatrix::ladder(&drives.rabi.to_array(), &drives.detuning.to_array())
}

/// Hermitian unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const TOLERANCE: f64 = 1e-10;

    /// All population in level 0.
    pub fn ground(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(0, 0)] = C_ONE;
        Self(m)
    }

    /// Population entirely in `level`.
    pub fn pure_level(n: usize, level: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(level, level)] = C_ONE;
        Self(m)
    }

    /// Validates Hermiticity, unit trace and diagonal range.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("rho", "density matrix must be square"));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > Self::TOLERANCE {
                    return Err(Error::invalid("rho", format!("not Hermitian at ({i}, {j})")));
                }
            }
            let p = m[(i, i)].re;
            if !(-Self::TOLERANCE..=1.0 + Self::TOLERANCE).contains(&p) {
                return Err(Error::invalid(
                    "rho",
                    format!("population {p} at level {i} out of range"),
                ));
            }
        }
        let tr = m.trace();
        if (tr - C_ONE).norm() > Self::TOLERANCE {
            return Err(Error::invalid("rho", format!("trace {tr} differs from 1")));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Probe coherence ρ₂₁.
    pub fn rho21(&self) -> Complex64 {
        self.0[(1, 0)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// Cascade decay map `L(ρ)`, applied element by element.
pub fn decay_map(rho: &CMatrix, decays: &DecaySpec) -> CMatrix {
    let n = rho.nrows();
    assert_eq!(n, decays.n_levels(), "decay spec and density matrix dimensions differ");
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let feed = if i + 1 < n {
                decays.gamma_level(i + 1) * rho[(i + 1, i + 1)]
            } else {
                C_ZERO
            };
            feed - decays.gamma_level(i) * rho[(i, i)]
        } else {
            -decays.gamma_pair(i, j) * rho[(i, j)]
        }
    })
}

/// Right-hand side `-(i/2)(Mρ − ρM) + L(ρ)` of the master equation.
pub fn master_rhs(rho: &CMatrix, m: &InteractionMatrix, decays: &DecaySpec) -> CMatrix {
    let mc = m.to_complex();
    rhs_with(rho, &mc, decays)
}

fn rhs_with(rho: &CMatrix, mc: &CMatrix, decays: &DecaySpec) -> CMatrix {
    let minus_half_i = Complex64::new(0.0, -0.5);
    let comm = mc * rho - rho * mc;
    comm * minus_half_i + decay_map(rho, decays)
}

fn largest_rate(m: &InteractionMatrix, decays: &DecaySpec) -> f64 {
    m.max_abs().max(decays.max_rate())
}

fn check_dims(m: &InteractionMatrix, decays: &DecaySpec) -> Result<()> {
    if m.dim() != decays.n_levels() {
        return Err(Error::invalid(
            "decays",
            format!(
                "{} decay rates for a {}-level interaction matrix",
                decays.n_levels(),
                m.dim()
            ),
        ));
    }
    Ok(())
}

/// Vectorised generator (row-major `ρ`), scaled by `1/scale`. Assembled
/// directly from the index structure rather than from [`master_rhs`].
fn liouvillian(m: &InteractionMatrix, decays: &DecaySpec, scale: f64) -> CMatrix {
    let n = m.dim();
    let idx = |i: usize, j: usize| i * n + j;
    let half_i = Complex64::new(0.0, 0.5);
    let mut a = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            for k in 0..n {
                if m[(i, k)] != 0.0 {
                    a[(row, idx(k, j))] -= half_i * m[(i, k)];
                }
                if m[(k, j)] != 0.0 {
                    a[(row, idx(i, k))] += half_i * m[(k, j)];
                }
            }
            if i == j {
                a[(row, row)] -= Complex64::from(decays.gamma_level(i));
                if i + 1 < n {
                    a[(row, idx(i + 1, i + 1))] += Complex64::from(decays.gamma_level(i + 1));
                }
            } else {
                a[(row, row)] -= Complex64::from(decays.gamma_pair(i, j));
            }
        }
    }
    a.unscale_mut(scale);
    a
}

fn hermitize(mut rho: CMatrix) -> CMatrix {
    let n = rho.nrows();
    for i in 0..n {
        rho[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    rho
}

/// Relative pivot size below which the trace-constrained system is treated as
/// singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Stationary density matrix of the master equation.
pub fn steady_state(m: &InteractionMatrix, decays: &DecaySpec) -> Result<DensityMatrix> {
    check_dims(m, decays)?;
    if decays.max_rate() <= 0.0 {
        return Err(Error::NoUniqueSteadyState("all decay rates are zero".into()));
    }
    let n = m.dim();
    let scale = largest_rate(m, decays);
    let mut a = liouvillian(m, decays, scale);
    // dρ₁₁/dt is implied by the other diagonal equations; swap in Tr ρ = 1.
    a.row_mut(0).fill(C_ZERO);
    for k in 0..n {
        a[(0, k * n + k)] = C_ONE;
    }
    let mut b = DVector::zeros(n * n);
    b[0] = C_ONE;

    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..n * n {
        let p = u[(k, k)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > PIVOT_FLOOR * hi) {
        return Err(Error::NoUniqueSteadyState(format!(
            "trace-constrained generator is singular (pivot ratio {:e})",
            lo / hi
        )));
    }
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::NoUniqueSteadyState("LU solve failed".into()))?;
    let rho = CMatrix::from_fn(n, n, |i, j| x[i * n + j]);
    Ok(DensityMatrix(hermitize(rho)))
}

/// Stability bound on `step × max(|M|, Γ)` for [`time_evolve`].
pub const MAX_STEP_RATE_PRODUCT: f64 = 0.1;

/// Runs longer than this many steps are evaluated through powers of the
/// one-step propagator instead of stepping one at a time.
const DIRECT_STEP_LIMIT: u64 = 20_000;

fn rk4_step(rho: &CMatrix, mc: &CMatrix, decays: &DecaySpec, h: f64) -> CMatrix {
    let k1 = rhs_with(rho, mc, decays);
    let k2 = rhs_with(&(rho + &k1 * Complex64::from(0.5 * h)), mc, decays);
    let k3 = rhs_with(&(rho + &k2 * Complex64::from(0.5 * h)), mc, decays);
    let k4 = rhs_with(&(rho + &k3 * Complex64::from(h)), mc, decays);
    rho + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0)
}

fn check_bounded(rho: &CMatrix) -> Result<()> {
    match rho.iter().find(|z| !(z.norm() <= 2.0)) {
        Some(z) => Err(Error::StepTooLarge(format!(
            "integration diverged (|rho_ij| = {:e})",
            z.norm()
        ))),
        None => Ok(()),
    }
}

/// Fixed-step RK4 integration of the master equation from `rho0` over
/// `duration` seconds.
///
/// Each RK4 step is a fixed linear map, so long runs apply that map through
/// repeated squaring; the discrete trajectory is the same as stepping
/// `duration / step` times. The state is re-symmetrised after every applied
/// step (or block of steps).
pub fn time_evolve(
    rho0: &DensityMatrix,
    m: &InteractionMatrix,
    decays: &DecaySpec,
    duration: f64,
    step: f64,
) -> Result<DensityMatrix> {
    check_dims(m, decays)?;
    if rho0.dim() != m.dim() {
        return Err(Error::invalid(
            "rho0",
            "dimension does not match the interaction matrix",
        ));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid("step", "must be positive"));
    }
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::invalid("duration", "must be non-negative"));
    }
    let stiffness = step * largest_rate(m, decays);
    if stiffness >= MAX_STEP_RATE_PRODUCT {
        return Err(Error::StepTooLarge(format!(
            "step x max rate = {stiffness:.3} (limit {MAX_STEP_RATE_PRODUCT})"
        )));
    }

    let ratio = duration / step;
    let mut n_steps = ratio.floor() as u64;
    let mut remainder = duration - n_steps as f64 * step;
    if remainder > step * (1.0 - 1e-12) {
        n_steps += 1;
        remainder = 0.0;
    }
    if remainder < step * 1e-12 {
        remainder = 0.0;
    }

    let mc = m.to_complex();
    let mut rho = rho0.as_matrix().clone();
    if n_steps <= DIRECT_STEP_LIMIT {
        for _ in 0..n_steps {
            rho = hermitize(rk4_step(&rho, &mc, decays, step));
            check_bounded(&rho)?;
        }
    } else {
        rho = propagate_by_squaring(rho, &mc, decays, step, n_steps)?;
    }
    if remainder > 0.0 {
        rho = hermitize(rk4_step(&rho, &mc, decays, remainder));
        check_bounded(&rho)?;
    }
    Ok(DensityMatrix(rho))
}

/// Applies the one-step RK4 map `n_steps` times via binary powering of its
/// matrix representation.
fn propagate_by_squaring(
    rho: CMatrix,
    mc: &CMatrix,
    decays: &DecaySpec,
    step: f64,
    mut n_steps: u64,
) -> Result<CMatrix> {
    let n = rho.nrows();
    let dim = n * n;
    let mut prop = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut basis = CMatrix::zeros(n, n);
        basis[(c / n, c % n)] = C_ONE;
        let image = rk4_step(&basis, mc, decays, step);
        for r in 0..dim {
            prop[(r, c)] = image[(r / n, r % n)];
        }
    }
    restore_trace_preservation(&mut prop, n);

    let mut v = DVector::from_fn(dim, |r, _| rho[(r / n, r % n)]);
    while n_steps > 0 {
        if n_steps & 1 == 1 {
            v = &prop * v;
            let m = hermitize(CMatrix::from_fn(n, n, |i, j| v[i * n + j]));
            check_bounded(&m)?;
            v = DVector::from_fn(dim, |r, _| m[(r / n, r % n)]);
        }
        n_steps >>= 1;
        if n_steps > 0 {
            prop = &prop * &prop;
            restore_trace_preservation(&mut prop, n);
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

/// Removes rounding drift from the trace functional: every column of a
/// trace-preserving map must have the trace of its basis element.
fn restore_trace_preservation(prop: &mut CMatrix, n: usize) {
    let dim = n * n;
    for c in 0..dim {
        let target = if c / n == c % n { C_ONE } else { C_ZERO };
        let mut tr = C_ZERO;
        for k in 0..n {
            tr += prop[(k * n + k, c)];
        }
        prop[(0, c)] -= tr - target;
    }
}
