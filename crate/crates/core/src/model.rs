//! Exact reference dynamics of the open Tavis-Cummings system.
//!
//! Two independent solvers are provided:
//!
//! * [`evolve_single_excitation`] exponentiates the non-Hermitian effective
//!   Hamiltonian on the `N+1` dimensional single-excitation manifold.
//! * [`lindblad_oracle`] integrates the full master equation for the density
//!   matrix on `2^N` emitter states times a truncated Fock space with
//!   fixed-step RK4.
//!
//! Both work in the frame rotating at the cavity frequency, so a resonant
//! system has no diagonal Hamiltonian terms. All rates are angular (rad/ns).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};

pub const DEFAULT_FOCK_CUTOFF: usize = 2;
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcParams {
    pub n_emitters: usize,
    /// Emitter-cavity couplings `g_i`.
    pub couplings: Vec<f64>,
    /// Cavity loss rate.
    pub kappa: f64,
    pub cavity_freq: f64,
    pub emitter_freqs: Vec<f64>,
    /// 1-based index of the initially excited emitter.
    pub excited_emitter: usize,
}

impl TcParams {
    /// Identical emitters resonant with the cavity, emitter 1 excited.
    pub fn homogeneous(n_emitters: usize, g: f64, kappa: f64) -> Self {
        TcParams {
            n_emitters,
            couplings: vec![g; n_emitters],
            kappa,
            cavity_freq: 0.0,
            emitter_freqs: vec![0.0; n_emitters],
            excited_emitter: 1,
        }
    }

    /// `N = 3`, `g = 4`, `kappa = 2`, resonant, emitter 1 excited.
    pub fn reference() -> Self {
        Self::homogeneous(3, 4.0, 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_emitters;
        if n == 0 {
            return Err(Error::InvalidParams("need at least one emitter".into()));
        }
        if self.couplings.len() != n || self.emitter_freqs.len() != n {
            return Err(Error::InvalidParams(format!(
                "expected {n} couplings and frequencies, got {} and {}",
                self.couplings.len(),
                self.emitter_freqs.len()
            )));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParams(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.excited_emitter == 0 || self.excited_emitter > n {
            return Err(Error::InvalidParams(format!(
                "excited emitter {} out of range 1..={n}",
                self.excited_emitter
            )));
        }
        let finite = self.couplings.iter().chain(&self.emitter_freqs).all(|x| x.is_finite())
            && self.cavity_freq.is_finite();
        if !finite {
            return Err(Error::InvalidParams("non-finite coupling or frequency".into()));
        }
        Ok(())
    }

    fn detuning(&self, i: usize) -> f64 {
        self.emitter_freqs[i] - self.cavity_freq
    }
}

/// Amplitudes on `|e_1>..|e_N>, |1_cav>` plus the probability already
/// emitted into the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleExcitationState {
    pub amplitudes: Vec<C64>,
    pub p_lost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationDistribution {
    pub p_emitters: Vec<f64>,
    pub p_cav_env: f64,
}

pub const DISTRIBUTION_TOL: f64 = 1e-10;

impl PopulationDistribution {
    pub fn new(p_emitters: Vec<f64>, p_cav_env: f64) -> Result<Self> {
        let d = PopulationDistribution { p_emitters, p_cav_env };
        d.validate()?;
        Ok(d)
    }

    /// Build from `[p_e1, .., p_eN, p_cav_env]`.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two entries".into()));
        }
        let (last, emitters) = values.split_last().unwrap();
        Self::new(emitters.to_vec(), *last)
    }

    /// Clip negatives to zero and rescale to unit sum.
    pub fn normalized(values: &[f64]) -> Result<Self> {
        let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("zero total weight".into()));
        }
        let scaled: Vec<f64> = clipped.iter().map(|v| v / total).collect();
        Self::from_slice(&scaled)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_emitters.is_empty() {
            return Err(Error::InvalidDistribution("no emitters".into()));
        }
        if self.iter().any(|p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite entry in {:?}", self.to_vec())));
        }
        let total: f64 = self.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(())
    }

    pub fn n_emitters(&self) -> usize {
        self.p_emitters.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.p_emitters.iter().copied().chain(std::iter::once(self.p_cav_env))
    }

    /// `[p_e1, .., p_eN, p_cav_env]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    /// Population of emitter `i` (1-based).
    pub fn emitter(&self, i: usize) -> f64 {
        self.p_emitters[i - 1]
    }
}

/// `H_eff = H_single - i(kappa/2)|cav><cav|` on the basis
/// `|e_1>..|e_N>, |1_cav>`.
pub fn effective_hamiltonian(params: &TcParams) -> DMatrix<C64> {
    let n = params.n_emitters;
    let mut h = DMatrix::from_element(n + 1, n + 1, ZERO);
    for i in 0..n {
        h[(i, i)] = C64::from(params.detuning(i));
        h[(i, n)] = C64::from(params.couplings[i]);
        h[(n, i)] = C64::from(params.couplings[i]);
    }
    h[(n, n)] = C64::new(0.0, -params.kappa / 2.0);
    h
}

/// Non-unitary propagator `exp(-i H_eff t)` on the single-excitation manifold.
pub fn single_excitation_propagator(params: &TcParams, t: f64) -> Result<DMatrix<C64>> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let h = effective_hamiltonian(params);
    Ok((h * (-I * t)).exp())
}

pub fn evolve_single_excitation(params: &TcParams, t: f64) -> Result<SingleExcitationState> {
    let u = single_excitation_propagator(params, t)?;
    let mut init = DVector::from_element(params.n_emitters + 1, ZERO);
    init[params.excited_emitter - 1] = ONE;
    let amps = u * init;
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok(SingleExcitationState { amplitudes: amps.iter().copied().collect(), p_lost: (1.0 - norm).clamp(0.0, 1.0) })
}

pub fn populations(state: &SingleExcitationState) -> PopulationDistribution {
    let (cav, emitters) = state.amplitudes.split_last().expect("state has a cavity amplitude");
    PopulationDistribution {
        p_emitters: emitters.iter().map(|a| a.norm_sqr()).collect(),
        p_cav_env: cav.norm_sqr() + state.p_lost,
    }
}

/// Exact populations on a time grid from the single-excitation solver.
pub fn exact_series(params: &TcParams, times: &[f64]) -> Result<Vec<PopulationDistribution>> {
    times.iter().map(|&t| evolve_single_excitation(params, t).map(|s| populations(&s))).collect()
}

/// Collective vacuum Rabi rate `sqrt(N) g` of identical resonant emitters.
pub fn rabi_frequency(params: &TcParams) -> Result<f64> {
    params.validate()?;
    let g = params.couplings[0];
    let homogeneous = params.couplings.iter().all(|&x| x == g);
    let resonant = params.emitter_freqs.iter().all(|&w| w == params.cavity_freq);
    if !homogeneous || !resonant {
        return Err(Error::InvalidParams("Rabi rate formula needs identical resonant emitters".into()));
    }
    Ok((params.n_emitters as f64).sqrt() * g)
}

// ---------------------------------------------------------------------------
// Full master equation

/// Sparse matrix as a list of nonzero `(row, col, value)` entries.
type Sparse = Vec<(usize, usize, C64)>;

/// Full-space operators on `(emitters) x (Fock levels 0..cutoff)`, with basis
/// index `bits * cutoff + n` where bit `i` is emitter `i+1`.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub fock_cutoff: usize,
    pub n_emitters: usize,
    pub a: DMatrix<C64>,
    pub a_dag: DMatrix<C64>,
    pub sigma_plus: Vec<DMatrix<C64>>,
    pub sigma_minus: Vec<DMatrix<C64>>,
    pub sigma_z: Vec<DMatrix<C64>>,
    pub hamiltonian: DMatrix<C64>,
    kappa: f64,
    h_sparse: Sparse,
    a_sparse: Sparse,
    photon_number: Vec<f64>,
}

impl OperatorSet {
    pub fn new(params: &TcParams, fock_cutoff: usize) -> Result<Self> {
        params.validate()?;
        if fock_cutoff == 0 {
            return Err(Error::InvalidParams("fock cutoff must be >= 1".into()));
        }
        let n = params.n_emitters;
        let dim = fock_cutoff << n;
        let zero = || DMatrix::from_element(dim, dim, ZERO);

        let mut a = zero();
        for idx in 0..dim {
            let k = idx % fock_cutoff;
            if k > 0 {
                a[(idx - 1, idx)] = C64::from((k as f64).sqrt());
            }
        }
        let a_dag = a.adjoint();

        let mut sigma_plus = Vec::with_capacity(n);
        let mut sigma_z = Vec::with_capacity(n);
        for i in 0..n {
            let mut sp = zero();
            let mut sz = zero();
            for idx in 0..dim {
                let bits = idx / fock_cutoff;
                let excited = (bits >> i) & 1 == 1;
                sz[(idx, idx)] = if excited { ONE } else { -ONE };
                if !excited {
                    sp[(idx + (fock_cutoff << i), idx)] = ONE;
                }
            }
            sigma_plus.push(sp);
            sigma_z.push(sz);
        }
        let sigma_minus: Vec<_> = sigma_plus.iter().map(|m| m.adjoint()).collect();

        let mut h = zero();
        for i in 0..n {
            h += &sigma_z[i] * C64::from(0.5 * params.detuning(i));
            h += (&sigma_plus[i] * &a + &a_dag * &sigma_minus[i]) * C64::from(params.couplings[i]);
        }

        let to_sparse = |m: &DMatrix<C64>| -> Sparse {
            let mut out = Vec::new();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    if m[(r, c)] != ZERO {
                        out.push((r, c, m[(r, c)]));
                    }
                }
            }
            out
        };
        let photon_number = (0..dim).map(|idx| (idx % fock_cutoff) as f64).collect();
        Ok(OperatorSet {
            fock_cutoff,
            n_emitters: n,
            h_sparse: to_sparse(&h),
            a_sparse: to_sparse(&a),
            a,
            a_dag,
            sigma_plus,
            sigma_minus,
            sigma_z,
            hamiltonian: h,
            kappa: params.kappa,
            photon_number,
        })
    }

    pub fn dim(&self) -> usize {
        self.fock_cutoff << self.n_emitters
    }

    /// `D_a(rho) = 2 a rho a^† - {a^† a, rho}`.
    pub fn dissipator(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = &self.a_dag * &self.a;
        (&self.a * rho * &self.a_dag) * C64::from(2.0) - &n * rho - rho * &n
    }

    /// Dense reference Lindbladian, used to check the sparse fast path.
    pub fn lindbladian(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let comm = &self.hamiltonian * rho - rho * &self.hamiltonian;
        comm * (-I) + self.dissipator(rho) * C64::from(self.kappa / 2.0)
    }

    /// Sparse evaluation of the Lindbladian on a row-major density matrix.
    fn lindbladian_into(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim();
        out.iter_mut().for_each(|z| *z = ZERO);
        // -i (H rho - rho H)
        for &(r, k, v) in &self.h_sparse {
            let mv = -I * v;
            let src = &rho[k * d..(k + 1) * d];
            let dst = &mut out[r * d..(r + 1) * d];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += mv * s;
            }
        }
        for &(k, c, v) in &self.h_sparse {
            let mv = I * v;
            for row in 0..d {
                out[row * d + c] += mv * rho[row * d + k];
            }
        }
        if self.kappa == 0.0 {
            return;
        }
        let half = self.kappa / 2.0;
        // kappa a rho a^†
        for &(r, k, v) in &self.a_sparse {
            for &(cc, l, w) in &self.a_sparse {
                out[r * d + cc] += rho[k * d + l] * v * w.conj() * self.kappa;
            }
        }
        // -(kappa/2) {n, rho}
        for r in 0..d {
            for cc in 0..d {
                let s = self.photon_number[r] + self.photon_number[cc];
                if s != 0.0 {
                    out[r * d + cc] -= rho[r * d + cc] * (half * s);
                }
            }
        }
    }

    fn photon_expectation(&self, rho: &[C64]) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.photon_number[i] * rho[i * d + i].re).sum()
    }
}

/// Output of the density-matrix integrator at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub t: f64,
    /// Emitter populations and cavity population plus environment.
    pub populations: PopulationDistribution,
    /// `<a^† a>`.
    pub p_cav: f64,
    /// Integrated emission flux `int kappa <a^† a> dt`.
    pub flux_lost: f64,
    /// `|tr(rho) - 1|`.
    pub trace_error: f64,
    /// Set when any population drifted below `-1e-9`.
    pub negative_drift: bool,
}

/// Integrate the master equation from the initial excitation to time `t`.
pub fn lindblad_oracle(params: &TcParams, t: f64, fock_cutoff: usize, dt: f64) -> Result<OracleResult> {
    Ok(lindblad_trajectory(params, &[t], fock_cutoff, dt)?.pop().unwrap())
}

/// Integrate once and report at every requested time (must be nondecreasing).
pub fn lindblad_trajectory(params: &TcParams, times: &[f64], fock_cutoff: usize, dt: f64) -> Result<Vec<OracleResult>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidStep(dt));
    }
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be nondecreasing".into()));
    }
    let ops = OperatorSet::new(params, fock_cutoff)?;
    let d = ops.dim();
    let mut state = IntegratorState::new(&ops, params.excited_emitter);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - now;
        // Whole steps, then one partial step for the remainder.
        let whole = ((span / dt) * (1.0 + 1e-12)).floor() as usize;
        for _ in 0..whole {
            state.step(&ops, dt);
        }
        let rest = span - whole as f64 * dt;
        if rest > 1e-15 {
            state.step(&ops, rest);
        }
        now = target;
        out.push(state.observe(&ops, target, d));
    }
    Ok(out)
}

struct IntegratorState {
    rho: Vec<C64>,
    flux: f64,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl IntegratorState {
    fn new(ops: &OperatorSet, excited: usize) -> Self {
        let d = ops.dim();
        let mut rho = vec![ZERO; d * d];
        let idx = ops.fock_cutoff << (excited - 1);
        rho[idx * d + idx] = ONE;
        IntegratorState {
            rho,
            flux: 0.0,
            k: [vec![ZERO; d * d], vec![ZERO; d * d], vec![ZERO; d * d], vec![ZERO; d * d]],
            tmp: vec![ZERO; d * d],
        }
    }

    /// One classical RK4 step for `(rho, flux)`.
    fn step(&mut self, ops: &OperatorSet, h: f64) {
        let kappa = ops.kappa;
        let f0 = kappa * ops.photon_expectation(&self.rho);
        ops.lindbladian_into(&self.rho, &mut self.k[0]);

        axpy(&mut self.tmp, &self.rho, &self.k[0], h / 2.0);
        let f1 = kappa * ops.photon_expectation(&self.tmp);
        ops.lindbladian_into(&self.tmp, &mut self.k[1]);

        axpy(&mut self.tmp, &self.rho, &self.k[1], h / 2.0);
        let f2 = kappa * ops.photon_expectation(&self.tmp);
        ops.lindbladian_into(&self.tmp, &mut self.k[2]);

        axpy(&mut self.tmp, &self.rho, &self.k[2], h);
        let f3 = kappa * ops.photon_expectation(&self.tmp);
        ops.lindbladian_into(&self.tmp, &mut self.k[3]);

        let w = h / 6.0;
        for (i, r) in self.rho.iter_mut().enumerate() {
            *r += (self.k[0][i] + self.k[1][i] * 2.0 + self.k[2][i] * 2.0 + self.k[3][i]) * w;
        }
        self.flux += w * (f0 + 2.0 * f1 + 2.0 * f2 + f3);
    }

    fn observe(&self, ops: &OperatorSet, t: f64, d: usize) -> OracleResult {
        let diag: Vec<f64> = (0..d).map(|i| self.rho[i * d + i].re).collect();
        let trace: f64 = diag.iter().sum();
        let p_emitters: Vec<f64> = (0..ops.n_emitters)
            .map(|e| {
                diag.iter()
                    .enumerate()
                    .filter(|(idx, _)| ((idx / ops.fock_cutoff) >> e) & 1 == 1)
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect();
        let p_cav = ops.photon_expectation(&self.rho);
        let negative_drift = diag.iter().any(|&p| p < -1e-9);
        let p_cav_env = 1.0 - p_emitters.iter().sum::<f64>();
        OracleResult {
            t,
            populations: PopulationDistribution { p_emitters, p_cav_env },
            p_cav,
            flux_lost: self.flux,
            trace_error: (trace - 1.0).abs(),
            negative_drift,
        }
    }
}

fn axpy(out: &mut [C64], x: &[C64], k: &[C64], h: f64) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(k) {
        *o = a + b * h;
    }
}
