//! Noisy execution on a density-matrix simulator.
//!
//! Each gate is applied with its (possibly mis-calibrated) unitary followed
//! by a depolarizing channel on the qubits it touched. Readout errors are
//! independent bit flips applied to the final distribution.

mod density;
mod fidelity;

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use density::DensityMatrix;
pub use fidelity::{depolarizing_from_fidelity, FidelityTable, PairFidelity, FIDELITY_CONVENTION};

use crate::circuit::{sample_counts, sample_from_probs, Circuit, Counts, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, Pauli, C64, I, ONE};
use crate::rng::stream;

/// Largest circuit the density-matrix simulator accepts.
pub const MAX_NOISY_WIDTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDepolarizing {
    pub pair: [usize; 2],
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    pub depol_1q: f64,
    /// Depolarizing probability after each two-qubit gate on pairs without an
    /// entry in `depol_2q_pairs`.
    pub depol_2q: f64,
    pub depol_2q_pairs: Vec<PairDepolarizing>,
    /// Fractional rotation-angle error keyed by gate name (`"CZ"`,
    /// `"MS_XX"`, `"U1q"`, ...). A `CZ` over-rotation of `e` applies
    /// `diag(1, 1, 1, exp(i pi (1 + e)))`.
    pub coherent_overrotation: BTreeMap<String, f64>,
    /// Standard deviation of the relative angle jitter on `MS_XX`/`ZZ` gates,
    /// per radian of `|angle|`.
    pub amplitude_noise_coeff: f64,
    /// Readout bit-flip probability per qubit.
    pub spam_flip: f64,
    /// Shots sharing one jitter draw.
    pub batch_shots: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            depol_1q: 0.0,
            depol_2q: 0.0,
            depol_2q_pairs: Vec::new(),
            coherent_overrotation: BTreeMap::new(),
            amplitude_noise_coeff: 0.0,
            spam_flip: 0.0,
            batch_shots: 100,
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidNoise(format!("{name} = {p} is not a probability")))
    }
}

impl NoiseModel {
    pub fn ideal() -> NoiseModel {
        NoiseModel::default()
    }

    pub fn validate(&self) -> Result<()> {
        probability("depol_1q", self.depol_1q)?;
        probability("depol_2q", self.depol_2q)?;
        probability("spam_flip", self.spam_flip)?;
        for e in &self.depol_2q_pairs {
            probability("depol_2q_pairs", e.p)?;
            if e.pair[0] == e.pair[1] {
                return Err(Error::InvalidNoise(format!("pair {:?} repeats a qubit", e.pair)));
            }
        }
        if !(self.amplitude_noise_coeff >= 0.0 && self.amplitude_noise_coeff.is_finite()) {
            return Err(Error::InvalidNoise(format!("amplitude_noise_coeff = {}", self.amplitude_noise_coeff)));
        }
        for (k, &e) in &self.coherent_overrotation {
            if !e.is_finite() || e.abs() >= 1.0 || GateKind::arity_of_name(k).is_none() {
                return Err(Error::InvalidNoise(format!("over-rotation {k} = {e}")));
            }
        }
        if self.batch_shots == 0 {
            return Err(Error::InvalidNoise("batch_shots must be >= 1".into()));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.depol_1q == 0.0
            && self.depol_2q == 0.0
            && self.depol_2q_pairs.iter().all(|e| e.p == 0.0)
            && self.coherent_overrotation.values().all(|&e| e == 0.0)
            && self.amplitude_noise_coeff == 0.0
            && self.spam_flip == 0.0
    }

    pub fn depol_for_pair(&self, a: usize, b: usize) -> f64 {
        let key = [a.min(b), a.max(b)];
        self.depol_2q_pairs.iter().find(|e| e.pair == key).map_or(self.depol_2q, |e| e.p)
    }

    fn overrotation(&self, kind: &GateKind) -> f64 {
        self.coherent_overrotation.get(kind.name()).copied().unwrap_or(0.0)
    }
}

/// Depolarizing model from run `run` of a fidelity table. Pairs absent from
/// the table get the mean two-qubit probability of the run.
pub fn noise_from_fidelity(table: &FidelityTable, run: usize) -> Result<NoiseModel> {
    table.validate()?;
    let rows = table.runs.get(run).ok_or_else(|| Error::InvalidNoise(format!("no run {run} in table")))?;
    let pairs: Vec<PairDepolarizing> = rows
        .iter()
        .map(|r| Ok(PairDepolarizing { pair: r.pair, p: depolarizing_from_fidelity(r.fidelity, 4)? }))
        .collect::<Result<_>>()?;
    let mean = if pairs.is_empty() { 0.0 } else { pairs.iter().map(|e| e.p).sum::<f64>() / pairs.len() as f64 };
    Ok(NoiseModel {
        depol_1q: depolarizing_from_fidelity(table.single_qubit, 2)?,
        depol_2q: mean,
        depol_2q_pairs: pairs,
        ..NoiseModel::default()
    })
}

/// Scale the rotation angle of an SU(2) element by `factor`.
fn scale_rotation(m: &Mat2, factor: f64) -> Mat2 {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let u = m / det.sqrt();
    let co = ((u[(0, 0)] + u[(1, 1)]) / 2.0).re;
    let sx = -((u[(0, 1)] + u[(1, 0)]) / 2.0).im;
    let sy = ((u[(1, 0)] - u[(0, 1)]) / 2.0).re;
    let sz = ((u[(1, 1)] - u[(0, 0)]) / 2.0).im;
    let s = (sx * sx + sy * sy + sz * sz).sqrt();
    if s < 1e-15 {
        return *m;
    }
    let half = s.atan2(co) * factor;
    let (sn, cs) = half.sin_cos();
    let axis = Pauli::X.matrix() * C64::from(sx / s) + Pauli::Y.matrix() * C64::from(sy / s) + Pauli::Z.matrix() * C64::from(sz / s);
    Mat2::identity() * C64::from(cs) - axis * (I * sn)
}

/// Unitary actually applied for `gate` under `model`, with jitter draw `z`
/// for rotation-angle entanglers.
fn noisy_matrix(gate: &Gate, model: &NoiseModel, z: f64) -> NoisyGate {
    let eps = model.overrotation(&gate.kind);
    match gate.kind {
        GateKind::Zz(t) | GateKind::MsXx(t) => {
            let t = t * (1.0 + eps) * (1.0 + model.amplitude_noise_coeff * t.abs() * z);
            NoisyGate::Two(gate.kind.with_angle(t).matrix2().expect("two-qubit"))
        }
        GateKind::Cz => {
            let phase = crate::linalg::expi(std::f64::consts::PI * (1.0 + eps));
            NoisyGate::Two(Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE, phase)))
        }
        k if k.arity() == 1 => {
            let m = k.matrix1().expect("single-qubit");
            NoisyGate::One(if eps == 0.0 { m } else { scale_rotation(&m, 1.0 + eps) })
        }
        k => NoisyGate::Two(k.matrix2().expect("two-qubit")),
    }
}

enum NoisyGate {
    One(Mat2),
    Two(Mat4),
}

fn check_width(circuit: &Circuit) -> Result<()> {
    if circuit.width() > MAX_NOISY_WIDTH {
        return Err(Error::TooWide { width: circuit.width(), limit: MAX_NOISY_WIDTH });
    }
    Ok(())
}

/// Final density matrix. `jitter` supplies the amplitude-noise draws; `None`
/// disables jitter.
pub fn evolve_density<R: Rng + ?Sized>(circuit: &Circuit, model: &NoiseModel, mut jitter: Option<&mut R>) -> Result<DensityMatrix> {
    check_width(circuit)?;
    model.validate()?;
    let mut rho = DensityMatrix::zero_state(circuit.width());
    for g in circuit.gates() {
        let z = match (&mut jitter, g.kind.entangling_angle()) {
            (Some(rng), Some(_)) if model.amplitude_noise_coeff > 0.0 => StandardNormal.sample(&mut **rng),
            _ => 0.0,
        };
        let qs = g.qubits();
        match noisy_matrix(g, model, z) {
            NoisyGate::One(m) => {
                rho.apply_one(qs[0], &m);
                rho.depolarize_one(qs[0], model.depol_1q);
            }
            NoisyGate::Two(m) => {
                rho.apply_two(qs[0], qs[1], &m);
                rho.depolarize_two(qs[0], qs[1], model.depol_for_pair(qs[0], qs[1]));
            }
        }
    }
    Ok(rho)
}

/// Independent readout flips on every wire of a wire-ordered distribution.
pub fn apply_spam(probs: &mut [f64], width: usize, flip: f64) {
    if flip == 0.0 {
        return;
    }
    for q in 0..width {
        let bit = 1usize << q;
        for i in 0..probs.len() {
            if i & bit == 0 {
                let (a, b) = (probs[i], probs[i | bit]);
                probs[i] = (1.0 - flip) * a + flip * b;
                probs[i | bit] = flip * a + (1.0 - flip) * b;
            }
        }
    }
}

fn to_logical(circuit: &Circuit, wire_probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; wire_probs.len()];
    for (i, &p) in wire_probs.iter().enumerate() {
        out[circuit.readout_index(i)] += p.max(0.0);
    }
    out
}

/// Outcome distribution in logical readout order, including readout flips.
pub fn noisy_distribution<R: Rng + ?Sized>(circuit: &Circuit, model: &NoiseModel, jitter: Option<&mut R>) -> Result<Vec<f64>> {
    let rho = evolve_density(circuit, model, jitter)?;
    let mut probs = rho.populations();
    apply_spam(&mut probs, circuit.width(), model.spam_flip);
    Ok(to_logical(circuit, &probs))
}

/// Sample `shots` noisy outcomes. A noiseless model samples exactly like
/// [`sample_counts`]. Without amplitude jitter every shot sees
/// the same channel and one stream `(seed)` draws them all; with jitter the
/// shots are split into batches of `model.batch_shots`, batch `k` drawing its
/// jitter and outcomes from stream `(seed, k)`.
pub fn apply_noisy(circuit: &Circuit, model: &NoiseModel, shots: u64, seed: u64) -> Result<Counts> {
    check_width(circuit)?;
    model.validate()?;
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be >= 1".into()));
    }
    if model.is_ideal() {
        return sample_counts(circuit, shots, seed);
    }
    let w = circuit.width();
    if model.amplitude_noise_coeff == 0.0 {
        let probs = noisy_distribution::<rand_chacha::ChaCha8Rng>(circuit, model, None)?;
        let mut rng = stream(seed, &[]);
        return Ok(sample_from_probs(&probs, w, shots, &mut rng));
    }
    let b = model.batch_shots;
    let n_batches = shots.div_ceil(b);
    let parts: Vec<Counts> = (0..n_batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, &[k]);
            let probs = noisy_distribution(circuit, model, Some(&mut rng))?;
            let n = b.min(shots - k * b);
            Ok(sample_from_probs(&probs, w, n, &mut rng))
        })
        .collect::<Result<_>>()?;
    let mut total = Counts::new(w);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests;
