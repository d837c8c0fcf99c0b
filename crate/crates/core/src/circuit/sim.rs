use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{Circuit, Counts, Gate};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4, C64, ONE, ZERO};

pub const MAX_STATEVECTOR_WIDTH: usize = 24;
pub const MAX_UNITARY_WIDTH: usize = 10;

/// Apply a single-qubit matrix to bit `q` of a state vector.
pub fn apply_one(state: &mut [C64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    for i in 0..state.len() {
        if i & bit == 0 {
            let (a, b) = (state[i], state[i | bit]);
            state[i] = m00 * a + m01 * b;
            state[i | bit] = m10 * a + m11 * b;
        }
    }
}

/// Apply a two-qubit matrix with `q0` as the high local bit.
pub fn apply_two(state: &mut [C64], q0: usize, q1: usize, m: &Mat4) {
    let (b0, b1) = (1usize << q0, 1usize << q1);
    let mut v = [ZERO; 4];
    for i in 0..state.len() {
        if i & (b0 | b1) == 0 {
            let idx = [i, i | b1, i | b0, i | b0 | b1];
            for k in 0..4 {
                v[k] = state[idx[k]];
            }
            for r in 0..4 {
                state[idx[r]] = m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
            }
        }
    }
}

/// Matrix of a gate, one- or two-qubit.
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

pub fn gate_unitary(gate: &Gate) -> GateMatrix {
    match gate.kind.arity() {
        1 => GateMatrix::One(gate.kind.matrix1().expect("single-qubit matrix")),
        _ => GateMatrix::Two(gate.kind.matrix2().expect("two-qubit matrix")),
    }
}

pub fn apply_gate(state: &mut [C64], gate: &Gate) {
    let qs = gate.qubits();
    match gate_unitary(gate) {
        GateMatrix::One(m) => apply_one(state, qs[0], &m),
        GateMatrix::Two(m) => apply_two(state, qs[0], qs[1], &m),
    }
}

fn final_state(circuit: &Circuit) -> Vec<C64> {
    let mut psi = vec![ZERO; 1 << circuit.width()];
    psi[0] = ONE;
    for g in circuit.gates() {
        apply_gate(&mut psi, g);
    }
    psi
}

/// Exact outcome probabilities in logical readout order.
pub fn simulate_statevector(circuit: &Circuit) -> Result<Vec<f64>> {
    if circuit.width() > MAX_STATEVECTOR_WIDTH {
        return Err(Error::TooWide { width: circuit.width(), limit: MAX_STATEVECTOR_WIDTH });
    }
    let psi = final_state(circuit);
    let mut probs = vec![0.0; psi.len()];
    for (i, a) in psi.iter().enumerate() {
        probs[circuit.readout_index(i)] += a.norm_sqr();
    }
    Ok(probs)
}

/// Product of the gate matrices in wire order (readout relabeling not
/// applied).
pub fn unitary_of(circuit: &Circuit) -> Result<DMatrix<C64>> {
    let w = circuit.width();
    if w > MAX_UNITARY_WIDTH {
        return Err(Error::TooWide { width: w, limit: MAX_UNITARY_WIDTH });
    }
    let dim = 1 << w;
    let mut u = DMatrix::from_element(dim, dim, ZERO);
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        col.iter_mut().for_each(|z| *z = ZERO);
        col[j] = ONE;
        for g in circuit.gates() {
            apply_gate(&mut col, g);
        }
        for (i, z) in col.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    Ok(u)
}

/// Multinomial draw of `shots` outcomes from `probs`, by sequential
/// conditional binomials in index order.
pub fn sample_from_probs<R: Rng>(probs: &[f64], width: usize, shots: u64, rng: &mut R) -> Counts {
    let mut counts = Counts::new(width);
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if p == 0.0 {
            continue;
        }
        let frac = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let n = if frac >= 1.0 { remaining } else { Binomial::new(remaining, frac).expect("valid binomial").sample(rng) };
        counts.add(i as u64, n);
        remaining -= n;
        mass -= p;
    }
    if remaining > 0 {
        // Rounding left some mass unassigned; give it to the likeliest outcome.
        let best = probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        counts.add(best as u64, remaining);
    }
    counts
}

pub fn sample_counts(circuit: &Circuit, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be >= 1".into()));
    }
    let probs = simulate_statevector(circuit)?;
    let mut rng = crate::rng::stream(seed, &[]);
    Ok(sample_from_probs(&probs, circuit.width(), shots, &mut rng))
}
