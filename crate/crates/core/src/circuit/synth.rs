//! Emulation-circuit synthesis for the singly excited open Tavis-Cummings
//! model.
//!
//! Wire 0 holds the combined cavity/environment population and wire `i`
//! holds emitter `i`. The circuit is an `X` on the excited emitter followed
//! by one `CRY`+`CNOT` interaction block per emitter, excited emitter first.
//! Each block moves exactly the amplitude needed to reproduce the target
//! population of its emitter, so the output never leaves the
//! single-excitation (Hamming weight 1) subspace.

use super::{Circuit, Gate, GateKind, Role};
use crate::error::{Error, Result};
use crate::model::PopulationDistribution;

/// Residual population below which later rotation angles are set to zero.
pub const RESIDUAL_EPS: f64 = 1e-12;

/// Rotation angles in interaction order (excited emitter first, then the
/// others by ascending index), paired with their emitter index.
pub fn qmarina_angles(target: &PopulationDistribution, excited: usize) -> Result<Vec<(usize, f64)>> {
    target.validate()?;
    let n = target.n_emitters();
    if excited == 0 || excited > n {
        return Err(Error::InvalidParams(format!("excited emitter {excited} out of range 1..={n}")));
    }
    let p_exc = target.emitter(excited).min(1.0);
    let mut out = vec![(excited, 2.0 * p_exc.sqrt().acos())];
    let mut residual = 1.0 - p_exc;
    for i in (1..=n).filter(|&i| i != excited) {
        let p = target.emitter(i);
        let theta = if residual <= RESIDUAL_EPS {
            0.0
        } else {
            let ratio = p / residual;
            if ratio > 1.0 + 1e-9 {
                return Err(Error::InconsistentTarget { population: p, residual });
            }
            2.0 * ratio.min(1.0).sqrt().asin()
        };
        out.push((i, theta));
        residual -= p;
    }
    Ok(out)
}

/// Build the `2N+1`-gate circuit whose ideal output reproduces `target`.
///
/// Returns the circuit and the angles `theta_1..theta_N` in interaction
/// order.
pub fn synthesize_qmarina(target: &PopulationDistribution, excited: usize) -> Result<(Circuit, Vec<f64>)> {
    let angles = qmarina_angles(target, excited)?;
    let n = target.n_emitters();
    let cav = 0;
    let mut circuit = Circuit::with_roles(std::iter::once(Role::CavityEnv).chain((1..=n).map(Role::Emitter)).collect())?;
    circuit.push(Gate::one(GateKind::X, excited))?;
    for (k, &(emitter, theta)) in angles.iter().enumerate() {
        if k == 0 {
            circuit.push(Gate::two(GateKind::Cry(theta), emitter, cav))?;
            circuit.push(Gate::two(GateKind::Cnot, cav, emitter))?;
        } else {
            circuit.push(Gate::two(GateKind::Cry(theta), cav, emitter))?;
            circuit.push(Gate::two(GateKind::Cnot, emitter, cav))?;
        }
    }
    Ok((circuit, angles.into_iter().map(|(_, t)| t).collect()))
}
