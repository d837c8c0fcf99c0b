//! Noise amplification by identity insertion and zero-noise extrapolation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::model::PopulationDistribution;

pub fn check_factor(lambda: u32) -> Result<()> {
    if lambda == 0 || lambda.is_multiple_of(2) {
        return Err(Error::Mitigation(format!("amplification factor {lambda} must be odd and >= 1")));
    }
    Ok(())
}

fn inverse(gate: &Gate) -> Result<Gate> {
    let [a, b] = gate.pair();
    let kind = match gate.kind {
        GateKind::Zz(t) => GateKind::Zz(-t),
        GateKind::MsXx(t) => GateKind::MsXx(-t),
        GateKind::Cry(t) => GateKind::Cry(-t),
        k @ (GateKind::Cz | GateKind::Cnot | GateKind::Swap) => k,
        _ => return Err(Error::InvalidGate(format!("no inverse for {gate}"))),
    };
    Ok(Gate::two(kind, a, b))
}

/// Replace every two-qubit gate `G` by `G (G^-1 G)^((lambda - 1) / 2)`.
pub fn nox_amplify(circuit: &Circuit, lambda: u32) -> Result<Circuit> {
    check_factor(lambda)?;
    let mut out = circuit.empty_like();
    for g in circuit.gates() {
        out.push(*g)?;
        if g.is_two_qubit() {
            let inv = inverse(g)?;
            for _ in 0..(lambda - 1) / 2 {
                out.push(inv)?;
                out.push(*g)?;
            }
        }
    }
    Ok(out)
}

/// Least-squares polynomial of degree `order` through `(x, y)`, evaluated at 0.
pub fn extrapolate_zero(x: &[f64], y: &[f64], order: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Mismatch(format!("{} factors but {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Mitigation("extrapolation needs at least two factors".into()));
    }
    if order == 0 || order >= x.len() {
        return Err(Error::Mitigation(format!("fit order {order} needs between 1 and {} factors minus one", x.len())));
    }
    let a = DMatrix::from_fn(x.len(), order + 1, |r, c| x[r].powi(c as i32));
    let coef = a
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 1e-12)
        .map_err(|e| Error::Mitigation(format!("least-squares fit failed: {e}")))?;
    Ok(coef[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolated {
    pub populations: PopulationDistribution,
    /// Whether any raw intercept fell outside `[0, 1]` before renormalizing.
    pub clipped: bool,
}

/// Zero-noise estimate of one time step from its per-factor populations.
pub fn extrapolate_step(results: &BTreeMap<u32, PopulationDistribution>, order: usize) -> Result<Extrapolated> {
    if results.len() < 2 {
        return Err(Error::Mitigation("extrapolation needs at least two factors".into()));
    }
    for &l in results.keys() {
        check_factor(l)?;
    }
    let x: Vec<f64> = results.keys().map(|&l| l as f64).collect();
    let rows: Vec<Vec<f64>> = results.values().map(|p| p.to_vec()).collect();
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::Mismatch("emitter count differs between factors".into()));
    }
    let raw: Vec<f64> =
        (0..width).map(|k| extrapolate_zero(&x, &rows.iter().map(|r| r[k]).collect::<Vec<_>>(), order)).collect::<Result<_>>()?;
    let clipped = raw.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v));
    let populations = PopulationDistribution::normalized(&raw.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>())?;
    Ok(Extrapolated { populations, clipped })
}

/// Per-time-step extrapolation of `results[lambda][step]`.
pub fn nox_extrapolate(results: &BTreeMap<u32, Vec<PopulationDistribution>>, order: usize) -> Result<Vec<Extrapolated>> {
    let n_steps = results.values().next().map(Vec::len).unwrap_or(0);
    if results.values().any(|v| v.len() != n_steps) {
        return Err(Error::Mismatch("factors cover different numbers of steps".into()));
    }
    (0..n_steps)
        .map(|s| extrapolate_step(&results.iter().map(|(&l, v)| (l, v[s].clone())).collect(), order))
        .collect()
}
