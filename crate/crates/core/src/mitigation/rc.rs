//! Randomized compiling: a random Pauli frame before every two-qubit gate
//! and the matching correction after it, then single-qubit fusion.

use rand::Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli2, Mat4, Pauli};
use crate::rng::stream;
use crate::transpiler::{fuse_single_qubit, Connectivity, Entangler, GateSetSpec, SingleQubitNative};

pub const MAX_RANDOMIZATIONS: usize = 10_000;

const PAULI_TOL: f64 = 1e-9;

/// Pauli pair `(a, b)` proportional to `m`, if any.
fn as_pauli(m: &Mat4) -> Option<(Pauli, Pauli)> {
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let overlap = (pauli2(a, b).adjoint() * m).trace().norm() / 4.0;
            if (overlap - 1.0).abs() < PAULI_TOL {
                return Some((a, b));
            }
        }
    }
    None
}

fn pauli_gate(p: Pauli, q: usize) -> Option<Gate> {
    let m = p.matrix();
    match p {
        Pauli::I => None,
        Pauli::X => Some(Gate::one(GateKind::X, q)),
        _ => crate::transpiler::local_gate(&m, q),
    }
}

/// Generator `G` of a rotation entangler `exp(-i t G / 2)`.
fn generator(kind: &GateKind) -> Option<Mat4> {
    match kind {
        GateKind::Zz(_) => Some(pauli2(Pauli::Z, Pauli::Z)),
        GateKind::MsXx(_) => Some(pauli2(Pauli::X, Pauli::X)),
        _ => None,
    }
}

/// Twirl one two-qubit gate with the frame `(pa, pb)`.
fn dress(gate: &Gate, pa: Pauli, pb: Pauli, out: &mut Vec<Gate>) -> Result<()> {
    let [a, b] = gate.pair();
    let p = kron(&pa.matrix(), &pb.matrix());
    let frame = |out: &mut Vec<Gate>, x: Pauli, y: Pauli| {
        out.extend(pauli_gate(x, a));
        out.extend(pauli_gate(y, b));
    };
    if let Some(g) = generator(&gate.kind) {
        // P exp(-i t G/2) P = exp(-i (+-t) G/2)
        let anti = (p * g * p + g).norm() < PAULI_TOL;
        let t = gate.kind.entangling_angle().unwrap();
        frame(out, pa, pb);
        out.push(Gate::two(gate.kind.with_angle(if anti { -t } else { t }), a, b));
        frame(out, pa, pb);
        return Ok(());
    }
    let u = gate.kind.matrix2().ok_or_else(|| Error::InvalidGate(format!("no matrix for {gate}")))?;
    let (qa, qb) = as_pauli(&(u * p * u.adjoint()))
        .ok_or_else(|| Error::Mitigation(format!("{gate} is neither Clifford nor a Pauli-rotation entangler")))?;
    frame(out, pa, pb);
    out.push(*gate);
    frame(out, qa, qb);
    Ok(())
}

fn fusion_spec() -> GateSetSpec {
    GateSetSpec {
        native_two_qubit: Entangler::Cz,
        native_single_qubit: vec![SingleQubitNative::U1q],
        connectivity: Connectivity::AllToAll,
    }
}

/// One randomization of `circuit`, drawing frames from `rng`.
pub fn randomize_once<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.gates().len() * 3);
    for g in circuit.gates() {
        if g.is_two_qubit() {
            let (pa, pb) = (Pauli::from_index(rng.random_range(0..4)), Pauli::from_index(rng.random_range(0..4)));
            dress(g, pa, pb, &mut gates)?;
        } else {
            gates.push(*g);
        }
    }
    let mut out = circuit.empty_like();
    out.extend(gates)?;
    fuse_single_qubit(&out, &fusion_spec())
}

/// `n` randomizations; randomization `r` uses stream `(seed, r)`.
pub fn randomize_compile(circuit: &Circuit, n: usize, seed: u64) -> Result<Vec<Circuit>> {
    if !(2..=MAX_RANDOMIZATIONS).contains(&n) {
        return Err(Error::Mitigation(format!("randomizations must be in 2..={MAX_RANDOMIZATIONS}, got {n}")));
    }
    (0..n).map(|r| randomize_once(circuit, &mut stream(seed, &[r as u64]))).collect()
}
