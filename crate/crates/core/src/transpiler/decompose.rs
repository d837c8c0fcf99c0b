//! Gate-level rewrite rules and block synthesis.

use std::f64::consts::FRAC_PI_2;

use super::kak::{kak_decompose, CanonicalCoords};
use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{euler_zyz, phase_distance2, swap4, Mat2, Mat4, Pauli, C64, I, ONE, ZERO};

/// Canonical coordinates below this are treated as zero.
pub const COORD_EPS: f64 = 1e-10;

/// Native two-qubit interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Entangler {
    #[serde(rename = "MS_XX")]
    MsXx,
    #[serde(rename = "ZZ")]
    Zz,
    #[serde(rename = "CZ")]
    Cz,
}

impl Entangler {
    pub fn name(self) -> &'static str {
        match self {
            Entangler::MsXx => "MS_XX",
            Entangler::Zz => "ZZ",
            Entangler::Cz => "CZ",
        }
    }
}

fn wrong_kind(expected: &str, gate: &Gate) -> Error {
    Error::InvalidGate(format!("expected {expected}, got {gate}"))
}

/// `CRY(theta)` as `RY(theta/2) · CNOT · RY(-theta/2) · CNOT` on the target.
pub fn decompose_cry(gate: &Gate) -> Result<Vec<Gate>> {
    let GateKind::Cry(theta) = gate.kind else {
        return Err(wrong_kind("CRY", gate));
    };
    let [c, t] = gate.pair();
    Ok(vec![
        Gate::one(GateKind::Ry(theta / 2.0), t),
        Gate::two(GateKind::Cnot, c, t),
        Gate::one(GateKind::Ry(-theta / 2.0), t),
        Gate::two(GateKind::Cnot, c, t),
    ])
}

/// Single-qubit gate for `u` (up to phase), or `None` when `u` is the identity.
pub fn local_gate(u: &Mat2, q: usize) -> Option<Gate> {
    if phase_distance2(u, &Mat2::identity()) < 1e-12 {
        return None;
    }
    let (theta, phi, lambda) = euler_zyz(u);
    Some(Gate::one(GateKind::U1q { theta, phi, lambda }, q))
}

/// `CNOT` as one `MS_XX(pi/2)` with four `RY`/`RX` rotations:
/// `RY(pi/2)_c, MS_XX(pi/2), RX(-pi/2)_c, RX(-pi/2)_t, RY(-pi/2)_c`.
pub fn cnot_to_msxx(gate: &Gate) -> Result<Vec<Gate>> {
    if gate.kind != GateKind::Cnot {
        return Err(wrong_kind("CNOT", gate));
    }
    let [c, t] = gate.pair();
    Ok(vec![
        Gate::one(GateKind::Ry(FRAC_PI_2), c),
        Gate::two(GateKind::MsXx(FRAC_PI_2), c, t),
        Gate::one(GateKind::Rx(-FRAC_PI_2), c),
        Gate::one(GateKind::Rx(-FRAC_PI_2), t),
        Gate::one(GateKind::Ry(-FRAC_PI_2), c),
    ])
}

/// `CNOT` as `H · CZ · H` on the target.
pub fn cnot_to_cz(gate: &Gate) -> Result<Vec<Gate>> {
    if gate.kind != GateKind::Cnot {
        return Err(wrong_kind("CNOT", gate));
    }
    let [c, t] = gate.pair();
    Ok(vec![Gate::one(GateKind::H, t), Gate::two(GateKind::Cz, c, t), Gate::one(GateKind::H, t)])
}

/// `SWAP` as three alternating CNOTs, each realised with one `CZ`.
pub fn swap_to_cz(gate: &Gate) -> Result<Vec<Gate>> {
    if gate.kind != GateKind::Swap {
        return Err(wrong_kind("SWAP", gate));
    }
    let [a, b] = gate.pair();
    let mut out = Vec::with_capacity(9);
    for (c, t) in [(a, b), (b, a), (a, b)] {
        out.extend(cnot_to_cz(&Gate::two(GateKind::Cnot, c, t))?);
    }
    Ok(out)
}

fn hadamard() -> Mat2 {
    Mat2::new(ONE, ONE, ONE, -ONE) * C64::from(std::f64::consts::FRAC_1_SQRT_2)
}

// V with V E V† = P, where E is the entangler axis.
fn basis_change(entangler: Entangler, p: Pauli) -> Mat2 {
    let s = Mat2::new(ONE, ZERO, ZERO, I);
    match (entangler, p) {
        (Entangler::MsXx, Pauli::X) | (Entangler::Zz | Entangler::Cz, Pauli::Z) => Mat2::identity(),
        (Entangler::MsXx, Pauli::Y) => s,
        (Entangler::MsXx, Pauli::Z) | (Entangler::Zz | Entangler::Cz, Pauli::X) => hadamard(),
        (Entangler::Zz | Entangler::Cz, Pauli::Y) => s * hadamard(),
        (_, Pauli::I) => unreachable!(),
    }
}

/// Synthesize the canonical decomposition with one rotation-angle entangler
/// (`MS_XX` or `ZZ`) per nonzero coordinate.
pub fn synthesize_canonical(k: &CanonicalCoords, entangler: Entangler, a: usize, b: usize) -> Vec<Gate> {
    assert!(entangler != Entangler::Cz, "CZ has no angle parameter");
    let mut out = Vec::new();
    let (mut la, mut lb) = (k.k2a, k.k2b);
    // Apply ZZ then YY then XX; they commute, so the order is a free choice.
    for (t, p) in [(k.tz, Pauli::Z), (k.ty, Pauli::Y), (k.tx, Pauli::X)] {
        if t.abs() < COORD_EPS {
            continue;
        }
        let v = basis_change(entangler, p);
        la = v.adjoint() * la;
        lb = v.adjoint() * lb;
        out.extend(local_gate(&la, a));
        out.extend(local_gate(&lb, b));
        let kind = match entangler {
            Entangler::MsXx => GateKind::MsXx(2.0 * t),
            _ => GateKind::Zz(2.0 * t),
        };
        out.push(Gate::two(kind, a, b));
        la = v;
        lb = v;
    }
    la = k.k1a * la;
    lb = k.k1b * lb;
    out.extend(local_gate(&la, a));
    out.extend(local_gate(&lb, b));
    out
}

/// Compile a two-qubit block (first tensor factor on `a`) into `ZZ` gates and
/// single-qubit rotations.
pub fn block_to_zz(block: &Mat4, a: usize, b: usize) -> Result<Vec<Gate>> {
    Ok(synthesize_canonical(&kak_decompose(block)?, Entangler::Zz, a, b))
}

/// Result of [`mirror_swap_choice`].
#[derive(Clone, Debug)]
pub struct MirrorChoice {
    pub gates: Vec<Gate>,
    /// `true` when `gates` implement `SWAP · U`; the caller must exchange the
    /// two wires in its readout map.
    pub mirrored: bool,
    pub cost: f64,
    pub unmirrored_cost: f64,
}

/// Compile either `U` or `SWAP · U`, whichever has the smaller total
/// entangling angle.
pub fn mirror_swap_choice(block: &Mat4, entangler: Entangler, a: usize, b: usize) -> Result<MirrorChoice> {
    let plain = kak_decompose(block)?;
    let mirrored = kak_decompose(&(swap4() * block))?;
    let (k, flag) = if mirrored.cost() < plain.cost() - 1e-12 { (&mirrored, true) } else { (&plain, false) };
    Ok(MirrorChoice {
        gates: synthesize_canonical(k, entangler, a, b),
        mirrored: flag,
        cost: k.cost(),
        unmirrored_cost: plain.cost(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{unitary_of, Circuit};
    use crate::linalg::phase_distance4;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn seq_unitary(gates: &[Gate]) -> Mat4 {
        let mut c = Circuit::new(2);
        c.extend(gates.iter().cloned()).unwrap();
        let u = unitary_of(&c).unwrap();
        // unitary_of indexes wires with qubit 0 as the low bit; local
        // matrices put qubit 0 in the high bit.
        let perm = [0, 2, 1, 3];
        Mat4::from_fn(|r, cc| u[(perm[r], perm[cc])])
    }

    fn gate_unitary2(g: Gate) -> Mat4 {
        seq_unitary(&[g])
    }

    #[test]
    fn seq_unitary_uses_local_convention() {
        let cnot = GateKind::Cnot.matrix2().unwrap();
        assert!(phase_distance4(&gate_unitary2(Gate::two(GateKind::Cnot, 0, 1)), &cnot) < 1e-14);
    }

    #[test]
    fn cry_decomposition() {
        let zero = decompose_cry(&Gate::two(GateKind::Cry(0.0), 0, 1)).unwrap();
        assert!(phase_distance4(&seq_unitary(&zero), &Mat4::identity()) < 1e-12);
        let pi = decompose_cry(&Gate::two(GateKind::Cry(PI), 0, 1)).unwrap();
        let mut cy = Mat4::identity();
        // RY(pi) = -iY: controlled-Y up to an S-dagger phase on the control.
        cy.fixed_view_mut::<2, 2>(2, 2).copy_from(&(Pauli::Y.matrix() * -I));
        assert!(phase_distance4(&seq_unitary(&pi), &cy) < 1e-10);
        for &theta in &[0.3, -1.7, 2.9, 5.0] {
            for (c, t) in [(0, 1), (1, 0)] {
                let g = Gate::two(GateKind::Cry(theta), c, t);
                let seq = decompose_cry(&g).unwrap();
                assert_eq!(seq.iter().filter(|g| g.kind == GateKind::Cnot).count(), 2);
                assert_eq!(seq.iter().filter(|g| matches!(g.kind, GateKind::Ry(_))).count(), 2);
                assert!(phase_distance4(&seq_unitary(&seq), &gate_unitary2(g)) < 1e-10);
            }
        }
        assert!(decompose_cry(&Gate::two(GateKind::Cnot, 0, 1)).is_err());
    }

    #[test]
    fn cnot_via_single_ms() {
        for (c, t) in [(0, 1), (1, 0)] {
            let g = Gate::two(GateKind::Cnot, c, t);
            let seq = cnot_to_msxx(&g).unwrap();
            let ms: Vec<_> = seq.iter().filter(|g| g.is_two_qubit()).collect();
            assert_eq!(ms.len(), 1);
            assert_eq!(ms[0].kind, GateKind::MsXx(FRAC_PI_2));
            assert!(seq.iter().all(|g| matches!(g.kind, GateKind::MsXx(_) | GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_))));
            assert!(phase_distance4(&seq_unitary(&seq), &gate_unitary2(g)) < 1e-10);
        }
        let ms = seq_unitary(&[Gate::two(GateKind::MsXx(FRAC_PI_2), 0, 1), Gate::two(GateKind::MsXx(-FRAC_PI_2), 0, 1)]);
        assert!(phase_distance4(&ms, &Mat4::identity()) < 1e-14);
        assert!(cnot_to_msxx(&Gate::two(GateKind::Cz, 0, 1)).is_err());
    }

    #[test]
    fn cz_identities() {
        for (c, t) in [(0, 1), (1, 0)] {
            let g = Gate::two(GateKind::Cnot, c, t);
            assert!(phase_distance4(&seq_unitary(&cnot_to_cz(&g).unwrap()), &gate_unitary2(g)) < 1e-10);
        }
        let s = Gate::two(GateKind::Swap, 0, 1);
        let seq = swap_to_cz(&s).unwrap();
        assert_eq!(seq.iter().filter(|g| g.kind == GateKind::Cz).count(), 3);
        assert!(phase_distance4(&seq_unitary(&seq), &swap4()) < 1e-10);
        assert!(swap_to_cz(&Gate::two(GateKind::Cnot, 0, 1)).is_err());
    }

    fn zz_count(gates: &[Gate]) -> usize {
        gates.iter().filter(|g| matches!(g.kind, GateKind::Zz(_))).count()
    }

    #[test]
    fn zz_block_counts() {
        let cnot = GateKind::Cnot.matrix2().unwrap();
        let seq = block_to_zz(&cnot, 0, 1).unwrap();
        assert_eq!(zz_count(&seq), 1);
        assert!(phase_distance4(&seq_unitary(&seq), &cnot) < 1e-9);
        assert_eq!(zz_count(&block_to_zz(&Mat4::identity(), 0, 1).unwrap()), 0);
        let swap = block_to_zz(&swap4(), 0, 1).unwrap();
        assert_eq!(zz_count(&swap), 3);
        assert!(phase_distance4(&seq_unitary(&swap), &swap4()) < 1e-9);
    }

    // The two interaction-block shapes of the emulation circuit.
    fn interaction_block(theta: f64, first: bool) -> Mat4 {
        let seq = if first {
            [Gate::two(GateKind::Cry(theta), 1, 0), Gate::two(GateKind::Cnot, 0, 1)]
        } else {
            [Gate::two(GateKind::Cry(theta), 0, 1), Gate::two(GateKind::Cnot, 1, 0)]
        };
        seq_unitary(&seq)
    }

    #[test]
    fn interaction_blocks_need_two_zz() {
        for &theta in &[0.2, 1.0, 2.0 * (0.5f64).sqrt().acos(), 2.5, PI - 1e-3] {
            for first in [true, false] {
                let u = interaction_block(theta, first);
                let k = kak_decompose(&u).unwrap();
                let seq = block_to_zz(&u, 0, 1).unwrap();
                assert_eq!(zz_count(&seq), 2, "theta {theta}");
                assert!(phase_distance4(&seq_unitary(&seq), &u) < 1e-9);
                let mut angles: Vec<f64> =
                    seq.iter().filter_map(|g| g.kind.entangling_angle()).map(f64::abs).collect();
                angles.sort_by(|a, b| b.total_cmp(a));
                assert!((angles[0] - 2.0 * k.tx).abs() < 1e-9);
                assert!((angles[1] - 2.0 * k.ty).abs() < 1e-9);
                assert!((k.tx - FRAC_PI_4).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ms_synthesis_matches() {
        for &theta in &[0.4, 2.2] {
            let u = interaction_block(theta, false);
            let k = kak_decompose(&u).unwrap();
            let seq = synthesize_canonical(&k, Entangler::MsXx, 0, 1);
            assert!(phase_distance4(&seq_unitary(&seq), &u) < 1e-9);
            assert!(seq.iter().filter(|g| g.is_two_qubit()).all(|g| matches!(g.kind, GateKind::MsXx(_))));
        }
    }

    #[test]
    fn mirror_choices() {
        let s = mirror_swap_choice(&swap4(), Entangler::Zz, 0, 1).unwrap();
        assert!(s.mirrored);
        assert_eq!(s.gates.iter().filter(|g| g.is_two_qubit()).count(), 0);

        let cnot = GateKind::Cnot.matrix2().unwrap();
        let c = mirror_swap_choice(&cnot, Entangler::Zz, 0, 1).unwrap();
        assert!(!c.mirrored);
        assert!((c.cost - FRAC_PI_4).abs() < 1e-9);
        let mirrored_cost = kak_decompose(&(swap4() * cnot)).unwrap().cost();
        assert!(mirrored_cost > c.cost);

        for &theta in &[0.1, 1.0, 2.0, 3.0] {
            let u = interaction_block(theta, false);
            let m = mirror_swap_choice(&u, Entangler::Zz, 0, 1).unwrap();
            assert!(m.cost <= m.unmirrored_cost + 1e-12);
            let target = if m.mirrored { swap4() * u } else { u };
            assert!(phase_distance4(&seq_unitary(&m.gates), &target) < 1e-9);
        }
    }

    #[test]
    fn rejects_non_unitary_block() {
        let m = Mat4::identity() * C64::from(0.5);
        assert!(block_to_zz(&m, 0, 1).is_err());
        assert!(mirror_swap_choice(&m, Entangler::Zz, 0, 1).is_err());
    }
}
