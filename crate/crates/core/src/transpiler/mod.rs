//! Compilation of emulation circuits to trapped-ion and superconducting
//! native gate sets.
//!
//! The pipeline is: optional star-to-line routing, two-qubit lowering
//! (gate-by-gate rewrites, or block fusion plus canonical synthesis with
//! optional SWAP mirroring), single-qubit lowering, and optional fusion of
//! single-qubit runs. Every pass preserves the ideal output distribution up
//! to the circuit's readout relabeling.

mod decompose;
mod kak;
mod route;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use decompose::{
    block_to_zz, cnot_to_cz, cnot_to_msxx, decompose_cry, local_gate, mirror_swap_choice, swap_to_cz,
    synthesize_canonical, Entangler, MirrorChoice, COORD_EPS,
};
pub use kak::{can, kak_decompose, CanonicalCoords};
pub use route::{respects_chain, route_star_to_line};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{euler_zyz, kron, phase_distance2, swap4, Mat2, Mat4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SingleQubitNative {
    #[serde(rename = "RX")]
    Rx,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "U1q")]
    U1q,
}

impl SingleQubitNative {
    fn name(self) -> &'static str {
        match self {
            SingleQubitNative::Rx => "RX",
            SingleQubitNative::Ry => "RY",
            SingleQubitNative::Rz => "RZ",
            SingleQubitNative::U1q => "U1q",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    AllToAll,
    /// Physical wires in chain order.
    LinearChain(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSetSpec {
    pub native_two_qubit: Entangler,
    pub native_single_qubit: Vec<SingleQubitNative>,
    pub connectivity: Connectivity,
}

impl GateSetSpec {
    /// Trapped-ion profile: all-to-all coupling through shared motional modes.
    pub fn ion(native_two_qubit: Entangler) -> GateSetSpec {
        GateSetSpec {
            native_two_qubit,
            native_single_qubit: vec![
                SingleQubitNative::Rx,
                SingleQubitNative::Ry,
                SingleQubitNative::Rz,
                SingleQubitNative::U1q,
            ],
            connectivity: Connectivity::AllToAll,
        }
    }

    /// Superconducting profile: `CZ` on a linear chain of `width` qubits.
    pub fn superconducting(width: usize) -> GateSetSpec {
        GateSetSpec {
            native_two_qubit: Entangler::Cz,
            native_single_qubit: vec![SingleQubitNative::Rz, SingleQubitNative::U1q],
            connectivity: Connectivity::LinearChain((0..width).collect()),
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        if self.native_single_qubit.is_empty() {
            return Err(Error::Options("no native single-qubit gates".into()));
        }
        if let Connectivity::LinearChain(chain) = &self.connectivity {
            let mut s = chain.clone();
            s.sort_unstable();
            if s != (0..width).collect::<Vec<_>>() {
                return Err(Error::Options(format!("chain {chain:?} is not a permutation of 0..{width}")));
            }
        }
        Ok(())
    }

    fn allows_single(&self, kind: &GateKind) -> bool {
        self.native_single_qubit.iter().any(|n| n.name() == kind.name())
    }

    fn allows_two(&self, kind: &GateKind) -> bool {
        kind.name() == self.native_two_qubit.name()
    }

    fn has(&self, n: SingleQubitNative) -> bool {
        self.native_single_qubit.contains(&n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranspileOptions {
    /// Fuse two-qubit blocks and synthesize each with one rotation-angle
    /// entangler per canonical coordinate.
    pub use_zz: bool,
    /// Compile `SWAP · U` instead of `U` when cheaper (requires `use_zz`).
    pub mirror: bool,
    /// Route onto the linear chain (requires linear connectivity).
    pub route: bool,
    /// Merge runs of single-qubit gates.
    pub fuse_single_qubit: bool,
    /// Chain position of the cavity/environment qubit when routing.
    pub hub_position: usize,
}

impl Default for TranspileOptions {
    fn default() -> Self {
        TranspileOptions { use_zz: false, mirror: false, route: false, fuse_single_qubit: false, hub_position: 1 }
    }
}

/// Per-circuit compilation record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompilationReport {
    pub census: BTreeMap<String, usize>,
    pub two_qubit_gates: usize,
    /// Sum over two-qubit gates of twice their canonical-coordinate sum
    /// (`|angle|` for `ZZ` and `MS_XX`).
    pub total_entangling_angle: f64,
    pub swaps_inserted: usize,
    pub blocks: usize,
    pub mirrored_blocks: usize,
    /// Total entangling angle the fused blocks would have needed unmirrored.
    pub unmirrored_entangling_angle: f64,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub circuit: Circuit,
    pub report: CompilationReport,
}

/// Twice the canonical-coordinate sum of a two-qubit gate.
pub fn entangling_angle(gate: &Gate) -> f64 {
    if let Some(t) = gate.kind.entangling_angle() {
        return t.abs();
    }
    match gate.kind.matrix2() {
        Some(m) => 2.0 * kak_decompose(&m).map(|k| k.cost()).unwrap_or(0.0),
        None => 0.0,
    }
}

pub fn total_entangling_angle(circuit: &Circuit) -> f64 {
    circuit.gates().iter().filter(|g| g.is_two_qubit()).map(entangling_angle).sum()
}

/// Compile `circuit` to `spec`.
pub fn transpile(circuit: &Circuit, spec: &GateSetSpec, options: &TranspileOptions) -> Result<Compiled> {
    spec.validate(circuit.width())?;
    if options.mirror && !options.use_zz {
        return Err(Error::Options("mirroring needs block synthesis (use_zz)".into()));
    }
    if options.use_zz && spec.native_two_qubit == Entangler::Cz {
        return Err(Error::Options("block synthesis needs a rotation-angle entangler".into()));
    }
    let chain = match &spec.connectivity {
        Connectivity::LinearChain(c) => Some(c.as_slice()),
        Connectivity::AllToAll => None,
    };
    if options.route && chain.is_none() {
        return Err(Error::Options("routing needs linear connectivity".into()));
    }

    let mut report = CompilationReport::default();
    let mut current = circuit.clone();
    if let (true, Some(chain)) = (options.route, chain) {
        let before = count_swaps(&current);
        current = route_star_to_line(&current, chain, options.hub_position)?;
        report.swaps_inserted = count_swaps(&current) - before;
    }
    current = if options.use_zz {
        fuse_blocks(&current, spec.native_two_qubit, options.mirror, &mut report)?
    } else {
        lower_two_qubit(&current, spec.native_two_qubit)?
    };
    current = lower_single_qubit(&current, spec)?;
    if options.fuse_single_qubit {
        current = fuse_single_qubit(&current, spec)?;
    }
    check_native(&current, spec)?;

    report.census = current.census();
    report.two_qubit_gates = current.two_qubit_count();
    report.total_entangling_angle = total_entangling_angle(&current);
    if !options.use_zz {
        report.unmirrored_entangling_angle = report.total_entangling_angle;
    }
    Ok(Compiled { circuit: current, report })
}

fn count_swaps(c: &Circuit) -> usize {
    c.gates().iter().filter(|g| g.kind == GateKind::Swap).count()
}

fn rebuild(source: &Circuit, gates: Vec<Gate>, relabeling: Option<Vec<usize>>) -> Result<Circuit> {
    let mut out = source.empty_like();
    out.extend(gates)?;
    if let Some(r) = relabeling {
        out.set_relabeling(r)?;
    }
    Ok(out)
}

fn lower_gate(gate: &Gate, native: Entangler, out: &mut Vec<Gate>) -> Result<()> {
    if !gate.is_two_qubit() || gate.kind.name() == native.name() {
        out.push(*gate);
        return Ok(());
    }
    let [a, b] = gate.pair();
    let h = |q| Gate::one(GateKind::H, q);
    let rewritten = match (gate.kind, native) {
        (GateKind::Cry(_), _) => decompose_cry(gate)?,
        (GateKind::Cnot, Entangler::MsXx) => cnot_to_msxx(gate)?,
        (GateKind::Cnot, Entangler::Cz) => cnot_to_cz(gate)?,
        (GateKind::Swap, Entangler::Cz) => swap_to_cz(gate)?,
        (GateKind::Swap, _) => {
            vec![Gate::two(GateKind::Cnot, a, b), Gate::two(GateKind::Cnot, b, a), Gate::two(GateKind::Cnot, a, b)]
        }
        (GateKind::Zz(t), Entangler::MsXx) => vec![h(a), h(b), Gate::two(GateKind::MsXx(t), a, b), h(a), h(b)],
        (GateKind::MsXx(t), _) => vec![h(a), h(b), Gate::two(GateKind::Zz(t), a, b), h(a), h(b)],
        (GateKind::Zz(t), Entangler::Cz) => {
            vec![Gate::two(GateKind::Cnot, a, b), Gate::one(GateKind::Rz(t), b), Gate::two(GateKind::Cnot, a, b)]
        }
        (kind, _) => {
            let m = kind.matrix2().ok_or_else(|| Error::InvalidGate(format!("cannot lower {gate}")))?;
            synthesize_canonical(&kak_decompose(&m)?, native, a, b)
        }
    };
    for g in &rewritten {
        lower_gate(g, native, out)?;
    }
    Ok(())
}

/// Gate-by-gate rewrite of every two-qubit gate into the native entangler.
pub fn lower_two_qubit(circuit: &Circuit, native: Entangler) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.gates().len() * 3);
    for g in circuit.gates() {
        lower_gate(g, native, &mut gates)?;
    }
    rebuild(circuit, gates, None)
}

struct Block {
    a: usize,
    b: usize,
    u: Mat4,
}

/// Fuse maximal runs of gates on one qubit pair and synthesize each run
/// from its canonical decomposition.
fn fuse_blocks(circuit: &Circuit, native: Entangler, mirror: bool, report: &mut CompilationReport) -> Result<Circuit> {
    let w = circuit.width();
    // Input wire -> wire currently holding its state.
    let mut map: Vec<usize> = (0..w).collect();
    let mut out = Vec::new();
    let mut pending: Option<Block> = None;

    for g0 in circuit.gates() {
        let mut g = g0.remap(&map);
        if g.is_two_qubit() {
            let [x, y] = g.pair();
            let m = g.kind.matrix2().ok_or_else(|| Error::InvalidGate(format!("no matrix for {g}")))?;
            match pending.as_mut() {
                Some(blk) if (blk.a, blk.b) == (x, y) => blk.u = m * blk.u,
                Some(blk) if (blk.a, blk.b) == (y, x) => blk.u = swap4() * m * swap4() * blk.u,
                _ => {
                    if let Some(blk) = pending.take() {
                        flush_block(blk, native, mirror, &mut map, &mut out, report)?;
                        // A mirrored block moves wires; re-resolve the gate.
                        g = g0.remap(&map);
                    }
                    let [x, y] = g.pair();
                    pending = Some(Block { a: x, b: y, u: m });
                }
            }
        } else {
            let q = g.qubits()[0];
            let m = g.kind.matrix1().ok_or_else(|| Error::InvalidGate(format!("no matrix for {g}")))?;
            match pending.as_mut() {
                Some(blk) if blk.a == q => blk.u = kron(&m, &Mat2::identity()) * blk.u,
                Some(blk) if blk.b == q => blk.u = kron(&Mat2::identity(), &m) * blk.u,
                _ => out.push(g),
            }
        }
    }
    if let Some(blk) = pending.take() {
        flush_block(blk, native, mirror, &mut map, &mut out, report)?;
    }
    let relabeling = circuit.relabeling().iter().map(|&q| map[q]).collect();
    rebuild(circuit, out, Some(relabeling))
}

fn flush_block(
    block: Block,
    native: Entangler,
    mirror: bool,
    map: &mut [usize],
    out: &mut Vec<Gate>,
    report: &mut CompilationReport,
) -> Result<()> {
    report.blocks += 1;
    if !mirror {
        let k = kak_decompose(&block.u)?;
        report.unmirrored_entangling_angle += 2.0 * k.cost();
        out.extend(synthesize_canonical(&k, native, block.a, block.b));
        return Ok(());
    }
    let choice = mirror_swap_choice(&block.u, native, block.a, block.b)?;
    report.unmirrored_entangling_angle += 2.0 * choice.unmirrored_cost;
    if choice.mirrored {
        report.mirrored_blocks += 1;
        for m in map.iter_mut() {
            if *m == block.a {
                *m = block.b;
            } else if *m == block.b {
                *m = block.a;
            }
        }
    }
    out.extend(choice.gates);
    Ok(())
}

fn lower_one(gate: &Gate, spec: &GateSetSpec, out: &mut Vec<Gate>) -> Result<()> {
    if gate.is_two_qubit() || spec.allows_single(&gate.kind) {
        out.push(*gate);
        return Ok(());
    }
    let q = gate.qubits()[0];
    if gate.kind == GateKind::X && spec.has(SingleQubitNative::Rx) {
        out.push(Gate::one(GateKind::Rx(std::f64::consts::PI), q));
        return Ok(());
    }
    let m = gate.kind.matrix1().ok_or_else(|| Error::InvalidGate(format!("no matrix for {gate}")))?;
    emit_local(&m, q, spec, out)
}

fn emit_local(m: &Mat2, q: usize, spec: &GateSetSpec, out: &mut Vec<Gate>) -> Result<()> {
    if phase_distance2(m, &Mat2::identity()) < 1e-12 {
        return Ok(());
    }
    let (theta, phi, lambda) = euler_zyz(m);
    if spec.has(SingleQubitNative::U1q) {
        out.push(Gate::one(GateKind::U1q { theta, phi, lambda }, q));
    } else if spec.has(SingleQubitNative::Rz) && spec.has(SingleQubitNative::Ry) {
        for k in [GateKind::Rz(lambda), GateKind::Ry(theta), GateKind::Rz(phi)] {
            if k.params()[0].abs() > 1e-14 {
                out.push(Gate::one(k, q));
            }
        }
    } else if spec.has(SingleQubitNative::Rz) && spec.has(SingleQubitNative::Rx) {
        // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2)
        let h = std::f64::consts::FRAC_PI_2;
        for k in [GateKind::Rz(lambda - h), GateKind::Rx(theta), GateKind::Rz(phi + h)] {
            if k.params()[0].abs() > 1e-14 {
                out.push(Gate::one(k, q));
            }
        }
    } else {
        return Err(Error::Options("native single-qubit set cannot express arbitrary rotations".into()));
    }
    Ok(())
}

/// Rewrite non-native single-qubit gates.
pub fn lower_single_qubit(circuit: &Circuit, spec: &GateSetSpec) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for g in circuit.gates() {
        lower_one(g, spec, &mut gates)?;
    }
    rebuild(circuit, gates, None)
}

/// Merge each run of single-qubit gates on a wire into one native rotation.
pub fn fuse_single_qubit(circuit: &Circuit, spec: &GateSetSpec) -> Result<Circuit> {
    let mut pending: Vec<Option<Mat2>> = vec![None; circuit.width()];
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for g in circuit.gates() {
        if g.is_two_qubit() {
            for &q in g.qubits() {
                if let Some(m) = pending[q].take() {
                    emit_local(&m, q, spec, &mut gates)?;
                }
            }
            gates.push(*g);
        } else {
            let q = g.qubits()[0];
            let m = g.kind.matrix1().ok_or_else(|| Error::InvalidGate(format!("no matrix for {g}")))?;
            pending[q] = Some(m * pending[q].unwrap_or_else(Mat2::identity));
        }
    }
    for (q, m) in pending.into_iter().enumerate() {
        if let Some(m) = m {
            emit_local(&m, q, spec, &mut gates)?;
        }
    }
    rebuild(circuit, gates, None)
}

fn check_native(circuit: &Circuit, spec: &GateSetSpec) -> Result<()> {
    for g in circuit.gates() {
        let ok = if g.is_two_qubit() { spec.allows_two(&g.kind) } else { spec.allows_single(&g.kind) };
        if !ok {
            return Err(Error::InvalidGate(format!("{g} is not native to the target gate set")));
        }
    }
    if let Connectivity::LinearChain(chain) = &spec.connectivity {
        if !respects_chain(circuit, chain) {
            return Err(Error::Routing("two-qubit gate on non-adjacent chain positions".into()));
        }
    }
    Ok(())
}
