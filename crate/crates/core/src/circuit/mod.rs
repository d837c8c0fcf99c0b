//! Gate-level IR, emulation-circuit synthesis and ideal execution.
//!
//! A [`Circuit`] acts on `width` wires. Readout goes through
//! `relabeling`: logical qubit `q` is read from wire `relabeling[q]`, which
//! lets compiler passes move qubits around (mirror SWAPs, routing) without
//! changing what the circuit means. [`Role`]s are attached to logical qubits.
//!
//! Qubit 0 is the least significant bit of every basis index and the
//! rightmost character of every bitstring.

mod counts;
mod gate;
mod sim;
mod synth;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use counts::Counts;
pub use gate::{Gate, GateKind};
pub use sim::{
    apply_gate, apply_one, apply_two, gate_unitary, sample_counts, sample_from_probs, simulate_statevector, unitary_of,
    MAX_STATEVECTOR_WIDTH, MAX_UNITARY_WIDTH,
};
pub use synth::{qmarina_angles, synthesize_qmarina, RESIDUAL_EPS};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    CavityEnv,
    /// 1-based emitter index.
    Emitter(usize),
}

impl Role {
    fn label(&self) -> String {
        match self {
            Role::CavityEnv => "cav".to_string(),
            Role::Emitter(i) => format!("e{i}"),
        }
    }

    fn parse(s: &str) -> Option<Role> {
        if s == "cav" {
            return Some(Role::CavityEnv);
        }
        s.strip_prefix('e').and_then(|i| i.parse().ok()).filter(|&i| i >= 1).map(Role::Emitter)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    roles: Vec<Role>,
    relabeling: Vec<usize>,
}

impl Circuit {
    /// Empty circuit with qubit 0 as cavity/environment and qubit `i` as
    /// emitter `i`.
    pub fn new(width: usize) -> Circuit {
        assert!(width >= 1, "circuit needs at least one qubit");
        let roles = std::iter::once(Role::CavityEnv).chain((1..width).map(Role::Emitter)).collect();
        Circuit { width, gates: Vec::new(), roles, relabeling: (0..width).collect() }
    }

    pub fn with_roles(roles: Vec<Role>) -> Result<Circuit> {
        let c = Circuit { width: roles.len(), gates: Vec::new(), relabeling: (0..roles.len()).collect(), roles };
        c.check_roles()?;
        Ok(c)
    }

    fn check_roles(&self) -> Result<()> {
        let n = self.width - 1;
        let mut seen: Vec<Role> = self.roles.clone();
        seen.sort();
        let expected: Vec<Role> = std::iter::once(Role::CavityEnv).chain((1..=n).map(Role::Emitter)).collect();
        if seen != expected {
            return Err(Error::InvalidGate(format!("roles {:?} are not one cavity plus emitters 1..={n}", self.roles)));
        }
        Ok(())
    }

    /// A copy with the same width, roles and relabeling but no gates.
    pub fn empty_like(&self) -> Circuit {
        Circuit { gates: Vec::new(), ..self.clone() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn relabeling(&self) -> &[usize] {
        &self.relabeling
    }

    pub fn n_emitters(&self) -> usize {
        self.width - 1
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if qs.iter().any(|&q| q >= self.width) {
            return Err(Error::InvalidGate(format!("{gate} exceeds width {}", self.width)));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidGate(format!("{gate} repeats a qubit")));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub fn set_relabeling(&mut self, relabeling: Vec<usize>) -> Result<()> {
        let mut sorted = relabeling.clone();
        sorted.sort_unstable();
        if sorted != (0..self.width).collect::<Vec<_>>() {
            return Err(Error::InvalidGate(format!("relabeling {relabeling:?} is not a permutation")));
        }
        self.relabeling = relabeling;
        Ok(())
    }

    /// Logical qubit carrying `role`.
    pub fn qubit_of(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    /// Wire on which `role` is read out at the end of the circuit.
    pub fn final_wire_of(&self, role: Role) -> Option<usize> {
        self.qubit_of(role).map(|q| self.relabeling[q])
    }

    /// Role read out from each wire.
    pub fn physical_roles(&self) -> Vec<Role> {
        let mut out = self.roles.clone();
        for (q, &w) in self.relabeling.iter().enumerate() {
            out[w] = self.roles[q];
        }
        out
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Gate counts by kind name.
    pub fn census(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind.name().to_string()).or_insert(0) += 1;
        }
        m
    }

    /// Map a wire-ordered basis index to the logical readout order.
    pub fn readout_index(&self, wire_index: usize) -> usize {
        self.relabeling
            .iter()
            .enumerate()
            .fold(0, |acc, (q, &w)| acc | (((wire_index >> w) & 1) << q))
    }

    /// Text form: a header with width, roles and relabeling, then one
    /// `KIND q0[,q1][,angles...]` line per gate.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# cqed circuit v1\n");
        writeln!(s, "width {}", self.width).unwrap();
        let roles: Vec<String> = self.roles.iter().map(Role::label).collect();
        writeln!(s, "roles {}", roles.join(",")).unwrap();
        let rel: Vec<String> = self.relabeling.iter().map(|q| q.to_string()).collect();
        writeln!(s, "relabel {}", rel.join(",")).unwrap();
        for g in &self.gates {
            writeln!(s, "{g}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut width = None;
        let mut roles = None;
        let mut relabel = None;
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "width" => width = Some(rest.parse::<usize>().map_err(|e| perr(lineno, e.to_string()))?),
                "roles" => {
                    let r: Option<Vec<Role>> = rest.split(',').map(|s| Role::parse(s.trim())).collect();
                    roles = Some(r.ok_or_else(|| perr(lineno, format!("bad roles '{rest}'")))?);
                }
                "relabel" => {
                    let r: std::result::Result<Vec<usize>, _> = rest.split(',').map(|s| s.trim().parse()).collect();
                    relabel = Some(r.map_err(|e| perr(lineno, e.to_string()))?);
                }
                name => {
                    let fields: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
                    let arity = GateKind::arity_of_name(name).ok_or_else(|| perr(lineno, format!("unknown gate '{line}'")))?;
                    if fields.len() < arity {
                        return Err(perr(lineno, format!("missing qubits in '{line}'")));
                    }
                    let qubits: std::result::Result<Vec<usize>, _> = fields[..arity].iter().map(|s| s.parse()).collect();
                    let qubits = qubits.map_err(|e| perr(lineno, e.to_string()))?;
                    let params: std::result::Result<Vec<f64>, _> = fields[arity..].iter().map(|s| s.parse()).collect();
                    let params = params.map_err(|e| perr(lineno, e.to_string()))?;
                    let kind = GateKind::from_name(name, &params).ok_or_else(|| perr(lineno, format!("bad parameters in '{line}'")))?;
                    let gate = Gate::new(kind, &qubits).ok_or_else(|| perr(lineno, format!("bad qubits in '{line}'")))?;
                    gates.push(gate);
                }
            }
        }
        let width = width.ok_or_else(|| perr(0, "missing width".into()))?;
        let roles = roles.ok_or_else(|| perr(0, "missing roles".into()))?;
        if roles.len() != width {
            return Err(perr(0, "role count differs from width".into()));
        }
        let mut c = Circuit::with_roles(roles)?;
        if let Some(r) = relabel {
            c.set_relabeling(r)?;
        }
        c.extend(gates)?;
        Ok(c)
    }
}
