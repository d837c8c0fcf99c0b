use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::linalg::{expi, kron, zyz, Mat2, Mat4, Pauli, C64, I, ONE, ZERO};

/// Gate kinds with their angle parameters (radians).
///
/// Rotation conventions: `RX(t) = exp(-i t X/2)` (likewise `RY`, `RZ`),
/// `ZZ(t) = exp(-i (t/2) Z⊗Z)`, `MS_XX(t) = exp(-i (t/2) X⊗X)`.
/// `U1q(theta, phi, lambda)` is the general single-qubit rotation
/// `RZ(phi) RY(theta) RZ(lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// Controlled `RY`; qubits are `(control, target)`.
    Cry(f64),
    /// Qubits are `(control, target)`.
    Cnot,
    Cz,
    Zz(f64),
    MsXx(f64),
    Swap,
    U1q { theta: f64, phi: f64, lambda: f64 },
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::U1q { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Cry(_) => "CRY",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Zz(_) => "ZZ",
            GateKind::MsXx(_) => "MS_XX",
            GateKind::Swap => "SWAP",
            GateKind::U1q { .. } => "U1q",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Cry(t) | GateKind::Zz(t) | GateKind::MsXx(t) => {
                vec![t]
            }
            GateKind::U1q { theta, phi, lambda } => vec![theta, phi, lambda],
            _ => Vec::new(),
        }
    }

    pub fn arity_of_name(name: &str) -> Option<usize> {
        match name {
            "X" | "H" | "RX" | "RY" | "RZ" | "U1q" => Some(1),
            "CRY" | "CNOT" | "CZ" | "ZZ" | "MS_XX" | "SWAP" => Some(2),
            _ => None,
        }
    }

    pub fn from_name(name: &str, params: &[f64]) -> Option<GateKind> {
        let one = |f: fn(f64) -> GateKind| (params.len() == 1).then(|| f(params[0]));
        let none = |k: GateKind| params.is_empty().then_some(k);
        match name {
            "X" => none(GateKind::X),
            "H" => none(GateKind::H),
            "RX" => one(GateKind::Rx),
            "RY" => one(GateKind::Ry),
            "RZ" => one(GateKind::Rz),
            "CRY" => one(GateKind::Cry),
            "CNOT" => none(GateKind::Cnot),
            "CZ" => none(GateKind::Cz),
            "ZZ" => one(GateKind::Zz),
            "MS_XX" => one(GateKind::MsXx),
            "SWAP" => none(GateKind::Swap),
            "U1q" => (params.len() == 3).then(|| GateKind::U1q { theta: params[0], phi: params[1], lambda: params[2] }),
            _ => None,
        }
    }

    pub fn matrix1(&self) -> Option<Mat2> {
        let m = match *self {
            GateKind::X => Pauli::X.matrix(),
            GateKind::H => Mat2::new(ONE, ONE, ONE, -ONE) * C64::from(FRAC_1_SQRT_2),
            GateKind::Rx(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                Mat2::new(C64::from(c), -I * s, -I * s, C64::from(c))
            }
            GateKind::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                Mat2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
            }
            GateKind::Rz(t) => Mat2::new(expi(-t / 2.0), ZERO, ZERO, expi(t / 2.0)),
            GateKind::U1q { theta, phi, lambda } => zyz(theta, phi, lambda),
            _ => return None,
        };
        Some(m)
    }

    pub fn matrix2(&self) -> Option<Mat4> {
        let m = match *self {
            GateKind::Cry(t) => controlled(&GateKind::Ry(t).matrix1().unwrap()),
            GateKind::Cnot => controlled(&Pauli::X.matrix()),
            GateKind::Cz => Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE, -ONE)),
            GateKind::Zz(t) => {
                let (a, b) = (expi(-t / 2.0), expi(t / 2.0));
                Mat4::from_diagonal(&nalgebra::Vector4::new(a, b, b, a))
            }
            GateKind::MsXx(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                let xx = kron(&Pauli::X.matrix(), &Pauli::X.matrix());
                Mat4::identity() * C64::from(c) - xx * (I * s)
            }
            GateKind::Swap => crate::linalg::swap4(),
            _ => return None,
        };
        Some(m)
    }

    /// Angle that sets the drive strength of an entangling gate, if any.
    pub fn entangling_angle(&self) -> Option<f64> {
        match *self {
            GateKind::Zz(t) | GateKind::MsXx(t) => Some(t),
            _ => None,
        }
    }

    pub fn with_angle(&self, t: f64) -> GateKind {
        match *self {
            GateKind::Rx(_) => GateKind::Rx(t),
            GateKind::Ry(_) => GateKind::Ry(t),
            GateKind::Rz(_) => GateKind::Rz(t),
            GateKind::Cry(_) => GateKind::Cry(t),
            GateKind::Zz(_) => GateKind::Zz(t),
            GateKind::MsXx(_) => GateKind::MsXx(t),
            k => k,
        }
    }
}

fn controlled(u: &Mat2) -> Mat4 {
    let mut m = Mat4::identity();
    for r in 0..2 {
        for c in 0..2 {
            m[(2 + r, 2 + c)] = u[(r, c)];
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
}

impl Gate {
    pub fn one(kind: GateKind, q: usize) -> Gate {
        debug_assert_eq!(kind.arity(), 1);
        Gate { kind, qubits: [q, usize::MAX] }
    }

    pub fn two(kind: GateKind, q0: usize, q1: usize) -> Gate {
        debug_assert_eq!(kind.arity(), 2);
        Gate { kind, qubits: [q0, q1] }
    }

    pub fn new(kind: GateKind, qubits: &[usize]) -> Option<Gate> {
        match (kind.arity(), qubits) {
            (1, &[q]) => Some(Gate::one(kind, q)),
            (2, &[a, b]) if a != b => Some(Gate::two(kind, a, b)),
            _ => None,
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// Both qubits of a two-qubit gate (the second is `usize::MAX` for a
    /// single-qubit gate).
    pub fn pair(&self) -> [usize; 2] {
        self.qubits
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == 2
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().contains(&q)
    }

    pub fn remap(&self, map: &[usize]) -> Gate {
        let mut g = *self;
        for q in g.qubits.iter_mut().take(self.kind.arity()) {
            *q = map[*q];
        }
        g
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.kind.name())?;
        let fields: Vec<String> =
            self.qubits().iter().map(|q| q.to_string()).chain(self.kind.params().iter().map(|p| format!("{p:?}"))).collect();
        write!(f, "{}", fields.join(","))
    }
}
