//! Canonical (KAK) decomposition of two-qubit unitaries.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{c, expi, kron, pauli2, split_product, unitarity_error4, Mat2, Mat4, Pauli, C64, I, ONE, ZERO};

const UNITARY_TOL: f64 = 1e-9;

/// `U = e^{i phase} (k1a ⊗ k1b) CAN(tx, ty, tz) (k2a ⊗ k2b)`.
///
/// `k*a` acts on the first qubit of the pair (the high bit of the local index).
#[derive(Clone, Debug)]
pub struct CanonicalCoords {
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
    pub k1a: Mat2,
    pub k1b: Mat2,
    pub k2a: Mat2,
    pub k2b: Mat2,
    pub phase: f64,
}

impl CanonicalCoords {
    pub fn coords(&self) -> [f64; 3] {
        [self.tx, self.ty, self.tz]
    }

    /// Sum of the canonical coordinates, proportional to the total two-qubit
    /// rotation needed to realise the class.
    pub fn cost(&self) -> f64 {
        self.tx + self.ty + self.tz.abs()
    }

    pub fn in_weyl_chamber(&self, tol: f64) -> bool {
        FRAC_PI_4 + tol >= self.tx && self.tx + tol >= self.ty && self.ty + tol >= self.tz.abs()
    }

    pub fn reassemble(&self) -> Mat4 {
        kron(&self.k1a, &self.k1b) * can(self.tx, self.ty, self.tz) * kron(&self.k2a, &self.k2b) * expi(self.phase)
    }
}

/// `exp(-i (tx XX + ty YY + tz ZZ))`.
pub fn can(tx: f64, ty: f64, tz: f64) -> Mat4 {
    let term = |t: f64, p: Pauli| Mat4::identity() * C64::from(t.cos()) - pauli2(p, p) * (I * t.sin());
    term(tx, Pauli::X) * term(ty, Pauli::Y) * term(tz, Pauli::Z)
}

fn magic() -> Mat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), ZERO, c(0.0, s));
    #[rustfmt::skip]
    let m = Mat4::new(
        o, i, z, z,
        z, z, i, o,
        z, z, i, -o,
        o, -i, z, z,
    );
    m
}

// Diagonals of B† (P⊗P) B for P = X, Y, Z; each is a ±1 vector.
fn magic_diagonals(b: &Mat4) -> [[f64; 4]; 3] {
    let mut out = [[0.0; 4]; 3];
    for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        let d = b.adjoint() * pauli2(p, p) * b;
        for j in 0..4 {
            out[k][j] = d[(j, j)].re;
        }
    }
    out
}

// Real orthogonal matrix simultaneously diagonalising the real and imaginary
// parts of a complex symmetric unitary.
fn simultaneous_eigvecs(m: &Mat4) -> Result<Matrix4<f64>> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let re = (re + re.transpose()) * 0.5;
    let im = (im + im.transpose()) * 0.5;
    // Fixed irrational-ish mixing weights keep the result deterministic.
    let mut a = 0.5772156649015329_f64;
    for _ in 0..16 {
        let mix = re * a.cos() + im * a.sin();
        let p = SymmetricEigen::new(mix).eigenvectors;
        let d = p.transpose() * re * p;
        let e = p.transpose() * im * p;
        let off = (0..4)
            .flat_map(|r| (0..4).map(move |s| (r, s)))
            .filter(|(r, s)| r != s)
            .map(|(r, s)| d[(r, s)].abs().max(e[(r, s)].abs()))
            .fold(0.0, f64::max);
        if off < 1e-11 {
            return Ok(p);
        }
        a += 1.1319736237;
    }
    Err(Error::InvalidGate("magic-basis eigenvectors did not converge".into()))
}

/// Decompose a two-qubit unitary into local gates around a canonical
/// interaction in the Weyl chamber `pi/4 >= tx >= ty >= |tz|`.
pub fn kak_decompose(u: &Mat4) -> Result<CanonicalCoords> {
    let err = unitarity_error4(u);
    if !(err <= UNITARY_TOL) {
        return Err(Error::NotUnitary(err));
    }
    let det = u.determinant();
    let su = u * det.powf(-0.25);
    let b = magic();
    let up = b.adjoint() * su * b;
    let m = up.transpose() * up;
    let mut p = simultaneous_eigvecs(&m)?;
    if p.determinant() < 0.0 {
        p.column_mut(3).neg_mut();
    }
    let pc = p.map(C64::from);
    let lam = pc.transpose() * m * pc;
    let mut phi = [0.0; 4];
    for k in 0..3 {
        phi[k] = lam[(k, k)].arg() / 2.0;
    }
    phi[3] = -(phi[0] + phi[1] + phi[2]);

    let diag = magic_diagonals(&b);
    let mut t = [0.0; 3];
    for k in 0..3 {
        t[k] = -(0..4).map(|j| phi[j] * diag[k][j]).sum::<f64>() / 4.0;
    }
    let dinv = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|j, _| expi(-phi[j])));
    let k1 = b * (up * pc * dinv) * b.adjoint();
    let k2 = b * pc.transpose() * b.adjoint();
    let (k1a, k1b, _) = split_product(&k1);
    let (k2a, k2b, _) = split_product(&k2);

    let mut out = CanonicalCoords { tx: t[0], ty: t[1], tz: t[2], k1a, k1b, k2a, k2b, phase: 0.0 };
    canonicalize(&mut out);
    let r = out.reassemble();
    out.phase = (r.adjoint() * u).trace().arg();
    Ok(out)
}

fn axis(k: usize) -> Pauli {
    [Pauli::X, Pauli::Y, Pauli::Z][k]
}

fn coord_mut(cc: &mut CanonicalCoords, k: usize) -> &mut f64 {
    match k {
        0 => &mut cc.tx,
        1 => &mut cc.ty,
        _ => &mut cc.tz,
    }
}

// Local V with V P_j V† = P_k and V P_k V† = -P_j.
fn swapper(j: usize, k: usize) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match (j.min(k), j.max(k)) {
        (0, 1) => Mat2::new(ONE, ZERO, ZERO, I),
        (1, 2) => Mat2::new(c(s, 0.0), c(0.0, -s), c(0.0, -s), c(s, 0.0)),
        _ => Mat2::new(c(s, 0.0), c(-s, 0.0), c(s, 0.0), c(s, 0.0)),
    }
}

fn shift(cc: &mut CanonicalCoords, k: usize) {
    let t = *coord_mut(cc, k);
    let m = (t / FRAC_PI_2).round();
    *coord_mut(cc, k) = t - m * FRAC_PI_2;
    if (m as i64).rem_euclid(2) == 1 {
        let p = axis(k).matrix();
        cc.k2a = p * cc.k2a;
        cc.k2b = p * cc.k2b;
    }
}

fn swap_coords(cc: &mut CanonicalCoords, j: usize, k: usize) {
    let v = swapper(j, k);
    let (tj, tk) = (*coord_mut(cc, j), *coord_mut(cc, k));
    *coord_mut(cc, j) = tk;
    *coord_mut(cc, k) = tj;
    cc.k1a *= v.adjoint();
    cc.k1b *= v.adjoint();
    cc.k2a = v * cc.k2a;
    cc.k2b = v * cc.k2b;
}

fn flip_pair(cc: &mut CanonicalCoords, j: usize, k: usize) {
    let l = 3 - j - k;
    let p = axis(l).matrix();
    *coord_mut(cc, j) = -*coord_mut(cc, j);
    *coord_mut(cc, k) = -*coord_mut(cc, k);
    cc.k1a *= p;
    cc.k2a = p * cc.k2a;
}

fn canonicalize(cc: &mut CanonicalCoords) {
    for k in 0..3 {
        shift(cc, k);
    }
    for _ in 0..3 {
        for j in 0..2 {
            if coord_mut(cc, j).abs() < coord_mut(cc, j + 1).abs() {
                swap_coords(cc, j, j + 1);
            }
        }
    }
    match (cc.tx < 0.0, cc.ty < 0.0) {
        (true, true) => flip_pair(cc, 0, 1),
        (true, false) => flip_pair(cc, 0, 2),
        (false, true) => flip_pair(cc, 1, 2),
        _ => {}
    }
    // On the tx = pi/4 face the sign of tz is a free choice; prefer tz >= 0.
    if (cc.tx - FRAC_PI_4).abs() < 1e-12 && cc.tz < 0.0 {
        *coord_mut(cc, 0) -= FRAC_PI_2;
        let p = Pauli::X.matrix();
        cc.k2a = p * cc.k2a;
        cc.k2b = p * cc.k2b;
        flip_pair(cc, 0, 2);
    }
}
