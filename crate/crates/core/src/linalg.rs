//! Small dense complex linear algebra used by the circuit and compiler code.
//!
//! Two-qubit matrices use the textbook ordering: for a gate acting on
//! `(q0, q1)` the local basis index is `2*b(q0) + b(q1)`, so `kron(a, b)` puts
//! `a` on `q0`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn expi(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Mat2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

pub fn pauli2(a: Pauli, b: Pauli) -> Mat4 {
    kron(&a.matrix(), &b.matrix())
}

pub fn swap4() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// Largest entry of `|U^† U - 1|`.
pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn unitarity_error4(m: &Mat4) -> f64 {
    let prod = m.adjoint() * m;
    (prod - Mat4::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-entry distance between `a` and `b` after removing the best global
/// phase.
pub fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: C64 = b.iter().zip(a.iter()).map(|(y, x)| y.conj() * x).sum();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

pub fn phase_distance4(a: &Mat4, b: &Mat4) -> f64 {
    let da = DMatrix::from_iterator(4, 4, a.iter().copied());
    let db = DMatrix::from_iterator(4, 4, b.iter().copied());
    phase_distance(&da, &db)
}

pub fn phase_distance2(a: &Mat2, b: &Mat2) -> f64 {
    let da = DMatrix::from_iterator(2, 2, a.iter().copied());
    let db = DMatrix::from_iterator(2, 2, b.iter().copied());
    phase_distance(&da, &db)
}

/// `RZ(phi) RY(theta) RZ(lambda)`, i.e. `U1q(theta, phi, lambda)` without its
/// global phase.
pub fn zyz(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(
        expi(-(phi + lambda) / 2.0) * co,
        -expi(-(phi - lambda) / 2.0) * s,
        expi((phi - lambda) / 2.0) * s,
        expi((phi + lambda) / 2.0) * co,
    )
}

/// Angles `(theta, phi, lambda)` with `U = e^{i a} RZ(phi) RY(theta) RZ(lambda)`.
pub fn euler_zyz(u: &Mat2) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u / det.sqrt();
    let theta = 2.0 * v[(1, 0)].norm().atan2(v[(0, 0)].norm());
    let tol = 1e-14;
    let (sum, diff) = if v[(0, 0)].norm() > tol && v[(1, 0)].norm() > tol {
        (2.0 * v[(1, 1)].arg(), 2.0 * v[(1, 0)].arg())
    } else if v[(0, 0)].norm() > tol {
        (2.0 * v[(1, 1)].arg(), 0.0)
    } else {
        (0.0, 2.0 * v[(1, 0)].arg())
    };
    let phi = (sum + diff) / 2.0;
    let lambda = (sum - diff) / 2.0;
    (theta, wrap_angle(phi), wrap_angle(lambda))
}

/// Map an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Split `m = a ⊗ b` into its factors (each fixed only up to a phase shared
/// between them). Returns the residual of the reconstruction.
pub fn split_product(m: &Mat4) -> (Mat2, Mat2, f64) {
    // Pick the 2x2 block with the largest norm; it is proportional to `b`.
    let mut best = (0, 0);
    let mut best_norm = -1.0;
    for i in 0..2 {
        for k in 0..2 {
            let n: f64 = (0..2)
                .flat_map(|j| (0..2).map(move |l| (j, l)))
                .map(|(j, l)| m[(2 * i + j, 2 * k + l)].norm_sqr())
                .sum();
            if n > best_norm {
                best_norm = n;
                best = (i, k);
            }
        }
    }
    let (i, k) = best;
    let block = Mat2::from_fn(|j, l| m[(2 * i + j, 2 * k + l)]);
    let det = block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)];
    let b = block / det.sqrt();
    let a = Mat2::from_fn(|r, cc| {
        let blk = Mat2::from_fn(|j, l| m[(2 * r + j, 2 * cc + l)]);
        (b.adjoint() * blk).trace() / 2.0
    });
    let resid = (kron(&a, &b) - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (a, b, resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rz(t: f64) -> Mat2 {
        Mat2::new(expi(-t / 2.0), ZERO, ZERO, expi(t / 2.0))
    }
    fn ry(t: f64) -> Mat2 {
        let (s, c) = (t / 2.0).sin_cos();
        Mat2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
    }

    #[test]
    fn zyz_matches_rotation_product() {
        let m = zyz(0.7, -1.1, 2.3);
        let direct = rz(-1.1) * ry(0.7) * rz(2.3);
        assert!((m - direct).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn euler_round_trip() {
        for &(t, p, l) in &[(0.3, 0.2, -0.4), (0.0, 0.5, 0.1), (PI, 0.3, 0.9), (2.0, -3.0, 3.0)] {
            let u = zyz(t, p, l) * expi(0.37);
            let (t2, p2, l2) = euler_zyz(&u);
            assert!(phase_distance2(&u, &zyz(t2, p2, l2)) < 1e-12, "{t} {p} {l}");
        }
        let h = Mat2::new(ONE, ONE, ONE, -ONE) .map(|z| z / 2f64.sqrt());
        let (t, p, l) = euler_zyz(&h);
        assert!(phase_distance2(&h, &zyz(t, p, l)) < 1e-12);
    }

    #[test]
    fn split_product_recovers_factors() {
        let a = zyz(0.4, 1.0, -0.2);
        let b = zyz(2.1, -0.7, 0.3) * expi(0.5);
        let (x, y, resid) = split_product(&kron(&a, &b));
        assert!(resid < 1e-12);
        assert!(phase_distance4(&kron(&x, &y), &kron(&a, &b)) < 1e-12);
    }

    #[test]
    fn kron_orders_first_factor_on_high_bit() {
        let m = kron(&Pauli::X.matrix(), &Pauli::I.matrix());
        // X on q0 maps |00> (index 0) to |10> (index 2).
        assert_eq!(m[(2, 0)], ONE);
    }
}
