//! Density matrices stored as `2n`-qubit vectors.
//!
//! Entry `(r, c)` lives at index `r | c << n`, so `U ρ U†` is `U` on bit `q`
//! followed by `conj(U)` on bit `q + n`, reusing the state-vector kernels.

use crate::circuit::{apply_one, apply_two};
use crate::linalg::{Mat2, Mat4, C64, ONE, ZERO};

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|` on `n` qubits.
    pub fn zero_state(n: usize) -> DensityMatrix {
        let mut data = vec![ZERO; 1 << (2 * n)];
        data[0] = ONE;
        DensityMatrix { n, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.data[r | (c << self.n)]
    }

    pub fn apply_one(&mut self, q: usize, u: &Mat2) {
        apply_one(&mut self.data, q, u);
        apply_one(&mut self.data, q + self.n, &u.conjugate());
    }

    /// `u` with `q0` as the high local bit.
    pub fn apply_two(&mut self, q0: usize, q1: usize, u: &Mat4) {
        apply_two(&mut self.data, q0, q1, u);
        apply_two(&mut self.data, q0 + self.n, q1 + self.n, &u.conjugate());
    }

    /// `ρ -> (1-p) ρ + p (I/2 ⊗ Tr_q ρ)`.
    pub fn depolarize_one(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let (rb, cb) = (1usize << q, 1usize << (q + self.n));
        for i in 0..self.data.len() {
            if i & (rb | cb) != 0 {
                continue;
            }
            let (d0, d1) = (self.data[i], self.data[i | rb | cb]);
            let mix = (d0 + d1) * (p / 2.0);
            self.data[i] = d0 * (1.0 - p) + mix;
            self.data[i | rb | cb] = d1 * (1.0 - p) + mix;
            self.data[i | rb] *= 1.0 - p;
            self.data[i | cb] *= 1.0 - p;
        }
    }

    /// `ρ -> (1-p) ρ + p (I/4 ⊗ Tr_{a,b} ρ)`.
    pub fn depolarize_two(&mut self, a: usize, b: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.n;
        let bits = [1usize << a, 1usize << b];
        let cbits = [1usize << (a + n), 1usize << (b + n)];
        let mask = bits[0] | bits[1] | cbits[0] | cbits[1];
        let off = |rs: usize, cs: usize| -> usize {
            (if rs & 1 != 0 { bits[0] } else { 0 })
                | (if rs & 2 != 0 { bits[1] } else { 0 })
                | (if cs & 1 != 0 { cbits[0] } else { 0 })
                | (if cs & 2 != 0 { cbits[1] } else { 0 })
        };
        for i in 0..self.data.len() {
            if i & mask != 0 {
                continue;
            }
            let trace: C64 = (0..4).map(|s| self.data[i | off(s, s)]).sum();
            for rs in 0..4 {
                for cs in 0..4 {
                    let k = i | off(rs, cs);
                    self.data[k] *= 1.0 - p;
                    if rs == cs {
                        self.data[k] += trace * (p / 4.0);
                    }
                }
            }
        }
    }

    pub fn trace(&self) -> C64 {
        (0..1usize << self.n).map(|r| self.entry(r, r)).sum()
    }

    /// Diagonal in wire order.
    pub fn populations(&self) -> Vec<f64> {
        (0..1usize << self.n).map(|r| self.entry(r, r).re).collect()
    }
}
