//! Standard-formalism oracles shared by the integration tests.
#![allow(dead_code)]

use micprob::linalg::{self, c, CMat, CVec, RMat, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_diff(a: &RMat, b: &RMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    (a - b).abs().max()
}

pub fn cmax_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    linalg::max_abs(&(a - b))
}

pub fn assert_mat_close(a: &RMat, b: &RMat, tol: f64, what: &str) {
    let d = max_diff(a, b);
    assert!(d <= tol, "{what}: max entry error {d:e} > {tol:e}\nleft = {a}\nright = {b}");
}

pub fn ket(v: &[C64]) -> CVec {
    CVec::from_row_slice(v)
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// |0⟩⟨0| and friends for a qubit.
pub fn basis_state(d: usize, i: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, i)] = c(1.0, 0.0);
    m
}

pub fn plus_state() -> CMat {
    CMat::from_element(2, 2, c(0.5, 0.0))
}

/// Choi matrix Σ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
pub fn choi_matrix<F: Fn(&CMat) -> CMat>(d_in: usize, d_out: usize, phi: F) -> CMat {
    let mut j = CMat::zeros(d_in * d_out, d_in * d_out);
    for a in 0..d_in {
        for b in 0..d_in {
            let mut unit = CMat::zeros(d_in, d_in);
            unit[(a, b)] = c(1.0, 0.0);
            let img = phi(&unit);
            for r in 0..d_out {
                for s in 0..d_out {
                    j[(a * d_out + r, b * d_out + s)] += img[(r, s)];
                }
            }
        }
    }
    j
}

/// Conditional complete positivity: P⊥ J_L P⊥ ≥ 0 with P⊥ = I − |Ω⟩⟨Ω|.
pub fn ccp_min_eigenvalue<F: Fn(&CMat) -> CMat>(d: usize, l: F) -> f64 {
    let j = choi_matrix(d, d, l);
    let mut omega = CVec::zeros(d * d);
    for i in 0..d {
        omega[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    let p = linalg::identity(d * d) - &omega * omega.adjoint();
    let m = &p * j * &p;
    linalg::min_eigenvalue(&((&m + m.adjoint()) * c(0.5, 0.0)))
}

/// Lindblad right-hand side −i[H, ρ] + Σ AρA† − ½{A†A, ρ}.
pub fn lindblad_rhs(h: &CMat, ops: &[CMat], rho: &CMat) -> CMat {
    let i = c(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for a in ops {
        let ad = a.adjoint();
        let ada = &ad * a;
        out += a * rho * &ad - (&ada * rho + rho * &ada) * c(0.5, 0.0);
    }
    out
}

/// Classical RK4 integration of the master equation.
pub fn rk4_master(h: &CMat, ops: &[CMat], rho0: &CMat, t: f64, steps: usize) -> CMat {
    let dt = t / steps as f64;
    let half = c(0.5 * dt, 0.0);
    let full = c(dt, 0.0);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(h, ops, &rho);
        let k2 = lindblad_rhs(h, ops, &(&rho + &k1 * half));
        let k3 = lindblad_rhs(h, ops, &(&rho + &k2 * half));
        let k4 = lindblad_rhs(h, ops, &(&rho + &k3 * full));
        rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    rho
}

/// exp(−iHt) from the eigendecomposition of H.
pub fn eig_unitary(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = linalg::herm_eigh(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|l| C64::from_polar(1.0, -l * t))));
    &vecs * d * vecs.adjoint()
}

/// Statevector simulator; qubit 0 is the most significant bit.
pub struct StateVector {
    pub n: usize,
    pub amp: CVec,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amp = CVec::zeros(1 << n);
        amp[0] = c(1.0, 0.0);
        StateVector { n, amp }
    }

    pub fn apply(&mut self, u: &CMat, targets: &[usize]) {
        let k = targets.len();
        let n = self.n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let mut out = CVec::zeros(self.amp.len());
        for idx in 0..self.amp.len() {
            let col = targets.iter().fold(0, |acc, &q| (acc << 1) | usize::from(idx & bit(q) != 0));
            let base = targets.iter().fold(idx, |acc, &q| acc & !bit(q));
            for row in 0..(1 << k) {
                let mut j = base;
                for (pos, &q) in targets.iter().enumerate() {
                    if (row >> (k - 1 - pos)) & 1 == 1 {
                        j |= bit(q);
                    }
                }
                out[j] += u[(row, col)] * self.amp[idx];
            }
        }
        self.amp = out;
    }

    /// Born probabilities of the listed qubits, first qubit most significant.
    pub fn probs(&self, qubits: &[usize]) -> Vec<f64> {
        let m = qubits.len();
        let mut out = vec![0.0; 1 << m];
        for (idx, a) in self.amp.iter().enumerate() {
            let o = qubits.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> (self.n - 1 - q)) & 1));
            out[o] += a.norm_sqr();
        }
        out
    }

    pub fn density(&self) -> CMat {
        &self.amp * self.amp.adjoint()
    }
}

/// All elementary symmetric polynomials of `x`, by expanding Π(1 + x_i t).
pub fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut e = vec![1.0];
    for &v in x {
        let mut next = vec![0.0; e.len() + 1];
        for (k, ek) in e.iter().enumerate() {
            next[k] += ek;
            next[k + 1] += ek * v;
        }
        e = next;
    }
    e
}
