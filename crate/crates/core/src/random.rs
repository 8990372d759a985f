//! Random operators for tests, oracles and CLI demos.

use crate::linalg::{c, CMat, CVec, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let g = ginibre(d, 1, rng);
    let v = CVec::from_iterator(d, g.iter().copied());
    let n = v.norm();
    v / C64::new(n, 0.0)
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Density matrix of rank `rank` drawn from the induced (Ginibre) measure.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, rank.max(1), rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Kraus operators of a random channel from a Stinespring isometry with environment size `env`.
pub fn random_kraus<R: Rng + ?Sized>(d_in: usize, d_out: usize, env: usize, rng: &mut R) -> Vec<CMat> {
    let big = d_out * env;
    let g = ginibre(big, d_in, rng);
    let (q, _) = g.qr().unpack();
    (0..env)
        .map(|k| CMat::from_fn(d_out, d_in, |i, j| q[(k * d_out + i, j)]))
        .collect()
}
