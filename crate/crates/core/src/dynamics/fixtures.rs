//! Closed-form qubit matrices in the tetrahedral SIC representation and the channels that define them.

use crate::linalg::{self, c, CMat, RMat};

fn m4(rows: [[f64; 4]; 4]) -> RMat {
    RMat::from_fn(4, 4, |i, j| rows[i][j])
}

pub fn identity_table() -> RMat {
    RMat::identity(4, 4)
}

pub fn depolarization_table(t: f64, tau: f64) -> RMat {
    let e = (-t / tau).exp();
    RMat::from_fn(4, 4, |i, j| if i == j { (1.0 + 3.0 * e) / 4.0 } else { (1.0 - e) / 4.0 })
}

pub fn dephasing_table(t: f64, tau: f64) -> RMat {
    let e = (-t / tau).exp();
    let (p, q) = ((1.0 + e) / 2.0, (1.0 - e) / 2.0);
    m4([[p, q, 0.0, 0.0], [q, p, 0.0, 0.0], [0.0, 0.0, p, q], [0.0, 0.0, q, p]])
}

pub fn damping_table(t: f64, tau: f64) -> RMat {
    let e1 = (-t / tau).exp();
    let e2 = (-t / (2.0 * tau)).exp();
    let s3 = 3f64.sqrt();
    let alpha = e1 / 4.0 - e1 / (4.0 * s3) + 0.25 + 1.0 / (4.0 * s3);
    let a = alpha + e2 / 2.0;
    let b = alpha - e2 / 2.0;
    let cc = alpha - e1 / 2.0;
    let d = -alpha + 0.5;
    let e = alpha + e1 / (2.0 * s3) + e2 / 2.0 - 1.0 / (2.0 * s3);
    let f = alpha + e1 / (2.0 * s3) - e2 / 2.0 - 1.0 / (2.0 * s3);
    m4([[a, b, cc, cc], [b, a, cc, cc], [d, d, e, f], [d, d, f, e]])
}

fn rotation_parts(w: f64) -> (f64, f64, f64) {
    let cs = (w / 2.0).cos().powi(2);
    let sn = (w / 2.0).sin().powi(2);
    (cs, sn, w.sin() / 2.0)
}

/// Rotation by angle w = ωt about x.
pub fn rotation_x_table(w: f64) -> RMat {
    let (cs, sn, h) = rotation_parts(w);
    m4([[cs, -h, h, sn], [h, cs, sn, -h], [-h, sn, cs, h], [sn, h, -h, cs]])
}

pub fn rotation_y_table(w: f64) -> RMat {
    let (cs, sn, h) = rotation_parts(w);
    m4([[cs, -h, sn, h], [h, cs, -h, sn], [sn, h, cs, -h], [-h, sn, h, cs]])
}

pub fn rotation_z_table(w: f64) -> RMat {
    let (cs, sn, h) = rotation_parts(w);
    m4([[cs, sn, h, -h], [sn, cs, -h, h], [-h, h, cs, sn], [h, -h, sn, cs]])
}

/// ρ ↦ e^{−t/τ} ρ + (1 − e^{−t/τ}) Tr(ρ) I/2.
pub fn depolarization_kraus(t: f64, tau: f64) -> Vec<CMat> {
    let p = 1.0 - (-t / tau).exp();
    let mut ops = vec![linalg::identity(2) * c((1.0 - 0.75 * p).sqrt(), 0.0)];
    for s in linalg::paulis() {
        ops.push(s * c((p / 4.0).sqrt(), 0.0));
    }
    ops
}

/// Off-diagonal elements decay as e^{−t/τ}.
pub fn dephasing_kraus(t: f64, tau: f64) -> Vec<CMat> {
    let e = (-t / tau).exp();
    vec![
        linalg::identity(2) * c(((1.0 + e) / 2.0).sqrt(), 0.0),
        linalg::pauli_z() * c(((1.0 - e) / 2.0).sqrt(), 0.0),
    ]
}

/// Decay of |1⟩ into |0⟩ with population e^{−t/τ} left in |1⟩.
pub fn damping_kraus(t: f64, tau: f64) -> Vec<CMat> {
    let g = (-t / tau).exp();
    let k0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(g.sqrt(), 0.0)]);
    let k1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    vec![k0, k1]
}

/// exp(−i w σ/2) for the Pauli matrix `axis` ∈ {0, 1, 2}.
pub fn rotation_unitary(axis: usize, w: f64) -> CMat {
    let s = linalg::paulis()[axis].clone();
    linalg::identity(2) * c((w / 2.0).cos(), 0.0) - s * c(0.0, (w / 2.0).sin())
}

/// Reference layout of the H_θ matrix in the tetrahedral frame.
///
/// Kept verbatim as a fixture: the generator computed from H_θ has twice these magnitudes.
pub fn h_theta_display(theta: f64) -> RMat {
    let a = m4([[0., -1., 1., 0.], [1., 0., 0., -1.], [-1., 0., 0., 1.], [0., 1., -1., 0.]]);
    let b = m4([[0., -1., 0., 1.], [1., 0., -1., 0.], [0., 1., 0., -1.], [-1., 0., 1., 0.]]);
    a * (theta.sin() / 4.0) + b * (theta.cos() / 4.0)
}

pub fn depolarization_display(tau: f64) -> RMat {
    RMat::from_fn(4, 4, |i, j| if i == j { -3.0 } else { 1.0 }) / (4.0 * tau)
}

pub fn dephasing_display(tau: f64) -> RMat {
    m4([[-1., 1., 0., 0.], [1., -1., 0., 0.], [0., 0., -1., 1.], [0., 0., 1., -1.]]) / (2.0 * tau)
}

pub fn damping_display(tau: f64) -> RMat {
    let a = m4([[-2., 0., 1., 1.], [0., -2., 1., 1.], [1., 1., -2., 0.], [1., 1., 0., -2.]]);
    let b = m4([[1., 1., 1., 1.], [1., 1., 1., 1.], [-1., -1., -1., -1.], [-1., -1., -1., -1.]]);
    a / (4.0 * tau) + b / (4.0 * 3f64.sqrt() * tau)
}
