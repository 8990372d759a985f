//! Dense linear-algebra helpers shared by every module.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn paulis() -> [CMat; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Tr(AB) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn rkron(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest absolute entry.
pub fn max_abs<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
}

pub fn max_abs_vec<T: ComplexField<RealField = f64>>(v: &DVector<T>) -> f64 {
    v.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    herm_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Eigenvalues (ascending) and eigenvectors (columns, same order) of a Hermitian matrix.
pub fn herm_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// 2-norm condition number via singular values; infinite for singular matrices.
pub fn condition_number(m: &RMat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = T::from_real(0.5f64.powi(s));
    let a = a * scale;
    let b = |k: usize| T::from_real(PADE13[k]);
    let id = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Unitary exp(-i t H) for Hermitian H.
pub fn unitary_from_hamiltonian(h: &CMat, t: f64) -> CMat {
    expm(&(h * C64::new(0.0, -t)))
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && max_abs(&(u.adjoint() * u - identity(u.nrows()))) <= tol
}

/// Inverse of a real matrix through LU; `None` when singular.
pub fn inverse(m: &RMat) -> Option<RMat> {
    m.clone().try_inverse()
}

pub fn column_sums(m: &RMat) -> RVec {
    RVec::from_iterator(m.ncols(), (0..m.ncols()).map(|j| m.column(j).sum()))
}

pub fn row_sums(m: &RMat) -> RVec {
    RVec::from_iterator(m.nrows(), (0..m.nrows()).map(|i| m.row(i).sum()))
}
