//! States as frame probability vectors, the star product and the qplex membership test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{ensure_same, Frame, MicPovmFrame};
use crate::linalg::{self, CMat, CVec, RVec, C64};

/// Coefficients whose magnitude falls below this fraction of the largest one count as zero.
pub const ZERO_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct ProbVector {
    frame: Frame,
    p: RVec,
}

impl ProbVector {
    pub fn new(frame: Frame, p: RVec) -> Result<Self> {
        Self::with_tol(frame, p, crate::frames::DEFAULT_TOL)
    }

    pub fn with_tol(frame: Frame, p: RVec, tol: f64) -> Result<Self> {
        if p.len() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a frame with {} effects",
                p.len(),
                frame.len()
            )));
        }
        let s = p.sum();
        if (s - 1.0).abs() > tol || !s.is_finite() {
            return Err(Error::NotNormalized(format!("components sum to {s}")));
        }
        Ok(ProbVector { frame, p })
    }

    /// Skips the normalization check; used for intermediate results of exact maps.
    pub fn new_unchecked(frame: Frame, p: RVec) -> Self {
        ProbVector { frame, p }
    }

    pub fn uniform(frame: Frame) -> Self {
        let n = frame.len();
        ProbVector { p: RVec::from_element(n, 1.0 / n as f64), frame }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn as_vector(&self) -> &RVec {
        &self.p
    }

    pub fn into_vector(self) -> RVec {
        self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn to_complex(&self) -> CVec {
        self.p.map(|x| C64::new(x, 0.0))
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Born-rule probabilities p_k = Tr(ρ E_k).
pub fn to_prob(rho: &CMat, frame: &Frame) -> Result<ProbVector> {
    if rho.nrows() != frame.dim() || rho.ncols() != frame.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for a frame of dimension {}",
            rho.nrows(),
            rho.ncols(),
            frame.dim()
        )));
    }
    let p = frame.born(rho).map(|z| z.re);
    ProbVector::with_tol(frame.clone(), p, 1e-8)
}

/// ρ = Σ_k p_k e_k; may be indefinite for vectors outside the qplex.
pub fn from_prob(p: &ProbVector) -> CMat {
    p.frame.reconstruct(&p.to_complex())
}

/// Tr(ρσ) = sᵀ T⁻¹ p.
pub fn hs_inner(s: &ProbVector, p: &ProbVector) -> Result<f64> {
    ensure_same(&s.frame, &p.frame)?;
    Ok(s.p.dot(&(s.frame.gram_inverse() * &p.p)))
}

/// (s∗p)_k = Σ_nm Λ^(k)_nm s_n p_m = Tr(σρE_k) for arbitrary complex coordinate vectors.
pub fn star_vec(frame: &MicPovmFrame, s: &CVec, p: &CVec) -> CVec {
    let n = frame.len();
    let lam = frame.lambda();
    let mut out = CVec::zeros(n);
    for k in 0..n {
        let block = &lam[k * n * n..(k + 1) * n * n];
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..n {
            if s[a] == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &block[a * n..(a + 1) * n];
            let mut inner = C64::new(0.0, 0.0);
            for b in 0..n {
                inner += row[b] * p[b];
            }
            acc += s[a] * inner;
        }
        out[k] = acc;
    }
    out
}

/// Star product of two states; complex unless the operators commute.
pub fn star(s: &ProbVector, p: &ProbVector) -> Result<CVec> {
    ensure_same(&s.frame, &p.frame)?;
    Ok(star_vec(&s.frame, &s.to_complex(), &p.to_complex()))
}

/// Tr(Xⁿ) for n = 1..=dim, with X given by its frame probabilities x_k = Tr(X E_k).
pub fn operator_power_traces(frame: &MicPovmFrame, x: &CVec) -> Vec<f64> {
    let d = frame.dim();
    let mut out = Vec::with_capacity(d);
    let mut pw = x.clone();
    out.push(pw.iter().map(|z| z.re).sum());
    for _ in 1..d {
        pw = star_vec(frame, &pw, x);
        // powers of a Hermitian operator are Hermitian: drop the roundoff imaginary part
        pw.iter_mut().for_each(|z| z.im = 0.0);
        out.push(pw.iter().map(|z| z.re).sum());
    }
    out
}

/// a_n = Tr(ρⁿ) = Σ_l (p^{∗n})_l for n = 1..=d.
pub fn power_traces(p: &ProbVector) -> Vec<f64> {
    operator_power_traces(&p.frame, &p.to_complex())
}

/// Newton–Girard: b₀ = 1, b_n = (1/n) Σ_{i=1..n} (−1)^{i−1} b_{n−i} a_i.
pub fn char_poly_coeffs(a: &[f64]) -> Vec<f64> {
    let mut b = Vec::with_capacity(a.len() + 1);
    b.push(1.0);
    for n in 1..=a.len() {
        let mut acc = 0.0;
        for i in 1..=n {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * b[n - i] * a[i - 1];
        }
        b.push(acc / n as f64);
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalityVerdict {
    pub is_physical: bool,
    /// Set when the decision relied on coefficients or pivots inside the tolerance band.
    pub boundary: bool,
    pub effective_degree: usize,
    pub poly_coeffs: Vec<f64>,
    /// Leading principal minors of the Hurwitz matrix of the scale-normalized polynomial.
    pub minors: Vec<f64>,
    pub failure_reason: Option<String>,
}

/// Hurwitz matrix H_ij = b_{2j−i} (1-based) of Σ_m b_m λ^{d'−m}.
pub fn hurwitz_matrix(b: &[f64]) -> nalgebra::DMatrix<f64> {
    let deg = b.len() - 1;
    nalgebra::DMatrix::from_fn(deg, deg, |i, j| {
        let idx = 2 * (j as isize + 1) - (i as isize + 1);
        if idx >= 0 && (idx as usize) <= deg {
            b[idx as usize]
        } else {
            0.0
        }
    })
}

/// First column of the Routh array of Σ_m b_m λ^{deg−m}, i.e. Δ_k/Δ_{k−1}.
/// Stops early (returning the partial column) at a pivot within `floor`.
fn routh_pivots(b: &[f64], floor: f64) -> (Vec<f64>, bool) {
    let deg = b.len() - 1;
    let width = deg / 2 + 1;
    let row = |start: usize| -> Vec<f64> {
        (0..width).map(|j| b.get(start + 2 * j).copied().unwrap_or(0.0)).collect()
    };
    let mut prev = row(0);
    let mut cur = row(1);
    let mut pivots = Vec::with_capacity(deg);
    for k in 0..deg {
        let piv = cur[0];
        pivots.push(piv);
        if piv.abs() <= floor {
            return (pivots, true);
        }
        if k + 1 == deg {
            break;
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let c = cur.get(j + 1).copied().unwrap_or(0.0);
                (piv * a - prev[0] * c) / piv
            })
            .collect();
        prev = cur;
        cur = next;
    }
    (pivots, false)
}

/// Positive-semidefiniteness of a Hermitian operator from its power traces a_n = Tr(Xⁿ).
///
/// The operator is first rescaled to unit Frobenius norm, zero eigenvalues are stripped from the
/// characteristic polynomial, and the remaining roots are tested with the Routh–Hurwitz criterion.
pub fn positivity_from_power_traces(a: &[f64], tol: f64) -> PhysicalityVerdict {
    let b_raw = char_poly_coeffs(a);
    let zero = || PhysicalityVerdict {
        is_physical: true,
        boundary: true,
        effective_degree: 0,
        poly_coeffs: b_raw.clone(),
        minors: vec![],
        failure_reason: None,
    };
    if a.is_empty() {
        return zero();
    }
    let scale = if a.len() >= 2 { a[1].max(0.0).sqrt() } else { a[0].abs() };
    if !(scale > 1e-150) {
        return zero();
    }
    let scaled: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, x)| x / scale.powi(i as i32 + 1))
        .collect();
    let b = char_poly_coeffs(&scaled);
    let bmax = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = ZERO_FLOOR * bmax.max(1.0);
    let mut deg = b.len() - 1;
    let mut boundary = false;
    while deg > 0 && (b[deg].abs() <= floor || b[deg].abs() <= tol * b[deg - 1].abs()) {
        if b[deg] != 0.0 {
            boundary = true;
        }
        deg -= 1;
    }
    let bs = &b[..=deg];
    if deg == 0 {
        return PhysicalityVerdict { effective_degree: 0, ..zero() };
    }
    let (pivots, degenerate) = routh_pivots(bs, floor);
    let mut minors = Vec::with_capacity(pivots.len());
    let mut acc = 1.0;
    for p in &pivots {
        acc *= p;
        minors.push(acc);
    }
    let negative = pivots.iter().position(|&p| p < -floor);
    let (is_physical, reason) = match negative {
        Some(k) => (false, Some(format!("Hurwitz minor {} is negative", k + 1))),
        None if degenerate => {
            // Routh array broke down on a vanishing pivot; for real-rooted polynomials the
            // roots are nonnegative iff no coefficient is negative.
            boundary = true;
            match bs.iter().position(|&x| x < -floor) {
                Some(m) => (false, Some(format!("characteristic coefficient b_{m} is negative"))),
                None => (true, None),
            }
        }
        None => (true, None),
    };
    PhysicalityVerdict {
        is_physical,
        boundary,
        effective_degree: deg,
        poly_coeffs: b_raw,
        minors,
        failure_reason: reason,
    }
}

/// Qplex membership: true iff Σ_k p_k e_k is positive semidefinite.
pub fn is_physical(p: &ProbVector, tol: f64) -> Result<PhysicalityVerdict> {
    let s = p.p.sum();
    if (s - 1.0).abs() > tol.max(1e-9) {
        return Err(Error::NotNormalized(format!("components sum to {s}")));
    }
    let a = power_traces(p);
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal("non-finite power trace".into()));
    }
    Ok(positivity_from_power_traces(&a, tol))
}

/// p ∗ p = p within `tol`.
pub fn is_pure(p: &ProbVector, tol: f64) -> bool {
    let sq = star_vec(&p.frame, &p.to_complex(), &p.to_complex());
    sq.iter()
        .zip(p.p.iter())
        .all(|(z, x)| (z - C64::new(*x, 0.0)).norm() <= tol)
}

/// Checks that ρ is Hermitian with unit trace and, if `require_positive`, positive semidefinite.
pub fn validate_density(rho: &CMat, tol: f64, require_positive: bool) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch("density operator is not square".into()));
    }
    if !linalg::is_hermitian(rho, tol) {
        return Err(Error::NotHermitian("density operator".into()));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotNormalized(format!("trace {tr}")));
    }
    if require_positive {
        let lo = linalg::min_eigenvalue(rho);
        if lo < -tol {
            return Err(Error::NotPositive(format!("minimum eigenvalue {lo}")));
        }
    }
    Ok(())
}
