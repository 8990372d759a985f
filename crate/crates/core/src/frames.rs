//! MIC-POVM frames: effects, Gram matrix, dual operators and structure tensors.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use rand::Rng;

/// Default absolute tolerance for positivity, completeness and duality checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Gram matrices above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug)]
pub struct MicPovmFrame {
    dim: usize,
    effects: Vec<CMat>,
    gram: RMat,
    gram_inverse: RMat,
    duals: Vec<CMat>,
    trace_vector: RVec,
    condition: f64,
    tol: f64,
    lambda: OnceLock<Vec<C64>>,
    lambda_tilde: OnceLock<Vec<C64>>,
    factors: Option<(Frame, Frame)>,
}

/// Shared handle; frames are immutable after construction.
pub type Frame = Arc<MicPovmFrame>;

impl MicPovmFrame {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of effects, d².
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &CMat {
        &self.effects[k]
    }

    pub fn duals(&self) -> &[CMat] {
        &self.duals
    }

    pub fn dual(&self, k: usize) -> &CMat {
        &self.duals[k]
    }

    pub fn gram(&self) -> &RMat {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &RMat {
        &self.gram_inverse
    }

    pub fn trace_vector(&self) -> &RVec {
        &self.trace_vector
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Λ^(k)_nm = Tr(e_n e_m E_k), flattened as [k][n][m].
    pub fn lambda(&self) -> &[C64] {
        self.lambda.get_or_init(|| match &self.factors {
            Some((a, b)) => kron_tensor(a.lambda(), a.len(), b.lambda(), b.len()),
            None => structure_tensor(&self.duals, &self.effects),
        })
    }

    /// Λ̃^(k)_nm = Tr(E_n E_m e_k), flattened as [k][n][m].
    pub fn lambda_tilde(&self) -> &[C64] {
        self.lambda_tilde.get_or_init(|| match &self.factors {
            Some((a, b)) => kron_tensor(a.lambda_tilde(), a.len(), b.lambda_tilde(), b.len()),
            None => structure_tensor(&self.effects, &self.duals),
        })
    }

    /// Λ^(k) as an n×n matrix.
    pub fn lambda_matrix(&self, k: usize) -> CMat {
        let n = self.len();
        CMat::from_row_slice(n, n, &self.lambda()[k * n * n..(k + 1) * n * n])
    }

    pub fn lambda_tilde_matrix(&self, k: usize) -> CMat {
        let n = self.len();
        CMat::from_row_slice(n, n, &self.lambda_tilde()[k * n * n..(k + 1) * n * n])
    }

    /// Expansion of an operator in the effects: X = Σ_l λ_l E_l with λ_l = Tr(X e_l).
    pub fn effect_coordinates(&self, x: &CMat) -> CVec {
        CVec::from_iterator(self.len(), self.duals.iter().map(|e| linalg::trace_prod(x, e)))
    }

    /// Frame probabilities of an operator: p_k = Tr(X E_k).
    pub fn born(&self, x: &CMat) -> CVec {
        CVec::from_iterator(self.len(), self.effects.iter().map(|e| linalg::trace_prod(x, e)))
    }

    /// Operator Σ_k p_k e_k.
    pub fn reconstruct(&self, p: &CVec) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (k, e) in self.duals.iter().enumerate() {
            out += e * p[k];
        }
        out
    }

    /// Operator Σ_l λ_l E_l.
    pub fn from_effect_coordinates(&self, lam: &CVec) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (k, e) in self.effects.iter().enumerate() {
            out += e * lam[k];
        }
        out
    }

    /// Frame with entrywise conjugated effects in the computational basis.
    pub fn conjugate(&self) -> Frame {
        Arc::new(MicPovmFrame {
            dim: self.dim,
            effects: self.effects.iter().map(|e| e.map(|z| z.conj())).collect(),
            gram: self.gram.clone(),
            gram_inverse: self.gram_inverse.clone(),
            duals: self.duals.iter().map(|e| e.map(|z| z.conj())).collect(),
            trace_vector: self.trace_vector.clone(),
            condition: self.condition,
            tol: self.tol,
            lambda: OnceLock::new(),
            lambda_tilde: OnceLock::new(),
            factors: self.factors.as_ref().map(|(a, b)| (a.conjugate(), b.conjugate())),
        })
    }

    /// Largest violation of the frame invariants (completeness, duality, unit dual traces).
    pub fn invariant_defect(&self) -> f64 {
        let n = self.len();
        let mut sum = CMat::zeros(self.dim, self.dim);
        for e in &self.effects {
            sum += e;
        }
        let mut worst = linalg::max_abs(&(sum - linalg::identity(self.dim)));
        for l in 0..n {
            for k in 0..n {
                let want = if l == k { 1.0 } else { 0.0 };
                let got = linalg::trace_prod(&self.effects[l], &self.duals[k]);
                worst = worst.max((got - c(want, 0.0)).norm());
            }
            worst = worst.max((self.duals[l].trace() - c(1.0, 0.0)).norm());
        }
        worst
    }
}

fn structure_tensor(a: &[CMat], b: &[CMat]) -> Vec<C64> {
    // entry [k][n][m] = Tr(a_n a_m b_k)
    let n = a.len();
    let prods: Vec<CMat> = (0..n * n).map(|i| &a[i / n] * &a[i % n]).collect();
    let mut out = vec![C64::new(0.0, 0.0); n * n * n];
    for k in 0..n {
        for (i, p) in prods.iter().enumerate() {
            out[k * n * n + i] = linalg::trace_prod(p, &b[k]);
        }
    }
    out
}

// Structure tensor of a product frame: Tr over A⊗B factorizes.
fn kron_tensor(a: &[C64], na: usize, b: &[C64], nb: usize) -> Vec<C64> {
    let n = na * nb;
    let mut out = vec![C64::new(0.0, 0.0); n * n * n];
    for k1 in 0..na {
        for n1 in 0..na {
            for m1 in 0..na {
                let x = a[(k1 * na + n1) * na + m1];
                for k2 in 0..nb {
                    let k = k1 * nb + k2;
                    for n2 in 0..nb {
                        let row = (k * n + n1 * nb + n2) * n + m1 * nb;
                        let brow = (k2 * nb + n2) * nb;
                        for m2 in 0..nb {
                            out[row + m2] = x * b[brow + m2];
                        }
                    }
                }
            }
        }
    }
    out
}

/// True when both handles describe the same frame (identity or equal effects).
pub fn same_frame(a: &MicPovmFrame, b: &MicPovmFrame) -> bool {
    if std::ptr::eq(a, b) {
        return true;
    }
    a.dim == b.dim
        && a.len() == b.len()
        && a.effects
            .iter()
            .zip(&b.effects)
            .all(|(x, y)| linalg::max_abs(&(x - y)) <= 1e-12)
}

pub fn ensure_same(a: &MicPovmFrame, b: &MicPovmFrame) -> Result<()> {
    if same_frame(a, b) {
        Ok(())
    } else {
        Err(Error::FrameMismatch)
    }
}

/// The tetrahedral qubit SIC-POVM.
pub fn build_sic_qubit() -> Frame {
    let [x, y, z] = linalg::paulis();
    let k = 3f64.sqrt() / 12.0;
    let id = linalg::identity(2) * c(0.25, 0.0);
    let signs = [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];
    let effects = signs
        .iter()
        .map(|s| &id + (&x * c(s[0] * k, 0.0) + &y * c(s[1] * k, 0.0) + &z * c(s[2] * k, 0.0)))
        .collect();
    build_mic_from_effects(effects).expect("tetrahedral SIC is a valid frame")
}

/// Known SICs: the tetrahedron for d = 2 and the Weyl–Heisenberg orbit of (0, 1, −1)/√2 for d = 3.
pub fn build_sic(d: usize) -> Result<Frame> {
    match d {
        2 => Ok(build_sic_qubit()),
        3 => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let fid = CVec::from_vec(vec![c(0.0, 0.0), c(r, 0.0), c(-r, 0.0)]);
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
            let mut kets = Vec::with_capacity(9);
            for a in 0..3 {
                for b in 0..3 {
                    // X^a Z^b |fid>
                    kets.push(CVec::from_fn(3, |j, _| {
                        let src = (j + 3 - a) % 3;
                        fid[src] * w.powu((b * src) as u32)
                    }));
                }
            }
            build_sic_from_fiducials(&kets)
        }
        _ => Err(Error::InvalidInput(format!("no SIC fiducial is bundled for d = {d}"))),
    }
}

/// SIC-POVM from d² fiducial kets with |⟨ψ_k|ψ_l⟩|² = (dδ_kl + 1)/(d + 1).
pub fn build_sic_from_fiducials(kets: &[CVec]) -> Result<Frame> {
    build_sic_from_fiducials_tol(kets, DEFAULT_TOL)
}

pub fn build_sic_from_fiducials_tol(kets: &[CVec], tol: f64) -> Result<Frame> {
    let d = kets.first().map(|k| k.len()).unwrap_or(0);
    if d == 0 || kets.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "expected d² kets of dimension d, got {} kets of dimension {}",
            kets.len(),
            d
        )));
    }
    for (i, k) in kets.iter().enumerate() {
        if k.len() != d {
            return Err(Error::DimensionMismatch(format!("ket {i} has dimension {}", k.len())));
        }
        if (k.norm() - 1.0).abs() > tol {
            return Err(Error::NotNormalized(format!("ket {i} has norm {}", k.norm())));
        }
    }
    let df = d as f64;
    for i in 0..kets.len() {
        for j in i..kets.len() {
            let ov = kets[i].dotc(&kets[j]).norm_sqr();
            let want = if i == j { 1.0 } else { 1.0 / (df + 1.0) };
            if (ov - want).abs() > tol {
                return Err(Error::SymmetryViolation(format!(
                    "|<psi_{i}|psi_{j}>|^2 = {ov}, expected {want}"
                )));
            }
        }
    }
    let effects = kets
        .iter()
        .map(|k| k * k.adjoint() * c(1.0 / df, 0.0))
        .collect();
    build_mic_from_effects_tol(effects, tol)
}

pub fn build_mic_from_effects(effects: Vec<CMat>) -> Result<Frame> {
    build_mic_from_effects_tol(effects, DEFAULT_TOL)
}

/// Validates positivity, completeness and linear independence, then derives the dual frame.
pub fn build_mic_from_effects_tol(effects: Vec<CMat>, tol: f64) -> Result<Frame> {
    let n = effects.len();
    let d = (n as f64).sqrt().round() as usize;
    if n == 0 || d * d != n {
        return Err(Error::DimensionMismatch(format!("{n} effects is not a perfect square")));
    }
    for (k, e) in effects.iter().enumerate() {
        if e.nrows() != d || e.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "effect {k} is {}x{}, expected {d}x{d}",
                e.nrows(),
                e.ncols()
            )));
        }
        if !linalg::is_hermitian(e, tol) {
            return Err(Error::NotHermitian(format!("effect {k}")));
        }
        let lo = linalg::min_eigenvalue(e);
        if lo < -tol {
            return Err(Error::NotPositive(format!("effect {k} has eigenvalue {lo}")));
        }
    }
    let mut sum = CMat::zeros(d, d);
    for e in &effects {
        sum += e;
    }
    let defect = linalg::max_abs(&(sum - linalg::identity(d)));
    if defect > tol {
        return Err(Error::NotNormalized(format!("effects sum to identity only within {defect}")));
    }
    let gram = RMat::from_fn(n, n, |i, j| linalg::trace_prod(&effects[i], &effects[j]).re);
    let condition = linalg::condition_number(&gram);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::FrameSingular(format!("Gram condition number {condition:e}")));
    }
    let gram_inverse = linalg::inverse(&gram)
        .ok_or_else(|| Error::FrameSingular("Gram matrix is not invertible".into()))?;
    let duals = (0..n)
        .map(|l| {
            let mut e = CMat::zeros(d, d);
            for (k, ek) in effects.iter().enumerate() {
                e += ek * c(gram_inverse[(l, k)], 0.0);
            }
            e
        })
        .collect();
    Ok(from_parts(d, effects, gram, gram_inverse, duals, condition, tol, None))
}

fn from_parts(
    dim: usize,
    effects: Vec<CMat>,
    gram: RMat,
    gram_inverse: RMat,
    duals: Vec<CMat>,
    condition: f64,
    tol: f64,
    factors: Option<(Frame, Frame)>,
) -> Frame {
    let trace_vector = RVec::from_iterator(effects.len(), effects.iter().map(|e| e.trace().re));
    Arc::new(MicPovmFrame {
        dim,
        effects,
        gram,
        gram_inverse,
        duals,
        trace_vector,
        condition,
        tol,
        lambda: OnceLock::new(),
        lambda_tilde: OnceLock::new(),
        factors,
    })
}

/// The one-dimensional frame {1}.
pub fn trivial_frame() -> Frame {
    let one = CMat::from_element(1, 1, c(1.0, 0.0));
    from_parts(
        1,
        vec![one.clone()],
        RMat::identity(1, 1),
        RMat::identity(1, 1),
        vec![one],
        1.0,
        DEFAULT_TOL,
        None,
    )
}

/// Product frame E^A ⊗ E^B; effect (i, j) sits at index i·|B| + j.
pub fn tensor(a: &Frame, b: &Frame) -> Frame {
    let mut effects = Vec::with_capacity(a.len() * b.len());
    let mut duals = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            effects.push(linalg::kron(&a.effects[i], &b.effects[j]));
            duals.push(linalg::kron(&a.duals[i], &b.duals[j]));
        }
    }
    from_parts(
        a.dim * b.dim,
        effects,
        linalg::rkron(&a.gram, &b.gram),
        linalg::rkron(&a.gram_inverse, &b.gram_inverse),
        duals,
        a.condition * b.condition,
        a.tol.max(b.tol),
        Some((a.clone(), b.clone())),
    )
}

/// Tensor power of a frame; `tensor_power(f, 1)` is `f` itself.
pub fn tensor_power(f: &Frame, n: usize) -> Frame {
    let mut out = f.clone();
    for _ in 1..n {
        out = tensor(&out, f);
    }
    out
}

/// Random MIC-POVM: E_k = S^{-1/2} G_k S^{-1/2} with random positive G_k.
pub fn random_mic<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Frame {
    loop {
        let gs: Vec<CMat> = (0..d * d)
            .map(|_| {
                let a = crate::random::ginibre(d, d, rng);
                &a * a.adjoint()
            })
            .collect();
        let mut s = CMat::zeros(d, d);
        for g in &gs {
            s += g;
        }
        let (vals, vecs) = linalg::herm_eigh(&s);
        let inv_sqrt = CMat::from_diagonal(&CVec::from_iterator(
            d,
            vals.iter().map(|v| c(1.0 / v.sqrt(), 0.0)),
        ));
        let w = &vecs * inv_sqrt * vecs.adjoint();
        let effects: Vec<CMat> = gs.iter().map(|g| &w * g * &w).collect();
        if let Ok(f) = build_mic_from_effects(effects) {
            return f;
        }
    }
}

/// Change of representation between two frames of the same dimension.
#[derive(Debug, Clone)]
pub struct FrameTransition {
    pub source: Frame,
    pub target: Frame,
    /// (M_E^[F])_mn = Tr(E_m f_n), with E the target and F the source.
    pub matrix: RMat,
    /// The reverse transition M_F^[E].
    pub inverse: RMat,
}

impl FrameTransition {
    /// p^[E] = M_E^[F] p^[F].
    pub fn vector(&self, p: &RVec) -> RVec {
        &self.matrix * p
    }

    /// S^[E] = M_E^[F] S^[F] M_F^[E], for maps and generators acting within one frame.
    pub fn square(&self, s: &RMat) -> RMat {
        &self.matrix * s * &self.inverse
    }

    /// M^[E] = M^[F] M_F^[E], for measurement matrices.
    pub fn measurement(&self, m: &RMat) -> RMat {
        m * &self.inverse
    }
}

fn cross(e: &MicPovmFrame, f: &MicPovmFrame) -> RMat {
    RMat::from_fn(e.len(), f.len(), |m, n| linalg::trace_prod(&e.effects[m], &f.duals[n]).re)
}

/// Transition from representation `source` to representation `target`.
pub fn transition_matrix(target: &Frame, source: &Frame) -> Result<FrameTransition> {
    if target.dim != source.dim {
        return Err(Error::DimensionMismatch(format!(
            "frames of dimension {} and {}",
            target.dim, source.dim
        )));
    }
    Ok(FrameTransition {
        source: source.clone(),
        target: target.clone(),
        matrix: cross(target, source),
        inverse: cross(source, target),
    })
}
