//! Channels as pseudostochastic matrices, Choi probability vectors and complete positivity.

use crate::error::{Error, Result};
use crate::frames::{self, ensure_same, Frame, MicPovmFrame};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use crate::states::{self, PhysicalityVerdict, ProbVector};

/// Column sums must equal one within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PseudoStochasticMap {
    in_frame: Frame,
    out_frame: Frame,
    matrix: RMat,
}

impl PseudoStochasticMap {
    pub fn new(in_frame: Frame, out_frame: Frame, matrix: RMat) -> Result<Self> {
        if matrix.nrows() != out_frame.len() || matrix.ncols() != in_frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix between frames with {} and {} effects",
                matrix.nrows(),
                matrix.ncols(),
                out_frame.len(),
                in_frame.len()
            )));
        }
        check_column_sums(&matrix, 1.0, STOCHASTIC_TOL)?;
        Ok(PseudoStochasticMap { in_frame, out_frame, matrix })
    }

    pub fn new_unchecked(in_frame: Frame, out_frame: Frame, matrix: RMat) -> Self {
        PseudoStochasticMap { in_frame, out_frame, matrix }
    }

    pub fn identity(frame: Frame) -> Self {
        let n = frame.len();
        PseudoStochasticMap { in_frame: frame.clone(), out_frame: frame, matrix: RMat::identity(n, n) }
    }

    pub fn in_frame(&self) -> &Frame {
        &self.in_frame
    }

    pub fn out_frame(&self) -> &Frame {
        &self.out_frame
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }

    /// Largest deviation of a column sum from one.
    pub fn column_sum_defect(&self) -> f64 {
        linalg::column_sums(&self.matrix).iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    /// True when rows also sum to one.
    pub fn is_bistochastic(&self, tol: f64) -> bool {
        linalg::row_sums(&self.matrix).iter().all(|s| (s - 1.0).abs() <= tol)
    }
}

pub(crate) fn check_column_sums(m: &RMat, want: f64, tol: f64) -> Result<()> {
    for (j, s) in linalg::column_sums(m).iter().enumerate() {
        if (s - want).abs() > tol || !s.is_finite() {
            return Err(Error::NotPseudoStochastic(format!("column {j} sums to {s}")));
        }
    }
    Ok(())
}

/// S_lk = Re Tr(E^out_l f(e^in_k)) for an arbitrary linear map f.
pub fn superoperator_matrix<F: Fn(&CMat) -> CMat>(in_frame: &MicPovmFrame, out_frame: &MicPovmFrame, f: F) -> RMat {
    let images: Vec<CMat> = in_frame.duals().iter().map(&f).collect();
    RMat::from_fn(out_frame.len(), in_frame.len(), |l, k| {
        linalg::trace_prod(out_frame.effect(l), &images[k]).re
    })
}

/// Applies ρ ↦ Σ V ρ V†.
pub fn apply_kraus(kraus: &[CMat], rho: &CMat) -> CMat {
    let mut out = CMat::zeros(kraus[0].nrows(), kraus[0].nrows());
    for v in kraus {
        out += v * rho * v.adjoint();
    }
    out
}

pub fn check_kraus(kraus: &[CMat], tol: f64) -> Result<(usize, usize)> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
    let (d_out, d_in) = (first.nrows(), first.ncols());
    let mut acc = CMat::zeros(d_in, d_in);
    for (i, v) in kraus.iter().enumerate() {
        if v.nrows() != d_out || v.ncols() != d_in {
            return Err(Error::DimensionMismatch(format!("Kraus operator {i} has a different shape")));
        }
        acc += v.adjoint() * v;
    }
    let defect = linalg::max_abs(&(acc - linalg::identity(d_in)));
    if defect > tol {
        return Err(Error::NotTracePreserving(format!("sum V†V deviates from identity by {defect}")));
    }
    Ok((d_in, d_out))
}

/// S_lk = Σ_n Tr(E^out_l V_n e^in_k V_n†).
pub fn kraus_to_map(kraus: &[CMat], in_frame: &Frame, out_frame: &Frame) -> Result<PseudoStochasticMap> {
    let (d_in, d_out) = check_kraus(kraus, 1e-9)?;
    if d_in != in_frame.dim() || d_out != out_frame.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Kraus operators map {d_in} -> {d_out}, frames are {} -> {}",
            in_frame.dim(),
            out_frame.dim()
        )));
    }
    let m = superoperator_matrix(in_frame, out_frame, |x| apply_kraus(kraus, x));
    Ok(PseudoStochasticMap::new_unchecked(in_frame.clone(), out_frame.clone(), m))
}

/// p^out = S p^in.
pub fn map_apply(s: &PseudoStochasticMap, p: &ProbVector) -> Result<ProbVector> {
    ensure_same(&s.in_frame, p.frame())?;
    Ok(ProbVector::new_unchecked(s.out_frame.clone(), &s.matrix * p.as_vector()))
}

/// Sequential composition: `second ∘ first`.
pub fn compose(second: &PseudoStochasticMap, first: &PseudoStochasticMap) -> Result<PseudoStochasticMap> {
    ensure_same(&second.in_frame, &first.out_frame)?;
    Ok(PseudoStochasticMap::new_unchecked(
        first.in_frame.clone(),
        second.out_frame.clone(),
        &second.matrix * &first.matrix,
    ))
}

/// Heisenberg-picture image Φ*(M) = Σ_kl S_lk Tr(e^out_l M) E^in_k.
pub fn dual_map_action(s: &PseudoStochasticMap, m: &CMat) -> Result<CMat> {
    let d = s.out_frame.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch(format!("operator is {}x{}, expected {d}x{d}", m.nrows(), m.ncols())));
    }
    let coords: Vec<C64> = s.out_frame.duals().iter().map(|e| linalg::trace_prod(e, m)).collect();
    let din = s.in_frame.dim();
    let mut out = CMat::zeros(din, din);
    for k in 0..s.in_frame.len() {
        let mut w = C64::new(0.0, 0.0);
        for (l, cl) in coords.iter().enumerate() {
            w += cl * s.matrix[(l, k)];
        }
        out += s.in_frame.effect(k) * w;
    }
    Ok(out)
}

/// Kronecker product of maps over the product frames.
pub fn tensor_maps(a: &PseudoStochasticMap, b: &PseudoStochasticMap) -> PseudoStochasticMap {
    PseudoStochasticMap::new_unchecked(
        frames::tensor(&a.in_frame, &b.in_frame),
        frames::tensor(&a.out_frame, &b.out_frame),
        linalg::rkron(&a.matrix, &b.matrix),
    )
}

/// Tr_B as a map from E^A ⊗ E^B to E^A: S_{l,(n,m)} = δ_ln.
pub fn partial_trace_map(a: &Frame, b: &Frame) -> PseudoStochasticMap {
    let (na, nb) = (a.len(), b.len());
    let m = RMat::from_fn(na, na * nb, |l, col| if col / nb == l { 1.0 } else { 0.0 });
    PseudoStochasticMap::new_unchecked(frames::tensor(a, b), a.clone(), m)
}

/// Product frame Ē ⊗ F carrying Choi probability vectors of maps from E to F.
pub fn choi_frame(in_frame: &Frame, out_frame: &Frame) -> Frame {
    frames::tensor(&in_frame.conjugate(), out_frame)
}

/// σ = (1/d) Σ_nm |n⟩⟨m| ⊗ |n⟩⟨m| in the computational basis.
pub fn max_entangled_operator(d: usize) -> CMat {
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0, 0.0);
    }
    &v * v.adjoint() * c(1.0 / d as f64, 0.0)
}

/// Probability vector of the maximally entangled state over Ē ⊗ E.
pub fn max_entangled_prob(frame: &Frame) -> ProbVector {
    max_entangled_prob_over(&choi_frame(frame, frame))
}

fn max_entangled_prob_over(product: &Frame) -> ProbVector {
    let d = (product.dim() as f64).sqrt().round() as usize;
    let sigma = max_entangled_operator(d);
    ProbVector::new_unchecked(product.clone(), product.born(&sigma).map(|z| z.re))
}

/// Closed form (dδ_nm + 1)/(d³(d + 1)) of the maximally entangled vector over a conjugate-SIC product frame.
pub fn max_entangled_sic_closed_form(d: usize) -> RVec {
    let n = d * d;
    let df = d as f64;
    RVec::from_fn(n * n, |i, _| {
        let delta = if i / n == i % n { 1.0 } else { 0.0 };
        (df * delta + 1.0) / (df * df * df * (df + 1.0))
    })
}

/// Reusable pieces for Choi-vector computations between two fixed frames.
#[derive(Debug, Clone)]
pub struct ChoiContext {
    pub in_frame: Frame,
    pub out_frame: Frame,
    pub product: Frame,
    pub s: ProbVector,
}

impl ChoiContext {
    pub fn new(in_frame: &Frame, out_frame: &Frame) -> Self {
        let product = choi_frame(in_frame, out_frame);
        let s_frame = choi_frame(in_frame, in_frame);
        ChoiContext {
            in_frame: in_frame.clone(),
            out_frame: out_frame.clone(),
            s: max_entangled_prob_over(&s_frame),
            product,
        }
    }

    pub fn choi_prob(&self, s: &PseudoStochasticMap) -> Result<ProbVector> {
        ensure_same(&self.in_frame, &s.in_frame)?;
        ensure_same(&self.out_frame, &s.out_frame)?;
        Ok(ProbVector::new_unchecked(self.product.clone(), apply_second(&s.matrix, self.s.as_vector())))
    }

    pub fn map_from_choi(&self, p: &ProbVector) -> Result<PseudoStochasticMap> {
        ensure_same(&self.product, p.frame())?;
        Ok(map_from_choi_parts(&self.in_frame, &self.out_frame, p.as_vector()))
    }

    pub fn is_cptp(&self, s: &PseudoStochasticMap, tol: f64) -> Result<PhysicalityVerdict> {
        check_column_sums(&s.matrix, 1.0, tol.max(STOCHASTIC_TOL))?;
        let p = self.choi_prob(s)?;
        Ok(states::positivity_from_power_traces(&states::power_traces(&p), tol))
    }
}

// (I ⊗ S) s with the first factor of length s.len()/S.ncols().
fn apply_second(m: &RMat, s: &RVec) -> RVec {
    let (nout, nin) = (m.nrows(), m.ncols());
    let na = s.len() / nin;
    let mut out = RVec::zeros(na * nout);
    for n in 0..na {
        let block = s.rows(n * nin, nin);
        out.rows_mut(n * nout, nout).copy_from(&(m * block));
    }
    out
}

/// p_S = (I ⊗ S) s with s over the product frame Ē^in ⊗ E^in.
pub fn choi_prob(s: &PseudoStochasticMap, ent: &ProbVector) -> Result<ProbVector> {
    let expected = choi_frame(&s.in_frame, &s.in_frame);
    ensure_same(&expected, ent.frame())?;
    Ok(ProbVector::new_unchecked(
        choi_frame(&s.in_frame, &s.out_frame),
        apply_second(&s.matrix, ent.as_vector()),
    ))
}

fn map_from_choi_parts(in_frame: &Frame, out_frame: &Frame, p: &RVec) -> PseudoStochasticMap {
    let (nin, nout) = (in_frame.len(), out_frame.len());
    let conj = in_frame.conjugate();
    let d = in_frame.dim() as f64;
    // S_lk = d_in Σ_n Tr(ē_n e_kᵀ) p_S(n, l)
    let w = RMat::from_fn(nin, nin, |n, k| {
        linalg::trace_prod(conj.dual(n), &in_frame.dual(k).transpose()).re
    });
    let m = RMat::from_fn(nout, nin, |l, k| {
        (0..nin).map(|n| w[(n, k)] * p[n * nout + l]).sum::<f64>() * d
    });
    PseudoStochasticMap::new_unchecked(in_frame.clone(), out_frame.clone(), m)
}

/// Inverse of `choi_prob` for a Choi vector over Ē^in ⊗ E^out.
pub fn map_from_choi(p: &ProbVector, in_frame: &Frame, out_frame: &Frame) -> Result<PseudoStochasticMap> {
    ensure_same(&choi_frame(in_frame, out_frame), p.frame())?;
    Ok(map_from_choi_parts(in_frame, out_frame, p.as_vector()))
}

/// Complete positivity through physicality of the Choi probability vector.
pub fn is_cptp(s: &PseudoStochasticMap, tol: f64) -> Result<PhysicalityVerdict> {
    ChoiContext::new(&s.in_frame, &s.out_frame).is_cptp(s, tol)
}

/// Vectors p^(nm)_k = Tr(E_k |ψ_n⟩⟨ψ_m|) of a matrix-unit system, indexed n·d + m.
///
/// `basis` holds the orthonormal kets |ψ_n⟩ as columns; the computational basis when absent.
pub fn build_matrix_unit_frame(frame: &Frame, basis: Option<&CMat>) -> Vec<CVec> {
    let d = frame.dim();
    let u = basis.cloned().unwrap_or_else(|| linalg::identity(d));
    let mut out = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            let unit = u.column(n) * u.column(m).adjoint();
            out.push(frame.born(&unit));
        }
    }
    out
}

/// Choi vector over Ē ⊗ F assembled from matrix units: (1/d) Σ_nm p^(mn) ⊗ S p^(nm).
pub fn assemble_choi(units: &[CVec], s: &PseudoStochasticMap) -> RVec {
    let d = (units.len() as f64).sqrt().round() as usize;
    let sc = linalg::to_complex(&s.matrix);
    let nin = s.matrix.ncols();
    let nout = s.matrix.nrows();
    let mut out = CVec::zeros(nin * nout);
    for n in 0..d {
        for m in 0..d {
            let left = &units[m * d + n];
            let right = &sc * &units[n * d + m];
            out += left.kronecker(&right);
        }
    }
    out.map(|z| z.re / d as f64)
}

/// The transpose map ρ ↦ ρᵀ, positive but not completely positive.
pub fn transpose_map(frame: &Frame) -> PseudoStochasticMap {
    let m = superoperator_matrix(frame, frame, |x| x.transpose());
    PseudoStochasticMap::new_unchecked(frame.clone(), frame.clone(), m)
}
