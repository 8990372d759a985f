//! Generators of unitary and GKSL dynamics in a frame, time evolution and generator checks.

use serde::Serialize;

use crate::channels::{self, PseudoStochasticMap};
use crate::error::{Error, Result};
use crate::frames::{ensure_same, Frame, MicPovmFrame};
use crate::linalg::{self, c, CMat, RMat, RVec, C64};
use crate::states::{self, PhysicalityVerdict, ProbVector};

pub mod fixtures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Hamiltonian,
    Dissipator,
    Gksl,
}

#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    frame: Frame,
    matrix: RMat,
    kind: GeneratorKind,
}

impl GeneratorMatrix {
    /// Wraps a matrix after checking that its columns sum to zero.
    pub fn new(frame: Frame, matrix: RMat, kind: GeneratorKind) -> Result<Self> {
        if matrix.nrows() != frame.len() || matrix.ncols() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} generator for a frame with {} effects",
                matrix.nrows(),
                matrix.ncols(),
                frame.len()
            )));
        }
        let scale = linalg::max_abs(&matrix).max(1.0);
        for (j, s) in linalg::column_sums(&matrix).iter().enumerate() {
            if s.abs() > 1e-9 * scale || !s.is_finite() {
                return Err(Error::NotGeneratorShaped(format!("column {j} sums to {s}")));
            }
        }
        Ok(GeneratorMatrix { frame, matrix, kind })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn into_matrix(self) -> RMat {
        self.matrix
    }

    /// exp(L t).
    pub fn propagator(&self, t: f64) -> RMat {
        linalg::expm(&(&self.matrix * t))
    }
}

/// Hermitian, traceless operators with Tr(σ^(i)σ^(j)) = 2δ_ij.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    ops: Vec<CMat>,
}

impl OperatorBasis {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let d = ops.first().map(|o| o.nrows()).unwrap_or(0);
        if d == 0 || ops.len() != d * d - 1 {
            return Err(Error::DimensionMismatch(format!("{} operators do not form a basis of su({d})", ops.len())));
        }
        for (i, o) in ops.iter().enumerate() {
            if !linalg::is_hermitian(o, 1e-9) {
                return Err(Error::NotHermitian(format!("basis element {i}")));
            }
            if o.trace().norm() > 1e-9 {
                return Err(Error::InvalidInput(format!("basis element {i} is not traceless")));
            }
            for (j, p) in ops.iter().enumerate() {
                let want = if i == j { 2.0 } else { 0.0 };
                if (linalg::trace_prod(o, p) - c(want, 0.0)).norm() > 1e-9 {
                    return Err(Error::InvalidInput(format!("Tr(s{i} s{j}) != {want}")));
                }
            }
        }
        Ok(OperatorBasis { ops })
    }

    pub fn pauli() -> Self {
        OperatorBasis { ops: linalg::paulis().to_vec() }
    }

    /// Generalized Gell-Mann matrices (the Pauli matrices for d = 2).
    pub fn gell_mann(d: usize) -> Self {
        let mut ops = Vec::with_capacity(d * d - 1);
        for j in 0..d {
            for k in j + 1..d {
                let mut s = CMat::zeros(d, d);
                s[(j, k)] = c(1.0, 0.0);
                s[(k, j)] = c(1.0, 0.0);
                ops.push(s);
                let mut a = CMat::zeros(d, d);
                a[(j, k)] = c(0.0, -1.0);
                a[(k, j)] = c(0.0, 1.0);
                ops.push(a);
            }
        }
        for l in 1..d {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = CMat::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = c(norm, 0.0);
            }
            m[(l, l)] = c(-(l as f64) * norm, 0.0);
            ops.push(m);
        }
        OperatorBasis { ops }
    }

    pub fn for_dim(d: usize) -> Self {
        if d == 2 {
            Self::pauli()
        } else {
            Self::gell_mann(d)
        }
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }
}

/// H = ν₀ I + Σ ν_i σ^(i).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianCoeffs {
    pub nu0: f64,
    pub nu: Vec<f64>,
}

pub fn hamiltonian_coeffs(h: &CMat, basis: &OperatorBasis) -> HamiltonianCoeffs {
    let d = h.nrows() as f64;
    HamiltonianCoeffs {
        nu0: h.trace().re / d,
        nu: basis.ops.iter().map(|s| linalg::trace_prod(h, s).re / 2.0).collect(),
    }
}

impl HamiltonianCoeffs {
    pub fn reconstruct(&self, basis: &OperatorBasis) -> CMat {
        let mut h = linalg::identity(basis.dim()) * c(self.nu0, 0.0);
        for (s, v) in basis.ops.iter().zip(&self.nu) {
            h += s * c(*v, 0.0);
        }
        h
    }
}

fn hamiltonian_matrix(h: &CMat, frame: &MicPovmFrame) -> RMat {
    let n = frame.len();
    // i Tr(H [E_l, e_k]) = i Tr([e_k, H] E_l)
    let he: Vec<CMat> = frame.duals().iter().map(|e| linalg::commutator(e, h)).collect();
    RMat::from_fn(n, n, |l, k| (C64::new(0.0, 1.0) * linalg::trace_prod(&he[k], frame.effect(l))).re)
}

/// H_lk = i Tr(H [E_l, e_k]).
pub fn hamiltonian_generator(h: &CMat, frame: &Frame) -> Result<GeneratorMatrix> {
    check_operator(h, frame, "Hamiltonian")?;
    Ok(GeneratorMatrix {
        frame: frame.clone(),
        matrix: hamiltonian_matrix(h, frame),
        kind: GeneratorKind::Hamiltonian,
    })
}

fn check_operator(h: &CMat, frame: &MicPovmFrame, what: &str) -> Result<()> {
    if h.nrows() != frame.dim() || h.ncols() != frame.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, frame dimension is {}",
            h.nrows(),
            h.ncols(),
            frame.dim()
        )));
    }
    if !linalg::is_hermitian(h, 1e-9) {
        return Err(Error::NotHermitian(what.into()));
    }
    Ok(())
}

/// U(t) = exp(H t).
pub fn unitary_map(gen: &GeneratorMatrix, t: f64) -> Result<PseudoStochasticMap> {
    if gen.kind != GeneratorKind::Hamiltonian {
        return Err(Error::InvalidInput("unitary_map needs a Hamiltonian generator".into()));
    }
    Ok(PseudoStochasticMap::new_unchecked(gen.frame.clone(), gen.frame.clone(), gen.propagator(t)))
}

/// H^(i)_lk = i Tr(σ^(i) [E_l, e_k]).
pub fn basis_generators(frame: &Frame, basis: &OperatorBasis) -> Result<Vec<GeneratorMatrix>> {
    if basis.dim() != frame.dim() {
        return Err(Error::DimensionMismatch("operator basis does not match the frame".into()));
    }
    Ok(basis
        .ops
        .iter()
        .map(|s| GeneratorMatrix {
            frame: frame.clone(),
            matrix: hamiltonian_matrix(s, frame),
            kind: GeneratorKind::Hamiltonian,
        })
        .collect())
}

/// P_unit(M) = −(1/4d) Σ_i Tr(M H^(i)) H^(i).
pub fn project_unitary(m: &RMat, frame: &Frame, basis: &OperatorBasis) -> Result<GeneratorMatrix> {
    if m.nrows() != frame.len() || m.ncols() != frame.len() {
        return Err(Error::ShapeMismatch(format!("{}x{} matrix for a frame with {} effects", m.nrows(), m.ncols(), frame.len())));
    }
    let gens = basis_generators(frame, basis)?;
    let d = frame.dim() as f64;
    let mut out = RMat::zeros(frame.len(), frame.len());
    for g in &gens {
        let tr = (m * &g.matrix).trace();
        out -= &g.matrix * (tr / (4.0 * d));
    }
    Ok(GeneratorMatrix { frame: frame.clone(), matrix: out, kind: GeneratorKind::Hamiltonian })
}

/// D_ij = S_ij − Σ_l c_l (Λ̃^(j)_il + Λ̃^(j)_li)/2 with S the matrix of Ψ(ρ) = Σ A ρ A† and c its column sums.
pub fn dissipator_matrix(noise_ops: &[CMat], frame: &Frame) -> Result<GeneratorMatrix> {
    let n = frame.len();
    if noise_ops.is_empty() {
        return Ok(GeneratorMatrix { frame: frame.clone(), matrix: RMat::zeros(n, n), kind: GeneratorKind::Dissipator });
    }
    for (i, a) in noise_ops.iter().enumerate() {
        if a.nrows() != frame.dim() || a.ncols() != frame.dim() {
            return Err(Error::DimensionMismatch(format!("noise operator {i} does not match the frame dimension")));
        }
    }
    let s = channels::superoperator_matrix(frame, frame, |x| {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for a in noise_ops {
            out += a * x * a.adjoint();
        }
        out
    });
    let csum = linalg::column_sums(&s);
    let lt = frame.lambda_tilde();
    let m = RMat::from_fn(n, n, |i, j| {
        let block = &lt[j * n * n..(j + 1) * n * n];
        let anti: f64 = (0..n).map(|l| csum[l] * (block[i * n + l] + block[l * n + i]).re).sum();
        s[(i, j)] - anti / 2.0
    });
    Ok(GeneratorMatrix { frame: frame.clone(), matrix: m, kind: GeneratorKind::Dissipator })
}

/// L = H + D.
pub fn gksl_generator(h: &CMat, noise_ops: &[CMat], frame: &Frame) -> Result<GeneratorMatrix> {
    let hg = hamiltonian_generator(h, frame)?;
    let dg = dissipator_matrix(noise_ops, frame)?;
    Ok(GeneratorMatrix { frame: frame.clone(), matrix: hg.matrix + dg.matrix, kind: GeneratorKind::Gksl })
}

/// p(t) = exp(L t) p0.
pub fn evolve(l: &GeneratorMatrix, p0: &ProbVector, t: f64) -> Result<ProbVector> {
    ensure_same(&l.frame, p0.frame())?;
    if t < 0.0 && l.kind != GeneratorKind::Hamiltonian {
        return Err(Error::InvalidInput(format!("negative time {t} for a dissipative generator")));
    }
    Ok(ProbVector::new_unchecked(l.frame.clone(), l.propagator(t) * p0.as_vector()))
}

/// M^Heis(t) = M exp(L t); works for measurement matrices and single mean rows.
pub fn heisenberg_evolve(m: &RMat, l: &GeneratorMatrix, t: f64) -> Result<RMat> {
    if m.ncols() != l.matrix.nrows() {
        return Err(Error::ShapeMismatch(format!("{} columns against a {}-dimensional generator", m.ncols(), l.matrix.nrows())));
    }
    Ok(m * l.propagator(t))
}

/// p_D = p̄_s ∗ ((I ⊗ L) s) ∗ p̄_s over Ē ⊗ E, the probability form of P̄ (Id⊗L)(σ) P̄.
pub fn gksl_check_vector(l: &GeneratorMatrix) -> ProbVector {
    let ctx = channels::ChoiContext::new(&l.frame, &l.frame);
    let n = l.frame.len();
    let s = ctx.s.as_vector();
    let x = RVec::from_fn(n * n, |i, _| {
        let (a, b) = (i / n, i % n);
        (0..n).map(|m| l.matrix[(b, m)] * s[a * n + m]).sum()
    });
    let kappa = l.frame.trace_vector();
    let pbar = RVec::from_fn(n * n, |i, _| kappa[i / n] * kappa[i % n] - s[i]);
    let cx = x.map(|v| c(v, 0.0));
    let cp = pbar.map(|v| c(v, 0.0));
    let inner = states::star_vec(&ctx.product, &cx, &cp);
    let pd = states::star_vec(&ctx.product, &cp, &inner);
    ProbVector::new_unchecked(ctx.product.clone(), pd.map(|z| z.re))
}

/// Conditional complete positivity of L, i.e. whether exp(Lt) is CPTP for all t ≥ 0.
pub fn is_gksl_generator(l: &GeneratorMatrix, tol: f64) -> Result<PhysicalityVerdict> {
    let scale = linalg::max_abs(&l.matrix).max(1.0);
    for (j, s) in linalg::column_sums(&l.matrix).iter().enumerate() {
        if s.abs() > tol.max(1e-9) * scale {
            return Err(Error::NotGeneratorShaped(format!("column {j} sums to {s}")));
        }
    }
    let pd = gksl_check_vector(l);
    // p_D is linear in L; below the rounding level of L it is the zero operator
    if pd.as_vector().amax() <= 1e-12 * scale {
        return Ok(states::positivity_from_power_traces(&[], tol));
    }
    let a = states::operator_power_traces(pd.frame(), &pd.to_complex());
    Ok(states::positivity_from_power_traces(&a, tol))
}

/// Validates a raw real matrix as a generator in `frame` and runs the GKSL check on it.
pub fn is_gksl_matrix(m: &RMat, frame: &Frame, tol: f64) -> Result<PhysicalityVerdict> {
    if m.nrows() != frame.len() || m.ncols() != frame.len() {
        return Err(Error::ShapeMismatch(format!("{}x{} matrix for a frame with {} effects", m.nrows(), m.ncols(), frame.len())));
    }
    let g = GeneratorMatrix { frame: frame.clone(), matrix: m.clone(), kind: GeneratorKind::Gksl };
    is_gksl_generator(&g, tol)
}
