//! Measurements and observables as pseudostochastic matrices.

use crate::channels::check_column_sums;
use crate::error::{Error, Result};
use crate::frames::{ensure_same, Frame, MicPovmFrame};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, C64};
use crate::states::{self, PhysicalityVerdict, ProbVector};

#[derive(Debug, Clone)]
pub struct MeasurementMap {
    frame: Frame,
    matrix: RMat,
    labels: Vec<String>,
}

impl MeasurementMap {
    pub fn new(frame: Frame, matrix: RMat, labels: Option<Vec<String>>) -> Result<Self> {
        if matrix.ncols() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns for a frame with {} effects",
                matrix.ncols(),
                frame.len()
            )));
        }
        check_column_sums(&matrix, 1.0, 1e-9)?;
        let labels = labels.unwrap_or_else(|| (0..matrix.nrows()).map(|i| i.to_string()).collect());
        if labels.len() != matrix.nrows() {
            return Err(Error::ShapeMismatch(format!("{} labels for {} outcomes", labels.len(), matrix.nrows())));
        }
        Ok(MeasurementMap { frame, matrix, labels })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn outcomes(&self) -> usize {
        self.matrix.nrows()
    }

    /// q = M p.
    pub fn outcome_probs(&self, p: &ProbVector) -> Result<RVec> {
        ensure_same(&self.frame, p.frame())?;
        Ok(&self.matrix * p.as_vector())
    }
}

/// M_ij = Tr(M_i e_j).
pub fn povm_to_map(effects: &[CMat], frame: &Frame) -> Result<MeasurementMap> {
    povm_to_map_tol(effects, frame, 1e-9)
}

pub fn povm_to_map_tol(effects: &[CMat], frame: &Frame, tol: f64) -> Result<MeasurementMap> {
    let d = frame.dim();
    let mut sum = CMat::zeros(d, d);
    for (i, e) in effects.iter().enumerate() {
        if e.nrows() != d || e.ncols() != d {
            return Err(Error::DimensionMismatch(format!("effect {i} does not match the frame dimension {d}")));
        }
        if !linalg::is_hermitian(e, tol) {
            return Err(Error::NotHermitian(format!("effect {i}")));
        }
        let lo = linalg::min_eigenvalue(e);
        if lo < -tol {
            return Err(Error::NotPositive(format!("effect {i} has eigenvalue {lo}")));
        }
        sum += e;
    }
    let defect = linalg::max_abs(&(sum - linalg::identity(d)));
    if defect > tol {
        return Err(Error::NotNormalized(format!("effects sum to identity only within {defect}")));
    }
    Ok(MeasurementMap {
        frame: frame.clone(),
        matrix: effects_matrix(effects, frame),
        labels: (0..effects.len()).map(|i| i.to_string()).collect(),
    })
}

fn effects_matrix(effects: &[CMat], frame: &MicPovmFrame) -> RMat {
    RMat::from_fn(effects.len(), frame.len(), |i, j| linalg::trace_prod(&effects[i], frame.dual(j)).re)
}

/// M_k = Σ_l M_kl E_l.
pub fn map_to_povm(m: &MeasurementMap) -> Vec<CMat> {
    (0..m.outcomes())
        .map(|k| {
            let row = CVec::from_iterator(m.frame.len(), m.matrix.row(k).iter().map(|x| c(*x, 0.0)));
            m.frame.from_effect_coordinates(&row)
        })
        .collect()
}

/// (λ⊛μ)_k = Σ_nm λ_n Λ̃^(k)_nm μ_m: effect-coordinates of the operator product.
pub fn circled_star(lambda: &CVec, mu: &CVec, frame: &MicPovmFrame) -> Result<CVec> {
    let n = frame.len();
    if lambda.len() != n || mu.len() != n {
        return Err(Error::FrameMismatch);
    }
    let lt = frame.lambda_tilde();
    let mut out = CVec::zeros(n);
    for k in 0..n {
        let block = &lt[k * n * n..(k + 1) * n * n];
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..n {
            let mut inner = C64::new(0.0, 0.0);
            for b in 0..n {
                inner += block[a * n + b] * mu[b];
            }
            acc += lambda[a] * inner;
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Tr(M_iʲ) for j = 1..=d, from the effect coordinates of row i.
pub fn effect_power_traces(row: &CVec, frame: &MicPovmFrame) -> Vec<f64> {
    let kappa = frame.trace_vector();
    let d = frame.dim();
    let mut out = Vec::with_capacity(d);
    let mut pw = row.clone();
    for j in 0..d {
        if j > 0 {
            pw = circled_star(&pw, row, frame).expect("row matches frame");
            pw.iter_mut().for_each(|z| z.im = 0.0);
        }
        out.push(pw.iter().zip(kappa.iter()).map(|(z, k)| z.re * k).sum());
    }
    out
}

/// Per-row positivity of the reconstructed effects.
pub fn is_valid_measurement(m: &MeasurementMap, tol: f64) -> Result<Vec<PhysicalityVerdict>> {
    check_column_sums(&m.matrix, 1.0, tol.max(1e-9))?;
    Ok((0..m.outcomes())
        .map(|i| {
            let row = CVec::from_iterator(m.frame.len(), m.matrix.row(i).iter().map(|x| c(*x, 0.0)));
            states::positivity_from_power_traces(&effect_power_traces(&row, &m.frame), tol)
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Observable {
    values: Vec<f64>,
    map: MeasurementMap,
    mean_row: RVec,
}

impl Observable {
    pub fn new(values: Vec<f64>, map: MeasurementMap) -> Result<Self> {
        if values.len() != map.outcomes() {
            return Err(Error::ShapeMismatch(format!("{} values for {} outcomes", values.len(), map.outcomes())));
        }
        let x = RVec::from_vec(values.clone());
        let mean_row = map.matrix.tr_mul(&x);
        Ok(Observable { values, map, mean_row })
    }

    /// Spectral decomposition of a Hermitian operator into projectors on distinct eigenvalues.
    pub fn from_operator(op: &CMat, frame: &Frame) -> Result<Self> {
        if !linalg::is_hermitian(op, 1e-9) {
            return Err(Error::NotHermitian("observable".into()));
        }
        if op.nrows() != frame.dim() {
            return Err(Error::DimensionMismatch("observable does not match the frame".into()));
        }
        let (vals, vecs) = linalg::herm_eigh(op);
        let mut groups: Vec<(f64, CMat)> = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            let col = vecs.column(i);
            let proj = col * col.adjoint();
            match groups.last_mut() {
                Some((x, p)) if (*x - v).abs() <= 1e-9 => *p += proj,
                _ => groups.push((*v, proj)),
            }
        }
        let effects: Vec<CMat> = groups.iter().map(|g| g.1.clone()).collect();
        let map = povm_to_map(&effects, frame)?;
        Observable::new(groups.iter().map(|g| g.0).collect(), map)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self) -> &MeasurementMap {
        &self.map
    }

    /// O_mean = xᵀ M.
    pub fn mean_row(&self) -> &RVec {
        &self.mean_row
    }
}

/// ⟨O⟩ = O_mean · p.
pub fn observable_mean(o: &Observable, p: &ProbVector) -> Result<f64> {
    ensure_same(&o.map.frame, p.frame())?;
    Ok(o.mean_row.dot(p.as_vector()))
}
