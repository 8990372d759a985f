//! JSON file formats. Complex numbers are `[re, im]` pairs; matrices are lists of rows.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circuits::{CircuitProgram, Instruction};
use crate::error::{Error, Result};
use crate::frames::{self, Frame, MicPovmFrame};
use crate::linalg::{c, CMat, RMat, RVec};

pub type ComplexJson = Vec<Vec<[f64; 2]>>;
pub type RealJson = Vec<Vec<f64>>;

pub fn cmat_to_json(m: &CMat) -> ComplexJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn cmat_from_json(rows: &ComplexJson) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch("complex matrix rows are empty or ragged".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn rmat_to_json(m: &RMat) -> RealJson {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn rmat_from_json(rows: &RealJson) -> Result<RMat> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::ShapeMismatch("real matrix rows are empty or ragged".into()));
    }
    Ok(RMat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Parses a circuit program from JSON text.
pub fn circuit_from_str(text: &str) -> Result<CircuitFile> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("circuit: {e}")))
}

pub fn to_json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable value")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub dim: usize,
    pub effects: Vec<ComplexJson>,
}

impl FrameFile {
    pub fn from_frame(f: &MicPovmFrame) -> Self {
        FrameFile { dim: f.dim(), effects: f.effects().iter().map(cmat_to_json).collect() }
    }

    pub fn build(&self, tol: f64) -> Result<Frame> {
        let effects = self.effects.iter().map(cmat_from_json).collect::<Result<Vec<_>>>()?;
        if effects.iter().any(|e| e.nrows() != self.dim) {
            return Err(Error::DimensionMismatch(format!("effects do not match dim = {}", self.dim)));
        }
        frames::build_mic_from_effects_tol(effects, tol)
    }
}

/// A frame given inline, as a path, or by name: "sic" (qubit), "sic3", or "sic^n" for the n-qubit product.
pub fn resolve_frame(v: Option<&Value>, base: &Path, tol: f64) -> Result<Frame> {
    match v {
        None | Some(Value::Null) => Ok(frames::build_sic_qubit()),
        Some(Value::String(s)) => {
            if let Some(rest) = s.strip_prefix("sic^") {
                let n: usize = rest.parse().map_err(|_| Error::InvalidInput(format!("bad frame name '{s}'")))?;
                return Ok(frames::tensor_power(&frames::build_sic_qubit(), n.max(1)));
            }
            match s.as_str() {
                "sic" | "sic2" => Ok(frames::build_sic_qubit()),
                "sic3" => frames::build_sic(3),
                path => {
                    let p: PathBuf = base.join(path);
                    read_json::<FrameFile>(&p)?.build(tol)
                }
            }
        }
        Some(obj) => {
            let ff: FrameFile = serde_json::from_value(obj.clone()).map_err(|e| Error::InvalidInput(format!("frame: {e}")))?;
            ff.build(tol)
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<ComplexJson>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pstoch: Option<RealJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_frame: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_frame: Option<Value>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasurementFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pstoch_rows: Option<RealJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Outcome values, used by `measure mean`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Value>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelFile {
    pub hamiltonian: ComplexJson,
    #[serde(default)]
    pub noise_ops: Vec<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Value>,
}

impl ModelFile {
    pub fn operators(&self) -> Result<(CMat, Vec<CMat>)> {
        let h = cmat_from_json(&self.hamiltonian)?;
        let ops = self.noise_ops.iter().map(cmat_from_json).collect::<Result<Vec<_>>>()?;
        Ok((h, ops))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpJson {
    Gate {
        gate: String,
        targets: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unitary: Option<ComplexJson>,
    },
    Measure {
        measure: Vec<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: usize,
    pub ops: Vec<OpJson>,
}

impl CircuitFile {
    pub fn program(&self) -> Result<CircuitProgram> {
        let ops = self
            .ops
            .iter()
            .map(|op| match op {
                OpJson::Gate { gate, targets, unitary } => Ok(Instruction::Gate {
                    name: gate.clone(),
                    targets: targets.clone(),
                    unitary: unitary.as_ref().map(cmat_from_json).transpose()?,
                }),
                OpJson::Measure { measure } => Ok(Instruction::Measure(measure.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircuitProgram { n: self.n, ops })
    }

    pub fn from_program(p: &CircuitProgram) -> Self {
        let ops = p
            .ops
            .iter()
            .map(|op| match op {
                Instruction::Gate { name, targets, unitary } => OpJson::Gate {
                    gate: name.clone(),
                    targets: targets.clone(),
                    unitary: unitary.as_ref().map(cmat_to_json),
                },
                Instruction::Measure(q) => OpJson::Measure { measure: q.clone() },
            })
            .collect();
        CircuitFile { n: p.n, ops }
    }
}

pub fn rvec_to_vec(v: &RVec) -> Vec<f64> {
    v.iter().copied().collect()
}
