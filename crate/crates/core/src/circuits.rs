//! Qubit circuits simulated on probability vectors over the product tetrahedral frame.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::channels::PseudoStochasticMap;
use crate::error::{Error, Result};
use crate::frames::{self, Frame};
use crate::linalg::{self, c, CMat, RMat, C64};

/// Largest register handled with dense vectors.
pub const MAX_QUBITS: usize = 12;

pub fn sic_frame() -> &'static Frame {
    static F: OnceLock<Frame> = OnceLock::new();
    F.get_or_init(frames::build_sic_qubit)
}

pub fn sic_pair_frame() -> &'static Frame {
    static F: OnceLock<Frame> = OnceLock::new();
    F.get_or_init(|| frames::tensor(sic_frame(), sic_frame()))
}

/// Frame probabilities of |0⟩.
pub fn p0() -> [f64; 4] {
    let a = (3.0 + 3f64.sqrt()) / 12.0;
    let b = (3.0 - 3f64.sqrt()) / 12.0;
    [a, a, b, b]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    pub n: usize,
    pub p: Vec<f64>,
}

/// p^(0) ⊗ … ⊗ p^(0).
pub fn init_register(n: usize) -> Result<QubitRegister> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidInput(format!("register size {n} outside 1..={MAX_QUBITS}")));
    }
    let base = p0();
    let mut p = vec![1.0];
    for _ in 0..n {
        p = p.iter().flat_map(|x| base.iter().map(move |b| x * b)).collect();
    }
    Ok(QubitRegister { n, p })
}

fn check_unitary(u: &CMat, d: usize) -> Result<()> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch(format!("expected a {d}x{d} unitary, got {}x{}", u.nrows(), u.ncols())));
    }
    if !linalg::is_unitary(u, 1e-9) {
        return Err(Error::NotUnitary(format!("{d}x{d} matrix")));
    }
    Ok(())
}

/// S(U) = 3s(U) − 2J₁ with s(U)_ij = 2Tr(E_i U E_j U†) and J₁ = 1/4.
pub fn single_qubit_map(u: &CMat) -> Result<PseudoStochasticMap> {
    check_unitary(u, 2)?;
    let e = sic_frame().effects();
    let ud = u.adjoint();
    let rot: Vec<CMat> = e.iter().map(|x| u * x * &ud).collect();
    let m = RMat::from_fn(4, 4, |i, j| 3.0 * 2.0 * linalg::trace_prod(&e[i], &rot[j]).re - 2.0 * 0.25);
    Ok(PseudoStochasticMap::new_unchecked(sic_frame().clone(), sic_frame().clone(), m))
}

/// s_I(U)_(ij),(kl) = 4Tr(E_i⊗E_j U E_k⊗E_l U†).
pub fn s_one(u: &CMat) -> RMat {
    let e = sic_pair_frame().effects();
    let ud = u.adjoint();
    let rot: Vec<CMat> = e.iter().map(|x| u * x * &ud).collect();
    RMat::from_fn(16, 16, |a, b| 4.0 * linalg::trace_prod(&e[a], &rot[b]).re)
}

/// s_II(U)_(ij),(kl) = Tr(E_i⊗E_j U ρ̃_kl U†) with ρ̃_kl = E_k⊗I/2 + I/2⊗E_l.
pub fn s_two(u: &CMat) -> RMat {
    let e1 = sic_frame().effects();
    let e = sic_pair_frame().effects();
    let half = linalg::identity(2) * c(0.5, 0.0);
    let ud = u.adjoint();
    let rot: Vec<CMat> = (0..16)
        .map(|b| {
            let rho = linalg::kron(&e1[b / 4], &half) + linalg::kron(&half, &e1[b % 4]);
            u * rho * &ud
        })
        .collect();
    RMat::from_fn(16, 16, |a, b| linalg::trace_prod(&e[a], &rot[b]).re)
}

/// S(U) = 9s_I − 12s_II + 4J₂ with J₂ = 1/16.
pub fn two_qubit_map(u: &CMat) -> Result<PseudoStochasticMap> {
    check_unitary(u, 4)?;
    let m = s_one(u) * 9.0 - s_two(u) * 12.0 + RMat::from_element(16, 16, 4.0 / 16.0);
    Ok(PseudoStochasticMap::new_unchecked(sic_pair_frame().clone(), sic_pair_frame().clone(), m))
}

/// M_pr = 3m_pr − 2J_pr for a computational-basis read-out; row r is outcome r.
pub fn projective_measure_map() -> RMat {
    let r = 1.0 / 3f64.sqrt();
    let (hi, lo) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
    let m = RMat::from_row_slice(2, 4, &[hi, hi, lo, lo, lo, lo, hi, hi]);
    m * 3.0 - RMat::from_element(2, 4, 1.0)
}

fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    for &t in targets {
        if t >= n {
            return Err(Error::TargetOutOfRange(format!("qubit {t} in a {n}-qubit register")));
        }
    }
    if targets.len() == 2 && targets[0] == targets[1] {
        return Err(Error::TargetOutOfRange(format!("repeated target {}", targets[0])));
    }
    Ok(())
}

/// Applies a 4^k×4^k chunk map to the listed qubits in place (qubit 0 is the leading chunk).
pub fn apply_gate(p: &mut [f64], s: &RMat, targets: &[usize], n: usize) -> Result<()> {
    check_targets(targets, n)?;
    let k = targets.len();
    let m = 4usize.pow(k as u32);
    if s.nrows() != m || s.ncols() != m || p.len() != 4usize.pow(n as u32) {
        return Err(Error::ShapeMismatch(format!("{}x{} map on {k} target(s)", s.nrows(), s.ncols())));
    }
    let stride = |q: usize| 4usize.pow((n - 1 - q) as u32);
    let strides: Vec<usize> = targets.iter().map(|&q| stride(q)).collect();
    // offsets of the local basis inside one slice, first target most significant
    let offsets: Vec<usize> = (0..m)
        .map(|local| {
            let mut off = 0;
            let mut rest = local;
            for t in (0..k).rev() {
                off += (rest % 4) * strides[t];
                rest /= 4;
            }
            off
        })
        .collect();
    let others: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let count = 4usize.pow(others.len() as u32);
    let mut buf = vec![0.0; m];
    for idx in 0..count {
        let mut base = 0;
        let mut rest = idx;
        for &q in others.iter().rev() {
            base += (rest % 4) * stride(q);
            rest /= 4;
        }
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = p[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = 0.0;
            for (col, b) in buf.iter().enumerate() {
                acc += s[(r, col)] * b;
            }
            p[base + off] = acc;
        }
    }
    Ok(())
}

/// Full 4ⁿ×4ⁿ matrix of a chunk map: Kronecker embedding, with a chunk permutation for
/// non-adjacent or reversed two-qubit targets.
pub fn embed(s: &RMat, targets: &[usize], n: usize) -> Result<RMat> {
    check_targets(targets, n)?;
    let k = targets.len();
    if k == 0 || k > 2 || s.nrows() != 4usize.pow(k as u32) {
        return Err(Error::ShapeMismatch("embed takes one- or two-qubit maps".into()));
    }
    let id = |q: usize| RMat::identity(4usize.pow(q as u32), 4usize.pow(q as u32));
    if k == 1 || targets[1] == targets[0] + 1 {
        let t = targets[0];
        return Ok(linalg::rkron(&linalg::rkron(&id(t), s), &id(n - t - k)));
    }
    // move the targets to positions 0 and 1, apply, move back
    let mut order = targets.to_vec();
    order.extend((0..n).filter(|q| !targets.contains(q)));
    let perm = chunk_permutation(&order, n);
    let inner = linalg::rkron(s, &id(n - 2));
    Ok(perm.transpose() * inner * perm)
}

/// Permutation matrix taking a register in qubit order 0..n to the order `order`.
fn chunk_permutation(order: &[usize], n: usize) -> RMat {
    let dim = 4usize.pow(n as u32);
    let mut m = RMat::zeros(dim, dim);
    for idx in 0..dim {
        let digits: Vec<usize> = (0..n).map(|q| (idx / 4usize.pow((n - 1 - q) as u32)) % 4).collect();
        let new = order.iter().fold(0, |acc, &q| acc * 4 + digits[q]);
        m[(new, idx)] = 1.0;
    }
    m
}

/// Standard unitaries by lowercase name; two-qubit gates act on |a b⟩ with a the first target.
pub fn standard_unitary(name: &str) -> Option<CMat> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let m2 = |v: [C64; 4]| CMat::from_row_slice(2, 2, &v);
    let diag4 = |v: [C64; 4]| CMat::from_diagonal(&nalgebra::DVector::from_row_slice(&v));
    Some(match name.to_ascii_lowercase().as_str() {
        "id" | "i" => linalg::identity(2),
        "h" => m2([c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)]),
        "x" => linalg::pauli_x(),
        "y" => linalg::pauli_y(),
        "z" => linalg::pauli_z(),
        "s" => m2([o, z, z, c(0., 1.)]),
        "sdg" => m2([o, z, z, c(0., -1.)]),
        "t" => m2([o, z, z, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]),
        "tdg" => m2([o, z, z, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]),
        "cz" => diag4([o, o, o, -o]),
        "cx" | "cnot" => {
            let mut m = CMat::zeros(4, 4);
            for (a, b) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(a, b)] = o;
            }
            m
        }
        "swap" => {
            let mut m = CMat::zeros(4, 4);
            for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                m[(a, b)] = o;
            }
            m
        }
        "iswap" => {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = o;
            m[(1, 2)] = c(0., 1.);
            m[(2, 1)] = c(0., 1.);
            m[(3, 3)] = o;
            m
        }
        _ => return None,
    })
}

/// Pseudostochastic matrix of a unitary on one or two qubits.
pub fn gate_map(u: &CMat) -> Result<RMat> {
    match u.nrows() {
        2 => Ok(single_qubit_map(u)?.into_matrix()),
        4 => Ok(two_qubit_map(u)?.into_matrix()),
        d => Err(Error::DimensionMismatch(format!("{d}x{d} gates are not supported"))),
    }
}

pub const LIBRARY: &[&str] = &["h", "x", "t", "s", "cz", "cx", "swap", "iswap"];

/// Named maps {H, X, T, S, CZ, CX, SWAP, iSWAP}.
pub fn gate_library() -> BTreeMap<String, RMat> {
    LIBRARY
        .iter()
        .map(|n| (n.to_string(), gate_map(&standard_unitary(n).expect("library gate")).expect("unitary")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate { name: String, targets: Vec<usize>, unitary: Option<CMat> },
    Measure(Vec<usize>),
}

impl Instruction {
    pub fn gate(name: &str, targets: &[usize]) -> Self {
        Instruction::Gate { name: name.to_string(), targets: targets.to_vec(), unitary: None }
    }

    pub fn custom(name: &str, targets: &[usize], u: CMat) -> Self {
        Instruction::Gate { name: name.to_string(), targets: targets.to_vec(), unitary: Some(u) }
    }

    fn label(&self) -> String {
        match self {
            Instruction::Gate { name, targets, .. } => format!("{name}{targets:?}"),
            Instruction::Measure(q) => format!("measure{q:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram {
    pub n: usize,
    pub ops: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    /// Measured qubits; the first one is the most significant outcome bit.
    pub qubits: Vec<usize>,
    pub probs: Vec<f64>,
}

impl MeasurementRecord {
    pub fn label(&self, outcome: usize) -> String {
        let m = self.qubits.len();
        (0..m).map(|b| if (outcome >> (m - 1 - b)) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn prob_of(&self, bits: &str) -> Option<f64> {
        if bits.len() != self.qubits.len() {
            return None;
        }
        let idx = usize::from_str_radix(bits, 2).ok()?;
        self.probs.get(idx).copied()
    }
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub label: String,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub register: QubitRegister,
    pub record: MeasurementRecord,
    pub trace: Vec<TraceStep>,
}

fn resolve(name: &str, targets: &[usize], unitary: &Option<CMat>) -> Result<RMat> {
    let u = match unitary {
        Some(u) => u.clone(),
        None => standard_unitary(name).ok_or_else(|| Error::InvalidInput(format!("unknown gate '{name}'")))?,
    };
    let want = 1usize << targets.len();
    if u.nrows() != want {
        return Err(Error::DimensionMismatch(format!("gate '{name}' is {}x{} but has {} target(s)", u.nrows(), u.ncols(), targets.len())));
    }
    gate_map(&u)
}

/// Executes the program; measurements are terminal read-outs combined at the end.
pub fn run(program: &CircuitProgram) -> Result<RunResult> {
    let n = program.n;
    let mut reg = init_register(n)?;
    let mut measured: Vec<usize> = Vec::new();
    let mut trace = vec![TraceStep { label: "init".into(), p: reg.p.clone() }];
    for op in &program.ops {
        match op {
            Instruction::Gate { name, targets, unitary } => {
                if targets.is_empty() || targets.len() > 2 {
                    return Err(Error::InvalidInput(format!("gate '{name}' needs one or two targets")));
                }
                check_targets(targets, n)?;
                if let Some(q) = targets.iter().find(|q| measured.contains(q)) {
                    return Err(Error::InvalidInput(format!("gate '{name}' acts on already measured qubit {q}")));
                }
                let s = resolve(name, targets, unitary)?;
                apply_gate(&mut reg.p, &s, targets, n)?;
            }
            Instruction::Measure(qs) => {
                for &q in qs {
                    check_targets(&[q], n)?;
                    if measured.contains(&q) {
                        return Err(Error::InvalidInput(format!("qubit {q} measured twice")));
                    }
                    measured.push(q);
                }
            }
        }
        trace.push(TraceStep { label: op.label(), p: reg.p.clone() });
    }
    if measured.is_empty() {
        measured = (0..n).collect();
    }
    let probs = readout(&reg.p, n, &measured);
    Ok(RunResult { register: reg, record: MeasurementRecord { qubits: measured, probs }, trace })
}

/// Read-out distribution over `qubits` (first = most significant bit); other qubits are traced out.
pub fn readout(p: &[f64], n: usize, qubits: &[usize]) -> Vec<f64> {
    let mpr = projective_measure_map();
    // axes in qubit order; each axis is contracted with M_pr (measured) or summed (traced out)
    let mut dims = vec![4usize; n];
    let mut data = p.to_vec();
    for q in (0..n).rev() {
        let rows: Vec<Vec<f64>> = if qubits.contains(&q) {
            (0..2).map(|r| mpr.row(r).iter().copied().collect()).collect()
        } else {
            vec![vec![1.0; 4]]
        };
        let inner: usize = dims[q + 1..].iter().product();
        let outer: usize = dims[..q].iter().product();
        let mut next = vec![0.0; outer * rows.len() * inner];
        for o in 0..outer {
            for (r, row) in rows.iter().enumerate() {
                for i in 0..inner {
                    let mut acc = 0.0;
                    for (k, w) in row.iter().enumerate() {
                        acc += w * data[(o * 4 + k) * inner + i];
                    }
                    next[(o * rows.len() + r) * inner + i] = acc;
                }
            }
        }
        dims[q] = rows.len();
        data = next;
    }
    // data is indexed by measured qubits in ascending order; reorder to the requested order
    let mut sorted: Vec<usize> = qubits.to_vec();
    sorted.sort_unstable();
    let m = qubits.len();
    let mut out = vec![0.0; 1 << m];
    for (idx, v) in data.iter().enumerate() {
        let mut target = 0;
        for &q in qubits {
            let pos = sorted.iter().position(|&s| s == q).expect("measured qubit");
            let bit = (idx >> (m - 1 - pos)) & 1;
            target = (target << 1) | bit;
        }
        out[target] += v;
    }
    out
}

/// Multinomial shot counts for the record's distribution.
pub fn sample<R: Rng + ?Sized>(record: &MeasurementRecord, shots: usize, rng: &mut R) -> Vec<u64> {
    let w: Vec<f64> = record.probs.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    let mut counts = vec![0u64; w.len()];
    for _ in 0..shots {
        let mut u = rng.random::<f64>() * total;
        let mut pick = w.len() - 1;
        for (i, x) in w.iter().enumerate() {
            if u < *x {
                pick = i;
                break;
            }
            u -= x;
        }
        counts[pick] += 1;
    }
    counts
}

/// Diagonal oracle U_χ|x⟩ = (−1)^{χ(x)}|x⟩ marking the bitstring `secret`.
pub fn phase_oracle(secret: &str) -> Result<CMat> {
    let m = secret.len();
    let idx = usize::from_str_radix(secret, 2).map_err(|_| Error::InvalidInput(format!("'{secret}' is not a bitstring")))?;
    let dim = 1 << m;
    Ok(CMat::from_fn(dim, dim, |i, j| if i != j { c(0.0, 0.0) } else if i == idx { c(-1.0, 0.0) } else { c(1.0, 0.0) }))
}

/// Two-qubit Grover search for `secret`: H⊗H, oracle, diffusion, read-out of both qubits.
pub fn grover_program(secret: &str) -> Result<CircuitProgram> {
    if secret.len() != 2 {
        return Err(Error::InvalidInput("the two-qubit search needs a 2-bit secret".into()));
    }
    let oracle = phase_oracle(secret)?;
    let reflect = phase_oracle("00")? * c(-1.0, 0.0);
    Ok(CircuitProgram {
        n: 2,
        ops: vec![
            Instruction::gate("h", &[0]),
            Instruction::gate("h", &[1]),
            Instruction::custom("oracle", &[0, 1], oracle),
            Instruction::gate("h", &[0]),
            Instruction::gate("h", &[1]),
            Instruction::custom("reflect", &[0, 1], reflect),
            Instruction::gate("h", &[0]),
            Instruction::gate("h", &[1]),
            Instruction::Measure(vec![0, 1]),
        ],
    })
}
