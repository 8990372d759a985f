//! Negativity of generators, optimization over qubit POVM families and critical decoherence times.

use nalgebra::{Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::frames::{self, Frame};
use crate::linalg::{self, c, CMat, RMat, C64};
use crate::optimize::{nelder_mead, NelderMeadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoherenceKind {
    Depol,
    Deph,
    Damp,
}

impl DecoherenceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoherenceKind::Depol => "depol",
            DecoherenceKind::Deph => "deph",
            DecoherenceKind::Damp => "damp",
        }
    }
}

impl std::str::FromStr for DecoherenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "depol" | "depolarization" => Ok(DecoherenceKind::Depol),
            "deph" | "dephasing" => Ok(DecoherenceKind::Deph),
            "damp" | "damping" => Ok(DecoherenceKind::Damp),
            other => Err(Error::InvalidInput(format!("unknown decoherence kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceModel {
    pub kind: DecoherenceKind,
    pub theta: f64,
    pub tau: f64,
}

impl DecoherenceModel {
    pub fn new(kind: DecoherenceKind, theta: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")));
        }
        Ok(DecoherenceModel { kind, theta, tau })
    }
}

/// H_θ = ½(sinθ σ¹ + cosθ σ³).
pub fn hamiltonian_theta(theta: f64) -> CMat {
    (linalg::pauli_x() * c(theta.sin(), 0.0) + linalg::pauli_z() * c(theta.cos(), 0.0)) * c(0.5, 0.0)
}

/// Lindblad operators of each decoherence kind at characteristic time τ.
pub fn noise_ops(kind: DecoherenceKind, tau: f64) -> Vec<CMat> {
    let r = 1.0 / tau.sqrt();
    match kind {
        DecoherenceKind::Depol => linalg::paulis().into_iter().map(|s| s * c(r / 2.0, 0.0)).collect(),
        DecoherenceKind::Deph => vec![linalg::pauli_z() * c(r, 0.0)],
        DecoherenceKind::Damp => {
            let sm = (linalg::pauli_x() - linalg::pauli_y() * c(0.0, 1.0)) * c(0.5 * r, 0.0);
            vec![sm]
        }
    }
}

/// GKSL generator of the spin model in `frame`.
pub fn spin_model_generator(model: &DecoherenceModel, frame: &Frame) -> Result<GeneratorMatrix> {
    if frame.dim() != 2 {
        return Err(Error::DimensionMismatch("spin models need a qubit frame".into()));
    }
    dynamics::gksl_generator(&hamiltonian_theta(model.theta), &noise_ops(model.kind, model.tau), frame)
}

/// Σ_{i≠j} max(0, −L_ij).
pub fn negativity(l: &RMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            if i != j && l[(i, j)] < 0.0 {
                acc -= l[(i, j)];
            }
        }
    }
    acc
}

fn negativity4(l: &Matrix4<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && l[(i, j)] < 0.0 {
                acc -= l[(i, j)];
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PovmFamily {
    #[serde(rename = "sic")]
    Sic,
    #[serde(rename = "pmic")]
    PMic,
    #[serde(rename = "mic")]
    Mic,
}

impl std::str::FromStr for PovmFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sic" => Ok(PovmFamily::Sic),
            "pmic" => Ok(PovmFamily::PMic),
            "mic" => Ok(PovmFamily::Mic),
            other => Err(Error::InvalidInput(format!("unknown POVM family '{other}'"))),
        }
    }
}

type Effects = [Matrix2<C64>; 4];

fn m2(m: &CMat) -> Matrix2<C64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

fn to_cmat(m: &Matrix2<C64>) -> CMat {
    CMat::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

fn pauli2() -> [Matrix2<C64>; 3] {
    let [x, y, z] = linalg::paulis();
    [m2(&x), m2(&y), m2(&z)]
}

fn tr2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    (a[(0, 0)] * b[(0, 0)] + a[(0, 1)] * b[(1, 0)] + a[(1, 0)] * b[(0, 1)] + a[(1, 1)] * b[(1, 1)]).re
}

fn min_eig2(m: &Matrix2<C64>) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    ((a + d) - ((a - d).powi(2) + 4.0 * b.norm_sqr()).sqrt()) / 2.0
}

fn sic_effects() -> Effects {
    let f = frames::build_sic_qubit();
    [m2(f.effect(0)), m2(f.effect(1)), m2(f.effect(2)), m2(f.effect(3))]
}

/// Outcome of mapping a parameter vector to effects: feasible effects or a violation measure.
#[allow(clippy::large_enum_variant)]
enum Candidate {
    Feasible(Effects),
    Infeasible(f64),
}

impl PovmFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PovmFamily::Sic => "sic",
            PovmFamily::PMic => "pmic",
            PovmFamily::Mic => "mic",
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            PovmFamily::Sic => 3,
            PovmFamily::PMic => 8,
            PovmFamily::Mic => 12,
        }
    }

    /// Smaller family whose optimum seeds this one.
    fn parent(&self) -> Option<PovmFamily> {
        match self {
            PovmFamily::Sic => None,
            PovmFamily::PMic => Some(PovmFamily::Sic),
            PovmFamily::Mic => Some(PovmFamily::PMic),
        }
    }

    fn step(&self) -> f64 {
        match self {
            PovmFamily::Sic => 0.5,
            PovmFamily::PMic => 0.3,
            PovmFamily::Mic => 0.05,
        }
    }

    fn candidate(&self, x: &[f64]) -> Candidate {
        match self {
            PovmFamily::Sic => {
                let s = pauli2();
                let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let mut u = Matrix2::<C64>::identity() * c(norm.cos(), 0.0);
                if norm > 0.0 {
                    let gen = s[0] * c(x[0], 0.0) + s[1] * c(x[1], 0.0) + s[2] * c(x[2], 0.0);
                    u -= gen * c(0.0, norm.sin() / norm);
                }
                let base = sic_effects();
                let ud = u.adjoint();
                Candidate::Feasible([u * base[0] * ud, u * base[1] * ud, u * base[2] * ud, u * base[3] * ud])
            }
            PovmFamily::PMic => {
                let dirs: Vec<[f64; 3]> = (0..4)
                    .map(|k| {
                        let (t, p) = (x[2 * k], x[2 * k + 1]);
                        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
                    })
                    .collect();
                let a = Matrix4::from_fn(|r, k| if r < 3 { dirs[k][r] } else { 1.0 });
                let Some(inv) = a.try_inverse() else {
                    return Candidate::Infeasible(1.0);
                };
                let w = inv * nalgebra::Vector4::new(0.0, 0.0, 0.0, 2.0);
                let viol: f64 = w.iter().map(|v| (1e-6 - v).max(0.0)).sum();
                if viol > 0.0 || w.iter().any(|v| !v.is_finite()) {
                    return Candidate::Infeasible(if viol.is_finite() { viol } else { 1.0 });
                }
                let s = pauli2();
                let mk = |k: usize| {
                    let n = dirs[k];
                    (Matrix2::identity() + s[0] * c(n[0], 0.0) + s[1] * c(n[1], 0.0) + s[2] * c(n[2], 0.0))
                        * c(w[k] / 2.0, 0.0)
                };
                Candidate::Feasible([mk(0), mk(1), mk(2), mk(3)])
            }
            PovmFamily::Mic => {
                let g = |k: usize| {
                    let p = &x[4 * k..4 * k + 4];
                    let l = Matrix2::new(c(p[0], 0.0), c(0.0, 0.0), c(p[1], p[2]), c(p[3], 0.0));
                    l * l.adjoint()
                };
                let (g0, g1, g2) = (g(0), g(1), g(2));
                let e3 = Matrix2::identity() - g0 - g1 - g2;
                let lo = min_eig2(&e3);
                if lo < 0.0 {
                    return Candidate::Infeasible(-lo);
                }
                Candidate::Feasible([g0, g1, g2, e3])
            }
        }
    }

    /// Parameters reproducing `effects`, which must belong to this family.
    fn params_from(&self, e: &Effects) -> Option<Vec<f64>> {
        match self {
            PovmFamily::Sic => None,
            PovmFamily::PMic => {
                let s = pauli2();
                let mut out = Vec::with_capacity(8);
                for ek in e {
                    let w = ek.trace().re;
                    let n: Vec<f64> = s.iter().map(|p| tr2(ek, p) / w).collect();
                    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                    if (norm - 1.0).abs() > 1e-6 {
                        return None;
                    }
                    out.push((n[2] / norm).clamp(-1.0, 1.0).acos());
                    out.push(n[1].atan2(n[0]));
                }
                Some(out)
            }
            PovmFamily::Mic => {
                let mut out = Vec::with_capacity(12);
                for ek in &e[..3] {
                    let g00 = ek[(0, 0)].re.max(0.0);
                    let g10 = ek[(1, 0)];
                    let g11 = ek[(1, 1)].re.max(0.0);
                    if g00 > 1e-14 {
                        let a = g00.sqrt();
                        let b = g10 / a;
                        let d = (g11 - b.norm_sqr()).max(0.0).sqrt();
                        out.extend([a, b.re, b.im, d]);
                    } else {
                        out.extend([0.0, g11.sqrt(), 0.0, 0.0]);
                    }
                }
                Some(out)
            }
        }
    }

    /// Random feasible parameter vector.
    fn random_params<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            PovmFamily::Sic => (0..3).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect(),
            PovmFamily::PMic => loop {
                let x: Vec<f64> = (0..4)
                    .flat_map(|_| {
                        let z: f64 = rng.random_range(-1.0..1.0);
                        let p: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                        [z.acos(), p]
                    })
                    .collect();
                if matches!(self.candidate(&x), Candidate::Feasible(_)) {
                    break x;
                }
            },
            PovmFamily::Mic => {
                let f = frames::random_mic(2, rng);
                let e = [m2(f.effect(0)), m2(f.effect(1)), m2(f.effect(2)), m2(f.effect(3))];
                self.params_from(&e).expect("Cholesky parameters always exist")
            }
        }
    }

    /// Frame built from a parameter vector, validated by the general constructor.
    pub fn frame(&self, x: &[f64]) -> Result<Frame> {
        if x.len() != self.n_params() {
            return Err(Error::InvalidInput(format!("{} parameters, expected {}", x.len(), self.n_params())));
        }
        match self.candidate(x) {
            Candidate::Feasible(e) => frames::build_mic_from_effects(e.iter().map(to_cmat).collect())
                .map_err(|err| Error::InfeasibleParameters(err.to_string())),
            Candidate::Infeasible(v) => Err(Error::InfeasibleParameters(format!("constraint violation {v}"))),
        }
    }
}

/// L^[sym] split as H + D₁/τ in the tetrahedral frame, plus the frame's duals.
#[derive(Debug, Clone)]
struct ModelEval {
    h: Matrix4<f64>,
    d1: Matrix4<f64>,
    sic_duals: [Matrix2<C64>; 4],
}

impl ModelEval {
    fn new(kind: DecoherenceKind, theta: f64) -> Self {
        let sic = frames::build_sic_qubit();
        let h = dynamics::hamiltonian_generator(&hamiltonian_theta(theta), &sic).expect("valid Hamiltonian");
        let d = dynamics::dissipator_matrix(&noise_ops(kind, 1.0), &sic).expect("valid noise");
        ModelEval {
            h: Matrix4::from_fn(|i, j| h.matrix()[(i, j)]),
            d1: Matrix4::from_fn(|i, j| d.matrix()[(i, j)]),
            sic_duals: [m2(sic.dual(0)), m2(sic.dual(1)), m2(sic.dual(2)), m2(sic.dual(3))],
        }
    }

    /// L^[E] = M_E^[sym] L^[sym] M_sym^[E]; `None` when the effects are not informationally complete.
    fn generator(&self, e: &Effects, tau: f64) -> Option<Matrix4<f64>> {
        let a = Matrix4::from_fn(|m, n| tr2(&e[m], &self.sic_duals[n]));
        let inv = a.try_inverse()?;
        if a.norm() * inv.norm() > frames::MAX_CONDITION {
            return None;
        }
        Some(a * (self.h + self.d1 / tau) * inv)
    }
}

/// Objective values of infeasible candidates start above any attainable negativity.
const PENALTY: f64 = 1e12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassicalityConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tau_tol: f64,
    pub zero_tol: f64,
    /// Ascending τ values probed for the zero-negativity region before bisection.
    #[serde(skip)]
    pub tau_grid: &'static [f64],
    /// Largest τ tried while looking for positive negativity above the grid.
    pub tau_max: f64,
}

pub const DEFAULT_TAU_GRID: &[f64] = &[0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0];

impl Default for ClassicalityConfig {
    fn default() -> Self {
        ClassicalityConfig {
            restarts: 32,
            max_iter: 500,
            tau_tol: 0.005,
            zero_tol: 1e-6,
            tau_grid: DEFAULT_TAU_GRID,
            tau_max: 1e4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativityReport {
    pub negativity: f64,
    pub family: PovmFamily,
    pub params: Vec<f64>,
    /// Optimal effects as row-major 2×2 complex matrices.
    #[serde(skip)]
    pub effects: Vec<CMat>,
    pub iterations: usize,
    pub evaluations: usize,
    /// Candidates rejected because they did not form a valid frame.
    pub infeasible: usize,
    /// Best value found so far, after each restart.
    pub best_so_far: Vec<f64>,
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn family_stream(f: PovmFamily) -> u64 {
    match f {
        PovmFamily::Sic => 1,
        PovmFamily::PMic => 2,
        PovmFamily::Mic => 3,
    }
}

struct Search<'a> {
    eval: &'a ModelEval,
    tau: f64,
    cfg: &'a ClassicalityConfig,
}

impl Search<'_> {
    fn run(&self, family: PovmFamily, seed: u64, warm: &[Effects]) -> NegativityReport {
        let mut starts: Vec<Vec<f64>> = Vec::new();
        let mut evaluations = 0;
        let mut iterations = 0;
        let mut infeasible = 0;
        let mut best_so_far = Vec::new();
        if let Some(parent) = family.parent() {
            let sub = self.run(parent, seed, warm);
            evaluations += sub.evaluations;
            iterations += sub.iterations;
            infeasible += sub.infeasible;
            let e: Vec<Matrix2<C64>> = sub.effects.iter().map(m2).collect();
            if let Some(p) = family.params_from(&[e[0], e[1], e[2], e[3]]) {
                starts.push(p);
            }
        }
        if family == PovmFamily::Sic {
            starts.push(vec![0.0; 3]);
        }
        for w in warm {
            if let Some(p) = family.params_from(w) {
                starts.push(p);
            }
        }
        let mut rng = seeded(seed, family_stream(family));
        while starts.len() < self.cfg.restarts.max(1) {
            starts.push(family.random_params(&mut rng));
        }
        let nm = NelderMeadConfig { max_iter: self.cfg.max_iter, ftol: 1e-14, xtol: 1e-12, target: self.cfg.zero_tol * 0.01 };
        let step = vec![family.step(); family.n_params()];
        let mut best: Option<(f64, Vec<f64>)> = None;
        for x0 in &starts {
            let mut rejected = 0usize;
            let res = nelder_mead(
                |x| match family.candidate(x) {
                    Candidate::Feasible(e) => match self.eval.generator(&e, self.tau) {
                        Some(l) => negativity4(&l),
                        None => {
                            rejected += 1;
                            PENALTY
                        }
                    },
                    Candidate::Infeasible(v) => {
                        rejected += 1;
                        PENALTY * (1.0 + v)
                    }
                },
                x0,
                &step,
                &nm,
            );
            evaluations += res.evaluations;
            iterations += res.iterations;
            infeasible += rejected;
            if best.as_ref().is_none_or(|b| res.f < b.0) {
                best = Some((res.f, res.x));
            }
            best_so_far.push(best.as_ref().map(|b| b.0).unwrap_or(f64::INFINITY));
            if best.as_ref().is_some_and(|b| b.0 <= nm.target) {
                break;
            }
        }
        let (f, x) = best.expect("at least one restart");
        let effects = match family.candidate(&x) {
            Candidate::Feasible(e) => e.iter().map(to_cmat).collect(),
            Candidate::Infeasible(_) => Vec::new(),
        };
        NegativityReport { negativity: f, family, params: x, effects, iterations, evaluations, infeasible, best_so_far }
    }
}

/// N_Ω(L) = min over the family of N(L^[E]), by multi-start Nelder–Mead seeded from `seed`.
pub fn min_negativity(model: &DecoherenceModel, family: PovmFamily, cfg: &ClassicalityConfig, seed: u64) -> Result<NegativityReport> {
    let eval = ModelEval::new(model.kind, model.theta);
    let rep = Search { eval: &eval, tau: model.tau, cfg }.run(family, seed, &[]);
    if rep.effects.is_empty() || rep.negativity >= PENALTY {
        return Err(Error::InfeasibleParameters("no feasible frame found".into()));
    }
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct TauCritReport {
    pub tau_crit: f64,
    /// Final bracket [τ with zero negativity, τ with positive negativity]; absent when no zero was found.
    pub bracket: Option<(f64, f64)>,
    pub evaluations: usize,
    pub negativity_runs: usize,
}

/// τ_crit = sup{τ : N_Ω = 0}: grid search for the zero region followed by bisection.
///
/// Returns τ_crit = 0 when no probed τ gives zero negativity (the supremum of an empty set).
pub fn tau_crit(kind: DecoherenceKind, theta: f64, family: PovmFamily, cfg: &ClassicalityConfig, seed: u64) -> Result<TauCritReport> {
    let eval = ModelEval::new(kind, theta);
    let mut evaluations = 0;
    let mut runs = 0;
    let mut warm: Vec<Effects> = Vec::new();
    let mut probe = |tau: f64, warm: &mut Vec<Effects>| -> bool {
        let rep = Search { eval: &eval, tau, cfg }.run(family, seed, warm);
        evaluations += rep.evaluations;
        runs += 1;
        let zero = rep.negativity <= cfg.zero_tol;
        if zero && rep.effects.len() == 4 {
            let e: Vec<Matrix2<C64>> = rep.effects.iter().map(m2).collect();
            warm.insert(0, [e[0], e[1], e[2], e[3]]);
            warm.truncate(4);
        }
        zero
    };
    let zeros: Vec<bool> = cfg.tau_grid.iter().map(|&t| probe(t, &mut warm)).collect();
    let Some(last) = zeros.iter().rposition(|&z| z) else {
        return Ok(TauCritReport { tau_crit: 0.0, bracket: None, evaluations, negativity_runs: runs });
    };
    let mut lo = cfg.tau_grid[last];
    let mut hi = match cfg.tau_grid.get(last + 1) {
        Some(&t) => t,
        None => {
            let mut t = lo * 2.0;
            loop {
                if t > cfg.tau_max {
                    return Err(Error::BracketNotFound(format!("negativity stays zero up to tau = {}", cfg.tau_max)));
                }
                if !probe(t, &mut warm) {
                    break t;
                }
                lo = t;
                t *= 2.0;
            }
        }
    };
    while hi - lo > cfg.tau_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut warm) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TauCritReport { tau_crit: lo, bracket: Some((lo, hi)), evaluations, negativity_runs: runs })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub theta: f64,
    /// `None` when τ_crit could not be computed at this point.
    pub tau_crit: Option<f64>,
    pub family: PovmFamily,
    pub kind: DecoherenceKind,
    pub seed: u64,
    pub evaluations: usize,
}

/// τ_crit over a θ grid; points are independent and evaluated in parallel with fixed per-point seeds.
pub fn scan(kind: DecoherenceKind, thetas: &[f64], family: PovmFamily, cfg: &ClassicalityConfig, seed: u64) -> Vec<ScanRow> {
    thetas
        .par_iter()
        .map(|&theta| match tau_crit(kind, theta, family, cfg, seed) {
            Ok(r) => ScanRow { theta, tau_crit: Some(r.tau_crit), family, kind, seed, evaluations: r.evaluations },
            Err(_) => ScanRow { theta, tau_crit: None, family, kind, seed, evaluations: 0 },
        })
        .collect()
}

/// Evenly spaced grid `a:b:n` including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// L^[E] of the spin model for explicit effects, through the transition from the tetrahedral frame.
pub fn generator_via_transition(model: &DecoherenceModel, effects: &[CMat]) -> Result<RMat> {
    if effects.len() != 4 {
        return Err(Error::DimensionMismatch("qubit frames have four effects".into()));
    }
    let eval = ModelEval::new(model.kind, model.theta);
    let e = [m2(&effects[0]), m2(&effects[1]), m2(&effects[2]), m2(&effects[3])];
    let l = eval
        .generator(&e, model.tau)
        .ok_or_else(|| Error::FrameSingular("effects are not informationally complete".into()))?;
    Ok(RMat::from_fn(4, 4, |i, j| l[(i, j)]))
}
