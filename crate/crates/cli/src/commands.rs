use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use micprob::channels::{self, PseudoStochasticMap};
use micprob::circuits;
use micprob::classicality::{self, ClassicalityConfig, DecoherenceModel};
use micprob::dynamics::{self, fixtures, GeneratorKind, GeneratorMatrix, OperatorBasis};
use micprob::frames::{self, Frame};
use micprob::io::{self, ChannelFile, CircuitFile, FrameFile, MeasurementFile, ModelFile, RealJson, StateFile};
use micprob::linalg::{RMat, RVec};
use micprob::measurements::{self, MeasurementMap, Observable};
use micprob::states::{self, ProbVector};
use micprob::Error;

use crate::output::{csv_string, emit, emit_json, fmt_float, CliError, CliResult};
use crate::{ChannelCmd, CircuitCmd, ClassicalityCmd, Cli, Command, DynCmd, FrameCmd, GlobalOpts, MeasureCmd, SearchOpts, StateCmd};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum TableName {
    Identity,
    Depol,
    Deph,
    Damp,
    Rx,
    Ry,
    Rz,
    HTheta,
    DepolGenerator,
    DephGenerator,
    DampGenerator,
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    if !(g.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", g.tol)));
    }
    match &cli.command {
        Command::Frame(c) => frame(c, g),
        Command::State(c) => state(c, g),
        Command::Channel(c) => channel(c, g),
        Command::Measure(c) => measure(c, g),
        Command::Dyn(c) => dyn_cmd(c, g),
        Command::Classicality(c) => classicality_cmd(c, g),
        Command::Circuit(c) => circuit(c, g),
    }
}

fn out(g: &GlobalOpts) -> Option<&Path> {
    g.out.as_deref()
}

fn base_dir(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn vec_of(v: &RVec) -> Vec<f64> {
    io::rvec_to_vec(v)
}

fn frame_of(v: &Option<Value>, file: &Path, tol: f64) -> CliResult<Frame> {
    Ok(io::resolve_frame(v.as_ref(), &base_dir(file), tol)?)
}

fn frame_summary(f: &Frame) -> Value {
    json!({
        "dim": f.dim(),
        "effects": f.len(),
        "condition_number": f.condition_number(),
        "invariant_defect": f.invariant_defect(),
        "gram": io::rmat_to_json(f.gram()),
    })
}

fn frame(c: &FrameCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        FrameCmd::BuildSic { dim } => emit_json(out(g), &FrameFile::from_frame(&*frames::build_sic(*dim)?)),
        FrameCmd::Validate { file } => {
            let f = io::read_json::<FrameFile>(file)?.build(g.tol)?;
            let mut v = frame_summary(&f);
            v["valid"] = json!(true);
            emit_json(out(g), &v)
        }
        FrameCmd::Tensor { a, b } => {
            let fa = io::read_json::<FrameFile>(a)?.build(g.tol)?;
            let fb = io::read_json::<FrameFile>(b)?.build(g.tol)?;
            emit_json(out(g), &FrameFile::from_frame(&frames::tensor(&fa, &fb)))
        }
    }
}

/// State from a file holding either `p` or `rho`, in the file's frame.
fn load_state(file: &Path, tol: f64) -> CliResult<ProbVector> {
    let s: StateFile = io::read_json(file)?;
    let f = frame_of(&s.frame, file, tol)?;
    match (&s.p, &s.rho) {
        (Some(p), _) => Ok(ProbVector::with_tol(f, RVec::from_vec(p.clone()), tol.max(1e-12))?),
        (None, Some(rho)) => {
            let rho = io::cmat_from_json(rho)?;
            states::validate_density(&rho, tol.max(1e-12), false)?;
            Ok(states::to_prob(&rho, &f)?)
        }
        (None, None) => Err(Error::InvalidInput(format!("{}: state needs 'p' or 'rho'", file.display())).into()),
    }
}

fn verdict_json(v: &states::PhysicalityVerdict, yes: &str, no: &str) -> Value {
    let mut j = serde_json::to_value(v).expect("serializable verdict");
    j["verdict"] = json!(if v.is_physical { yes } else { no });
    j
}

fn state(c: &StateCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        StateCmd::ToProb { file } => {
            let s: StateFile = io::read_json(file)?;
            let rho = s.rho.as_ref().ok_or_else(|| Error::InvalidInput("'rho' is required".into()))?;
            let rho = io::cmat_from_json(rho)?;
            states::validate_density(&rho, g.tol.max(1e-12), true)?;
            let p = states::to_prob(&rho, &frame_of(&s.frame, file, g.tol)?)?;
            emit_json(out(g), &StateFile { frame: s.frame, p: Some(vec_of(p.as_vector())), rho: None })
        }
        StateCmd::FromProb { file } => {
            let s: StateFile = io::read_json(file)?;
            let p = s.p.clone().ok_or_else(|| Error::InvalidInput("'p' is required".into()))?;
            let pv = ProbVector::with_tol(frame_of(&s.frame, file, g.tol)?, RVec::from_vec(p), g.tol.max(1e-12))?;
            let rho = states::from_prob(&pv);
            emit_json(out(g), &StateFile { frame: s.frame, p: None, rho: Some(io::cmat_to_json(&rho)) })
        }
        StateCmd::Check { file } => {
            let p = load_state(file, g.tol)?;
            let v = states::is_physical(&p, g.tol)?;
            emit_json(out(g), &verdict_json(&v, "physical", "not physical"))
        }
        StateCmd::Purity { file } => {
            let p = load_state(file, g.tol)?;
            let purity = states::hs_inner(&p, &p)?;
            emit_json(out(g), &json!({ "purity": purity, "pure": states::is_pure(&p, g.tol.max(1e-9)) }))
        }
    }
}

fn load_channel(file: &Path, tol: f64) -> CliResult<PseudoStochasticMap> {
    let c: ChannelFile = io::read_json(file)?;
    let fin = frame_of(&c.in_frame, file, tol)?;
    let fout = match &c.out_frame {
        None => fin.clone(),
        some => frame_of(some, file, tol)?,
    };
    match (&c.kraus, &c.pstoch) {
        (Some(k), _) => {
            let k = k.iter().map(io::cmat_from_json).collect::<micprob::Result<Vec<_>>>()?;
            channels::check_kraus(&k, tol.max(1e-12))?;
            Ok(channels::kraus_to_map(&k, &fin, &fout)?)
        }
        (None, Some(m)) => Ok(PseudoStochasticMap::new(fin, fout, io::rmat_from_json(m)?)?),
        (None, None) => Err(Error::InvalidInput(format!("{}: channel needs 'kraus' or 'pstoch'", file.display())).into()),
    }
}

#[derive(Serialize)]
struct MapJson {
    pstoch: RealJson,
    bistochastic: bool,
}

fn channel(c: &ChannelCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        ChannelCmd::ToPstoch { file } => {
            let s = load_channel(file, g.tol)?;
            emit_json(out(g), &MapJson { pstoch: io::rmat_to_json(s.matrix()), bistochastic: s.is_bistochastic(g.tol) })
        }
        ChannelCmd::Apply { channel, state } => {
            let s = load_channel(channel, g.tol)?;
            let p = load_state(state, g.tol)?;
            let q = channels::map_apply(&s, &p)?;
            emit_json(out(g), &json!({ "p": vec_of(q.as_vector()) }))
        }
        ChannelCmd::Check { file } => {
            let s = load_channel(file, g.tol)?;
            let v = channels::is_cptp(&s, g.tol)?;
            emit_json(out(g), &verdict_json(&v, "completely positive", "not completely positive"))
        }
        ChannelCmd::Choi { file } => {
            let s = load_channel(file, g.tol)?;
            let ent = channels::max_entangled_prob(s.in_frame());
            let p = channels::choi_prob(&s, &ent)?;
            emit_json(out(g), &json!({ "choi_p": vec_of(p.as_vector()) }))
        }
    }
}

fn load_measurement(file: &Path, tol: f64) -> CliResult<(MeasurementMap, Option<Vec<f64>>)> {
    let m: MeasurementFile = io::read_json(file)?;
    let f = frame_of(&m.frame, file, tol)?;
    let map = match (&m.effects, &m.pstoch_rows) {
        (Some(e), _) => {
            let e = e.iter().map(io::cmat_from_json).collect::<micprob::Result<Vec<_>>>()?;
            let map = measurements::povm_to_map_tol(&e, &f, tol.max(1e-12))?;
            match &m.labels {
                Some(l) => MeasurementMap::new(f, map.matrix().clone(), Some(l.clone()))?,
                None => map,
            }
        }
        (None, Some(rows)) => MeasurementMap::new(f, io::rmat_from_json(rows)?, m.labels.clone())?,
        (None, None) => {
            return Err(Error::InvalidInput(format!("{}: measurement needs 'effects' or 'pstoch_rows'", file.display())).into())
        }
    };
    Ok((map, m.values))
}

fn measure(c: &MeasureCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        MeasureCmd::Probs { measurement, state } => {
            let (m, _) = load_measurement(measurement, g.tol)?;
            let q = m.outcome_probs(&load_state(state, g.tol)?)?;
            emit_json(out(g), &json!({ "labels": m.labels(), "probs": vec_of(&q) }))
        }
        MeasureCmd::Check { measurement } => {
            let (m, _) = load_measurement(measurement, g.tol)?;
            let rows = measurements::is_valid_measurement(&m, g.tol)?;
            let valid = rows.iter().all(|v| v.is_physical);
            let rows: Vec<Value> = rows.iter().map(|v| verdict_json(v, "positive", "not positive")).collect();
            emit_json(out(g), &json!({ "valid": valid, "verdict": if valid { "valid" } else { "not valid" }, "rows": rows }))
        }
        MeasureCmd::Mean { measurement, state } => {
            let (m, values) = load_measurement(measurement, g.tol)?;
            let values = values.ok_or_else(|| Error::InvalidInput("'values' is required for the mean".into()))?;
            let o = Observable::new(values, m)?;
            let mean = measurements::observable_mean(&o, &load_state(state, g.tol)?)?;
            emit_json(out(g), &json!({ "mean": mean, "mean_row": vec_of(o.mean_row()) }))
        }
    }
}

/// A raw generator matrix with its frame, accepted wherever a model is.
#[derive(Deserialize)]
struct GeneratorFile {
    generator: RealJson,
    #[serde(default)]
    frame: Option<Value>,
}

fn load_generator(file: &Path, tol: f64) -> CliResult<GeneratorMatrix> {
    let v: Value = io::read_json(file)?;
    if v.get("generator").is_some() {
        let gf: GeneratorFile = serde_json::from_value(v).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let f = frame_of(&gf.frame, file, tol)?;
        return Ok(GeneratorMatrix::new(f, io::rmat_from_json(&gf.generator)?, GeneratorKind::Gksl)?);
    }
    let m: ModelFile = serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("{}: {e}", file.display())))?;
    let f = frame_of(&m.frame, file, tol)?;
    let (h, ops) = m.operators()?;
    Ok(dynamics::gksl_generator(&h, &ops, &f)?)
}

fn generator_json(l: &GeneratorMatrix) -> Value {
    json!({ "kind": l.kind(), "generator": io::rmat_to_json(l.matrix()) })
}

fn table(name: TableName, t: f64, tau: f64, theta: f64) -> CliResult<RMat> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau must be positive, got {tau}")).into());
    }
    let sic = frames::build_sic_qubit();
    let gen = |kind| -> CliResult<RMat> {
        Ok(dynamics::dissipator_matrix(&classicality::noise_ops(kind, tau), &sic)?.into_matrix())
    };
    use classicality::DecoherenceKind::*;
    Ok(match name {
        TableName::Identity => fixtures::identity_table(),
        TableName::Depol => fixtures::depolarization_table(t, tau),
        TableName::Deph => fixtures::dephasing_table(t, tau),
        TableName::Damp => fixtures::damping_table(t, tau),
        TableName::Rx => fixtures::rotation_x_table(t),
        TableName::Ry => fixtures::rotation_y_table(t),
        TableName::Rz => fixtures::rotation_z_table(t),
        TableName::HTheta => dynamics::hamiltonian_generator(&classicality::hamiltonian_theta(theta), &sic)?.into_matrix(),
        TableName::DepolGenerator => gen(Depol)?,
        TableName::DephGenerator => gen(Deph)?,
        TableName::DampGenerator => gen(Damp)?,
    })
}

fn dyn_cmd(c: &DynCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        DynCmd::Generator { model } => emit_json(out(g), &generator_json(&load_generator(model, g.tol)?)),
        DynCmd::Evolve { model, state, t } => {
            let l = load_generator(model, g.tol)?;
            let p = dynamics::evolve(&l, &load_state(state, g.tol)?, *t)?;
            emit_json(out(g), &json!({ "t": t, "p": vec_of(p.as_vector()) }))
        }
        DynCmd::CheckGenerator { file } => {
            let l = load_generator(file, g.tol)?;
            let v = dynamics::is_gksl_generator(&l, g.tol)?;
            emit_json(out(g), &verdict_json(&v, "gksl", "not gksl"))
        }
        DynCmd::ProjectUnitary { file } => {
            let l = load_generator(file, g.tol)?;
            let basis = OperatorBasis::for_dim(l.frame().dim());
            let h = dynamics::project_unitary(l.matrix(), l.frame(), &basis)?;
            emit_json(out(g), &generator_json(&h))
        }
        DynCmd::Table { name, t, tau, theta } => {
            let m = table(*name, *t, *tau, *theta)?;
            emit_json(out(g), &json!({ "matrix": io::rmat_to_json(&m) }))
        }
    }
}

fn config(s: &SearchOpts) -> CliResult<ClassicalityConfig> {
    if s.restarts == 0 || !(s.tau_tol > 0.0) || !(s.zero_tol >= 0.0) {
        return Err(CliError::Usage("restarts and tau-tol must be positive".into()));
    }
    Ok(ClassicalityConfig {
        restarts: s.restarts,
        max_iter: s.max_iter,
        tau_tol: s.tau_tol,
        zero_tol: s.zero_tol,
        ..Default::default()
    })
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("theta grid '{spec}' is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok(classicality::linspace(a, b, n))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn classicality_cmd(c: &ClassicalityCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        ClassicalityCmd::Negativity { search, theta, tau } => {
            let cfg = config(search)?;
            let model = DecoherenceModel::new(search.kind, *theta, *tau)?;
            let rep = classicality::min_negativity(&model, search.family, &cfg, g.seed)?;
            let mut v = serde_json::to_value(&rep).expect("serializable report");
            v["effects"] = json!(rep.effects.iter().map(io::cmat_to_json).collect::<Vec<_>>());
            v["model"] = json!(model);
            v["seed"] = json!(g.seed);
            emit_json(out(g), &v)
        }
        ClassicalityCmd::TauCrit { search, theta } => {
            let cfg = config(search)?;
            let rep = with_threads(g.threads, || classicality::tau_crit(search.kind, *theta, search.family, &cfg, g.seed))??;
            let mut v = serde_json::to_value(&rep).expect("serializable report");
            v["kind"] = json!(search.kind);
            v["family"] = json!(search.family);
            v["theta"] = json!(theta);
            v["seed"] = json!(g.seed);
            emit_json(out(g), &v)
        }
        ClassicalityCmd::Scan { search, theta_grid } => {
            let cfg = config(search)?;
            let thetas = parse_grid(theta_grid)?;
            let rows = with_threads(g.threads, || classicality::scan(search.kind, &thetas, search.family, &cfg, g.seed))?;
            let header: Vec<String> = ["theta", "tau_crit", "family", "kind", "seed", "evaluations"].map(String::from).to_vec();
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_float(r.theta),
                        r.tau_crit.map(fmt_float).unwrap_or_default(),
                        r.family.name().to_string(),
                        r.kind.name().to_string(),
                        r.seed.to_string(),
                        r.evaluations.to_string(),
                    ]
                })
                .collect();
            emit(out(g), &csv_string(&header, &body)?)
        }
    }
}

fn circuit(c: &CircuitCmd, g: &GlobalOpts) -> CliResult<()> {
    match c {
        CircuitCmd::Run { program, shots, emit_trace } => {
            let prog = io::read_json::<CircuitFile>(program)?.program()?;
            let res = circuits::run(&prog)?;
            let rec = &res.record;
            let labels: Vec<String> = (0..rec.probs.len()).map(|i| rec.label(i)).collect();
            let mut v = json!({ "qubits": rec.qubits, "labels": labels, "probs": rec.probs });
            if *shots > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                let counts = circuits::sample(rec, *shots, &mut rng);
                v["shots"] = json!(shots);
                v["seed"] = json!(g.seed);
                v["counts"] = json!(counts);
            }
            if let Some(path) = emit_trace {
                let header: Vec<String> = ["step", "label", "index", "value"].map(String::from).to_vec();
                let mut body = Vec::new();
                for (s, step) in res.trace.iter().enumerate() {
                    for (k, x) in step.p.iter().enumerate() {
                        body.push(vec![s.to_string(), step.label.clone(), k.to_string(), fmt_float(*x)]);
                    }
                }
                emit(Some(path), &csv_string(&header, &body)?)?;
            }
            emit_json(out(g), &v)
        }
        CircuitCmd::GateTable { gate } => {
            let u = circuits::standard_unitary(gate).ok_or_else(|| Error::InvalidInput(format!("unknown gate '{gate}'")))?;
            let m = circuits::gate_map(&u)?;
            let mut header = vec!["row".to_string()];
            header.extend((0..m.ncols()).map(|j| j.to_string()));
            let body: Vec<Vec<String>> = (0..m.nrows())
                .map(|i| std::iter::once(i.to_string()).chain(m.row(i).iter().map(|x| fmt_float(*x))).collect())
                .collect();
            emit(out(g), &csv_string(&header, &body)?)
        }
    }
}
