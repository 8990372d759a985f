//! One test per acceptance criterion; each prints a single PASS/FAIL line with its measurements.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use micprob::channels;
use micprob::circuits::{self, CircuitProgram, Instruction};
use micprob::classicality::{self, ClassicalityConfig, DecoherenceKind, PovmFamily};
use micprob::dynamics::{self, fixtures, OperatorBasis};
use micprob::frames::{self, Frame};
use micprob::linalg::{self, c, CMat, CVec, RMat};
use micprob::measurements;
use micprob::random;
use micprob::states::{self, ProbVector};
use rand::seq::IndexedRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

fn report(n: usize, name: &str, ok: bool, detail: String) {
    println!("criterion {n:>2} {}: {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_01_frame_fixtures() {
    let start = Instant::now();
    let f = frames::build_sic_qubit();
    let t_want = RMat::from_fn(4, 4, |i, j| if i == j { 0.25 } else { 1.0 / 12.0 });
    let ti_want = RMat::from_fn(4, 4, |i, j| if i == j { 5.0 } else { -1.0 });
    let (e1, e2) = (max_diff(f.gram(), &t_want), max_diff(f.gram_inverse(), &ti_want));
    let secs = start.elapsed().as_secs_f64();
    report(1, "frame fixtures", e1 <= 1e-12 && e2 <= 1e-12 && secs < 1.0, format!("|T err| = {e1:.1e}, |T^-1 err| = {e2:.1e}, {secs:.3} s"));
}

#[test]
fn criterion_02_state_fixtures() {
    let f = frames::build_sic_qubit();
    let s3 = 3f64.sqrt();
    let want = [(3.0 + s3) / 12.0, (3.0 + s3) / 12.0, (3.0 - s3) / 12.0, (3.0 - s3) / 12.0];
    let p0 = states::to_prob(&basis_state(2, 0), &f).unwrap();
    let e0 = (0..4).map(|k| (p0[k] - want[k]).abs()).fold(0.0, f64::max);
    let e1 = (0..4).map(|k| (circuits::p0()[k] - want[k]).abs()).fold(0.0, f64::max);
    let mixed = states::to_prob(&(linalg::identity(2) * c(0.5, 0.0)), &f).unwrap();
    let e2 = mixed.as_vector().iter().map(|x| (x - 0.25).abs()).fold(0.0, f64::max);
    report(2, "state fixtures", e0 <= 1e-12 && e1 <= 1e-12 && e2 <= 1e-12, format!("p0 err {e0:.1e} / {e1:.1e}, uniform err {e2:.1e}"));
}

/// Normalized vectors p = Born(ρ + εK) with K traceless Hermitian; the oracle is λ_min(ρ + εK).
fn physicality_agreement(f: &Frame, n: usize, seed: u64) -> (usize, usize, usize) {
    let d = f.dim();
    let mut r = rng(seed);
    let (mut agree, mut total, mut band) = (0, 0, 0);
    for i in 0..n {
        let rank = 1 + i % d;
        let rho = random::random_density(d, rank.max(if i % 4 == 0 { d } else { 1 }), &mut r);
        let mut k = random::random_hermitian(d, &mut r);
        let tr = k.trace() / c(d as f64, 0.0);
        k -= linalg::identity(d) * tr;
        let eps: f64 = r.random_range(0.0..0.4) / d as f64;
        let x = &rho + k * c(eps, 0.0);
        let lam = linalg::min_eigenvalue(&x);
        let p = ProbVector::new(f.clone(), f.born(&x).map(|z| z.re)).unwrap();
        if lam.abs() < 1e-8 {
            band += 1;
            continue;
        }
        total += 1;
        if states::is_physical(&p, 1e-9).unwrap().is_physical == (lam > 0.0) {
            agree += 1;
        }
    }
    (agree, total, band)
}

#[test]
fn criterion_03_physicality_pipeline() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut r = rng(30);
    let cases: Vec<(&str, Frame)> = vec![
        ("d=2 SIC", frames::build_sic_qubit()),
        ("d=3 SIC", frames::build_sic(3).unwrap()),
        ("d=4 SIC(x)SIC", frames::tensor(&frames::build_sic_qubit(), &frames::build_sic_qubit())),
        ("d=4 random MIC", frames::random_mic(4, &mut r)),
    ];
    for (i, (name, f)) in cases.iter().enumerate() {
        let (agree, total, band) = physicality_agreement(f, 1000, 300 + i as u64);
        ok &= agree == total && total >= 900;
        lines.push(format!("{name} {agree}/{total} (band {band})"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    report(3, "physicality pipeline", ok, format!("{}, {secs:.1} s", lines.join(", ")));
}

#[test]
fn criterion_04_channel_tables() {
    let f = frames::build_sic_qubit();
    let mut worst: f64 = 0.0;
    for x in [0.0, 0.3, 1.0, 3.0] {
        let tau = 1.0;
        let rows: Vec<(Vec<CMat>, RMat)> = vec![
            (vec![linalg::identity(2)], fixtures::identity_table()),
            (fixtures::depolarization_kraus(x, tau), fixtures::depolarization_table(x, tau)),
            (fixtures::dephasing_kraus(x, tau), fixtures::dephasing_table(x, tau)),
            (fixtures::damping_kraus(x, tau), fixtures::damping_table(x, tau)),
            (vec![fixtures::rotation_unitary(0, x)], fixtures::rotation_x_table(x)),
            (vec![fixtures::rotation_unitary(1, x)], fixtures::rotation_y_table(x)),
            (vec![fixtures::rotation_unitary(2, x)], fixtures::rotation_z_table(x)),
        ];
        for (k, table) in rows {
            worst = worst.max(max_diff(channels::kraus_to_map(&k, &f, &f).unwrap().matrix(), &table));
        }
    }
    // known issue kept visible: the listed σ³/√τ operator generates twice the displayed dephasing rate
    let listed = dynamics::dissipator_matrix(&classicality::noise_ops(DecoherenceKind::Deph, 1.0), &f).unwrap();
    let factor = max_diff(listed.matrix(), &(fixtures::dephasing_display(1.0) * 2.0));
    report(4, "channel tables", worst <= 1e-9, format!("max entry error {worst:.1e} over 7 rows x 4 times; deph factor-2 residual {factor:.1e}"));
}

#[test]
fn criterion_05_dynamics_properties() {
    let mut r = rng(50);
    let mut extra: f64 = 0.0;
    for i in 0..50 {
        let f = if i % 2 == 0 { frames::build_sic_qubit() } else { frames::random_mic(2 + i % 3 / 2, &mut r) };
        if f.condition_number() > 1e3 {
            continue;
        }
        let h = dynamics::hamiltonian_generator(&random::random_hermitian(f.dim(), &mut r), &f).unwrap();
        let ti = f.gram_inverse();
        let res = (h.matrix().transpose() * ti + ti * h.matrix()).abs().max() / ti.abs().max().max(1.0);
        extra = extra.max(res);
    }
    let f = frames::build_sic_qubit();
    let gens = dynamics::basis_generators(&f, &OperatorBasis::pauli()).unwrap();
    let mut tr_err: f64 = 0.0;
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate() {
            let want = if i == j { -8.0 } else { 0.0 };
            tr_err = tr_err.max(((a.matrix() * b.matrix()).trace() - want).abs());
        }
    }
    let (mut idem, mut fixed, mut pics): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let h = random::random_hermitian(2, &mut r);
        let ops: Vec<CMat> = (0..2).map(|_| random::ginibre(2, 2, &mut r) * c(0.5, 0.0)).collect();
        let l = dynamics::gksl_generator(&h, &ops, &f).unwrap();
        let hg = dynamics::hamiltonian_generator(&h, &f).unwrap();
        let p = dynamics::project_unitary(l.matrix(), &f, &OperatorBasis::pauli()).unwrap();
        let pp = dynamics::project_unitary(p.matrix(), &f, &OperatorBasis::pauli()).unwrap();
        idem = idem.max(max_diff(p.matrix(), pp.matrix()));
        let ph = dynamics::project_unitary(hg.matrix(), &f, &OperatorBasis::pauli()).unwrap();
        fixed = fixed.max(max_diff(ph.matrix(), hg.matrix()));
        let m = measurements::povm_to_map(&[basis_state(2, 0), basis_state(2, 1)], &f).unwrap();
        let p0 = states::to_prob(&random::random_density(2, 2, &mut r), &f).unwrap();
        let t = r.random_range(0.0..3.0);
        let heis = dynamics::heisenberg_evolve(m.matrix(), &l, t).unwrap() * p0.as_vector();
        let schr = m.matrix() * dynamics::evolve(&l, &p0, t).unwrap().as_vector();
        pics = pics.max((heis - schr).abs().max());
    }
    let ok = extra <= 1e-9 && tr_err <= 1e-9 && idem <= 1e-8 && fixed <= 1e-8 && pics <= 1e-9;
    report(
        5,
        "dynamics properties",
        ok,
        format!("extra-cond {extra:.1e}, Tr(HH) {tr_err:.1e}, idempotence {idem:.1e}, fixed point {fixed:.1e}, pictures {pics:.1e}"),
    );
}

fn ccp_oracle(l: &RMat, f: &Frame) -> f64 {
    let d = f.dim();
    let act = |x: &CMat| {
        let p = f.born(x);
        f.reconstruct(&(linalg::to_complex(l) * p))
    };
    let j = choi_matrix(d, d, act);
    let mut omega = CVec::zeros(d * d);
    for i in 0..d {
        omega[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    let proj = linalg::identity(d * d) - &omega * omega.adjoint();
    let (vals, vecs) = linalg::herm_eigh(&proj);
    let cols: Vec<usize> = (0..d * d).filter(|&i| vals[i] > 0.5).collect();
    let v = CMat::from_fn(d * d, cols.len(), |r, k| vecs[(r, cols[k])]);
    linalg::min_eigenvalue(&(v.adjoint() * j * v))
}

#[test]
fn criterion_06_gksl_check() {
    let f = frames::build_sic_qubit();
    let mut r = rng(60);
    let (mut valid, mut invalid, mut agree, mut band) = (0, 0, 0, 0);
    for i in 0..500 {
        let h = random::random_hermitian(2, &mut r);
        // fewer than three operators leave the Kossakowski matrix singular and λ_min at 0
        let ops: Vec<CMat> = (0..r.random_range(3..5)).map(|_| random::ginibre(2, 2, &mut r)).collect();
        let hg = dynamics::hamiltonian_generator(&h, &f).unwrap();
        let d = dynamics::dissipator_matrix(&ops, &f).unwrap();
        let m = if i % 2 == 0 { hg.matrix() + d.matrix() } else { hg.matrix() - d.matrix() };
        let lam = ccp_oracle(&m, &f);
        if lam.abs() < 1e-8 {
            band += 1;
            continue;
        }
        if lam > 0.0 {
            valid += 1;
        } else {
            invalid += 1;
        }
        if dynamics::is_gksl_matrix(&m, &f, 1e-9).unwrap().is_physical == (lam > 0.0) {
            agree += 1;
        }
    }
    let ok = valid >= 200 && invalid >= 200 && agree == valid + invalid;
    report(6, "GKSL check", ok, format!("{agree}/{} agree ({valid} valid, {invalid} invalid, band {band})", valid + invalid));
}

fn scan_values(kind: DecoherenceKind, family: PovmFamily, thetas: &[f64], cfg: &ClassicalityConfig) -> Vec<f64> {
    classicality::scan(kind, thetas, family, cfg, 7).iter().map(|r| r.tau_crit.unwrap_or(f64::NAN)).collect()
}

fn fmt_vals(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn criterion_07_tau_crit() {
    let start = Instant::now();
    let cfg = ClassicalityConfig::default();
    let pi = std::f64::consts::PI;
    let grid8 = classicality::linspace(0.0, pi, 8);
    let grid16 = classicality::linspace(0.0, pi, 16);
    let mut ok = true;
    let mut lines = Vec::new();
    for (family, want) in [(PovmFamily::Sic, 0.50), (PovmFamily::PMic, 0.60), (PovmFamily::Mic, 0.61)] {
        let v = scan_values(DecoherenceKind::Depol, family, &grid8, &cfg);
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        let good = v.iter().all(|x| (x - want).abs() <= 0.02) && spread <= 0.02;
        ok &= good;
        lines.push(format!("depol {} [{}] want {want}: {}", family.name(), fmt_vals(&v), if good { "ok" } else { "off" }));
    }
    let v = scan_values(DecoherenceKind::Damp, PovmFamily::Mic, &grid8, &cfg);
    let good = v.iter().all(|x| (x - 0.50).abs() <= 0.02);
    ok &= good;
    lines.push(format!("damp mic [{}] want 0.5: {}", fmt_vals(&v), if good { "ok" } else { "off" }));
    let sic = scan_values(DecoherenceKind::Deph, PovmFamily::Sic, &grid16, &cfg);
    let near = |i: usize| i <= 1 || i >= 14;
    let good = sic[0] > 0.0 && sic[15] > 0.0 && sic.iter().enumerate().all(|(i, x)| near(i) || *x == 0.0);
    ok &= good;
    lines.push(format!("deph sic [{}]: {}", fmt_vals(&sic), if good { "ok" } else { "off" }));
    let pmic = scan_values(DecoherenceKind::Deph, PovmFamily::PMic, &grid16, &cfg);
    let mic = scan_values(DecoherenceKind::Deph, PovmFamily::Mic, &grid16, &cfg);
    let gap = pmic.iter().zip(&mic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let good = gap <= 0.03;
    ok &= good;
    lines.push(format!("deph pmic [{}] mic [{}] max gap {gap:.3}: {}", fmt_vals(&pmic), fmt_vals(&mic), if good { "ok" } else { "off" }));
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 1800.0;
    for l in &lines {
        println!("    {l}");
    }
    report(7, "tau_crit reproduction", ok, format!("{secs:.0} s"));
}

#[test]
fn criterion_08_gate_signs() {
    let lib = circuits::gate_library();
    let nonneg: Vec<(&str, f64)> = ["x", "swap"].iter().map(|g| (*g, lib[*g].min())).collect();
    let neg: Vec<(&str, f64)> = ["h", "t", "s", "cz", "cx", "iswap"].iter().map(|g| (*g, lib[*g].min())).collect();
    let ok = nonneg.iter().all(|(_, m)| *m >= -1e-12) && neg.iter().all(|(_, m)| *m <= -0.01);
    let show = |v: &[(&str, f64)]| v.iter().map(|(g, m)| format!("{g} {m:.3}")).collect::<Vec<_>>().join(", ");
    report(8, "gate signs", ok, format!("min entries: {}; {}", show(&nonneg), show(&neg)));
}

#[test]
fn criterion_09_closed_forms() {
    let mut worst: f64 = 0.0;
    for name in circuits::LIBRARY {
        let u = circuits::standard_unitary(name).unwrap();
        let f = if u.nrows() == 2 { circuits::sic_frame() } else { circuits::sic_pair_frame() };
        let closed = if u.nrows() == 2 { circuits::single_qubit_map(&u) } else { circuits::two_qubit_map(&u) }.unwrap();
        worst = worst.max(max_diff(closed.matrix(), channels::kraus_to_map(&[u], f, f).unwrap().matrix()));
    }
    let m = measurements::povm_to_map(&[basis_state(2, 0), basis_state(2, 1)], circuits::sic_frame()).unwrap();
    worst = worst.max(max_diff(&circuits::projective_measure_map(), m.matrix()));
    report(9, "closed form vs generic", worst <= 1e-10, format!("max difference {worst:.1e} over {} gates and M_pr", circuits::LIBRARY.len()));
}

#[test]
fn criterion_10_grover() {
    let start = Instant::now();
    let res = circuits::run(&circuits::grover_program("10").unwrap()).unwrap();
    let p = res.record.prob_of("10").unwrap();
    let counts = circuits::sample(&res.record, 1024, &mut rng(7));
    let secs = start.elapsed().as_secs_f64();
    let ok = (p - 1.0).abs() <= 1e-9 && counts[0b10] == 1024 && secs < 1.0;
    report(10, "Grover end-to-end", ok, format!("P(10) = {p:.15}, counts {counts:?}, {secs:.3} s"));
}

#[test]
fn criterion_11_circuit_oracle() {
    let start = Instant::now();
    let mut r = rng(110);
    let mut worst: f64 = 0.0;
    let cases = 250;
    for case in 0..cases {
        let n = 1 + case % 4;
        let depth = r.random_range(1..=12);
        let mut sv = StateVector::zero(n);
        let mut ops = Vec::new();
        for _ in 0..depth {
            let two = n > 1 && r.random_bool(0.5);
            let targets: Vec<usize> = if two {
                let a = r.random_range(0..n);
                let b = (a + r.random_range(1..n)) % n;
                vec![a, b]
            } else {
                vec![r.random_range(0..n)]
            };
            let names: Vec<&str> = circuits::LIBRARY.iter().copied().filter(|g| (circuits::standard_unitary(g).unwrap().nrows() == 4) == two).collect();
            let name = *names.choose(&mut r).unwrap();
            sv.apply(&circuits::standard_unitary(name).unwrap(), &targets);
            ops.push(Instruction::gate(name, &targets));
        }
        let qubits: Vec<usize> = (0..n).rev().collect();
        ops.push(Instruction::Measure(qubits.clone()));
        let res = circuits::run(&CircuitProgram { n, ops }).unwrap();
        let want = sv.probs(&qubits);
        worst = worst.max(res.record.probs.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    report(11, "circuit oracle", worst <= 1e-8 && secs < 120.0, format!("{cases} circuits, max error {worst:.1e}, {secs:.2} s"));
}

fn run_cli(args: &[&str], dir: &Path) {
    let o = Command::new(env!("CARGO_BIN_EXE_micprob")).args(args).current_dir(dir).output().unwrap();
    assert!(o.status.success(), "micprob {args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn digest(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn criterion_12_determinism() {
    let dir = std::env::temp_dir().join(format!("micprob-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("grover.json"), micprob::io::to_json_string(&micprob::io::CircuitFile::from_program(&circuits::grover_program("10").unwrap()))).unwrap();
    let scans: Vec<(&str, Vec<String>)> = [
        ("depol-sic", "classicality scan --kind depol --family sic --theta-grid 0:3.14159:4 --restarts 8"),
        ("deph-pmic", "classicality scan --kind deph --family pmic --theta-grid 0:1.5:3 --restarts 4"),
        ("damp-mic", "classicality scan --kind damp --family mic --theta-grid 0.2:0.8:2 --restarts 4"),
        ("trace", "circuit run grover.json --shots 64 --emit-trace OUT"),
        ("gate", "circuit gate-table --gate iswap"),
    ]
    .into_iter()
    .map(|(n, s)| (n, s.split(' ').map(String::from).collect()))
    .collect();
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, args) in &scans {
        let mut hashes = Vec::new();
        for (run, threads) in [(0, "1"), (1, "2")] {
            let file = format!("{name}-{run}.csv");
            let mut a: Vec<&str> = args.iter().map(|s| if s == "OUT" { file.as_str() } else { s.as_str() }).collect();
            a.extend(["--seed", "7", "--threads", threads]);
            if !args.iter().any(|s| s == "OUT") {
                a.extend(["--out", file.as_str()]);
            }
            run_cli(&a, &dir);
            hashes.push(digest(&dir.join(&file)));
        }
        ok &= hashes[0] == hashes[1];
        lines.push(format!("{name} {}", &hashes[0][..12]));
    }
    report(12, "determinism", ok, lines.join(", "));
}
