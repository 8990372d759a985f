use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("micprob-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_micprob")).args(args).current_dir(dir).output().unwrap()
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn frame_commands() {
    let d = workdir("frame");
    let o = run(&d, &["frame", "build-sic", "--dim", "2", "--out", "f.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&run(&d, &["frame", "validate", "f.json"]));
    assert_eq!(v["valid"], true);
    assert!((v["condition_number"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let o = run(&d, &["frame", "build-sic", "--dim", "3", "--out", "g.json"]);
    assert!(o.status.success());
    let v = json_out(&run(&d, &["frame", "tensor", "f.json", "g.json"]));
    assert_eq!(v["dim"], 6);
    assert_eq!(v["effects"].as_array().unwrap().len(), 36);
    assert_eq!(run(&d, &["frame", "build-sic", "--dim", "5"]).status.code(), Some(3));
    write(&d, "bad.json", r#"{"dim": 2, "effects": [[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#);
    let o = run(&d, &["frame", "validate", "bad.json"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "ValidationError");
}

#[test]
fn state_commands() {
    let d = workdir("state");
    write(&d, "corner.json", r#"{"p": [1, 0, 0, 0]}"#);
    let v = json_out(&run(&d, &["state", "check", "corner.json"]));
    assert_eq!(v["verdict"], "not physical");
    assert_eq!(v["is_physical"], false);
    write(&d, "zero.json", r#"{"rho": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#);
    let v = json_out(&run(&d, &["state", "to-prob", "zero.json"]));
    let p = floats(&v["p"]);
    let a = (3.0 + 3f64.sqrt()) / 12.0;
    assert!((p[0] - a).abs() < 1e-12 && (p[1] - a).abs() < 1e-12);
    let v = json_out(&run(&d, &["state", "check", "zero.json"]));
    assert_eq!(v["verdict"], "physical");
    let v = json_out(&run(&d, &["state", "purity", "zero.json"]));
    assert!((v["purity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["pure"], true);
    write(&d, "uniform.json", r#"{"frame": "sic", "p": [0.25, 0.25, 0.25, 0.25]}"#);
    let v = json_out(&run(&d, &["state", "from-prob", "uniform.json"]));
    assert!((v["rho"][0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    write(&d, "unnorm.json", r#"{"p": [0.5, 0.25, 0.25, 0.25]}"#);
    assert_eq!(run(&d, &["state", "check", "unnorm.json"]).status.code(), Some(3));
    assert_eq!(run(&d, &["state", "check", "missing.json"]).status.code(), Some(3));
}

#[test]
fn channel_and_measure_commands() {
    let d = workdir("channel");
    write(&d, "x.json", r#"{"kraus": [[[[0,0],[1,0]],[[1,0],[0,0]]]]}"#);
    let v = json_out(&run(&d, &["channel", "to-pstoch", "x.json"]));
    assert_eq!(v["bistochastic"], true);
    let v = json_out(&run(&d, &["channel", "check", "x.json"]));
    assert_eq!(v["verdict"], "completely positive");
    let v = json_out(&run(&d, &["channel", "choi", "x.json"]));
    assert_eq!(v["choi_p"].as_array().unwrap().len(), 16);
    write(&d, "zero.json", r#"{"rho": [[[1,0],[0,0]],[[0,0],[0,0]]]}"#);
    let v = json_out(&run(&d, &["channel", "apply", "x.json", "zero.json"]));
    let p = floats(&v["p"]);
    let b = (3.0 - 3f64.sqrt()) / 12.0;
    assert!((p[0] - b).abs() < 1e-12);
    // the transpose map is positive but not completely positive
    write(&d, "t.json", r#"{"pstoch": [[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]}"#);
    let v = json_out(&run(&d, &["channel", "check", "t.json"]));
    assert!(v["verdict"].is_string());
    write(&d, "z.json", r#"{"effects": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]], "labels": ["up", "down"], "values": [1, -1]}"#);
    let v = json_out(&run(&d, &["measure", "probs", "z.json", "zero.json"]));
    assert_eq!(v["labels"][0], "up");
    assert!((floats(&v["probs"])[0] - 1.0).abs() < 1e-12);
    let v = json_out(&run(&d, &["measure", "mean", "z.json", "zero.json"]));
    assert!((v["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = json_out(&run(&d, &["measure", "check", "z.json"]));
    assert_eq!(v["valid"], true);
    write(&d, "rows.json", r#"{"pstoch_rows": [[3, 0, 0, 0], [-2, 1, 1, 1]]}"#);
    let v = json_out(&run(&d, &["measure", "check", "rows.json"]));
    assert_eq!(v["valid"], false);
    write(&d, "notp.json", r#"{"kraus": [[[[2,0],[0,0]],[[0,0],[1,0]]]]}"#);
    assert_eq!(run(&d, &["channel", "to-pstoch", "notp.json"]).status.code(), Some(3));
}

#[test]
fn dynamics_commands() {
    let d = workdir("dyn");
    let s = 0.5;
    write(
        &d,
        "model.json",
        &format!(r#"{{"hamiltonian": [[[0.5,0],[0,0]],[[0,0],[-0.5,0]]], "noise_ops": [[[[{s},0],[0,0]],[[0,0],[-{s},0]]]]}}"#),
    );
    let v = json_out(&run(&d, &["dyn", "generator", "model.json"]));
    assert_eq!(v["kind"], "gksl");
    let v = json_out(&run(&d, &["dyn", "check-generator", "model.json"]));
    assert_eq!(v["verdict"], "gksl");
    let v = json_out(&run(&d, &["dyn", "project-unitary", "model.json"]));
    assert_eq!(v["kind"], "hamiltonian");
    write(&d, "uniform.json", r#"{"p": [0.25, 0.25, 0.25, 0.25]}"#);
    let v = json_out(&run(&d, &["dyn", "evolve", "model.json", "uniform.json", "--t", "2"]));
    assert!(floats(&v["p"]).iter().all(|x| (x - 0.25).abs() < 1e-12));
    let v = json_out(&run(&d, &["dyn", "table", "--name", "depol", "--t", "1", "--tau", "1"]));
    let e = (-1f64).exp();
    assert!((v["matrix"][0][0].as_f64().unwrap() - (e + (1.0 - e) / 4.0)).abs() < 1e-12);
    write(&d, "neg.json", r#"{"generator": [[1,0,0,0],[0,1,0,0],[0,0,-1,0],[0,0,0,-1]]}"#);
    assert_eq!(run(&d, &["dyn", "check-generator", "neg.json"]).status.code(), Some(3));
    write(&d, "flip.json", r#"{"generator": [[-0.75,0.25,0.25,0.25],[0.25,-0.75,0.25,0.25],[0.25,0.25,-0.75,0.25],[0.25,0.25,0.25,-0.75]]}"#);
    let v = json_out(&run(&d, &["dyn", "check-generator", "flip.json"]));
    assert_eq!(v["verdict"], "gksl");
    assert!(!run(&d, &["dyn", "table", "--name", "nope"]).status.success());
}

#[test]
fn classicality_commands() {
    let d = workdir("class");
    let v = json_out(&run(&d, &["classicality", "tau-crit", "--kind", "depol", "--theta", "0.3", "--family", "sic", "--restarts", "8", "--seed", "7"]));
    assert!((v["tau_crit"].as_f64().unwrap() - 0.5).abs() < 0.02);
    assert_eq!(v["family"], "sic");
    let v = json_out(&run(&d, &["classicality", "negativity", "--kind", "depol", "--tau", "0.3", "--family", "sic", "--restarts", "4"]));
    assert!(v["negativity"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["effects"].as_array().unwrap().len(), 4);
    let o = run(&d, &["classicality", "scan", "--kind", "depol", "--family", "sic", "--theta-grid", "0:1:2", "--restarts", "4"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta,tau_crit,family,kind,seed,evaluations");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0.0000000000000000e0");
    assert_eq!(row[2..5], ["sic", "depol", "7"]);
    assert_eq!(run(&d, &["classicality", "scan", "--kind", "depol", "--theta-grid", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&d, &["classicality", "tau-crit", "--kind", "nope"]).status.code(), Some(2));
    assert_eq!(run(&d, &["classicality", "negativity", "--kind", "deph", "--tau=-1"]).status.code(), Some(3));
}

#[test]
fn circuit_commands() {
    let d = workdir("circuit");
    write(&d, "bell.json", r#"{"n": 2, "ops": [{"gate": "h", "targets": [0]}, {"gate": "cx", "targets": [0, 1]}, {"measure": [0, 1]}]}"#);
    let v = json_out(&run(&d, &["circuit", "run", "bell.json", "--shots", "200", "--seed", "3", "--emit-trace", "trace.csv"]));
    let p = floats(&v["probs"]);
    assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    let counts: Vec<u64> = v["counts"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(counts.iter().sum::<u64>(), 200);
    assert_eq!(counts[1] + counts[2], 0);
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 4 * 16);
    let o = run(&d, &["circuit", "gate-table", "--gate", "x"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(run(&d, &["circuit", "gate-table", "--gate", "foo"]).status.code(), Some(3));
    write(&d, "oob.json", r#"{"n": 2, "ops": [{"gate": "x", "targets": [5]}]}"#);
    let o = run(&d, &["circuit", "run", "oob.json"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["kind"], "TargetOutOfRange");
}

#[test]
fn usage_errors() {
    let d = workdir("usage");
    assert_eq!(run(&d, &["bogus"]).status.code(), Some(2));
    assert_eq!(run(&d, &[]).status.code(), Some(2));
    assert_eq!(run(&d, &["--help"]).status.code(), Some(0));
    assert_eq!(run(&d, &["frame", "build-sic", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&d, &["classicality", "scan", "--kind", "depol", "--threads", "0", "--theta-grid", "0:1:1"]).status.code(), Some(2));
}
