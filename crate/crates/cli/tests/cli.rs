use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::{json, Value};

fn qihsi() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qihsi"));
    c.env_remove("QIHSI_SEED");
    c
}

fn ok(out: Output) -> String {
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {stdout}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    stdout
}

/// `key=value` pairs of the last summary line.
fn field(summary: &str, key: &str) -> String {
    summary
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {summary}"))
        .to_string()
}

fn small_run(dir: &Path, name: &str, extra: &[&str]) -> (String, Value) {
    let out = dir.join(name);
    let mut args = vec!["run", "--problem", "ZDT2", "--pop", "16", "--iters", "25", "--out"];
    args.push(out.to_str().unwrap());
    args.extend_from_slice(extra);
    let summary = ok(qihsi().args(&args).output().unwrap());
    let record: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    (summary, record)
}

#[test]
fn run_prints_summary_and_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let front = dir.path().join("front.csv");
    let (summary, record) = small_run(dir.path(), "r.json", &["--seed", "9", "--front", front.to_str().unwrap()]);
    assert!(summary.starts_with("run problem=ZDT2 algo=qihsi seed=9"));
    assert_eq!(record["config"]["population"], 16);
    assert_eq!(record["traces"]["c1"].as_array().unwrap().len(), 25);
    let igd: f64 = field(&summary, "igd").parse().unwrap();
    assert!((igd - record["metrics"]["igd"].as_f64().unwrap()).abs() <= 1e-6 * igd);
    let csv = std::fs::read_to_string(front).unwrap();
    assert_eq!(csv.lines().next(), Some("f1,f2"));
    assert_eq!(csv.lines().count() - 1, record["final_front"].as_array().unwrap().len());
}

#[test]
fn flags_override_config_file_and_env_overrides_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"problem": "UF1", "population": 30, "iterations": 5, "seed": 1}"#).unwrap();
    let out = ok(qihsi()
        .args(["run", "--config", cfg.to_str().unwrap(), "--pop", "12", "--algo", "mssa"])
        .output()
        .unwrap());
    assert_eq!(field(&out, "problem"), "UF1");
    assert_eq!(field(&out, "algo"), "mssa");
    assert_eq!(field(&out, "seed"), "1");

    let out = ok(qihsi()
        .env("QIHSI_SEED", "77")
        .args(["run", "--config", cfg.to_str().unwrap(), "--seed", "3"])
        .output()
        .unwrap());
    assert_eq!(field(&out, "seed"), "77");
}

#[test]
fn identical_seeds_give_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut a) = small_run(dir.path(), "a.json", &["--seed", "4"]);
    let (_, mut b) = small_run(dir.path(), "b.json", &["--seed", "4"]);
    a["wall_clock_seconds"] = json!(0);
    b["wall_clock_seconds"] = json!(0);
    assert_eq!(a, b);
}

#[test]
fn dmil_scenario_flag() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    std::fs::write(&scenario, r#"{"schedule": [{"event": 2, "weights": [0.6,0.2,0.2]}], "description": "safety"}"#).unwrap();
    let out = dir.path().join("r.json");
    let summary = ok(qihsi()
        .args(["run", "--problem", "adas8", "--pop", "12", "--iters", "20", "--tau", "5", "--gamma", "0.5"])
        .args(["--dmil", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap());
    assert!(summary.contains(" efa="));
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rec["events"].as_array().unwrap().len(), 4);
    assert!(rec["adas_indicators"]["si"].is_f64());
}

#[test]
fn metrics_command() {
    let dir = tempfile::tempdir().unwrap();
    let front = dir.path().join("front.txt");
    let reference = dir.path().join("ref.txt");
    std::fs::write(&front, "0.25 0.75\n0.75 0.25\n").unwrap();
    std::fs::write(&reference, "0 1\n0.5 0.5\n1 0\n").unwrap();
    let out = ok(qihsi()
        .args(["metrics", "--front", front.to_str().unwrap(), "--reference", reference.to_str().unwrap()])
        .args(["--ref-point", "1,1"])
        .output()
        .unwrap());
    let hv: f64 = field(&out, "hv").parse().unwrap();
    assert_eq!(hv, 0.3125);
    assert_eq!(field(&out, "n"), "2");
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let out = qihsi().args(["run", "--problem", "ZDT9"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZDT9"));
    let out = qihsi().args(["metrics", "--front", "/nonexistent/front.txt"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
    let out = qihsi().env("QIHSI_SEED", "abc").args(["run"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn bench_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = ok(qihsi()
        .args(["bench", "--suite", "zdt", "--algos", "qihsi", "--runs", "3", "--pop", "10", "--iters", "10"])
        .args(["--out", report.to_str().unwrap()])
        .output()
        .unwrap());
    assert_eq!(field(&out, "batches"), "4");
    let r = report.to_str().unwrap();
    let out = ok(qihsi()
        .args(["compare", "--a", r, "--label-a", "ZDT1/qihsi", "--b", r, "--label-b", "ZDT1/qihsi"])
        .output()
        .unwrap());
    assert_eq!(field(&out, "p"), "1.000000");
    assert_eq!(field(&out, "better"), "none");
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn http(addr: &str, method: &str, path: &str, body: &str) -> (u16, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let status = raw.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = raw.split_once("\r\n\r\n").map(|(_, b)| b.to_string()).unwrap_or_default();
    (status, body)
}

fn rpc(addr: &str, msg: Value) -> (u16, Value) {
    let (status, body) = http(addr, "POST", "/rpc", &msg.to_string());
    (status, serde_json::from_str(&body).unwrap())
}

#[test]
fn serve_speaks_the_session_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("base.json");
    std::fs::write(&cfg, r#"{"problem": "adas8", "population": 12, "iterations": 50, "dmil": {"enabled": true}}"#).unwrap();
    let mut child = qihsi()
        .args(["serve", "--port", "0", "--config", cfg.to_str().unwrap()])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let stdout = child.stdout.take().unwrap();
    let _server = Server(child);
    let mut line = String::new();
    BufReader::new(stdout).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("serve listening=http://").unwrap().to_string();

    assert_eq!(http(&addr, "GET", "/health", "").1, "ok");
    let (status, created) = rpc(&addr, json!({"type": "create", "config": {"seed": 5}}));
    assert_eq!(status, 200);
    assert_eq!(created["type"], "created");
    let id = created["session"].as_str().unwrap().to_string();

    let (_, ack) = rpc(&addr, json!({"type": "feedback", "session": id, "weights": [2, 1, 1]}));
    assert_eq!(ack["type"], "ack");
    assert_eq!(ack["applies_at"], 25);
    assert_eq!(ack["weights"], json!([0.5, 0.25, 0.25]));

    let (_, state) = rpc(&addr, json!({"type": "advance", "session": id, "n": 25}));
    assert_eq!(state["type"], "state");
    assert_eq!(state["iteration"], 25);
    assert_eq!(state["last_event"]["status"], "applied");
    let w: Vec<f64> = serde_json::from_value(state["weights"].clone()).unwrap();
    let third = 1.0 / 3.0;
    let want = [0.7 * third + 0.3 * 0.5, 0.7 * third + 0.3 * 0.25, 0.7 * third + 0.3 * 0.25];
    for (a, b) in w.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }

    let (_, snap) = rpc(&addr, json!({"type": "snapshot", "session": id}));
    assert_eq!(snap["iteration"], 25);
    assert_eq!(snap["status"], "paused");

    let (status, err) = rpc(&addr, json!({"type": "snapshot", "session": "missing"}));
    assert_eq!(status, 404);
    assert_eq!(err["code"], "no_such_session");
    let (status, err) = rpc(&addr, json!({"type": "create", "config": {"iterations": "x"}}));
    assert_eq!(status, 400);
    assert_eq!(err["code"], "bad_config");
    let (_, err) = rpc(&addr, json!({"type": "feedback", "session": id, "weights": [1, 0]}));
    assert_eq!(err["code"], "bad_weights");

    // play runs the session to the end server-side
    let (_, playing) = rpc(&addr, json!({"type": "play", "session": id}));
    assert_eq!(playing["status"], "running");
    let mut finished = false;
    for _ in 0..400 {
        let (_, s) = rpc(&addr, json!({"type": "snapshot", "session": id}));
        if s["status"] == "finished" {
            assert_eq!(s["iteration"], 50);
            finished = true;
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(25));
    }
    assert!(finished);

    // the stream of a finished session emits its final state and ends
    let (status, body) = http(&addr, "GET", &format!("/sessions/{id}/stream"), "");
    assert_eq!(status, 200);
    assert!(body.contains("event: state"));
    assert!(body.contains(r#""status":"finished""#));
}
