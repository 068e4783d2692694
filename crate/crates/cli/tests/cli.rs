use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heavylight"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["generate", "--out", p(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn solve_then_check_accepts_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "p.json", &["--family", "planted", "--machines", "12", "--seed", "5"]);
    let res = dir.path().join("res.json");
    let o = run(&["solve", "--instance", p(&inst), "--desk-scale", "--seed", "9", "--out", p(&res)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(doc["path"], "pipeline");
    assert_eq!(doc["pipeline"]["verification"]["schedule_valid"], true);

    let o = run(&["check", "--instance", p(&inst), "--schedule", p(&res)]);
    assert_eq!(code(&o), 0);
    let verdict: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(verdict["valid"], true);
    assert_eq!(verdict["makespan"], doc["makespan"]);
}

#[test]
fn check_rejects_a_schedule_with_an_ineligible_machine() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    std::fs::write(
        &inst,
        r#"{"eps": "1/2", "machines": ["a", "b"],
            "heavy": [{"id": "h", "eligible": ["a"]}], "light": []}"#,
    )
    .unwrap();
    let sched = dir.path().join("s.json");
    std::fs::write(&sched, r#"{"h": "b"}"#).unwrap();
    let o = run(&["check", "--instance", p(&inst), "--schedule", p(&sched)]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let verdict: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(verdict["valid"], false);
}

#[test]
fn exit_codes_distinguish_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    // three heavy jobs on one machine: LP(ρ,δ) is infeasible
    let crowded = dir.path().join("c.json");
    std::fs::write(
        &crowded,
        r#"{"eps": "1/2", "machines": ["a"],
            "heavy": [{"id": "h0", "eligible": ["a"]}, {"id": "h1", "eligible": ["a"]},
                      {"id": "h2", "eligible": ["a"]}],
            "light": []}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["solve", "--instance", p(&crowded), "--desk-scale"])), 2);

    let broken = dir.path().join("b.json");
    std::fs::write(&broken, "{ not json").unwrap();
    assert_eq!(code(&run(&["solve", "--instance", p(&broken)])), 4);
    assert_eq!(code(&run(&["solve", "--instance", p(&dir.path().join("missing.json"))])), 4);
    assert_eq!(code(&run(&["solve"])), 4);
    assert_eq!(code(&run(&["frobnicate"])), 4);
    assert_eq!(code(&run(&["--version"])), 0);

    let inst = generate(dir.path(), "r.json", &["--family", "planted", "--machines", "6", "--heavy", "2", "--light", "4", "--seed", "1"]);
    // ρδ ≥ 1/5 is rejected before solving
    assert_eq!(code(&run(&["solve", "--instance", p(&inst), "--rho", "0.5", "--delta", "0.4"])), 4);
}

#[test]
fn default_constants_reject_small_instances_with_a_hint() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "p.json", &["--family", "planted", "--machines", "8", "--seed", "2"]);
    let o = run(&["solve", "--instance", p(&inst)]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--desk-scale"));
}

#[test]
fn constants_file_matches_the_desk_flag() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "p.json", &["--family", "planted", "--machines", "10", "--seed", "4"]);
    let desk = configs().join("desk.json");
    let a = run(&["solve", "--instance", p(&inst), "--desk-scale"]);
    let b = run(&["solve", "--instance", p(&inst), "--constants", p(&desk)]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn experiments_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("random-grid.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&run(&["experiment", "--config", p(&cfg), "--out", p(&a)])), 0);
    assert_eq!(code(&run(&["experiment", "--config", p(&cfg), "--out", p(&b)])), 0);
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn vertex_cover_rows_carry_labels() {
    let cfg = configs().join("vertex-cover.json");
    let o = run(&["experiment", "--config", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let label = headers.iter().position(|h| h == "label").unwrap();
    let verified = headers.iter().position(|h| h == "verified").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(&r[label], if i % 2 == 0 { "yes" } else { "no" });
        assert_eq!(&r[verified], "true");
    }
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--family", "random", "--machines", "7", "--heavy", "3", "--light", "5", "--seed", "11"];
    let a = generate(dir.path(), "a.json", &args);
    let b = generate(dir.path(), "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
