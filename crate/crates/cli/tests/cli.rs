use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn arbrec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbrec"))
        .args(args)
        .current_dir(dir)
        .env_remove("ARBREC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_random_has_rho_column() {
    let d = TempDir::new().unwrap();
    let o = arbrec(d.path(), &["gen", "random", "--n", "10", "--m", "30", "--seed", "1", "--out", "r.txt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("r.txt")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "10 30");
    assert_eq!(lines.len(), 31);
    assert!(lines[1..].iter().all(|l| l.split_whitespace().count() == 3));
}

#[test]
fn gen_adversarial_four() {
    let d = TempDir::new().unwrap();
    let o = arbrec(d.path(), &["gen", "adversarial", "--n", "4", "--out", "a.txt"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("a.txt")).unwrap();
    assert_eq!(text, "4 6\n1 2\n2 1\n3 2\n2 3\n0 1\n1 0\n");
}

#[test]
fn gen_mincost_adversarial_weights() {
    let d = TempDir::new().unwrap();
    let o = arbrec(d.path(), &["gen", "mincost-adversarial", "--n", "30", "--out", "t.txt"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("t.txt")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("weighted"));
    for l in lines {
        let w: u64 = l.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!(w <= 1);
    }
}

#[test]
fn gen_refuses_overwrite_without_force() {
    let d = TempDir::new().unwrap();
    let args = ["gen", "adversarial", "--n", "4", "--out", "a.txt"];
    assert_eq!(code(&arbrec(d.path(), &args)), 0);
    let o = arbrec(d.path(), &args);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&arbrec(d.path(), &forced)), 0);
    assert_eq!(code(&arbrec(d.path(), &["gen", "adversarial", "--n", "5"])), 1);
}

#[test]
fn out_dir_from_environment() {
    let d = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_arbrec"))
        .args(["gen", "adversarial", "--n", "6"])
        .current_dir(d.path())
        .env("ARBREC_OUT_DIR", "outputs")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("outputs/adversarial-n6.txt").exists());
}

#[test]
fn run_adversary_total_and_trace_sums() {
    let d = TempDir::new().unwrap();
    arbrec(d.path(), &["gen", "adversarial", "--n", "4", "--out", "a.txt"]);
    let o = arbrec(
        d.path(),
        &["run", "a.txt", "--trace", "t.csv", "--summary", "s.json", "--verify", "full"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&d.path().join("s.json"));
    assert_eq!(s["total_recourse"], 3);
    assert_eq!(s["schema_version"], 1);
    assert!(s["phase1_recourse"].is_null());
    let csv = fs::read_to_string(d.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "deletions").unwrap();
    let sum: u64 = lines.map(|l| l.split(',').nth(col).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(serde_json::json!(sum), s["total_recourse"]);
}

#[test]
fn run_empty_instance() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("e.txt"), "5 0\n").unwrap();
    let o = arbrec(d.path(), &["run", "e.txt"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(d.path().join("trace.csv")).unwrap();
    assert_eq!(
        csv,
        "step,tail,head,rho,updated,path_len,deletions,forest_size,num_roots,vanishing_arb_size\n"
    );
    assert_eq!(json(&d.path().join("summary.json"))["total_recourse"], 0);
}

#[test]
fn run_random_full_verification_and_reproducible_trace() {
    let d = TempDir::new().unwrap();
    arbrec(d.path(), &["gen", "random", "--n", "64", "--m", "384", "--seed", "3", "--out", "r.txt"]);
    for name in ["a", "b"] {
        let o = arbrec(
            d.path(),
            &["run", "r.txt", "--verify", "full", "--trace", &format!("{name}.csv"), "--summary", &format!("{name}.json")],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read(d.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.csv")).unwrap());
    let s = json(&d.path().join("a.json"));
    assert_eq!(s["checks"]["cardinality"], 384);
    assert!(!s["phase1_recourse"].is_null());

    let o = arbrec(d.path(), &["verify", "r.txt", "a.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_rejects_tampered_trace() {
    let d = TempDir::new().unwrap();
    arbrec(d.path(), &["gen", "random", "--n", "20", "--m", "40", "--seed", "2", "--out", "r.txt"]);
    arbrec(d.path(), &["run", "r.txt"]);
    let csv = fs::read_to_string(d.path().join("trace.csv")).unwrap();
    let mut lines: Vec<String> = csv.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[10].split(',').map(String::from).collect();
    let size: usize = cells[7].parse().unwrap();
    cells[7] = (size + 1).to_string();
    lines[10] = cells.join(",");
    fs::write(d.path().join("bad.csv"), lines.join("\n") + "\n").unwrap();
    let o = arbrec(d.path(), &["verify", "r.txt", "bad.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("step 10"), "{}", stderr(&o));
}

#[test]
fn parse_errors_and_missing_files() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.txt"), "4 2\n0 1\n1 x\n").unwrap();
    let o = arbrec(d.path(), &["run", "bad.txt"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(code(&arbrec(d.path(), &["run", "missing.txt"])), 3);
}

#[test]
fn usage_and_help_exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&arbrec(d.path(), &["--help"])), 0);
    assert_eq!(code(&arbrec(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&arbrec(d.path(), &["run", "x.txt", "--verify", "loud"])), 1);
}

#[test]
fn experiment_is_deterministic_and_rejects_zero_trials() {
    let d = TempDir::new().unwrap();
    for name in ["a", "b"] {
        let o = arbrec(
            d.path(),
            &[
                "experiment", "--n", "128", "--trials", "1", "--seed", "5",
                "--summary", &format!("{name}.json"), "--matrix", &format!("{name}.csv"),
            ],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = json(&d.path().join("a.json"));
    assert_eq!(a, json(&d.path().join("b.json")));
    assert_eq!(a["schema_version"], 1);
    assert_eq!(a["trials"][0]["seed"], 5);
    assert_eq!(fs::read(d.path().join("a.csv")).unwrap(), fs::read(d.path().join("b.csv")).unwrap());

    let o = arbrec(d.path(), &["experiment", "--n", "128", "--trials", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn mincost_examples() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("zero.txt"), "3 2 weighted\n0 1 0\n1 2 0\n").unwrap();
    let o = arbrec(d.path(), &["mincost", "zero.txt", "--verify-dual", "--json", "z.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let z = json(&d.path().join("z.json"));
    assert_eq!(z["cost"], 0);
    assert_eq!(z["packing"]["sets"].as_array().unwrap().len(), 0);

    fs::write(d.path().join("three.txt"), "3 3 weighted\n0 1 0\n0 2 5\n1 2 1\n").unwrap();
    let o = arbrec(d.path(), &["mincost", "three.txt", "--verify-dual", "--verify-brute"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("cost 1 "), "{}", stdout(&o));

    arbrec(d.path(), &["gen", "mincost-adversarial", "--n", "30", "--out", "t.txt"]);
    let o = arbrec(d.path(), &["mincost", "t.txt", "--incremental", "--verify-dual", "--json", "t.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = json(&d.path().join("t.json"));
    assert!(t["incremental"]["total_recourse"].as_u64().unwrap() >= 900 / 20);

    let o = arbrec(d.path(), &["mincost", "three.txt", "--candidate-rule", "tail"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    fs::write(d.path().join("u.txt"), "3 1\n0 1\n").unwrap();
    assert_eq!(code(&arbrec(d.path(), &["mincost", "u.txt"])), 1);
}
