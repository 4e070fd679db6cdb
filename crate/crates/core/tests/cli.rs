use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sop")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sop(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn generate(dir: &TempDir) -> String {
    let inst = p(dir, "inst.txt");
    ok(&["generate", "--seed", "5", "--pool", "150", "--vehicles", "3", "-o", &inst]);
    inst
}

#[test]
fn exit_codes() {
    assert_eq!(sop(&["--help"]).status.code(), Some(0));
    assert_eq!(sop(&["--version"]).status.code(), Some(0));
    assert_eq!(sop(&[]).status.code(), Some(1));
    assert_eq!(sop(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(sop(&["generate", "--setup", "IV"]).status.code(), Some(1));
    let missing = sop(&["solve", "--schedule", "/nonexistent/s.txt", "--x", "1", "--y", "1", "--weight", "1"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let garbage = p(&dir, "garbage.txt");
    std::fs::write(&garbage, "sop-instance 7\n").unwrap();
    let bad = sop(&["fill", "--instance", &garbage]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("version"));
}

#[test]
fn empty_schedule_offers_every_window() {
    let dir = TempDir::new().unwrap();
    let sched = p(&dir, "empty.txt");
    let mut text = String::from("sop-schedule 1\ndepot 10000 10000\ntravel derive-euclidean 1.5 20\nwindows 10\n");
    for w in 0..10 {
        text += &format!("window {w} {} {}\n", 28800 + 3600 * w, 32400 + 3600 * w);
    }
    text += "orders 0\ntours 2\ntour 0 27000 66600 200 :\ntour 1 27000 66600 200 :\nend\n";
    std::fs::write(&sched, text).unwrap();
    let out = ok(&["solve", "--schedule", &sched, "--x", "9000", "--y", "11000", "--weight", "7"]);
    for m in ["simple", "tsptw", "ans"] {
        assert!(out.contains(&format!("{m}: 10 of 10 windows")), "{out}");
    }
}

#[test]
fn generate_fill_solve_pipeline() {
    let dir = TempDir::new().unwrap();
    let inst = generate(&dir);
    let traj = p(&dir, "traj.txt");
    let sched = p(&dir, "sched.txt");
    ok(&["fill", "--instance", &inst, "--scenario", "optimized", "-o", &traj, "--snapshot", "0.9", "--schedule-out", &sched]);
    assert!(std::fs::read_to_string(&traj).unwrap().starts_with("sop-trajectory 1\n"));
    assert!(std::fs::read_to_string(&sched).unwrap().starts_with("sop-schedule 1\n"));

    // Replaying the recorded trajectory reproduces the same snapshot.
    let replayed = p(&dir, "replayed.txt");
    ok(&["fill", "--instance", &inst, "--trajectory", &traj, "--snapshot", "0.9", "--schedule-out", &replayed]);
    assert_eq!(std::fs::read(&sched).unwrap(), std::fs::read(&replayed).unwrap());

    let out = ok(&["solve", "--schedule", &sched, "--x", "10000", "--y", "10000", "--weight", "3", "--windows", "0,4"]);
    let rows: Vec<_> = out.lines().filter(|l| l.starts_with(char::is_numeric)).collect();
    assert_eq!(rows.len(), 2, "{out}");
}

#[test]
fn bench_csv_feeds_report() {
    let dir = TempDir::new().unwrap();
    let csv = p(&dir, "bench.csv");
    let args = [
        "bench", "--setups", "I", "--scenarios", "plain", "--vehicles", "2", "--fills", "0.85",
        "--instances", "2", "--pool", "120", "--no-timings", "-o", &csv,
    ];
    ok(&args);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "setup,scenario,vehicles,fill,queries,avg_orders,avg_p_hat,simple_slots,simple_seconds,\
         tsptw_slots,tsptw_seconds,ans_slots,ans_seconds,combined_slots,undecided,windows"
    );
    assert_eq!(text.lines().count(), 2);

    let again = ok(&["report", &csv, "--format", "csv", "--no-timings"]);
    assert_eq!(again, text);
    let table = ok(&["report", &csv]);
    assert!(table.contains("simple") && table.contains("ans"));
    assert!(Path::new(&csv).exists());
}
