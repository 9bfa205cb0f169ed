use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const GREEDY_TRAP: &str = "3 2 2\n1/3 1/3 1/3\n1 1 2\n1 2 2\n";
const PERFECT_FOUR: &str = "4 3 2\n1/4 1/4 1/4 1/4\n1 2 2 2\n1 2 1 2\n1 1 2 2\n";

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_splitwise"));
    cmd.args(args).env_remove("SPLITWISE_BUDGET_MS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn frac(s: &str) -> f64 {
    match s.split_once('/') {
        Some((a, b)) => a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

#[test]
fn greedy_solve_reports_cost() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "trap.txt", GREEDY_TRAP);
    let o = run(&["solve", &f], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "C_G=5/3"));
}

#[test]
fn exact_solve_with_depth_limit_on_perfect_instance() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p4.txt", PERFECT_FOUR);
    let o = run(&["solve", &f, "--algo", "exact", "--max-depth", "3"], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "C_OPT=2"));
}

#[test]
fn fulltree_solve_writes_tree_and_trace() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p4.txt", PERFECT_FOUR);
    let out = dir.path().join("ft.tree");
    let o = run(&["solve", &f, "--algo", "fulltree", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("within=true"), "{s}");
    assert!(s.contains("failed=0"), "{s}");
    assert!(out.exists());
    assert!(Path::new(&format!("{}.trace", out.display())).exists());
}

#[test]
fn invalid_instance_exits_two() {
    let dir = TempDir::new().unwrap();
    // Hypotheses 1 and 2 cannot be told apart.
    let f = write(&dir, "bad.txt", "3 1 2\n1/3 1/3 1/3\n1 1 2\n");
    assert_eq!(run(&["solve", &f], &[]).status.code(), Some(2));
    let f = write(&dir, "garbled.txt", "3 x\n");
    assert_eq!(run(&["solve", &f], &[]).status.code(), Some(2));
}

#[test]
fn zero_budget_exact_solve_exits_three() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p4.txt", PERFECT_FOUR);
    let o = run(&["solve", &f, "--algo", "exact"], &[("SPLITWISE_BUDGET_MS", "0")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn default_audit_passes_with_summaries() {
    let o = run(&["audit", "--count", "6"], &[]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("summary total") && l.ends_with("failed=0")), "{s}");
}

#[test]
fn injected_fault_exits_four_and_replays() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("audit.txt");
    let o = run(&["audit", "--count", "4", "--inject-fault", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(4));
    let repro = format!("{}.repro", out.display());
    assert!(Path::new(&repro).exists());
    let replay = run(&["replay", &repro], &[]);
    assert!(!replay.status.success());
    assert!(stdout(&replay).lines().any(|l| l.contains("identity") && l.contains("fail")));
}

#[test]
fn only_filter_restricts_families() {
    let o = run(&["audit", "--count", "4", "--only", "entropy"], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.starts_with("entropy ") || l.starts_with("summary ")));
    assert_eq!(run(&["audit", "--only", "nonsense"], &[]).status.code(), Some(2));
}

#[test]
fn empty_sweep_is_header_only() {
    let o = run(&["experiment", "grid", "--c-star", "4"], &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn grid_sweep_ratios_grow_with_n() {
    let o = run(&["experiment", "grid", "--ns", "16,64,256", "--c-star", "4"], &[]);
    assert!(o.status.success());
    let ratios: Vec<f64> = csv_rows(&stdout(&o)).iter().map(|r| frac(&r[8])).collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{ratios:?}");
}

#[test]
fn experiment_output_is_byte_identical() {
    let args = ["experiment", "random", "--ns", "5,7", "--per-size", "2", "--algo", "greedy,fulltree", "--profile", "skew"];
    assert_eq!(run(&args, &[]).stdout, run(&args, &[]).stdout);
}

#[test]
fn random_sweep_costs_stay_below_bounds() {
    let o = run(&["experiment", "random", "--ns", "5,6,7", "--per-size", "3", "--algo", "greedy,fulltree"], &[]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 18);
    for r in rows {
        assert_eq!(r[11], "ok");
        let opt = frac(r[7].strip_prefix("exact:").unwrap());
        let ratio = frac(&r[8]);
        assert!(ratio >= 1.0);
        assert!(ratio <= r[9].parse::<f64>().unwrap() / opt, "{r:?}");
    }
}

#[test]
fn zero_budget_rows_are_skipped() {
    let o = run(&["experiment", "random", "--ns", "6", "--per-size", "2"], &[("SPLITWISE_BUDGET_MS", "0")]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[11] == "skipped"));
}

#[test]
fn generators_are_deterministic() {
    for args in [
        vec!["gen", "random", "--n", "9", "--m", "6", "--seed", "4", "--profile", "skew"],
        vec!["gen", "grid", "--n", "32", "--c-star", "5"],
        vec!["gen", "reduction", "--n0", "3", "--sets", "1 2;2 3;3", "--json"],
    ] {
        let a = run(&args, &[]);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, run(&args, &[]).stdout);
    }
}

#[test]
fn generated_instance_feeds_solve() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("g.txt");
    let f = f.to_str().unwrap();
    assert!(run(&["gen", "random", "--n", "6", "--m", "5", "--seed", "9", "--out", f], &[]).status.success());
    let o = run(&["solve", f, "--algo", "exact"], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("C_OPT="));
}

#[test]
fn mssc_command_reports_orders_and_covers() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "ms.txt", "3 3\n1/3 1/3 1/3\n1 2\n2 3\n3\n");
    let s = stdout(&run(&["mssc", &f], &[]));
    assert!(s.contains("greedy_cost=4/3") && s.contains("optimal_cost=4/3"), "{s}");
    let s = stdout(&run(&["mssc", &f, "--cover"], &[]));
    assert!(s.contains("greedy_size=2") && s.contains("optimal_size=2"), "{s}");
}
