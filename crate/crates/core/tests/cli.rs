use std::fs;
use std::path::Path;
use std::process::Command;

use mfbo::cli::cli_main;
use mfbo::policy::read_trace_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfbo"))
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn bench_writes_deterministic_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = tmp.path().join(name);
        let status = bin()
            .args(["bench", "--problem", "currin2", "--seeds", "2", "--budget-mult", "6", "--quiet", "--out"])
            .arg(&out)
            .env("MFBO_THREADS", threads)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        csvs(&out)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["curves.csv", "runs.csv", "summary.csv", "traces.csv"]);
    assert_eq!(a, b);
    assert_eq!(a, c);

    let summary = String::from_utf8(a[2].1.clone()).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "policy,checkpoint_cost,mean_simple_regret,stderr,n_seeds");
    assert_eq!(lines.len(), 1 + 3 * 4);

    let traces = String::from_utf8(a[3].1.clone()).unwrap();
    assert!(traces.starts_with("policy,seed,episode,step,fidelity,cost_so_far,y,x0,x1\n"));
    let records = read_trace_csv(traces.as_bytes()).unwrap();
    assert!(records.iter().all(|r| r.fidelity == 1 || r.fidelity == 2));
    assert!(records.iter().any(|r| r.fidelity == 1));
    let sf_rows = records.iter().filter(|r| r.policy == "sf_only").count();
    assert_eq!(sf_rows, 2 * 6);
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let out = bin().args(["bench", "--problem", "rosenbrock"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rosenbrock"));
}

#[test]
fn usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["bench", "--problem", "toy1d", "--budget-mult", "0.5"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["bench", "--problem", "toy1d", "--budget-mult", "abc"]).status().unwrap().code(), Some(2));

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "problem = \"toy1d\"\nseeds = 1\nbudget = 3\n").unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("budget"), "{err}");
}

#[test]
fn run_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "problem = \"toy1d\"\npolicies = [\"sf_only\", \"mf_mi_greedy\"]\nbudget_mult = 1\nseeds = 1\nout = {:?}\n\n[policy]\ncandidates = 64\n",
            out.to_string_lossy()
        ),
    )
    .unwrap();
    let code = cli_main(["mfbo".into(), "run".into(), "--config".into(), cfg.into_os_string()]);
    assert_eq!(code, 0);
    let traces = fs::read_to_string(out.join("traces.csv")).unwrap();
    // a unit budget multiplier leaves room for exactly one target query per policy
    let records = read_trace_csv(traces.as_bytes()).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.fidelity == 2 && r.episode == 0));
    assert_eq!(records[0].policy, "sf_only");
}
