//! End-to-end checks of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn latfold(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latfold"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn instances_lists_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = latfold(&["instances"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1K43"));
    assert!(text.contains("RGKWTYNGITYEGR"));
    assert!(text.contains("46"));
    assert!(text.contains("APRLRFY"));
    assert!(text.contains("GNLVS"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn ground_state_caches_and_reuses() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ground-state", "--pdb-id", "4QXX", "--lattice", "fcc"];
    let first = latfold(&args, dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stdout(&first).contains("cache miss"));
    assert!(stdout(&first).contains("e_gs = "));
    let second = latfold(&args, dir.path());
    assert!(second.status.success());
    assert!(stdout(&second).contains("cache hit"));
    // One JSON artifact in the cache directory.
    let entries: Vec<_> = fs::read_dir(dir.path().join("oracle-cache"))
        .unwrap()
        .collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn ground_state_accepts_raw_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let out = latfold(
        &["ground-state", "--seq", "QQQQQ", "--lattice", "tetra"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn argument_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Unsupported lattice for a registry instance.
    let out = latfold(
        &["ground-state", "--pdb-id", "4QXX", "--lattice", "tetra"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    // Missing sequence entirely.
    let out = latfold(&["train", "--lattice", "fcc"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // Unknown residue letter.
    let out = latfold(
        &["ground-state", "--seq", "QQBQQ", "--lattice", "tetra"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // 1K43 on FCC needs 46 qubits, far over the enumeration budget.
    let out = latfold(
        &["ground-state", "--pdb-id", "1K43", "--lattice", "fcc"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn train_evaluate_baseline_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let gs = latfold(
        &["ground-state", "--pdb-id", "4QXX", "--lattice", "fcc"],
        dir.path(),
    );
    assert!(gs.status.success(), "{}", stderr(&gs));

    let train = latfold(
        &[
            "train",
            "--pdb-id",
            "4QXX",
            "--lattice",
            "fcc",
            "--restarts",
            "2",
            "--max-iter",
            "150",
            "--seed",
            "11",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(train.status.success(), "{}", stderr(&train));
    let run = dir.path().join("run");
    assert!(run.join("manifest.json").exists());
    assert!(run.join("summary.json").exists());
    assert!(run.join("restart_00/trace.csv").exists());
    assert!(run.join("restart_00/ledger.csv").exists());
    assert!(run.join("restart_01/params.json").exists());

    let eval = latfold(
        &["evaluate", "--run", "run", "--shots", "20000"],
        dir.path(),
    );
    assert!(eval.status.success(), "{}", stderr(&eval));
    assert!(run.join("evaluation.json").exists());
    assert!(run.join("restart_00/metrics.json").exists());
    assert!(run.join("restart_00/hist.csv").exists());
    let metrics = fs::read_to_string(run.join("restart_00/metrics.json")).unwrap();
    assert!(metrics.contains("\"bcre\""));

    // Re-evaluating reproduces the summary byte for byte.
    let before = fs::read(run.join("evaluation.json")).unwrap();
    let again = latfold(
        &["evaluate", "--run", "run", "--shots", "20000"],
        dir.path(),
    );
    assert!(again.status.success());
    assert_eq!(before, fs::read(run.join("evaluation.json")).unwrap());

    let base = latfold(
        &[
            "baseline",
            "--pdb-id",
            "4QXX",
            "--lattice",
            "fcc",
            "--shots",
            "5000",
            "--out",
            "base",
        ],
        dir.path(),
    );
    assert!(base.status.success(), "{}", stderr(&base));
    assert!(dir.path().join("base/baseline_energies.csv").exists());
    assert!(dir.path().join("base/baseline_hist.csv").exists());
    assert!(dir.path().join("base/baseline.json").exists());
}

#[test]
fn evaluate_without_oracle_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let train = latfold(
        &[
            "train",
            "--seq",
            "QQQQQ",
            "--lattice",
            "tetra",
            "--restarts",
            "1",
            "--max-iter",
            "50",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(train.status.success(), "{}", stderr(&train));
    let out = latfold(&["evaluate", "--run", "run"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ground-state"));
}

#[test]
fn config_file_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.txt"),
        "# run setup\n[instance]\npdb_id = 4QXX\nlattice = tetra\nknn = 1\n",
    )
    .unwrap();
    // Config alone: tetra is unsupported for 4QXX.
    let out = latfold(&["ground-state", "--config", "cfg.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // The flag overrides the config value.
    let out = latfold(
        &["ground-state", "--config", "cfg.txt", "--lattice", "fcc"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn train_determinism() {
    let dir = tempfile::tempdir().unwrap();
    for out_dir in ["a", "b"] {
        let out = latfold(
            &[
                "train",
                "--seq",
                "QQQQQ",
                "--lattice",
                "tetra",
                "--restarts",
                "2",
                "--max-iter",
                "100",
                "--seed",
                "3",
                "--out",
                out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for file in ["summary.json", "restart_00/trace.csv", "restart_01/ledger.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}
