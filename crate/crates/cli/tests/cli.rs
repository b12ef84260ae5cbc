//! End-to-end command tests: flags, output lines and the exit code
//! contract (0 success, 1 invalid input, 2 numerical failure).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cptgen::io::save_cpt;
use cptgen::Cpt;
use nalgebra::DMatrix;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cptgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn write(path: &Path, content: &str) -> PathBuf {
    fs::write(path, content).unwrap();
    path.to_path_buf()
}

/// Hard two-parent observations: (e1, r2) -> d3 five times, plus enough
/// coverage to keep the least-squares system solvable.
const HARD_OBS: &str = "\
E:e1,E:e2,R:r1,R:r2,D:d1,D:d2,D:d3
1,0,0,1,0,0,1
1,0,1,0,1,0,0
0,1,0,1,0,1,0
0,1,1,0,0,0,1
1,0,0,1,0,0,1
";

const SOFT_OBS: &str = "\
E:e1,E:e2,R:r1,R:r2,D:d1,D:d2,D:d3
0.7,0.3,0.2,0.8,0.5,0.3,0.2
0.4,0.6,0.9,0.1,0.1,0.6,0.3
0.5,0.5,0.5,0.5,0.25,0.5,0.25
0.9,0.1,0.3,0.7,0.6,0.2,0.2
";

#[test]
fn generate_mle_rejects_soft_rows_without_rounding() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), SOFT_OBS);
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "mle",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 1, "{}", stderr(&result));
    assert!(
        stderr(&result).contains("soft evidence"),
        "{}",
        stderr(&result)
    );
    assert!(!out.exists());
}

#[test]
fn generate_mle_with_rounding_counts_soft_rows() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), SOFT_OBS);
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "mle",
        "--rounding",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    // Unseen combined states are flagged as uniform placeholders.
    assert!(stdout(&result).contains("fix,"), "{}", stdout(&result));
    assert!(out.exists());
}

#[test]
fn generate_em_with_seed_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), SOFT_OBS);
    let out_a = dir.path().join("a.cpt");
    let out_b = dir.path().join("b.cpt");
    for out in [&out_a, &out_b] {
        let result = run(&[
            "generate",
            "--method",
            "em",
            "--seed",
            "7",
            "--restarts",
            "3",
            "--train",
            train.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
}

#[test]
fn generate_em_iteration_cap_exits_two_but_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), SOFT_OBS);
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "em",
        "--max-iter",
        "1",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2, "{}", stderr(&result));
    assert!(stderr(&result).contains("warning"), "{}", stderr(&result));
    assert!(out.exists());
}

#[test]
fn generate_regress_reports_singular_systems_as_numerical_failure() {
    // Two identical soft rows cannot span the four combined states.
    let dir = tempfile::tempdir().unwrap();
    let train = write(
        &dir.path().join("train.csv"),
        "E:e1,E:e2,R:r1,R:r2,D:d1,D:d2,D:d3\n0.5,0.5,0.5,0.5,0.3,0.3,0.4\n0.5,0.5,0.5,0.5,0.3,0.3,0.4\n",
    );
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "regress-limit",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2, "{}", stderr(&result));
    assert!(stderr(&result).contains("singular"), "{}", stderr(&result));
}

#[test]
fn generate_logit_iteration_cap_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), SOFT_OBS);
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "logit",
        "--max-iter",
        "1",
        "--tol",
        "1e-12",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2, "{}", stderr(&result));
    assert!(
        stderr(&result).contains("convergence"),
        "{}",
        stderr(&result)
    );
    assert!(!out.exists());
}

#[test]
fn generate_distinct_dedups_before_fitting() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), HARD_OBS);
    let out = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "mle",
        "--distinct",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    assert!(
        stdout(&result).contains("observations,4"),
        "{}",
        stdout(&result)
    );
}

#[test]
fn evaluate_scores_self_generated_data_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), HARD_OBS);
    let table = dir.path().join("table.cpt");
    let result = run(&[
        "generate",
        "--method",
        "mle",
        "--train",
        train.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));

    // Test rows the table reproduces exactly.
    let test = write(
        &dir.path().join("test.csv"),
        "E:e1,E:e2,R:r1,R:r2,D:d1,D:d2,D:d3\n1,0,0,1,0,0,1\n0,1,0,1,0,1,0\n",
    );
    let report = dir.path().join("report.txt");
    let result = run(&[
        "evaluate",
        "--cpt",
        table.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--plot-data",
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    let text = stdout(&result);
    assert!(text.contains("diagnostic_goodness,100.00%"), "{text}");
    assert!(text.contains("total_average_shift_error,0.00%"), "{text}");
    assert!(report.exists());
    assert!(dir.path().join("report_effect_errors.csv").exists());
    assert!(dir.path().join("report_effect_pairs.csv").exists());
}

#[test]
fn evaluate_reports_one_third_goodness_on_the_worked_example_pairs() {
    // An identity table echoes soft causes, so the predictions are the
    // cause rows: agree, tie, disagree against the observed effects.
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("identity.cpt");
    save_cpt(&Cpt::identity(["d1", "d2"]).unwrap(), &table).unwrap();
    let test = write(
        &dir.path().join("test.csv"),
        "X:d1,X:d2,Z:d1,Z:d2\n0.2,0.8,0.3,0.7\n0.5,0.5,0.4,0.6\n0.7,0.3,0.1,0.9\n",
    );
    let result = run(&[
        "evaluate",
        "--cpt",
        table.to_str().unwrap(),
        "--test",
        test.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    assert!(
        stdout(&result).contains("diagnostic_goodness,33.33%"),
        "{}",
        stdout(&result)
    );
}

#[test]
fn evaluate_missing_test_file_exits_one_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.cpt");
    save_cpt(&Cpt::identity(["a", "b"]).unwrap(), &table).unwrap();
    let result = run(&[
        "evaluate",
        "--cpt",
        table.to_str().unwrap(),
        "--test",
        dir.path().join("nope.csv").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 1);
    assert!(stderr(&result).contains("nope.csv"), "{}", stderr(&result));
}

#[test]
fn infer_identity_table_echoes_soft_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("identity.cpt");
    let cpt = Cpt::identity(["a", "b", "c"])
        .unwrap()
        .with_arity_profile(vec![3])
        .unwrap();
    save_cpt(&cpt, &table).unwrap();
    let result = run(&[
        "infer",
        "--cpt",
        table.to_str().unwrap(),
        "--evidence",
        "X=0.2,0.3,0.5",
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    assert_eq!(stdout(&result), "20.00%,30.00%,50.00%\n");
}

fn two_parent_table(dir: &Path) -> PathBuf {
    let entries = DMatrix::from_row_slice(2, 4, &[0.9, 0.2, 0.4, 0.7, 0.1, 0.8, 0.6, 0.3]);
    let cpt = Cpt::new(["z1", "z2"], ["a1b1", "a1b2", "a2b1", "a2b2"], entries)
        .unwrap()
        .with_arity_profile(vec![2, 2])
        .unwrap();
    let path = dir.join("two.cpt");
    save_cpt(&cpt, &path).unwrap();
    path
}

#[test]
fn infer_requires_evidence_for_every_parent() {
    let dir = tempfile::tempdir().unwrap();
    let table = two_parent_table(dir.path());
    let result = run(&[
        "infer",
        "--cpt",
        table.to_str().unwrap(),
        "--evidence",
        "A=a1",
    ]);
    assert_eq!(exit_code(&result), 1);
    assert!(
        stderr(&result).contains("every parent"),
        "{}",
        stderr(&result)
    );
}

#[test]
fn infer_rejects_unknown_state_labels() {
    let dir = tempfile::tempdir().unwrap();
    let table = two_parent_table(dir.path());
    let result = run(&[
        "infer",
        "--cpt",
        table.to_str().unwrap(),
        "--evidence",
        "A=a9",
        "--evidence",
        "B=b1",
    ]);
    assert_eq!(exit_code(&result), 1);
    assert!(stderr(&result).contains("a9b1"), "{}", stderr(&result));
}

#[test]
fn infer_mixes_hard_and_soft_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let table = two_parent_table(dir.path());
    // Hard a2, soft (0.5, 0.5) over b: average of columns a2b1 and a2b2.
    let result = run(&[
        "infer",
        "--cpt",
        table.to_str().unwrap(),
        "--evidence",
        "A=a2",
        "--evidence",
        "B=0.5,0.5",
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    assert_eq!(stdout(&result), "55.00%,45.00%\n");
}

#[test]
fn compare_prints_shift_kl_and_euclidean() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a.cpt");
    let b_path = dir.path().join("b.cpt");
    let a = Cpt::new(
        ["z1", "z2", "z3", "z4"],
        ["x1", "x2", "x3"],
        DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        ),
    )
    .unwrap();
    let b = Cpt::new(
        ["z1", "z2", "z3", "z4"],
        ["x1", "x2", "x3"],
        DMatrix::from_row_slice(
            4,
            3,
            &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ),
    )
    .unwrap();
    save_cpt(&a, &a_path).unwrap();
    save_cpt(&b, &b_path).unwrap();
    let result = run(&[
        "compare",
        "--cpt",
        a_path.to_str().unwrap(),
        "--cpt-b",
        b_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    let text = stdout(&result);
    assert!(text.contains("shift,100.00%"), "{text}");
    assert!(text.contains("kl,inf"), "{text}");
    assert!(text.contains("euclidean,2.000000"), "{text}");

    // A table against itself: everything zero.
    let result = run(&[
        "compare",
        "--cpt",
        a_path.to_str().unwrap(),
        "--cpt-b",
        a_path.to_str().unwrap(),
    ]);
    let text = stdout(&result);
    assert!(text.contains("shift,0.00%"), "{text}");
    assert!(text.contains("kl,0.000000"), "{text}");
}

#[test]
fn compare_rejects_shape_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a.cpt");
    let b_path = dir.path().join("b.cpt");
    save_cpt(&Cpt::identity(["a", "b"]).unwrap(), &a_path).unwrap();
    save_cpt(&Cpt::identity(["a", "b", "c"]).unwrap(), &b_path).unwrap();
    let result = run(&[
        "compare",
        "--cpt",
        a_path.to_str().unwrap(),
        "--cpt-b",
        b_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 1);
}

#[test]
fn dedup_reports_counts_and_writes_the_distinct_set() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(&dir.path().join("train.csv"), HARD_OBS);
    let out = dir.path().join("distinct.csv");
    let result = run(&[
        "dedup",
        "--train",
        train.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", stderr(&result));
    let text = stdout(&result);
    assert!(text.contains("observations,5"), "{text}");
    assert!(text.contains("distinct,4"), "{text}");
    let written = fs::read_to_string(&out).unwrap();
    assert_eq!(written.lines().count(), 5); // header + 4 rows
}
