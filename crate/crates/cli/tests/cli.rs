use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dgmres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgmres"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn converged_solve_exits_zero_and_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let o = dgmres(&[
        "solve",
        "--example",
        "ex4",
        "--index",
        "1",
        "--method",
        "dgmres",
        "-m",
        "2",
        "--eps",
        "1e-8",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("solver,cycle,seminorm,relative_seminorm,wall_time_s")
    );
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    let cycles = stdout(&o)
        .lines()
        .find(|l| l.starts_with("DGMRES(2)"))
        .and_then(|l| l.split_whitespace().nth(1).map(|c| c.parse::<usize>().unwrap()))
        .unwrap();
    assert_eq!(rows.len(), cycles);
    let last: f64 = rows.last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(last <= 1e-8);
    assert!(rows.iter().all(|r| r.starts_with("dgmres_m2,")));
}

#[test]
fn cycle_cap_exits_two() {
    let o = dgmres(&[
        "solve",
        "--example",
        "ex4",
        "--index",
        "1",
        "--method",
        "adgmres",
        "-m",
        "2",
        "-k",
        "1",
        "--max-cycles",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("ADGMRES(2,1)"));
}

#[test]
fn restart_not_above_index_is_an_error() {
    let o = dgmres(&[
        "solve",
        "--example",
        "ex1",
        "--index",
        "2",
        "--method",
        "dgmres",
        "-m",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("must exceed the index"), "{err}");
    assert_eq!(err.matches("must exceed").count(), 1);
}

#[test]
fn missing_matrix_file_is_an_error() {
    let o = dgmres(&[
        "solve",
        "--matrix",
        "/nonexistent/a.mtx",
        "--ones",
        "--index",
        "1",
        "--method",
        "dgmres",
        "-m",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        dgmres(&["solve", "--example", "ex4", "--method", "dgmres", "-m", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        dgmres(&["compare", "--example", "ex9", "--index", "1", "--run", "dgmres,2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        dgmres(&["compare", "--example", "ex4", "--index", "1", "--run", "dgmres,2,1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(dgmres(&["--help"]).status.code(), Some(0));
}

#[test]
fn matrix_market_input_with_rhs_and_auto_index() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    let rhs = dir.path().join("b.txt");
    fs::write(
        &mtx,
        "%%MatrixMarket matrix coordinate real general\n\
         % example 4 as a sparse file\n\
         4 4 9\n\
         1 1 1\n1 2 1\n1 3 1\n1 4 2\n2 2 1\n2 3 3\n2 4 4\n3 3 1\n3 4 1\n",
    )
    .unwrap();
    fs::write(&rhs, "# right-hand side\n-4\n7\n1\n0\n").unwrap();
    let o = dgmres(&[
        "solve",
        "--matrix",
        path_str(&mtx),
        "--rhs",
        path_str(&rhs),
        "--index",
        "auto",
        "--method",
        "dgmres",
        "-m",
        "2",
        "--eps",
        "1e-10",
        "--oracle-check",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("index resolved automatically: a = 1"), "{out}");
    assert!(
        out.contains("oracle A^D b (real parts): [-9.000000e0, 4.000000e0, 1.000000e0, 0.000000e0]"),
        "{out}"
    );
}

#[test]
fn matrix_file_without_rhs_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("a.mtx");
    fs::write(&mtx, "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n0\n").unwrap();
    let o = dgmres(&[
        "solve",
        "--matrix",
        path_str(&mtx),
        "--index",
        "1",
        "--method",
        "dgmres",
        "-m",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("right-hand side"));
}

#[test]
fn compare_checkpoints_table_and_fairness_warning() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("p.dat");
    let o = dgmres(&[
        "compare",
        "--example",
        "ex4",
        "--index",
        "1",
        "--run",
        "adgmres,2,1",
        "--run",
        "dgmres,3",
        "--run",
        "dgmres,2",
        "--checkpoints",
        "5,10",
        "--plot-data",
        path_str(&plot),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    let header = out.lines().find(|l| l.starts_with("cycles")).unwrap();
    assert_eq!(header.split_whitespace().collect::<Vec<_>>(), ["cycles", "5", "10"]);
    assert!(out.contains("warning: DGMRES(2) and ADGMRES(2,1) use different subspace sizes"));
    assert!(!out.contains("warning: DGMRES(3)"));

    let plot = fs::read_to_string(&plot).unwrap();
    for label in ["# adgmres_m2_k1", "# dgmres_m3", "# dgmres_m2"] {
        assert!(plot.contains(label), "{plot}");
    }
    let first_block: Vec<&str> = plot.lines().skip(1).take_while(|l| !l.trim().is_empty()).collect();
    assert_eq!(first_block.len(), 11);
    assert!(first_block[0].starts_with("0 1.0"));
}

#[test]
fn checkpoints_conflict_with_tolerance() {
    let o = dgmres(&[
        "compare",
        "--example",
        "ex4",
        "--index",
        "1",
        "--run",
        "dgmres,2",
        "--checkpoints",
        "5",
        "--eps",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn similarity_seed_changes_problem_but_not_index() {
    let o = dgmres(&[
        "solve",
        "--example",
        "ex4",
        "--index",
        "auto",
        "--similarity-seed",
        "7",
        "--method",
        "dgmres",
        "-m",
        "2",
        "--eps",
        "1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("a = 1"));
}
