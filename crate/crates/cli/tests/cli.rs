use std::process::{Command, Output};

fn jacobi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header and numeric rows, skipping metadata.
fn table(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = stdout(out);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn run_ok(args: &[&str]) -> (Vec<String>, Vec<Vec<f64>>) {
    let out = jacobi(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    table(&out)
}

#[test]
fn free_lyapunov_grid() {
    let (header, rows) = run_ok(&[
        "lyapunov", "--model", "free", "--emin", "-3", "--emax", "3", "--ne", "7", "--n", "10000",
    ]);
    assert_eq!(header, ["E", "L"]);
    assert_eq!(rows.len(), 7);
    let closed = 1.5f64.acosh();
    assert!((rows[0][1] - closed).abs() < 1e-4);
    assert!((rows[6][1] - closed).abs() < 1e-4);
    assert!(rows[3][1].abs() < 1e-4);
}

#[test]
fn drr_counts_squares() {
    let (header, rows) = run_ok(&["drr", "--model", "sparse:1", "--n", "100000", "--eps", "0.5"]);
    assert_eq!(header, ["N", "value"]);
    assert_eq!(rows, vec![vec![100000.0, 0.00316]]);
}

#[test]
fn nrho_without_exponent_is_rejected() {
    let out = jacobi(&["lyapunov", "--model", "nrho"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_grid_and_flags_exit_2() {
    assert_eq!(jacobi(&["ids", "--emin", "1", "--emax", "0"]).status.code(), Some(2));
    assert_eq!(jacobi(&["ids", "--ne", "0"]).status.code(), Some(2));
    assert_eq!(jacobi(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(jacobi(&["mfunction", "--eta", "0"]).status.code(), Some(2));
    assert_eq!(jacobi(&["average", "--model", "free"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3_with_partial_flag() {
    let out = jacobi(&["mfunction", "--emin", "0", "--emax", "0", "--ne", "1", "--eta", "1e-9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("# status: partial (0 rows)"));
}

#[test]
fn output_is_deterministic_without_timestamp() {
    let args = [
        "ids",
        "--model",
        "anderson:3,1.5",
        "--n",
        "500",
        "--ne",
        "21",
        "--no-timestamp",
    ];
    let a = jacobi(&args);
    let b = jacobi(&args);
    assert_eq!(a.stdout, b.stdout);
    let with_threads = jacobi(&[&args[..], &["--threads", "1"]].concat());
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&with_threads));
    assert!(!stdout(&a).contains("# timestamp"));
    assert!(stdout(&jacobi(&args[..7])).contains("# timestamp"));
}

#[test]
fn metadata_carries_config_and_version() {
    let text = stdout(&jacobi(&[
        "equidist",
        "--n",
        "10,100",
        "--seed",
        "17",
        "--no-timestamp",
    ]));
    assert!(text.starts_with("# jacobi "));
    assert!(text.contains("# seed: 17"));
    assert!(text.contains("\"command\":\"equidist\""));
    assert!(text.contains("\"n\":[10,100]"));
}

#[test]
fn values_have_17_significant_digits() {
    let text = stdout(&jacobi(&["ids", "--model", "free", "--n", "10", "--ne", "2"]));
    let row = text.lines().last().unwrap();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{cell}");
    }
}

#[test]
fn writes_to_output_file() {
    let dir = std::env::temp_dir().join(format!("jacobi-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ids.csv");
    let out = jacobi(&["ids", "--n", "100", "--ne", "5", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == "E,k"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thouless_routes() {
    let base = [
        "thouless-check",
        "--model",
        "anderson:42,1",
        "--n",
        "500",
        "--eta",
        "0.5",
        "--ne",
        "5",
    ];
    let (header, exact) = run_ok(&[&base[..], &["--route", "exact"]].concat());
    assert_eq!(header, ["E", "lhs", "rhs", "gap"]);
    assert!(exact.iter().all(|r| r[3] < 1e-8));
    let (_, asym) = run_ok(&base);
    assert!(asym.iter().all(|r| r[3] < 5e-2));
    let (_, via_m) = run_ok(&[&base[..], &["--route", "mfunction"]].concat());
    assert!(via_m.iter().all(|r| r[3] < 5e-2));
}

#[test]
fn free_m_function_at_i() {
    let (header, rows) = run_ok(&["mfunction", "--emin", "0", "--emax", "0", "--ne", "1", "--eta", "1"]);
    assert_eq!(header, ["E", "re", "im"]);
    assert!(rows[0][1].abs() < 1e-12);
    assert!((rows[0][2] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-8);
}

#[test]
fn average_against_quadrature() {
    let (header, rows) = run_ok(&[
        "average",
        "--model",
        "nrho:0.5",
        "--profile",
        "identity",
        "--quantity",
        "ids",
        "--n",
        "100000",
        "--emin",
        "0",
        "--emax",
        "1",
        "--ne",
        "2",
    ]);
    assert_eq!(header, ["E", "direct", "averaged", "gap"]);
    assert!(rows.iter().all(|r| r[3] <= 0.02));
}

#[test]
fn measure_distances() {
    let (_, exact) = run_ok(&[
        "measure-dist",
        "--model",
        "periodic:0.3,-0.7,1.1",
        "--target",
        "exact",
        "--k",
        "4",
        "--n",
        "30000",
    ]);
    assert!(exact[0][1] <= 1e-12);
    let (_, sparse) = run_ok(&[
        "measure-dist",
        "--model",
        "sparse:1",
        "--n",
        "1000,100000",
        "--eps",
        "0.5",
        "--k",
        "8",
    ]);
    assert_eq!(sparse.len(), 2);
    assert!(sparse[1][1] <= 0.06);
    assert_eq!(
        jacobi(&["measure-dist", "--model", "sparse:1", "--target", "exact"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn equidistribution_and_reflectionless() {
    let (_, rows) = run_ok(&["equidist", "--rho", "0.5", "--n", "1000,100000"]);
    assert!(rows[1][1] <= 0.01);
    let (_, rows) = run_ok(&[
        "reflectionless",
        "--emin",
        "0",
        "--emax",
        "0",
        "--ne",
        "1",
        "--eta",
        "1e-4",
    ]);
    assert!(rows[0][1] <= 1e-3);
}

#[test]
fn matrix_identities() {
    let (header, rows) = run_ok(&[
        "identities",
        "--model",
        "anderson:5,2",
        "--n",
        "150",
        "--eta",
        "0.3",
        "--ne",
        "9",
    ]);
    assert_eq!(header, ["E", "det", "mismatch", "c_ratio", "entry_margin"]);
    for r in rows {
        assert!(r[1] <= 1e-10 && r[2] <= 1e-10 && r[3] <= 1e-10);
        assert!(r[4] >= -1e-12);
    }
}
