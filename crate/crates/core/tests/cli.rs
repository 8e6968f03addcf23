use std::path::Path;
use std::process::{Command, Output};

use auxamg::cli::{read_report_csv, read_report_jsonl, read_residuals_csv, residual_path};
use auxamg::problems::{disk_mesh, gen_poisson_uniform2d, write_coords, write_mesh};
use auxamg::sparse::write_matrix_market;

fn auxamg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auxamg")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn poisson_64_converges() {
    let o = auxamg(&["--gen", "poisson2d", "--n", "64", "--rtol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let row = out.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(fields[1], "3969");
    assert!(fields[4].parse::<usize>().unwrap() <= 25);
    assert_eq!(fields[8], "true");
}

#[test]
fn scalar_system() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.csv");
    let o = auxamg(&["--gen", "poisson2d", "--n", "2", "--report", p(&rep)]);
    assert_eq!(code(&o), 0);
    let rows = read_report_csv(&rep).unwrap();
    assert_eq!(rows[0].n, 1);
    assert!(rows[0].iters <= 1);
}

#[test]
fn nonsymmetric_matrix_is_a_structure_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.mtx");
    std::fs::write(&m, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2\n1 2 1\n2 2 2\n").unwrap();
    let c = dir.path().join("bad.xy");
    std::fs::write(&c, "0 0\n1 1\n").unwrap();
    let o = auxamg(&["--matrix", p(&m), "--coords", p(&c)]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&auxamg(&["--gen", "poisson2d", "--mesh", "x"])), 2);
    assert_eq!(code(&auxamg(&["--gen", "poisson2d", "--n", "1"])), 1);
    assert_eq!(code(&auxamg(&["--gen", "poisson2d", "--n", "64", "--max-iters", "2", "--rtol", "1e-12"])), 3);
    assert_eq!(code(&auxamg(&["--mesh", "/nonexistent/mesh.txt"])), 8);

    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.txt");
    std::fs::write(&m, "NODES 3\n1 0 0\n2 1 0\n3 0 1\nELEMENTS 1\n1 0 1 2\n").unwrap();
    assert_eq!(code(&auxamg(&["--mesh", p(&m)])), 7);
}

#[test]
fn matrix_and_mesh_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let sys = gen_poisson_uniform2d(40).unwrap();
    let m = dir.path().join("a.mtx");
    let c = dir.path().join("a.xy");
    write_matrix_market(&sys.a, &m).unwrap();
    write_coords(&sys.coords, &c).unwrap();
    let o = auxamg(&["--matrix", p(&m), "--coords", p(&c)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let mesh = dir.path().join("disk.txt");
    write_mesh(&disk_mesh(20, 1.0).unwrap(), &mesh).unwrap();
    let rep = dir.path().join("disk.jsonl");
    let o = auxamg(&["--mesh", p(&mesh), "--report", p(&rep), "--format", "jsonl"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &read_report_jsonl(&rep).unwrap()[0];
    assert!(r.converged);
    assert_eq!(r.residual_history.len(), r.iterations + 1);
    assert!(r.hierarchy.inactive[1] > 0);
}

#[test]
fn sweep_report() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("sweep.csv");
    let o = auxamg(&["--gen", "poisson2d", "--n", "64,128,256", "--report", p(&rep), "--threads", "2"]);
    assert_eq!(code(&o), 0);
    let rows = read_report_csv(&rep).unwrap();
    assert_eq!(rows.len(), 3);
    let its: Vec<usize> = rows.iter().map(|r| r.iters).collect();
    let (lo, hi) = (*its.iter().min().unwrap(), *its.iter().max().unwrap());
    assert!(hi <= 2 * lo, "{its:?}");
    for r in &rows {
        assert!(r.converged && r.opcomplexity >= 1.0);
        assert!(r.total_s >= r.setup_s + r.solve_s - 0.01);
    }
    let res = read_residuals_csv(&residual_path(&rep)).unwrap();
    for r in &rows {
        assert_eq!(res.iter().filter(|x| x.n == r.n).count(), r.iters + 1);
    }
}

#[test]
fn options_are_forwarded() {
    let base = auxamg(&["--gen", "poisson2d", "--n", "48"]);
    let heavy = auxamg(&["--gen", "poisson2d", "--n", "48", "--sweeps", "2,2", "--inner", "3"]);
    let iters = |o: &Output| -> usize {
        let s = String::from_utf8_lossy(&o.stdout).to_string();
        s.lines().nth(1).unwrap().split_whitespace().nth(4).unwrap().parse().unwrap()
    };
    assert!(iters(&heavy) <= iters(&base));
    let strict = auxamg(&["--gen", "graded", "--n", "72", "--strict-locality"]);
    assert_eq!(code(&strict), 4);
}
