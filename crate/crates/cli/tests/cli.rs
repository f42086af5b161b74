use std::path::Path;
use std::process::{Command, Output};

fn ea_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ea-lab")).args(args).env_remove("EA_LAB_SEED").output().unwrap()
}

fn ok(args: &[&str]) -> toml::Table {
    let out = ea_lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().parse().unwrap()
}

fn code(args: &[&str]) -> i32 {
    ea_lab(args).status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_reports_jacobi_and_unimodularity() {
    let t = ok(&["check", "--lambda", "-0.5"]);
    assert_eq!(t["unimodular"].as_bool(), Some(false));
    assert_eq!(t["jacobi_residual"].as_float(), Some(0.0));
    let dir = tempfile::tempdir().unwrap();
    // heisenberg: [e2,e3] = e1
    let heis = write(
        dir.path(),
        "heis.toml",
        "[algebra]\ncustom = [[[0,0,0],[0,0,1],[0,-1,0]],[[0,0,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]]\n",
    );
    let t = ok(&["check", "--problem", &heis]);
    assert_eq!(t["unimodular"].as_bool(), Some(true));
    assert_eq!(t["family"].as_str(), Some("custom"));
    // [e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e3 breaks Jacobi
    let bad = write(
        dir.path(),
        "bad.toml",
        "[algebra]\ncustom = [[[0,0,0],[0,0,1],[0,-1,0]],[[0,0,0],[0,0,0],[0,0,0]],[[0,1,-1],[-1,0,0],[1,0,0]]]\n",
    );
    assert_eq!(code(&["check", "--problem", &bad]), 1);
}

#[test]
fn field_of_the_first_normal_form() {
    let t = ok(&["field", "--lambda", "0.5", "--nf", "Q1"]);
    let polys: Vec<&str> = t["polynomials"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(polys, ["-y^2 + 0.5*z^2", "x*y", "0.5*x*z"]);
}

#[test]
fn metric_files_and_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let metric = write(dir.path(), "m.toml", "matrix = [[1, 0, 0], [0, 1, 1], [0, 1, -0.5]]\n");
    let t = ok(&["canonicalize", "--lambda", "0.5", "--metric", &metric]);
    assert_eq!(t["tag"].as_str(), Some("Q4"));
    assert!((t["param"].as_float().unwrap() + 0.5).abs() < 1e-9);

    let problem = write(
        dir.path(),
        "p.toml",
        "[algebra]\nfamily = \"h\"\nlambda = 0.5\n[metric]\nnormal_form = \"Q3\"\n",
    );
    let t = ok(&["idempotents", "--problem", &problem]);
    assert_eq!(t["count"].as_integer(), Some(4));
    // flags override the file
    let t = ok(&["idempotents", "--problem", &problem, "--nf", "Q9"]);
    assert_eq!(t["count"].as_integer(), Some(0));
}

#[test]
fn ambiguous_canonicalization_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let metric = write(dir.path(), "m.toml", "matrix = [[1, 0, 0], [0, 1, 1], [0, 1, 5.2e-10]]\n");
    assert_eq!(code(&["canonicalize", "--lambda", "0.5", "--metric", &metric]), 2);
}

#[test]
fn usage_and_input_errors_exit_with_one() {
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["field", "--lambda", "0.5"]), 1);
    assert_eq!(code(&["canonicalize", "--lambda", "0.5", "--nf", "Q0"]), 1);
    assert_eq!(code(&["census", "--lambda", "1"]), 1);
    assert_eq!(code(&["table1", "--lambda", "1e3"]), 1);
    assert_eq!(code(&["field", "--lambda", "0.5", "--mu", "1", "--nf", "Q1"]), 1);
    assert_eq!(code(&["field", "--problem", "/nonexistent/problem.toml"]), 1);
}

#[test]
fn integrate_writes_csv_and_a_footer() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let t = ok(&["integrate", "--lambda", "0", "--nf", "Q2", "--ic", "1,1,0", "--horizon", "5", "--out", csv.to_str().unwrap()]);
    assert_eq!(t["outcome"].as_str(), Some("BlowUp"));
    assert!((t["blowup_time"].as_float().unwrap() - 1.0).abs() < 1e-3);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,x,y,z,energy,step_size\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn classify_prints_or_writes_a_report() {
    let t = ok(&["classify", "--lambda", "0", "--nf", "Q10"]);
    assert_eq!(t["schema"].as_str(), Some("ea-lab-report/1"));
    assert_eq!(t["verdict"]["status"].as_str(), Some("Incomplete"));

    let dir = tempfile::tempdir().unwrap();
    let out = ea_lab(&["classify", "--lambda", "0.5", "--nf", "Q8", "--horizon", "20", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let report: toml::Table = std::fs::read_to_string(dir.path().join("report.toml")).unwrap().parse().unwrap();
    assert_eq!(report["verdict"]["status"].as_str(), Some("Complete"));
    for e in report["evidence"].as_array().unwrap() {
        let csv = e["csv"].as_str().unwrap();
        assert!(dir.path().join(csv).exists());
        assert_eq!(e["t_end"].as_float(), Some(20.0));
    }
}

#[test]
fn certify_with_and_without_a_metric() {
    let t = ok(&["certify", "--lambda", "0.5", "--nf", "Q9"]);
    assert_eq!(t["status"].as_str(), Some("Incomplete"));
    assert!(t["certificates"].as_array().unwrap().iter().any(|c| c["kind"].as_str() == Some("domination")));
    let t = ok(&["certify", "--mu", "2"]);
    assert_eq!(t["kind"].as_str(), Some("domination"));
    assert_eq!(t["proves_incompleteness"].as_bool(), Some(true));
}

#[test]
fn planes_and_integrals() {
    let t = ok(&["planes", "--lambda", "0.5", "--nf", "Q10"]);
    assert_eq!(t["planes"].as_array().unwrap().len(), 3);
    let t = ok(&["integrals", "--lambda", "0", "--nf", "Q1"]);
    assert!(t.contains_key("positive_definite"));
    assert_eq!(t["linear"].as_array().unwrap().len(), 1);
}

#[test]
fn table1_is_byte_identical_across_runs() {
    let a = ea_lab(&["table1", "--lambda", "1/3"]);
    let b = ea_lab(&["table1", "--lambda", "1/3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t: toml::Table = String::from_utf8(a.stdout).unwrap().parse().unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn census_rows() {
    let t = ok(&["census", "--lambda", "-0.5"]);
    let rows = t["rows"].as_array().unwrap();
    let q1 = rows.iter().find(|r| r["tag"].as_str() == Some("Q1")).unwrap();
    assert_eq!(q1["found"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_is_reproducible_from_the_environment_seed() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_ea-lab"))
            .args(["sweep", "--count", "12", "--lambdas", "-0.5,0.25,0.5"])
            .env("EA_LAB_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b, c) = (run("7"), run("7"), run("8"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 13);
    assert_eq!(run("seven").status.code(), Some(1));
}
