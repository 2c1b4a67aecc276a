use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biocirc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    format!("fourier:{}", p.display())
}

fn row<'a>(v: &'a Value, quantity: &str, n: u64) -> &'a Value {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == quantity && r["n"] == n)
        .unwrap_or_else(|| panic!("no row {quantity} n={n}"))
}

fn close(v: &Value, re: f64, im: f64, tol: f64) -> bool {
    let (a, b) = (v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
    (a - re).abs() <= tol * re.abs().max(1.0) && (b - im).abs() <= tol
}

#[test]
fn det_of_exp() {
    let out = run(&["det", "--weight", "exp", "--kind", "2jk", "--offset", "0", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(close(&row(&v, "D", 2)["value"], 1.0, 0.0, 1e-12));
    assert!(close(&v["value"], 1.0 / 3.0, 0.0, 1e-12));
    assert_eq!(v["config"]["weight"], "exp");
    assert_eq!(v["config"]["n"], 3);
}

#[test]
fn det_j2k_matches_duality() {
    let out = run(&["det", "--kind", "j2k", "--offset", "2", "--n", "3"]);
    let v = json(&out);
    // E_3^(2) = D_3^(0)
    assert!(close(&v["value"], 1.0 / 3.0, 0.0, 1e-12));
}

#[test]
fn recur_delta() {
    let out = run(&["recur", "--weight", "exp", "--offset", "1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(close(&row(&v, "delta", 2)["value"], -5.0, 0.0, 1e-12));
    assert!(close(&row(&v, "eta", 2)["value"], 1.0, 0.0, 1e-12));
}

#[test]
fn recur_reports_missing_coefficients() {
    let v = json(&run(&["recur", "--offset", "0", "--n", "2"]));
    let d = row(&v, "delta", 1);
    assert!(d["value"].is_null());
    assert!(d["note"].as_str().unwrap().contains("vanishes"));
}

#[test]
fn tau_at_zero() {
    let out = run(&["tau", "--u", "0", "--ell", "0", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(close(&json(&out)["value"], 1.0, 0.0, 1e-12));
}

#[test]
fn poly_residuals_are_small() {
    let v = json(&run(&["poly", "--offset", "2", "--n", "4", "--z", "0.5+0.1i,-1.5i"]));
    for r in v["residuals"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap() < 1e-10, "{r}");
    }
    let h = row(&v, "h", 2)["value"].clone();
    assert!(close(&h, 8.0 / 720.0, 0.0, 1e-12));
}

#[test]
fn kernel_methods_agree() {
    let v = json(&run(&["kernel", "--offset", "2", "--n", "3"]));
    for r in v["residuals"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap() < 1e-9, "{r}");
    }
}

#[test]
fn verify_closed_forms() {
    let out = run(&["verify", "--weight", "exp", "--suite", "closed-forms", "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["verify"]["suites"][0]["status"], "pass");
}

#[test]
fn verify_dodgson_on_random_weight() {
    let out = run(&["verify", "--weight", &data("rand.json"), "--suite", "dodgson", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_is_reproducible() {
    let args = ["verify", "--weight", &data("rand.json"), "--suite", "dodgson", "--seed", "3", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("suite,check,n,offset,z_index,residual,tol,bound,outcome,note\n"));
}

#[test]
fn constant_weight_is_singular() {
    let out = run(&["verify", "--weight", &data("const.json"), "--suite", "biorth"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["verify"]["suites"][0]["status"], "singular");
}

#[test]
fn singular_poly_exits_2() {
    let out = run(&["poly", "--weight", &data("const.json"), "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vanishes"));
}

#[test]
fn closed_forms_need_exp() {
    let out = run(&["verify", "--weight", &data("rand.json"), "--suite", "closed-forms"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn configuration_errors_exit_3() {
    for args in [
        vec!["det", "--weight", "gauss"],
        vec!["det", "--kind", "jk"],
        vec!["verify", "--suite", "nope"],
        vec!["kernel", "--method", "fast"],
        vec!["poly", "--z", "1+"],
        vec!["verify", "--tol", "recur=-1"],
        vec!["det", "--weight", "fourier:/nonexistent.json"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn text_and_csv_formats() {
    let text = String::from_utf8(run(&["det", "--n", "2", "--format", "text"]).stdout).unwrap();
    assert!(text.starts_with("det weight=exp kind=2jk offset=0 n=2"));
    assert!(text.contains("1.0000000000000000e0"));
    let csv = String::from_utf8(run(&["det", "--n", "2", "--format", "csv"]).stdout).unwrap();
    assert!(csv.starts_with("n,offset,quantity,index,re,im,note\n"));
    assert!(csv.lines().any(|l| l.starts_with("2,0,D,,1.0000000000000000e0,")));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["verify", "--suite", "oracle", "--n-max", "2", "--format", "csv"];
    let one = Command::new(env!("CARGO_BIN_EXE_biocirc")).args(args).env("BIOCIRC_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_biocirc")).args(args).env("BIOCIRC_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_biocirc")).args(["det"]).env("BIOCIRC_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
