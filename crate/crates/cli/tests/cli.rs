use std::io::Write;
use std::process::{Command, Output, Stdio};

use mpwb_cli::{run, Command as Job, Format, Input, JobSpec, Options};
use serde_json::Value;

fn mpwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpwb"))
        .args(args)
        .env_remove("MPWB_TOLERANCE")
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn re_im(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

const MINUS_I: &str = r#"{"g": [[-1, 0], [0, -1]], "z": [0, 1], "n": 1}"#;

#[test]
fn index_example() {
    let v = json_of(&mpwb(&["index", MINUS_I]));
    assert_eq!(v["schema"], "mpwb/1");
    assert_eq!(v["m"], 1);
    assert_eq!(v["m_2d"], 1);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    let v = json_of(&mpwb(&["index", r#"{"g": [[-1, 0], [0, -1]], "z": [0, -1]}"#]));
    assert_eq!(v["m"], 3);
}

#[test]
fn generalized_index_with_p() {
    // det M = -1 on -I, so (z^2 det M)^3 = 1 for z = e^{i pi / 6}.
    let z = std::f64::consts::PI / 6.0;
    let input = format!(r#"{{"g": [[-1, 0], [0, -1]], "z": [{}, {}]}}"#, z.cos(), z.sin());
    let v = json_of(&mpwb(&["--p", "3", "index", &input]));
    assert_eq!(v["modulus"], 12);
    assert!(v["element_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn malformed_row_is_a_schema_error() {
    let out = mpwb(&["index", r#"{"g": [[-1, 0], [0]], "z": [0, 1]}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.g[1]"));
    let out = mpwb(&["index", "{not json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = mpwb(&["index", "/nonexistent/job.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn domain_errors_exit_two() {
    let out = mpwb(&["index", r#"{"g": [[1, 0], [0, 1]], "z": 1}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    let out = mpwb(&["cocycle", r#"{"polarizations": [{"siegel": [[[0, 1]]]}, {"siegel": [[[0, -1]]]}, "standard"]}"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_from_environment() {
    let run_with = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_mpwb"))
            .args(["index", r#"{"g": [[0.6, 0.8], [-0.8, 0.6]], "z": [0.8944271909999159, 0.4472135954999579]}"#])
            .env("MPWB_TOLERANCE", tol)
            .output()
            .unwrap()
    };
    assert_eq!(run_with("1e-6").status.code(), Some(0));
    assert_eq!(run_with("1e-300").status.code(), Some(2));
    assert_eq!(run_with("abc").status.code(), Some(3));
}

#[test]
fn array_input_keeps_order_and_stdin_works() {
    let input = r#"[{"g": [[-1, 0], [0, -1]], "z": [0, -1]}, {"g": [[-1, 0], [0, -1]], "z": [0, 1]}]"#;
    let mut child = Command::new(env!("CARGO_BIN_EXE_mpwb"))
        .args(["index", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ms: Vec<_> = v.as_array().unwrap().iter().map(|x| x["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, vec![3, 1]);
    let out = mpwb(&["index", r#"[{"g": [[-1, 0], [0, -1]], "z": [0, 1]}, {"g": [[-1, 0], [0, -1]], "z": 2}]"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$[1]"));
}

#[test]
fn file_input() {
    let path = std::env::temp_dir().join(format!("mpwb-cli-test-{}.json", std::process::id()));
    std::fs::write(&path, MINUS_I).unwrap();
    let v = json_of(&mpwb(&["index", path.to_str().unwrap()]));
    std::fs::remove_file(&path).unwrap();
    assert_eq!(v["m"], 1);
}

#[test]
fn output_is_deterministic() {
    let args = ["cocycle", r#"{"polarizations": [{"siegel": [[[0.3, 1]]]}, {"siegel": [[[-1, 0.5]]]}, {"siegel": [[[2, 3]]]}, "standard"]}"#];
    let a = mpwb(&args);
    let b = mpwb(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert!(v["square_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["branch_refinement"].as_f64().unwrap() < 1e-12);
    assert!(v["cocycle_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn compose_double_cover_witness() {
    let input = format!(r#"{{"elements": [{MINUS_I}, {MINUS_I}]}}"#);
    let v = json_of(&mpwb(&["compose", &input]));
    let (re, im) = re_im(&v["z"]);
    assert!((re + 1.0).abs() < 1e-14 && im.abs() < 1e-14);
    assert_eq!(v["g"], serde_json::json!([[1.0, 0.0], [0.0, 1.0]]));
    assert!(v["m"].is_null());
}

#[test]
fn compose_morphisms_and_lift() {
    let v = json_of(&mpwb(&["lift", r#"{"source": {"siegel": [[[0, 1]]]}, "target": {"siegel": [[[0, 2]]]}}"#]));
    let (re, im) = re_im(&v["distinguished"]);
    assert!((re - 2.0 / 3f64.sqrt()).abs() < 1e-14 && im.abs() < 1e-14);
    let v = json_of(&mpwb(&["lift", r#"{"g": [[-1, 0], [0, -1]]}"#]));
    assert_eq!(v["m"], serde_json::json!([1, 3]));
    let input = r#"{"morphisms": [
        {"source": {"siegel": [[[0, 1]]]}, "target": {"siegel": [[[0, 2]]]}},
        {"source": {"siegel": [[[0, 2]]]}, "target": {"siegel": [[[0, 1]]]}}]}"#;
    let v = json_of(&mpwb(&["--path-steps", "32", "compose", input]));
    let (re, im) = re_im(&v["psi"]);
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12, "{re} {im}");
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn bargmann_identity() {
    let v = json_of(&mpwb(&["-N", "4", "bargmann-op", r#"{"source": {"siegel": [[[0.2, 1.1]]]}, "target": {"siegel": [[[0.2, 1.1]]]}}"#]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for (i, row) in entries.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            let (re, im) = re_im(x);
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((re - expected).abs() < 1e-10 && im.abs() < 1e-10);
        }
    }
}

#[test]
fn kernel_trace_of_minus_identity() {
    let v = json_of(&mpwb(&["-N", "40", "kernel-trace", MINUS_I]));
    let (re, im) = re_im(&v["trace"]);
    assert!(re.abs() < 1e-12 && (im - 0.5).abs() < 1e-12);
    assert_eq!(v["m"], 1);
    assert!(v["formula_residual"].as_f64().unwrap() < 1e-12);
    assert!(v["abel"]["residual"].as_f64().unwrap() < 1e-3);
}

fn sphere_data(theta: f64) -> String {
    let (c, s) = (theta.cos(), theta.sin());
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    format!(
        r#"[{{"g": [[{c}, {ms}], [{s}, {c}]], "z": [{ch}, {msh}], "u": [{ch}, {sh}], "h": [[[{c}, {s}]]], "mp": true}},
            {{"g": [[{c}, {s}], [{ms}, {c}]], "z": [{ch}, {sh}], "u": [{ch}, {msh}], "h": [[[{c}, {ms}]]], "mp": true}}]"#,
        ms = -s,
        msh = -sh
    )
}

#[test]
fn trace_and_lefschetz_sweeps() {
    let theta: f64 = 1.0;
    let input = format!(r#"{{"k_max": 5, "data": {}}}"#, sphere_data(theta));
    let v = json_of(&mpwb(&["trace", &input]));
    assert!(v["formula_difference"].as_f64().unwrap() < 1e-12);
    for row in v["halfform"].as_array().unwrap() {
        let k = row["k"].as_f64().unwrap();
        let exact = (k * theta / 2.0).sin() / (theta / 2.0).sin();
        let (re, im) = re_im(&row["value"]);
        assert!((re - exact).abs() < 1e-12 && im.abs() < 1e-12, "k = {k}: {re} {im} vs {exact}");
    }
    let out = mpwb(&["--format", "csv", "lefschetz", &input]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,lefschetz_re,lefschetz_im");
    assert_eq!(lines.len(), 6);
    let single = format!(r#"{{"k": 2, "data": {}}}"#, sphere_data(theta));
    let v = json_of(&mpwb(&["lefschetz", &single]));
    let (re, _) = re_im(&v["lefschetz"]);
    assert!((re - theta.sin() / (theta / 2.0).sin()).abs() < 1e-12);
    assert_eq!(mpwb(&["--format", "csv", "trace", &single]).status.code(), Some(3));
}

#[test]
fn sphere_model_table() {
    let out = mpwb(&["sphere-model", "--theta", "1.5707963", "--k-max", "40", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,exact,formula_re,formula_im,lefschetz_re,lefschetz_im,diff");
    assert_eq!(lines.len(), 41);
    for line in &lines[1..] {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-12);
    }
    let v = json_of(&mpwb(&["sphere-model", "--theta", "1.5707963"]));
    assert!(v["fitted_c"].as_f64().unwrap() < 1e-9);
    assert_eq!(mpwb(&["sphere-model", "--theta", "0"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let v = json_of(&mpwb(&["selftest", "--cases", "10"]));
    assert_eq!(v["passed"], true);
    assert!(!v["checks"].as_array().unwrap().is_empty());
}

#[test]
fn library_entry_point() {
    let job = JobSpec {
        command: Job::Index,
        input: Input::parse(MINUS_I),
        options: Options { tolerance: 0.0, ..Options::default() },
    };
    assert_eq!(run(&job).status, 3);
    let job = JobSpec { options: Options::default(), ..job };
    let out = run(&job);
    assert_eq!(out.status, 0);
    assert!(out.stdout.contains("\"schema\": \"mpwb/1\""));
    let job = JobSpec { options: Options { format: Format::Csv, ..Options::default() }, ..job };
    assert_eq!(run(&job).status, 3);
    assert_eq!(Input::parse("-"), Input::Stdin);
    assert!(matches!(Input::parse("jobs.json"), Input::Path(_)));
}
