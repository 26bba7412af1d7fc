use std::path::Path;
use std::process::Command;

use ecm_core::cli;
use serde_json::Value;

const LOAD_KERNEL: &str = include_str!("../assets/kernels/load.kernel");

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        std::iter::once("ecm").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn predict_json_fields() {
    let v = json(&["predict", "-k", "ddot", "--format", "json"]);
    let r = &v[0];
    assert_eq!(r["kernel"], "ddot");
    assert_eq!(r["machine"], "haswell-ep-2695v3");
    assert_eq!(r["bandwidth_gbs"], 32.4);
    assert_eq!(r["bandwidth_source"], "kernel");
    assert_eq!(r["input"]["t_ol_cy"], 1.0);
    assert_eq!(r["input"]["t_nol_cy"], 2.0);
    assert_eq!(r["input_shorthand"], "{1 || 2 | 2 | 4 | 9.1} cy/CL");
    assert_eq!(r["prediction_shorthand"], "{2 ] 4 ] 8 ] 17.1} cy/CL");
    let levels: Vec<&str> = r["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["level"].as_str().unwrap())
        .collect();
    assert_eq!(levels, ["L1", "L2", "L3", "Mem"]);
    let l1 = &r["levels"][0];
    assert_eq!(l1["performance"], 8.0 / 2.0 * 2.3e9);
    assert_eq!(l1["unit"], "Up/s");
}

#[test]
fn predict_table_and_csv() {
    let (code, out, _) = run(&["predict", "-k", "stream-triad"]);
    assert_eq!(code, 0);
    assert!(
        out.contains("prediction  {3 ] 8 ] 16 ] 37.7} cy/CL"),
        "{out}"
    );
    let (_, out, _) = run(&["--unicode", "predict", "-k", "stream-triad"]);
    assert!(out.contains("{3 ⌉ 8 ⌉ 16 ⌉ 37.7} cy/CL"), "{out}");
    assert!(out.contains("{1 ‖ 3 | 5 | 8 | 21.7} cy/CL"), "{out}");

    let (code, out, _) = run(&["predict", "-k", "all", "-f", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "kernel,level,cycles_per_cl,performance,unit");
    assert_eq!(lines.len(), 1 + 9 * 4);
    assert!(lines[1].starts_with("ddot,L1,2.0000,"));
}

#[test]
fn output_is_deterministic() {
    let a = run(&["predict", "-k", "all", "-f", "json"]);
    let b = run(&["predict", "-k", "all", "-f", "json"]);
    assert_eq!(a, b);
}

#[test]
fn huge_bandwidth_removes_memory_term() {
    let v = json(&["predict", "-k", "copy", "-b", "1e9", "-f", "json"]);
    let levels = v[0]["levels"].as_array().unwrap();
    let l3 = levels[2]["cycles"].as_f64().unwrap();
    let mem = levels[3]["cycles"].as_f64().unwrap();
    assert!(mem - l3 < 1e-6, "{l3} {mem}");
    assert_eq!(v[0]["bandwidth_source"], "override");
}

#[test]
fn penalty_flag() {
    let v = json(&["predict", "-k", "ddot", "--penalty", "-f", "json"]);
    assert_eq!(v[0]["prediction_shorthand"], "{2 ] 4 ] 10 ] 21.1} cy/CL");
}

#[test]
fn bad_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&["predict", "-k", "ddot", "-m", "/no/such/file.machine"]);
    assert_eq!(code, 1);
    assert!(err.contains("/no/such/file.machine"), "{err}");

    let broken = write(
        dir.path(),
        "broken.kernel",
        "name = \"x\"\nwork_per_cl = [\n",
    );
    let (code, _, err) = run(&["predict", "-k", &broken]);
    assert_eq!(code, 1);
    assert!(
        err.contains("broken.kernel") && err.contains("line"),
        "{err}"
    );

    let (code, _, err) = run(&["predict", "-k", "ddot", "-b", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("positive"), "{err}");

    let (code, _, _) = run(&["predict"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn infeasible_kernel_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.kernel",
        &LOAD_KERNEL.replace("[\"P1\"]", "[\"P9\"]"),
    );
    let (code, _, err) = run(&["predict", "-k", &path]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("avx_add") && err.contains("P9"), "{err}");
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("predict") && out.contains("scale"));
}

#[test]
fn scale_csv() {
    let (code, out, _) = run(&[
        "scale",
        "-k",
        "ddot",
        "--mode",
        "chip_cod",
        "--max-cores",
        "40",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "cores,performance,cycles_per_cl,mode");
    assert_eq!(lines.len(), 15);
    let last: Vec<&str> = lines[14].split(',').collect();
    assert_eq!(last[0], "14");
    assert!((last[1].parse::<f64>().unwrap() - 4.05e9).abs() < 1e3);
    assert_eq!(last[3], "chip_cod");

    let v = json(&["scale", "-k", "ddot", "-f", "json", "--max-cores", "3"]);
    assert_eq!(v["n_saturate"], 2);
    assert_eq!(v["cores_to_plateau"], 2);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_all() {
    let v = json(&["compare", "-f", "json"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let ddot: Vec<i64> = rows[0]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["error_pct"].as_i64().unwrap())
        .collect();
    assert_eq!(ddot, [5, 17, 20, 13]);

    let (code, out, _) = run(&["compare", "-k", "copy"]);
    assert_eq!(code, 0);
    assert!(out.contains("5 ] 33 ] 8 ] 6"), "{out}");

    let (code, _, err) = run(&["compare", "-k", "stream-triad-nt"]);
    assert_eq!(code, 1);
    assert!(err.contains("no measurements"), "{err}");
}

#[test]
fn sched_reports_bottleneck() {
    let v = json(&["sched", "-k", "stream-triad", "-f", "json"]);
    assert_eq!(v["t_nol_cy"], 3.0);
    assert_eq!(
        v["data_transfer"]["bottleneck"],
        serde_json::json!(["AGU2", "AGU3"])
    );
}

#[test]
fn list_bundled() {
    let (code, out, _) = run(&["list"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 11);
    assert!(out.contains("stream-triad.kernel"));
}

#[test]
fn asset_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("kernels")).unwrap();
    let probe = LOAD_KERNEL
        .replace("name = \"load\"", "name = \"probe\"")
        .replace("32.4", "16.2");
    write(&dir.path().join("kernels"), "probe.kernel", &probe);

    let bin = env!("CARGO_BIN_EXE_ecm");
    let out = Command::new(bin)
        .args(["predict", "-k", "probe", "-f", "json"])
        .env("ECM_ASSET_DIR", dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["kernel"], "probe");
    assert_eq!(v[0]["bandwidth_gbs"], 16.2);

    let out = Command::new(bin)
        .args(["predict", "-k", "probe"])
        .env_remove("ECM_ASSET_DIR")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.kernel",
        &LOAD_KERNEL.replace("[\"P1\"]", "[\"P9\"]"),
    );
    let bin = env!("CARGO_BIN_EXE_ecm");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["predict", "-k", "ddot"]), Some(0));
    assert_eq!(code(&["predict", "-k", "nope.kernel"]), Some(1));
    assert_eq!(code(&["predict", "-k", &path]), Some(2));
}
