use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn grl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grl")).args(args).output().expect("binary runs")
}

fn grl_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grl"))
        .args(args)
        .env("GRL_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn check<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&grl(&["--help"])), 0);
    assert_eq!(code(&grl(&["--version"])), 0);
    assert_eq!(code(&grl(&["pde", "newton", "--help"])), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&grl(&["green", "--no-such-flag"])), 2);
    assert_eq!(code(&grl(&["frobnicate"])), 2);
    assert_eq!(code(&grl(&["green", "--shape", "torus"])), 2);
    assert_eq!(code(&grl(&["green", "--center", "1,2"])), 2);
}

#[test]
fn input_errors_exit_two() {
    // Analytic-only commands reject meshes; bad parameters are config errors.
    let out = grl(&["kelvin", "--mesh", "nowhere.off"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert_eq!(code(&grl(&["green", "--level", "12"])), 2);
    assert_eq!(code(&grl(&["green", "--radius", "-1"])), 2);
    assert_eq!(code(&grl(&["green", "--mesh", "missing.off"])), 2);
    assert_eq!(code(&grl(&["ode", "shoot", "--step", "0.1"])), 2);
    assert_eq!(code(&grl(&["rigidity", "--check", "umbilic", "--radii", "1e-3,1e-2"])), 2);
    assert_eq!(code(&grl(&["rigidity", "--check", "conformal", "--dim", "2"])), 2);
    assert_eq!(code(&grl(&["ode", "linearize", "--p", "0.1", "--z", "-1", "--theta", "0.3"])), 2);
}

#[test]
fn green_sphere_example() {
    let out = grl(&["green", "--shape", "sphere", "--level", "5", "--exclude", "0.3", "--no-meta"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["schema"], "grl/1");
    assert_eq!(doc["command"], "green");
    assert_eq!(doc["pass"], true);
    assert!(doc.get("meta").is_none());
    let c = doc["result"]["fit"]["c"].as_f64().unwrap();
    // (ln 2 − 1/2)/(2π) = 0.030740...
    assert!((c - 0.0307).abs() < 1e-3, "c = {c}");
    assert!(check(&doc, "sphereConstant")["pass"].as_bool().unwrap());
}

#[test]
fn ode_shoot_exact_start() {
    let out = grl(&["ode", "shoot", "--beta", "0", "--no-meta"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(check(&doc, "poleDefect")["value"].as_f64().unwrap() <= 1e-6);
    assert!(doc["result"]["abort"].is_null());
}

#[test]
fn ode_shoot_perturbed_start_is_detected() {
    let out = grl(&["ode", "shoot", "--beta", "-0.2", "--no-meta"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(check(&doc, "perturbationDetected")["pass"], true);
    assert_eq!(check(&doc, "stableUnderHalving")["pass"], true);
}

#[test]
fn failed_expectation_exits_one() {
    let out = grl(&["rigidity", "--check", "surface2", "--shape", "ellipsoid", "--no-meta"]);
    assert_eq!(code(&out), 1);
    let doc = json(&out);
    assert_eq!(doc["pass"], false);
    assert_eq!(doc["failed"][0], "surface2");
    let out = grl(&["rigidity", "--check", "surface2", "--shape", "ellipsoid", "--expect", "violated", "--threshold", "0.05"]);
    assert_eq!(code(&out), 0);
    let out = grl(&["kelvin", "--expect", "violated", "--threshold", "0.05", "--samples", "50"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn no_meta_output_is_byte_identical() {
    let args = ["rigidity", "--check", "mean-curvature", "--samples", "1000", "--seed", "5", "--no-meta"];
    let (a, b) = (grl(&args), grl(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = grl(&["rigidity", "--check", "mean-curvature", "--samples", "1000", "--seed", "6", "--no-meta"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn meta_is_present_by_default() {
    let doc = json(&grl(&["ode", "residual", "--u", "2", "--du", "0", "--ddu", "-2", "--theta", "1.5707963267948966"]));
    assert_eq!(doc["meta"]["seed"], 1);
    assert!(doc["meta"]["elapsedSeconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(doc["result"]["form"], "cos-multiplied");
    assert_eq!(doc["result"]["value"], 0.0);
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = grl(&["kelvin", "--samples", "40", "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "kelvin");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,y,z,residual\n"));
    assert_eq!(text.lines().count(), 1 + doc["result"]["evaluated"].as_u64().unwrap() as usize);
}

#[test]
fn saved_mesh_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("e.off");
    let p = off.to_str().unwrap();
    assert_eq!(code(&grl(&["mesh", "--shape", "ellipsoid", "--level", "3", "--save", p])), 0);
    assert!(Path::new(p).exists());
    let doc = json(&grl(&["mesh", "--mesh", p, "--no-meta"]));
    assert_eq!(doc["result"]["vertices"], 642);
    assert_eq!(doc["result"]["eulerCharacteristic"], 2);
    let g = grl(&["green", "--mesh", p, "--no-meta"]);
    assert_eq!(code(&g), 0);
    // No reference constant off the round sphere.
    assert!(json(&g)["result"]["referenceC"].is_null());
}

#[test]
fn newton_grid_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.json");
    let f = file.to_str().unwrap();
    let out = grl(&["pde", "newton", "--grid", "perturbed", "--n", "128", "--save", f, "--no-meta"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let doc = json(&out);
    // Discretisation error at 128 rows is 1.41e-2.
    assert!(doc["result"]["errorVsExact"].as_f64().unwrap() < 2e-2);
    assert!(doc["result"]["residualNorm"].as_f64().unwrap() <= 1e-10);
    let again = grl(&["pde", "newton", "--load", f, "--no-meta"]);
    assert_eq!(code(&again), 0);
    assert!(json(&again)["result"]["iterations"].as_u64().unwrap() <= 1);
}

#[test]
fn lemmas_and_moving_plane() {
    assert_eq!(code(&grl(&["pde", "lemmas", "--samples", "5000", "--bounds", "1,3"])), 0);
    let doc = json(&grl(&["moving-plane", "--planes", "4", "--no-meta"]));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["result"]["planes"].as_array().unwrap().len(), 4);
}

#[test]
fn suite_quick_passes_within_a_minute() {
    let start = Instant::now();
    let one = grl_env(&["suite", "--quick", "--no-meta"], "1");
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stdout));
    let doc = json(&one);
    assert_eq!(doc["result"]["quick"], true);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let four = grl_env(&["suite", "--quick", "--no-meta"], "4");
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn bad_thread_count_exits_two() {
    assert_eq!(code(&grl_env(&["suite", "--quick"], "zero")), 2);
    assert_eq!(code(&grl_env(&["suite", "--quick"], "0")), 2);
}
