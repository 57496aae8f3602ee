use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn stiffkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stiffkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn construct(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let file = path(dir, name);
    let mut all = vec!["construct"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", &file]);
    let out = stiffkit(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(Path::new(&file).exists());
    file
}

#[test]
fn demicube_dual_has_ten_points() {
    let dir = TempDir::new().unwrap();
    let d5 = construct(&dir, "d5.json", &["demicube", "5"]);
    let dual = path(&dir, "dual.json");
    let out = stiffkit(&["dual", &d5, "-m", "2", "-o", &dual]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["tool"], "stiffkit");
    assert!(v["version"].is_string());
    assert_eq!(v["pass"], true);
    assert_eq!(v["report"]["stiff"], true);
    assert_eq!(v["report"]["dual"]["points"].as_array().unwrap().len(), 10);
    assert!(v["tolerances"]["float_residual"].is_number());

    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&dual).unwrap()).unwrap();
    assert_eq!(saved["points"].as_array().unwrap().len(), 10);
}

#[test]
fn index_set_of_2_41() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "241.json", &["2_41"]);
    let out = stiffkit(&["check-design", &f, "--nmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let set: Vec<u64> = v["report"]["index_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(set, vec![1, 2, 3, 4, 5, 6, 7, 9, 10]);
    assert_eq!(v["report"]["strength"], 7);
    assert_eq!(v["tolerances"]["mode"], "exact");
}

#[test]
fn spectrum_of_a_2_41_point() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "241.json", &["2_41"]);
    let out = stiffkit(&["spectrum", &f, "--probe", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["distinct_count"], 9);
    let mult: Vec<u64> = v["report"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["multiplicity"].as_u64().unwrap())
        .collect();
    assert_eq!(mult, vec![1, 64, 280, 448, 574, 448, 280, 64, 1]);
}

#[test]
fn spectrum_accepts_surd_coordinates() {
    let dir = TempDir::new().unwrap();
    let f = construct(&dir, "c3.json", &["cube", "3"]);
    let out = stiffkit(&["spectrum", &f, "--probe", "0,0,-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["distinct_count"], 2);
    let out = stiffkit(&["spectrum", &f, "--probe", "1/2*sqrt(2),1/2*sqrt(2),0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["distinct_count"], 3);
}

#[test]
fn verify_min_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let d5 = construct(&dir, "d5.json", &["demicube", "5"]);
    let dual = path(&dir, "dual.json");
    assert_eq!(stiffkit(&["dual", &d5, "-m", "2", "-o", &dual]).status.code(), Some(0));
    let args = |t: &'static str| {
        stiffkit(&[
            "--threads", t, "verify-min", &d5, "-m", "2", "--dual", &dual, "--kernels", "riesz:1,gauss:1",
            "--restarts", "40", "--seed", "11",
        ])
    };
    let one = args("1");
    let four = args("4");
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let v = json(&one);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["report"]["verdicts"].as_array().unwrap().len(), 2);
    assert!(v["tolerances"]["gradient"].is_number());
}

#[test]
fn verify_min_searches_the_dual_when_none_is_given() {
    let dir = TempDir::new().unwrap();
    let c4 = construct(&dir, "c4.json", &["cross-polytope", "4"]);
    let out = stiffkit(&["verify-min", &c4, "-m", "2", "--kernels", "riesz:2", "--restarts", "30"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["report"]["dual_size"], 16);
}

#[test]
fn transforms_write_loadable_codes() {
    let dir = TempDir::new().unwrap();
    let d3 = construct(&dir, "d3.json", &["demicube", "3"]);
    let sym = path(&dir, "sym.json");
    let out = stiffkit(&["symmetrize", &d3, "-o", &sym]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["code"]["size"], 8);

    let out = stiffkit(&["check-design", &sym, "--nmax", "4"]);
    assert_eq!(json(&out)["report"]["strength"], 3);

    let d5 = construct(&dir, "d5.json", &["demicube", "5"]);
    let g = path(&dir, "glue.json");
    let out = stiffkit(&["glue", &d5, &d5, "-m", "2", "--seed", "3", "-o", &g]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = stiffkit(&["check-design", &g, "--nmax", "4"]);
    assert_eq!(json(&out)["report"]["code"], "glue(demicube(5,even), demicube(5,even))");

    let f = path(&dir, "facet.json");
    let out = stiffkit(&["facet", &d5, "--point", "0", "--t", "-3/5", "-o", &f]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(Path::new(&f).exists());
}

#[test]
fn rotated_cubes_have_a_polar_dual() {
    let out = stiffkit(&["rotated-cubes", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["certificate"]["dual"]["points"].as_array().unwrap().len(), 2);
    assert_eq!(v["report"]["dual_1stiff"], true);
    assert_eq!(v["report"]["dual_general_position"], false);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let c3 = construct(&dir, "c3.json", &["cube", "3"]);
    let out = stiffkit(&["symmetrize", &c3]);
    assert_eq!(out.status.code(), Some(1));

    let n5 = construct(&dir, "n5.json", &["ngon", "5"]);
    let out = stiffkit(&["dual", &n5, "-m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn usage_and_io_errors_exit_with_two() {
    assert_eq!(stiffkit(&["dual", "/nonexistent/code.json", "-m", "2"]).status.code(), Some(2));
    assert_eq!(stiffkit(&["construct", "dodecahedron"]).status.code(), Some(2));
    assert_eq!(stiffkit(&["check-design"]).status.code(), Some(2));
    assert_eq!(stiffkit(&["suite", "--criteria", "13"]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{\"points\": [[1, 0], [0, 1]]}").unwrap();
    let out = stiffkit(&["check-design", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm_sq"));
}

#[test]
fn size_cap_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_stiffkit"))
        .args(["construct", "cube", "6"])
        .env("STIFFKIT_SIZE_CAP", "32")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size cap"));
}

#[test]
fn suite_runs_selected_criteria() {
    let out = stiffkit(&["suite", "--criteria", "5,8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"].as_array().unwrap().len(), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[PASS]  5"));
    assert!(err.contains("[PASS]  8"));
}
