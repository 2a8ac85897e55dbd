use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chiral-walk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn out_dir(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "{} has CR line endings", path.display());
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the subset of JSON Schema used by the shipped schemas: `type`,
/// `enum`, `required`, `properties`, `items`, `minItems`, `maxItems`,
/// `minimum`, `maximum` and local `$ref`s.
fn validate(value: &Value, node: &Value, root: &Value, path: &str) -> Vec<String> {
    let mut errs = Vec::new();
    if let Some(r) = node.get("$ref").and_then(Value::as_str) {
        let target = r
            .trim_start_matches("#/")
            .split('/')
            .fold(root, |v, key| &v[key]);
        return validate(value, target, root, path);
    }
    if let Some(ty) = node.get("type") {
        let allowed: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = allowed.iter().any(|t| match *t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !ok {
            errs.push(format!("{path}: expected {allowed:?}, found {value}"));
            return errs;
        }
    }
    if let Some(options) = node.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            errs.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let Some(x) = value.as_f64() {
        if let Some(min) = node.get("minimum").and_then(Value::as_f64) {
            if x < min {
                errs.push(format!("{path}: {x} < {min}"));
            }
        }
        if let Some(max) = node.get("maximum").and_then(Value::as_f64) {
            if x > max {
                errs.push(format!("{path}: {x} > {max}"));
            }
        }
    }
    if let Some(obj) = value.as_object() {
        for key in node.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                errs.push(format!("{path}: missing `{key}`"));
            }
        }
        if let Some(props) = node.get("properties").and_then(Value::as_object) {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    errs.extend(validate(v, sub, root, &format!("{path}.{key}")));
                }
            }
        }
    }
    if let Some(arr) = value.as_array() {
        if let Some(min) = node.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                errs.push(format!("{path}: {} items < {min}", arr.len()));
            }
        }
        if let Some(max) = node.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                errs.push(format!("{path}: {} items > {max}", arr.len()));
            }
        }
        if let Some(items) = node.get("items") {
            for (i, v) in arr.iter().enumerate() {
                errs.extend(validate(v, items, root, &format!("{path}[{i}]")));
            }
        }
    }
    errs
}

fn assert_valid(path: &Path, schema_name: &str) {
    let s = schema(schema_name);
    let errs = validate(&read_json(path), &s, &s, "$");
    assert!(errs.is_empty(), "{}: {errs:#?}", path.display());
}

#[test]
fn schema_checker_rejects_bad_documents() {
    let s = schema("gc.schema.json");
    let bad: Value = serde_json::json!({ "tol_g": -1.0, "critical_couplings": [{ "phi": "x" }] });
    let errs = validate(&bad, &s, &s, "$");
    assert_eq!(errs.len(), 3, "{errs:#?}");
}

#[test]
fn evolve_at_time_zero_is_a_single_site() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "e0");
    let o = run(&["evolve", "--g", "0.3", "--phi", "0.4", "--t", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out.join("density.csv"));
    assert_eq!(header, ["n", "p", "j", "Phi", "J", "M1", "M2", "M3"]);
    let nonzero: Vec<_> = rows
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() > 1e-20)
        .collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0][0], "0");
    assert_eq!(nonzero[0][1], "1.0000000000000000e0");
    let summary = read_json(&out.join("summary.json"));
    assert!(summary["gamma"].is_null());
    assert_valid(&out.join("summary.json"), "summary.schema.json");
}

#[test]
fn evolve_symmetric_without_next_nearest_hopping() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "sym");
    let o = run(&["evolve", "--g", "0", "--phi", "1.5707963", "--t", "50", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&out.join("density.csv"));
    let p: std::collections::HashMap<i64, f64> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    for n in 1..120 {
        assert!((p[&n] - p[&-n]).abs() < 1e-14, "n = {n}");
    }
    assert_valid(&out.join("summary.json"), "summary.schema.json");
}

#[test]
fn invalid_coupling_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "bad");
    let o = run(&["evolve", "--g=-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`g`"));
}

#[test]
fn small_lattice_is_a_numerical_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "small");
    let o = run(&["evolve", "--t", "100", "--lattice", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn empty_coupling_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "empty");
    let o = run(&["fronts", "--g-min", "0.3", "--g-max", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("g-steps"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = out_dir(&dir, "cfg");
    fs::write(&cfg, format!("# test\ng = 0.25\nt = 10\nout = {}\n", out.display())).unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap(), "--t", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["params"]["g"], 0.25);
    assert_eq!(s["t"], 5.0);

    fs::write(&cfg, "coupling = 1\n").unwrap();
    let o = run(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coupling"));
}

#[test]
fn front_sweep_crosses_the_lifshitz_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "fronts");
    let o = run(&[
        "fronts", "--phi", "1.5707963267948966", "--g-min", "0.05", "--g-max", "0.2", "--g-steps", "16",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&out.join("fronts.csv"));
    assert_eq!(header[..3], ["phi", "g", "front_count"]);
    for r in &rows {
        let g: f64 = r[1].parse().unwrap();
        let count: usize = r[2].parse().unwrap();
        if g < 0.124 {
            assert_eq!(count, 2, "g = {g}");
        } else if g > 0.126 {
            assert_eq!(count, 4, "g = {g}");
        }
    }
    assert_valid(&out.join("gc.json"), "gc.schema.json");
    let gc = read_json(&out.join("gc.json"));
    let g_c = gc["critical_couplings"][0]["g_c"].as_f64().unwrap();
    assert!((g_c - 0.125).abs() < 1e-9);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["fronts", "--phis", "0,0.5,1.0,1.5", "--g-min", "0", "--g-max", "0.6", "--g-steps", "25"],
        &["evolve", "--g", "0.3", "--phi", "1.1", "--t", "40"],
        &["scaling", "--g", "0.25", "--t", "300", "--points", "101"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for jobs in ["1", "3"] {
            let out = out_dir(&dir, &format!("det{i}_{jobs}"));
            let mut full: Vec<&str> = args.to_vec();
            let out_s = out.to_str().unwrap().to_string();
            full.extend(["--jobs", jobs, "--out", &out_s]);
            let o = run(&full);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let mut files: Vec<_> = fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            outputs.push(files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
        }
        assert_eq!(outputs[0], outputs[1], "case {i}");
    }
}

#[test]
fn scaling_report_without_next_nearest_hopping() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "scaling");
    let o = run(&["scaling", "--g", "0", "--times", "400,800", "--points", "201", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid(&out.join("bulk_report.json"), "bulk_report.schema.json");
    let (header, rows) = read_csv(&out.join("bulk.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (nu, phi) = (col("nu"), col("Phi_num"));
    for r in rows.iter().filter(|r| r[col("n")] == "0") {
        assert_eq!(r[nu].parse::<f64>().unwrap(), 0.0);
        assert!((r[phi].parse::<f64>().unwrap() - 0.5).abs() < 0.01);
    }
    let report = read_json(&out.join("bulk_report.json"));
    assert_eq!(report["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn edge_summary_fields() {
    let dir = tempfile::tempdir().unwrap();
    for (g, exponent, degeneracy) in [("0.125", 0.2, 1), ("0.25", 1.0 / 3.0, 2)] {
        let out = out_dir(&dir, &format!("edge{g}"));
        let o = run(&["edge", "--g", g, "--t", "2000", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_valid(&out.join("edge_summary.json"), "edge_summary.schema.json");
        let s = read_json(&out.join("edge_summary.json"));
        assert!((s["scaling_exponent"].as_f64().unwrap() - exponent).abs() < 1e-12);
        assert_eq!(s["degeneracy_factor"], degeneracy);
        let (header, rows) = read_csv(&out.join("staircase.csv"));
        assert_eq!(header[..6], ["front", "profile", "step", "height", "width", "area"]);
        assert!(rows.len() >= 4);
        let (eh, _) = read_csv(&out.join("edge.csv"));
        assert_eq!(eh[..4], ["xi", "dPhi_scaled_num", "dPhi_scaled_pred", "dJ_scaled_num"]);
    }
}

#[test]
fn even_order_front_writes_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(&dir, "even");
    // At the critical coupling for phi = 0.5 the internal front pair merges
    // into a second-order front; a loose order tolerance absorbs the residual
    // splitting left by the finite accuracy of g_c.
    let o = run(&[
        "edge", "--phi", "0.5", "--g", "0.23955490710795857", "--t", "500", "--front", "internal",
        "--tol-order", "1e-4", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("staircase.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][7].contains("order 2"));
    assert_valid(&out.join("edge_summary.json"), "edge_summary.schema.json");
}
