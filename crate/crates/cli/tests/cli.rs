use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ensinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensinfo")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = ensinfo(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ensinfo(args).status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn num(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or_else(|| panic!("{path} missing in {v}"))
}

/// Rows `y,o1..o4` with a mix of agreement patterns.
fn four_model_csv() -> String {
    let mut csv = String::from("y,yhat,o1,o2,o3,o4\n");
    for j in 0..120u32 {
        let y = j % 3;
        let o1 = if j % 7 == 0 { (y + 1) % 3 } else { y };
        let o2 = if j % 5 == 0 { (y + 2) % 3 } else { y };
        let o3 = if j % 4 == 0 { o1 } else { (j / 3) % 3 };
        let o4 = if j % 11 < 3 { 0 } else { y };
        let yhat = if j % 9 == 0 { (y + 1) % 3 } else { y };
        csv.push_str(&format!("{y},{yhat},{o1},{o2},{o3},{o4}\n"));
    }
    csv
}

#[test]
fn toy_a_has_zero_combination_loss() {
    let dir = TempDir::new().unwrap();
    let toy = dir.path().join("a.csv");
    ok(&["toy", "--variant", "a", "-o", s(&toy)]);
    let r = report(&["analyze", s(&toy)]);
    assert_eq!(num(&r, "/report/i_combloss"), 0.0);
    assert_eq!(r["p0_source"], "combined");
}

#[test]
fn vote_reproduces_toy_b_column_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let toy = dir.path().join("b.csv");
    ok(&["toy", "--variant", "b", "-o", s(&toy)]);
    let original = std::fs::read_to_string(&toy).unwrap();
    let revoted = ok(&["combine", s(&toy), "--method", "vote"]);
    assert_eq!(revoted, original);
    let again_path = write(&dir, "again.csv", &revoted);
    assert_eq!(ok(&["combine", s(&again_path), "--method", "vote"]), revoted);

    let uniform = ok(&["combine", s(&toy), "--method", "weighted-vote", "--weights", "1,1,1,1,1"]);
    assert_eq!(uniform, revoted);

    let c = ok(&["combine", s(&toy), "--method", "weighted-vote", "--weights", "1,0,0,0,0"]);
    let mut toy_c = dir.path().join("c.csv");
    ok(&["toy", "--variant", "c", "-o", s(&toy_c)]);
    assert_eq!(c, std::fs::read_to_string(&toy_c).unwrap());
    toy_c.pop();
}

#[test]
fn stacking_on_separable_table_is_exact() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("y,o1,o2,o3\n");
    for j in 0..200u32 {
        let y = (j * 7 + j / 3) % 2;
        csv.push_str(&format!("{y},{y},{y},{}\n", (j / 2) % 2));
    }
    let input = write(&dir, "sep.csv", &csv);
    let out = ok(&["combine", s(&input), "--method", "stacking", "--stack-seed", "4"]);
    for line in out.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], f[1], "{line}");
    }
}

#[test]
fn classes_flag_widens_label_space() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bin.csv", "y,yhat,o1,o2\n0,0,0,1\n1,1,1,1\n1,0,0,0\n0,0,0,0\n1,1,1,0\n");
    let narrow = report(&["analyze", s(&input)]);
    let wide = report(&["analyze", s(&input), "--classes", "4"]);
    assert_eq!(num(&narrow, "/report/bounds/config/ymax"), 2.0);
    assert_eq!(num(&wide, "/report/bounds/config/ymax"), 4.0);
    assert_eq!(num(&wide, "/report/h_y"), num(&narrow, "/report/h_y"));
    let h = num(&wide, "/report/h_y");
    let info = num(&wide, "/report/ensemble_information");
    assert!((num(&wide, "/report/bounds/loose_info") - (h - info - 1.0) / 2.0).abs() < 1e-12);
}

#[test]
fn exact_and_full_k_mti_agree() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.csv", &four_model_csv());
    let exact = report(&["analyze", s(&input), "--mode", "exact"]);
    let mti = report(&["analyze", s(&input), "--mode", "mti", "--k", "4"]);
    for field in [
        "/report/i_relev",
        "/report/i_redun",
        "/report/i_combloss",
        "/report/ensemble_information",
        "/report/ensemble_strength",
        "/report/h_y_given_o",
        "/report/bounds/loose_info",
        "/report/bounds/tight_info/value",
        "/report/bounds/tight_strength/value",
    ] {
        assert!((num(&exact, field) - num(&mti, field)).abs() <= 1e-10, "{field}");
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.csv", &four_model_csv());
    let a = ok(&["analyze", s(&input), "--mode", "mti", "--concentration", "1,2"]);
    let b = ok(&["analyze", s(&input), "--mode", "mti", "--concentration", "1,2"]);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["concentration"].as_array().unwrap().len(), 2);
}

#[test]
fn bound_diagnostics_are_reported() {
    let dir = TempDir::new().unwrap();
    // perfect combined prediction with a far-off anchor
    let input = write(&dir, "p.csv", "y,yhat,o1\n0,0,0\n1,1,1\n0,0,0\n1,1,1\n");
    let r = report(&["analyze", s(&input), "--p0", "0.05"]);
    let b = &r["report"]["bounds"]["tight_strength"];
    assert_eq!(b["defined"], true);
    assert_eq!(b["diagnostic"], "ok");
    assert!(b["value"].as_f64().unwrap() <= 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "g.csv", "y,yhat,o1\n0,0,0\n1,0,1\n");
    let bad_header = write(&dir, "h.csv", "truth,o1\n0,0\n");
    let bad_label = write(&dir, "l.csv", "y,o1\n0,x\n");
    let wide_label = write(&dir, "w.csv", "y,o1\n0,3\n1,1\n");
    let no_yhat = write(&dir, "n.csv", "y,o1\n0,0\n1,1\n");
    assert_eq!(code(&["analyze", s(&good)]), 0);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["analyze", s(&good), "--no-such-flag"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["analyze", s(&no_yhat)]), 1);
    assert_eq!(code(&["analyze", s(&good), "--mode", "mti", "--k", "0"]), 1);
    assert_eq!(code(&["combine", s(&good), "--method", "weighted-vote"]), 1);
    assert_eq!(code(&["analyze", s(&bad_header)]), 2);
    assert_eq!(code(&["analyze", s(&bad_label)]), 2);
    assert_eq!(code(&["analyze", s(&wide_label)]), 2);
    assert_eq!(code(&["analyze", s(&wide_label), "--classes", "3"]), 2);
    assert_eq!(code(&["analyze", s(&wide_label), "--classes", "4", "--p0", "0.3"]), 0);
    assert_eq!(code(&["analyze", s(&dir.path().join("missing.csv"))]), 2);
    assert_eq!(code(&["combine", s(&good), "--method", "weighted-vote", "--weights", "1,2"]), 2);
}

#[test]
fn baseline_supplies_p0_and_normalisation() {
    let dir = TempDir::new().unwrap();
    let base_csv = write(&dir, "base.csv", "y,yhat,o1\n0,0,0\n1,0,0\n1,1,1\n0,0,0\n1,1,1\n0,1,1\n");
    let base = dir.path().join("base.json");
    ok(&["analyze", s(&base_csv), "-o", s(&base)]);
    let sys = write(&dir, "sys.csv", &four_model_csv());
    let r = report(&["analyze", s(&sys), "--baseline", s(&base)]);
    assert_eq!(r["p0_source"], "baseline");
    assert!((num(&r, "/report/bounds/config/p0") - 2.0 / 6.0).abs() < 1e-15);
    let e0 = num(&r, "/normalized/baseline_strength");
    assert!((num(&r, "/normalized/i_relev") - num(&r, "/report/i_relev") / e0).abs() < 1e-12);
}

fn summary_json(error_rate: f64, info: f64, strength: f64) -> String {
    format!(
        r#"{{"schema_version": 1, "report": {{"h_y": 1.0, "ensemble_information": {info}, "ensemble_strength": {strength}, "error_rate": {error_rate}, "bounds": {{"config": {{"p0": 0.2, "ymax": 2}}}}}}}}"#
    )
}

#[test]
fn correlate_identical_and_linear_reports() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "base.json", &summary_json(0.2, 0.3, 0.25));
    let same = write(&dir, "same.json", &summary_json(0.2, 0.3, 0.25));
    let out: Value = serde_json::from_str(&ok(&["correlate", "--baseline", s(&base), s(&same)])).unwrap();
    let row = &out["rows"][0];
    for k in ["error_rate_reduction", "loose_info", "tight_info", "tight_strength"] {
        assert_eq!(row[k].as_f64().unwrap(), 0.0, "{k}");
    }

    // error rate and information both linear in t: the loose bound is -I
    let mut paths = Vec::new();
    for t in 1..=4 {
        let t = t as f64;
        paths.push(write(&dir, &format!("s{t}.json"), &summary_json(0.2 - 0.02 * t, 0.3 + 0.05 * t, 0.25 + 0.01 * t)));
    }
    let mut args = vec!["correlate", "--baseline", s(&base)];
    args.extend(paths.iter().map(|p| s(p)));
    let out: Value = serde_json::from_str(&ok(&args)).unwrap();
    let loose = out["correlations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["bound"] == "loose_info")
        .unwrap();
    assert!((loose["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn correlate_rejects_schema_mismatch() {
    let dir = TempDir::new().unwrap();
    let base = write(&dir, "base.json", &summary_json(0.2, 0.3, 0.25));
    let other = write(&dir, "v2.json", &summary_json(0.1, 0.4, 0.3).replace("\"schema_version\": 1", "\"schema_version\": 2"));
    let garbage = write(&dir, "g.json", "{\"schema_version\": 1}");
    assert_eq!(code(&["correlate", "--baseline", s(&base), s(&other)]), 2);
    assert_eq!(code(&["correlate", "--baseline", s(&base), s(&garbage)]), 2);
    assert_eq!(code(&["correlate", "--baseline", s(&base)]), 1);
}

#[test]
fn analyzed_reports_feed_correlate() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("t.csv");
    ok(&["synth", "--models", "5", "--instances", "400", "--error", "0.3", "--shared-noise", "0.4", "--seed", "2", "-o", s(&table)]);
    let mut reports = Vec::new();
    for (i, method) in ["vote", "accuracy-weighted-vote"].iter().enumerate() {
        let combined = dir.path().join(format!("c{i}.csv"));
        ok(&["combine", s(&table), "--method", method, "-o", s(&combined)]);
        let rep = dir.path().join(format!("r{i}.json"));
        ok(&["analyze", s(&combined), "-o", s(&rep)]);
        reports.push(rep);
    }
    let single = dir.path().join("single.csv");
    let text = std::fs::read_to_string(&table).unwrap();
    let mut single_csv = String::from("y,yhat,o1\n");
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        single_csv.push_str(&format!("{},{},{}\n", f[0], f[1], f[1]));
    }
    std::fs::write(&single, single_csv).unwrap();
    let base = dir.path().join("base.json");
    ok(&["analyze", s(&single), "-o", s(&base)]);
    let out: Value =
        serde_json::from_str(&ok(&["correlate", "--baseline", s(&base), s(&reports[0]), s(&reports[1])])).unwrap();
    assert_eq!(out["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn scale_emits_curve_columns() {
    let out = ok(&[
        "scale", "--n-values", "1,2,3,5", "--instances", "300", "--error", "0.3", "--shared-noise", "0.5", "--mode", "mti",
    ]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,error_rate,error_rate_reduction,loose_info_reduction,tight_info_reduction,tight_strength_reduction,i_relev,i_redun,i_combloss,information,strength"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], 1.0);
    // first point is its own baseline
    assert!(rows[0][2..6].iter().all(|&v| v == 0.0));
    assert_eq!(rows[0][7], 0.0);
}

#[test]
fn synth_is_deterministic() {
    let a = ok(&["synth", "--models", "3", "--instances", "50", "--classes", "3", "--seed", "9"]);
    let b = ok(&["synth", "--models", "3", "--instances", "50", "--classes", "3", "--seed", "9"]);
    assert_eq!(a, b);
    assert!(a.starts_with("y,o1,o2,o3\n"));
    assert_eq!(code(&["synth", "--models", "3", "--errors", "0.1,0.2"]), 1);
    assert_eq!(code(&["synth", "--models", "2", "--shared-noise", "1.5"]), 1);
}
