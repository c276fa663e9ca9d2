use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fracbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracbm")).args(args).output().expect("spawn fracbm")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn artifact_names(m: &Value) -> Vec<String> {
    m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect()
}

/// Every file next to the manifest is listed, with matching digest and size.
fn assert_manifest_complete(dir: &Path) {
    let m = manifest(dir);
    let mut on_disk: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed = artifact_names(&m);
    listed.sort();
    assert_eq!(listed, on_disk);
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        let digest = sha256(&bytes);
        assert_eq!(a["sha256"].as_str().unwrap(), digest);
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

fn sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Asserts that `keys` appear in this order in serialized JSON text.
fn assert_key_order(text: &str, keys: &[&str]) {
    let pos: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\":")).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{keys:?} out of order in {text}");
}

fn out(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).display().to_string()
}

#[test]
fn generate_writes_headers_and_listed_artifacts() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "gen");
    let o = fracbm(&["generate", "--hurst", "0.3", "--steps", "64", "--paths", "3", "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(Path::new(&dir).join("path_0002.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#hurst 0.3"));
    assert!(lines.next().unwrap().starts_with("#seed "));
    assert_eq!(lines.next(), Some("#stream 2"));
    assert_eq!(lines.next(), Some("#generator fbm-circulant"));
    assert_eq!(lines.next(), Some("t,value"));
    let row = lines.next().unwrap();
    let (t, v) = row.split_once(',').unwrap();
    assert_eq!(t, "0.0000000000000000e0");
    assert_eq!(v.trim_start_matches('-').split('e').next().unwrap().len(), 18);
    assert_eq!(text.lines().count(), 5 + 65);
    assert_manifest_complete(Path::new(&dir));
    let m = manifest(Path::new(&dir));
    assert_eq!(m["command"], "generate");
    let text = fs::read_to_string(Path::new(&dir).join("manifest.json")).unwrap();
    assert_key_order(&text, &["tool", "version", "command", "root_seed", "config", "artifacts"]);
}

#[test]
fn identical_runs_have_identical_hashes() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "same");
    let args = |d: &str| {
        ["generate", "--hurst", "0.7", "--steps", "128", "--paths", "2", "--seed", "11", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([d.to_string()])
            .collect::<Vec<_>>()
    };
    let run = |d: &str| {
        let a = args(d);
        let o = fracbm(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(Path::new(d).join("manifest.json")).unwrap()
    };
    let first = run(&dir);
    let second = run(&dir);
    assert_eq!(first, second);
    let other = out(&tmp, "other-seed");
    let o = fracbm(&["generate", "--hurst", "0.7", "--steps", "128", "--seed", "12", "--out", &other]);
    assert!(o.status.success());
    let a = manifest(Path::new(&dir))["artifacts"][0]["sha256"].clone();
    let b = manifest(Path::new(&other))["artifacts"][0]["sha256"].clone();
    assert_ne!(a, b);
}

#[test]
fn invalid_hurst_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let o = fracbm(&["generate", "--hurst", "1.5", "--out", &out(&tmp, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hurst"), "{}", stderr(&o));
    assert!(!tmp.path().join("x").exists());
    assert_eq!(fracbm(&["generate", "--steps", "many"]).status.code(), Some(2));
    assert_eq!(fracbm(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    let conf = tmp.path().join("run.conf");
    let dir = out(&tmp, "cfg");
    fs::write(&conf, format!("# test run\nhurst = 0.25\nsteps = 32\nseed = 5\nout = {dir}\n")).unwrap();
    let o = fracbm(&["generate", "--config", conf.to_str().unwrap(), "--steps", "16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(Path::new(&dir));
    assert_eq!(m["config"]["hurst"], 0.25);
    assert_eq!(m["config"]["steps"], 16);
    assert_eq!(m["root_seed"], 5);

    // The recorded run.conf reproduces the run.
    let again = out(&tmp, "again");
    let o = fracbm(&["generate", "--config", &format!("{dir}/run.conf"), "--out", &again]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(Path::new(&dir).join("path_0000.csv")).unwrap(),
        fs::read(Path::new(&again).join("path_0000.csv")).unwrap()
    );

    fs::write(&conf, "hurst = 0.25\ncolour = blue\n").unwrap();
    let o = fracbm(&["generate", "--config", conf.to_str().unwrap(), "--out", &dir]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn stats_recovers_the_hurst_index_of_an_exported_path() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "g");
    let o = fracbm(&["generate", "--hurst", "0.75", "--steps", "4096", "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let input = format!("{dir}/path_0000.csv");
    let sdir = out(&tmp, "s");
    let o = fracbm(&["stats", "--input", &input, "--estimators", "vi,rs,qv", "--out", &sdir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["variation_index", "rescaled_range"] {
        let h = rec[key]["h_hat"].as_f64().unwrap();
        assert!((h - 0.75).abs() < 0.1, "{key}: {h}");
    }
    assert!(rec.get("acf").is_none());
    assert_eq!(fs::read(Path::new(&sdir).join("stats.json")).unwrap(), o.stdout);
    assert_manifest_complete(Path::new(&sdir));
}

#[test]
fn stats_rejects_bad_series() {
    let tmp = TempDir::new().unwrap();
    let write = |name: &str, text: &str| {
        let p = tmp.path().join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let run = |input: &str| fracbm(&["stats", "--input", input, "--out", &out(&tmp, "s")]);

    let bad = write("bad.csv", "#hurst 0.5\nt,value\n0,0\n0.5,1\n1,oops\n");
    let o = run(&bad);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));

    let rows: String = (0..=256).map(|k| format!("{},3.5\n", k as f64 / 256.0)).collect();
    let constant = write("const.csv", &rows);
    let o = fracbm(&["stats", "--input", &constant, "--estimators", "rs", "--out", &out(&tmp, "s")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("rescaled-range"), "{}", stderr(&o));

    let rows: String = (0..10).map(|k| format!("{},{}\n", k as f64 / 9.0, (k * k) % 7)).collect();
    let short = write("short.csv", &rows);
    let o = run(&short);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("insufficient"), "{}", stderr(&o));
}

#[test]
fn fbm_integrate_appends_to_the_ledger() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "fi");
    let ledger = Path::new(&dir).join("results.jsonl");
    for (i, kind) in ["symmetric", "forward", "covariation"].iter().enumerate() {
        let seed = (i + 1).to_string();
        let o = fracbm(&[
            "fbm-integrate", "--kind", kind, "--hurst", "0.7", "--steps", "256", "--paths", "2", "--seed", &seed,
            "--out", &dir,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = fs::read_to_string(&ledger).unwrap();
        assert_eq!(text.lines().count(), 2 * (i + 1));
        assert_manifest_complete(Path::new(&dir));
    }
    let text = fs::read_to_string(&ledger).unwrap();
    let entries: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(entries[0]["kind"], "symmetric");
    assert_eq!(entries[5]["kind"], "covariation");
    assert_eq!(entries[5]["stream"], 1);
    assert_key_order(
        text.lines().next().unwrap(),
        &["kind", "integrand", "hurst", "steps", "tmax", "generator", "seed", "stream", "result"],
    );
}

#[test]
fn fbm_integrate_along_an_imported_path() {
    let tmp = TempDir::new().unwrap();
    let g = out(&tmp, "g");
    assert!(fracbm(&["generate", "--hurst", "0.8", "--steps", "512", "--out", &g]).status.success());
    let dir = out(&tmp, "fi");
    let input = format!("{g}/path_0000.csv");
    let o = fracbm(&["fbm-integrate", "--kind", "symmetric", "--integrand", "path", "--input", &input, "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = fs::read_to_string(Path::new(&dir).join("results.jsonl")).unwrap();
    let entry: Value = serde_json::from_str(line.trim()).unwrap();
    // The symmetric integral of g against itself tends to g(T)^2 / 2.
    let last = fs::read_to_string(&input).unwrap().lines().last().unwrap().to_string();
    let end: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    let value = entry["result"]["value"].as_f64().unwrap();
    assert!((value - end * end / 2.0).abs() < 5e-3, "{value} vs {}", end * end / 2.0);
    assert_eq!(entry["hurst"], 0.8);
}

#[test]
fn fracint_of_a_constant() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("one.csv");
    let rows: String = (0..=128).map(|k| format!("{},1\n", k as f64 / 128.0)).collect();
    fs::write(&input, format!("t,value\n{rows}")).unwrap();
    let dir = out(&tmp, "fr");
    let o = fracbm(&["fracint", "--input", input.to_str().unwrap(), "--alpha", "0.5", "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(Path::new(&dir).join("fracint.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,value"));
    // I^{1/2} 1 = 2 sqrt(t / pi)
    let last = text.lines().last().unwrap();
    let v: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-6, "{v}");
    assert_manifest_complete(Path::new(&dir));
}

#[test]
fn ito_ensemble_and_single_path() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "ito");
    let o = fracbm(&["ito", "--integrand", "t", "--steps", "128", "--replicates", "2000", "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: Value = serde_json::from_slice(&fs::read(Path::new(&dir).join("ito.json")).unwrap()).unwrap();
    assert_eq!(rec["replicates"], 2000);
    assert!(rec["isometry"].is_object() && rec["endpoint"].is_object());

    let g = out(&tmp, "bm");
    let o = fracbm(&["generate", "--generator", "bm-increments", "--steps", "256", "--out", &g]);
    assert!(o.status.success(), "{}", stderr(&o));
    let input = format!("{g}/path_0000.csv");
    let o = fracbm(&["ito", "--integrand", "one", "--input", &input, "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    let last = fs::read_to_string(&input).unwrap().lines().last().unwrap().to_string();
    let end: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((rec["value"].as_f64().unwrap() - end).abs() < 1e-12);

    let f = out(&tmp, "fbm");
    assert!(fracbm(&["generate", "--hurst", "0.7", "--steps", "64", "--out", &f]).status.success());
    let o = fracbm(&["ito", "--input", &format!("{f}/path_0000.csv"), "--out", &dir]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_records_and_summary() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "v");
    let o = fracbm(&["verify", "--suite", "E3,E7", "--out", &dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: Value = serde_json::from_slice(&fs::read(Path::new(&dir).join("E3.json")).unwrap()).unwrap();
    assert_eq!(rec["verdict"], "pass");
    let summary = fs::read_to_string(Path::new(&dir).join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("experiment,check,target,estimate,tolerance,comparison,verdict"));
    assert!(lines.all(|l| l.ends_with(",pass")));
    let m = manifest(Path::new(&dir));
    assert_eq!(m["verdicts"][1]["experiment"], "E7");
    assert_eq!(m["verdicts"][1]["verdict"], "pass");
    assert_manifest_complete(Path::new(&dir));
}

#[test]
fn verify_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let o = fracbm(&["verify", "--suite", "E99", "--out", &out(&tmp, "bad")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("E99"));

    // Twenty replicates cannot resolve the covariance to 0.05.
    let dir = out(&tmp, "small");
    let o = fracbm(&["verify", "--suite", "E4", "--replicates", "20", "--out", &dir]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let summary = fs::read_to_string(Path::new(&dir).join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with(",fail"));
    assert_eq!(manifest(Path::new(&dir))["verdicts"][0]["verdict"], "fail");
}

#[test]
fn reduced_full_suite_produces_a_verdict_for_every_experiment() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "reduced");
    let o = fracbm(&["verify", "--suite", "all", "--replicates", "100", "--out", &dir]);
    // Covariance to 0.05 is out of reach at 100 paths, so the run flags failures.
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let m = manifest(Path::new(&dir));
    let verdicts = m["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 12);
    for (k, v) in verdicts.iter().enumerate() {
        assert_eq!(v["experiment"], format!("E{}", k + 1));
        assert_ne!(v["verdict"], "error", "{v}");
        assert!(Path::new(&dir).join(format!("E{}.json", k + 1)).exists());
    }
    assert_manifest_complete(Path::new(&dir));
}
