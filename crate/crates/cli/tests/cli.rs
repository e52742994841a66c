use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_copula-pmi");

// Seeds for the simulated independence sample: the sample itself and the bootstrap.
const PI_SAMPLE_SEED: u64 = 2024;
const PI_TEST_SEED: u64 = 7;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn faithful() -> String {
    root().join("data/faithful.csv").display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("COPULA_PMI_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output, schema: &str) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    });
    let text = std::fs::read_to_string(root().join("schemas").join(schema)).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
    v
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn check_gaussian_passes() {
    let o = run(&["check", "--family", "gaussian", "--rho", "0.5", "--criterion", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o, "check.json");
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn check_frechet_nmi() {
    let o = run(&["check", "--family", "frechet", "--alpha", "0.2", "--beta", "0.6", "--direction", "nmi", "--criterion", "volume"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o, "check.json")["passed"], true);

    let o = run(&["check", "--family", "frechet", "--alpha", "0.6", "--beta", "0.2", "--direction", "nmi", "--criterion", "volume"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o, "check.json")["passed"], false);
}

#[test]
fn check_rejects_bad_parameter() {
    let o = run(&["check", "--family", "gaussian", "--rho", "1.5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parameter out of range"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    let o = run(&["check", "--family", "gaussian"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--rho"));
}

#[test]
fn estimate_faithful() {
    let f = faithful();
    let o = run(&["estimate", "--input", &f, "--ties", "jitter", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o, "estimate.json");
    assert_eq!(v["n"], 272);
    assert_eq!(v["jittered"], true);
    let est = v["estimates"].as_array().unwrap();
    assert_eq!(est.len(), 6);
    let rho: Vec<f64> = est
        .iter()
        .filter(|e| e["measure"] == "rho")
        .map(|e| e["value"].as_f64().unwrap())
        .collect();
    assert_eq!(rho.len(), 2);
    assert!((rho[0] - rho[1]).abs() < 1e-12);
    assert!(rho[0] > 0.7 && rho[0] < 0.85, "{rho:?}");

    let again = run(&["estimate", "--input", &f, "--ties", "jitter", "--seed", "3"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn estimate_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let short = write(dir.path(), "short.csv", "x,y\n0.1,0.2\n0.4,0.3\n0.9,0.8\n");
    let o = run(&["estimate", "--input", &short]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("too few observations"), "{}", stderr(&o));

    let tied = write(dir.path(), "tied.csv", "1,5\n2,6\n2,7\n3,8\n4,9\n");
    let o = run(&["estimate", "--input", &tied, "--ties", "error"]);
    assert_eq!(code(&o), 2);
    let msg = stderr(&o);
    assert!(msg.contains("ties") && msg.contains("column 1"), "{msg}");
    assert!(msg.contains('1') && msg.contains('2'), "{msg}");

    let bad = write(dir.path(), "bad.csv", "a,b\n1,2\n3,x\n5,6\n7,8\n9,1\n");
    let o = run(&["estimate", "--input", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let missing = write(dir.path(), "na.csv", "1,2\n3,NA\n5,6\n7,8\n9,1\n2,3\n");
    let o = run(&["estimate", "--input", &missing, "--measure", "rho"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o, "estimate.json")["n"], 5);
}

#[test]
fn test_faithful_pmi_is_not_rejected() {
    let f = faithful();
    let args = ["test", "--input", &f, "--ties", "jitter", "--pair", "T1", "--direction", "pmi", "--seed", "11"];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o, "test.json");
    let r = &v["results"][0];
    assert_eq!(r["pair"], "T1");
    assert_eq!(r["reject"], false);
    assert_eq!(r["seed"], 11);
    assert_eq!(r["replicates"], 1000);
    let t = r["statistic"].as_f64().unwrap();
    assert!(t < -8.0, "{t}");
    assert_eq!(run(&args).stdout, o.stdout);
}

#[test]
fn test_faithful_nmi_rejects_all() {
    let f = faithful();
    let o = run(&["test", "--input", &f, "--ties", "jitter", "--direction", "nmi", "--seed", "11"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let v = json(&o, "test.json");
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!(results.iter().all(|r| r["reject"] == true));
}

#[test]
fn test_independent_sample_is_not_rejected() {
    let pi = copula_pmi::copula::independence();
    let sample = copula_pmi::copula::sample(&pi, 250, PI_SAMPLE_SEED).unwrap();
    let body: String = sample.iter().map(|(u, v)| format!("{u},{v}\n")).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pi.csv", &body);
    let seed = PI_TEST_SEED.to_string();
    let o = run(&["test", "--input", &path, "--pair", "T1", "--seed", &seed]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o, "test.json")["results"][0]["reject"], false);
}

#[test]
fn generated_seed_is_reported() {
    let f = faithful();
    let o = run(&["estimate", "--input", &f, "--ties", "jitter", "--measure", "rho", "--estimator", "ec"]);
    assert_eq!(code(&o), 0);
    let v = json(&o, "estimate.json");
    let seed = v["seed"].as_u64().unwrap().to_string();
    let replay = run(&["estimate", "--input", &f, "--ties", "jitter", "--measure", "rho", "--estimator", "ec", "--seed", &seed]);
    assert_eq!(replay.stdout, o.stdout);
}

#[test]
fn simulate_smoke_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smoke.csv").display().to_string();
    let args = [
        "simulate", "--study", "rejection", "--family", "gaussian", "--params", "-0.5", "--n", "40",
        "--reps", "20", "--replicates", "100", "--seed", "5", "--out", &out,
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o, "simulate.json");
    assert_eq!(v["rows"], 6);
    let first = std::fs::read_to_string(&out).unwrap();
    let mut lines = first.lines();
    assert_eq!(lines.next().unwrap(), "family,param,n,pair,kind,rate,stderr,rejections,repetitions");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|l| l.split(',').count() == 9 && l.starts_with("gaussian,-0.5,40,")));

    std::fs::remove_file(&out).unwrap();
    let o = run(&args);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn simulate_size_under_independence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("size.csv").display().to_string();
    let o = run(&[
        "simulate", "--study", "rejection", "--family", "frank", "--params", "0", "--n", "250", "--reps", "200",
        "--pairs", "T1", "--estimator", "ec", "--seed", "17", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    json(&o, "simulate.json");
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rates: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap().get(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rates.len(), 1);
    assert!((0.01..=0.09).contains(&rates[0]), "{rates:?}");
}

#[test]
fn simulate_variance_study() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("var.csv").display().to_string();
    let o = run(&[
        "simulate", "--study", "variance", "--family", "fgm", "--params", "0.5", "--n", "30", "--reps", "20",
        "--replicates", "100", "--pairs", "T2", "--estimator", "ecc", "--seed", "1", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o, "simulate.json")["rows"], 20);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("family,param,n,pair,kind,rep,variance\n"));
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv").display().to_string();
    let o = run(&["simulate", "--study", "rejection", "--family", "frank", "--params", "1", "--n", "50", "--reps", "5", "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(!Path::new(&out).exists());
}

#[test]
fn bad_thread_variable_is_an_error() {
    let o = Command::new(BIN)
        .args(["check", "--family", "independence", "--criterion", "pqd", "--grid", "10"])
        .env("COPULA_PMI_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
