use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = "n_max = 3\nn_exact = 2\nextent = 20\nhorizon = 40\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    fs::write(dir.join("run.toml"), config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_susyrg"))
        .current_dir(dir)
        .args(args)
        .args([
            "--config",
            "run.toml",
            "--cache-dir",
            "cache",
            "--out-dir",
            "out",
        ])
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn decompose_writes_tables_and_reuses_them() {
    let d = TempDir::new().unwrap();
    let first = run(d.path(), SMALL, &["decompose"]);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let names: Vec<String> = fs::read_dir(d.path().join("cache"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("gamma-")).count(), 4);
    assert_eq!(names.iter().filter(|n| n.starts_with("direct-")).count(), 5);
    for n in &names {
        assert_eq!(
            &fs::read(d.path().join("cache").join(n)).unwrap()[..4],
            b"FRDC"
        );
    }
    let report = fs::read(d.path().join("out/decompose.json")).unwrap();
    assert!(stdout(&first).contains("0 cache hits, 9 tables computed"));

    let second = run(d.path(), SMALL, &["decompose"]);
    assert_eq!(second.status.code(), Some(0));
    assert!(
        stdout(&second).contains("9 cache hits, 0 tables computed"),
        "{}",
        stdout(&second)
    );
    assert_eq!(
        fs::read(d.path().join("out/decompose.json")).unwrap(),
        report
    );

    let v = json(&d.path().join("out/decompose.json"));
    assert_eq!(v["n_max"], 3);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert!(v["reconstruction_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["residuals"].as_array().unwrap().len(), 4);
}

#[test]
fn corrupted_cache_exits_with_the_path() {
    let d = TempDir::new().unwrap();
    assert!(run(d.path(), SMALL, &["decompose"]).status.success());
    let victim = fs::read_dir(d.path().join("cache"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().contains("gamma-"))
        .unwrap();
    let mut bytes = fs::read(&victim).unwrap();
    bytes[..4].copy_from_slice(b"JUNK");
    fs::write(&victim, bytes).unwrap();
    let out = run(d.path(), SMALL, &["decompose"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains(victim.file_name().unwrap().to_str().unwrap()),
        "{err}"
    );
    assert!(err.contains("bad magic"));
}

#[test]
fn tolerance_failure_and_bad_config_exit_codes() {
    let d = TempDir::new().unwrap();
    let out = run(
        d.path(),
        &format!("{SMALL}tol_decompose = 1e-30\n"),
        &["decompose"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run(
        d.path(),
        &format!("{SMALL}tolerance = 1e-3\n"),
        &["decompose"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
    let out = run(d.path(), SMALL, &["decompose", "--method", "newton"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flow_csv_is_complete_and_deterministic() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), SMALL, &["flow"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(d.path().join("out/flow.csv")).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with(&format!("# susyrg {} config ", env!("CARGO_PKG_VERSION"))));
    assert_eq!(
        lines.next().unwrap(),
        "n,a_n,b_n,g_n,mu_n,in_domain,margin_g,margin_mu,margin_r"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41);
    for (i, r) in rows.iter().enumerate() {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f.len(), 9);
        assert_eq!(f[0], i.to_string());
        assert!(f[1].parse::<f64>().unwrap() > 0.0 && f[2].parse::<f64>().unwrap() > 0.0);
    }
    assert!(text.ends_with('\n') && !text.contains('\r'));
    fs::remove_dir_all(d.path().join("out")).unwrap();
    assert!(run(d.path(), SMALL, &["flow"]).status.success());
    assert_eq!(
        fs::read_to_string(d.path().join("out/flow.csv")).unwrap(),
        text
    );
}

#[test]
fn critical_methods_agree() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), SMALL, &["critical", "--method", "all"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&d.path().join("out/critical.json"));
    let results = v["results"].as_array().unwrap();
    let methods: Vec<&str> = results
        .iter()
        .map(|r| r["method"].as_str().unwrap())
        .collect();
    assert_eq!(methods, ["backward-sum", "contraction", "bisection"]);
    let mus: Vec<f64> = results
        .iter()
        .map(|r| r["mu_critical"].as_f64().unwrap())
        .collect();
    assert!(mus[0] > 0.0);
    let worst = v["max_pairwise_relative_difference"].as_f64().unwrap();
    for a in &mus {
        for b in &mus {
            assert!((a - b).abs() <= worst * a.abs().max(b.abs()) * (1.0 + 1e-12));
        }
    }
    assert!(worst <= 1e-8);
    for m in methods {
        let csv = fs::read_to_string(d.path().join(format!("out/critical-{m}.csv"))).unwrap();
        assert!(csv.starts_with("# susyrg "));
        assert_eq!(csv.lines().count(), 2 + 41);
    }
    let report = fs::read(d.path().join("out/critical.json")).unwrap();
    assert!(run(d.path(), SMALL, &["critical", "--method", "all"])
        .status
        .success());
    assert_eq!(
        fs::read(d.path().join("out/critical.json")).unwrap(),
        report
    );
}

#[test]
fn critical_smoke_runs_and_solver_failure() {
    let d = TempDir::new().unwrap();
    let out = run(
        d.path(),
        &format!("{SMALL}rho_off = true\n"),
        &["critical", "--method", "backward"],
    );
    assert!(out.status.success());
    let v = json(&d.path().join("out/critical.json"));
    assert_eq!(v["results"][0]["mu_critical"].as_f64(), Some(0.0));
    let out = run(
        d.path(),
        &format!("{SMALL}bracket_lo = 0.5\n"),
        &["critical", "--method", "bisection"],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn verify_suites_are_green() {
    let d = TempDir::new().unwrap();
    let out = run(d.path(), "", &["verify", "--suite", "susy"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(
        text.contains("PASS susy/integral-localizes")
            && text.contains("PASS susy/q-squared")
            && text.contains("PASS susy/dilation")
    );
    let out = run(d.path(), "", &["verify", "--suite", "localization"]);
    assert!(out.status.success());
    let v = json(&d.path().join("out/verify-localization.json"));
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    let out = run(d.path(), "", &["verify", "--suite", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
    let out = run(d.path(), "", &["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}
