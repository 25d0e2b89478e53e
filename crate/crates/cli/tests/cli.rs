use std::path::Path;
use std::process::{Command, Output};

use noisemix_cli::config::parse_config;

fn noisemix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisemix")).args(args).output().unwrap()
}

fn noisemix_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisemix")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn figure_writes_nine_curves_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fig1a");
    let o = noisemix(&["figure", "fig1a", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> =
        std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| n.ends_with(".csv")).count(), 9);
    assert!(names.contains(&"manifest.json".to_string()));
    assert_eq!(names.len(), 10, "{names:?}");

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    let curves = manifest["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 9);
    // Every curve file listed exists; the relaxation-only curve is shared.
    for c in curves {
        assert!(dir.join(c["file"].as_str().unwrap()).exists());
    }
    assert_eq!(curves.iter().filter(|c| c.get("identical_to").is_some()).count(), 2);
    let claims = manifest["claims"].as_array().unwrap();
    assert!(claims.iter().any(|c| c["variant"] == "haar_integral" && c["satisfied"] == true));

    let csv = std::fs::read_to_string(dir.join("fig1a_Gamma_alpha_4_C.csv")).unwrap();
    assert!(csv.starts_with("t,paper_formula,haar_integral\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 8002);
}

#[test]
fn fig3_writes_the_region_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = noisemix(&["figure", "fig3", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(tmp.path().join("fig3_regions.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 100 * 60);
    for code in ["i", "ii", "iii", "iv"] {
        assert!(table.lines().any(|l| l.split(',').nth(2) == Some(code)), "region {code} missing");
    }
    let manifest = std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"legend\""));
}

#[test]
fn seeded_trajectories_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = tmp.path().join(name);
        let o = noisemix(&["trajectories", "--seed", "7", "--n", "100", "--threads", threads, "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "2");
    let b = run("b.csv", "2");
    let c = run("c.csv", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,fidelity_mean,fidelity_std_err,closed_form\n"));
    let other = noisemix(&["trajectories", "--seed", "8", "--n", "100"]);
    assert_ne!(other.stdout, text.as_bytes());
}

#[test]
fn coefficient_comparison_mode_reports_the_difference() {
    let o = noisemix(&["coeff", "--kernel", "ou", "--gamma", "0.5", "--strength", "1", "--compare"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    let sup: f64 = err.trim().strip_prefix("sup_norm_difference = ").unwrap().parse().unwrap();
    assert!(sup <= 1e-4, "{sup}");
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("t,riccati_re,riccati_im,volterra_re,volterra_im,abs_diff\n"));

    let o = noisemix(&["coeff", "--kernel", "composite", "--compare"]);
    assert_eq!(o.status.code(), Some(1), "Riccati needs an exponential kernel");
}

#[test]
fn exit_codes() {
    assert_eq!(noisemix(&["kernel"]).status.code(), Some(0));
    assert_eq!(noisemix(&["--help"]).status.code(), Some(0));
    assert_eq!(noisemix(&["kernel", "--strength", "-1"]).status.code(), Some(1));
    assert!(stderr(&noisemix(&["kernel", "--strength", "-1"])).contains("kernel.strength"));
    assert_eq!(noisemix(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(noisemix(&["figure", "fig9", "--out", "x"]).status.code(), Some(1));
    assert_eq!(noisemix(&["average-fidelity", "--system", "lambda"]).status.code(), Some(1));
    // A kernel far too strong for the step size overflows the integrator.
    let o = noisemix(&["coeff", "--strength", "1e6", "--gamma", "1e3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn failures_leave_no_files_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let o = noisemix_in(tmp.path(), &["coeff", "--strength", "1e6", "--gamma", "1e3", "--out", "f.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = noisemix_in(tmp.path(), &["kernel", "--out", "missing/dir/k.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn config_files_are_strict_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "system = \"lambda\"\nomega = 1.0\n\n[kernel]\ntype = \"markov_dephased_ou\"\ndephasing_strength = 2.0\nbeta = { strength = 1.0, memory_rate = 0.1 }\n\n[ensemble]\ncount = 50\nseed = 3\n",
    )
    .unwrap();
    let o = noisemix(&["config", "--config", cfg.to_str().unwrap(), "--dt", "0.002"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let emitted = String::from_utf8(o.stdout).unwrap();
    let parsed = parse_config(&emitted).unwrap();
    assert_eq!(parsed.grid.dt, 0.002);
    assert_eq!(parsed.ensemble.unwrap().count, 50);
    // Emitting the re-parsed configuration is a fixed point.
    let again = tmp.path().join("again.toml");
    std::fs::write(&again, &emitted).unwrap();
    let o = noisemix(&["config", "--config", again.to_str().unwrap()]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), emitted);

    std::fs::write(&cfg, "sytem = \"qubit\"\n").unwrap();
    let o = noisemix(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sytem"));
}

#[test]
fn evolve_and_fidelity_agree() {
    let evolve = noisemix(&["evolve", "--state", "1,0:1", "--horizon", "2"]);
    let fid = noisemix(&["fidelity", "--state", "1,0:1", "--horizon", "2"]);
    assert!(evolve.status.success() && fid.status.success());
    let evolve = String::from_utf8(evolve.stdout).unwrap();
    let fid = String::from_utf8(fid.stdout).unwrap();
    assert!(evolve.starts_with("t,trace,fidelity,rho00_re,rho00_im,rho01_re,rho01_im,rho11_re,rho11_im\n"));
    for (e, f) in evolve.lines().skip(1).zip(fid.lines().skip(1)) {
        let e: Vec<f64> = e.split(',').map(|x| x.parse().unwrap()).collect();
        let f: Vec<f64> = f.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((e[2] - f[1]).abs() <= 1e-6);
        assert!((e[1] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn json_output() {
    let o = noisemix(&["average-fidelity", "--variant", "haar-integral", "--horizon", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["t", "haar_integral"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 1001);
    assert_eq!(v["rows"][0][1], 1.0);
}
