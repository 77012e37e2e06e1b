use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sgm_core::sgm::run;
use sgmlab::artifacts::{Manifest, ManifestKind, Status, MANIFEST};
use sgmlab::config::ExperimentConfig;
use sgmlab::experiment::run_experiment;
use sgmlab::resolve_output_dir;
use sgmlab::snapshot::{read_sgm_history, write_sgm_history};
use sgmlab::sweep::{replay, sweep, DEFAULT_ALPHAS};
use tempfile::TempDir;

const RUN: &str = r#"
mode = "sgm-run"

[solver]
alpha = 2.0
dt = 1e-3
t_end = 0.2
grid = { n = 32 }
snapshot_stride = 5
seed = 3
initial = { kind = "random_phases", kmin = 1, kmax = 3, h2_norm = 1.0 }
forcing = { kind = "modes", modes = [{ k = 2, amplitude = 0.3 }] }

[diagnostics]
radii = [0.5, 0.25, 0.125]
centers = [[1.0, 0.1]]
"#;

fn sgmlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgmlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SGMLAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn history_roundtrips_bit_for_bit() {
    let cfg = ExperimentConfig::from_toml(RUN).unwrap();
    let hist = run(cfg.solver().unwrap()).unwrap();
    let tmp = TempDir::new().unwrap();
    let files = write_sgm_history(tmp.path(), &hist).unwrap();
    assert_eq!(files.len(), hist.len() + 1);
    let back = read_sgm_history(tmp.path()).unwrap();
    assert_eq!(back.times(), hist.times());
    assert_eq!(back.alpha(), hist.alpha());
    assert_eq!(back.forcing(), hist.forcing());
    for (a, b) in back.snapshots().iter().zip(hist.snapshots()) {
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
    let (ta, tb) = (back.trace().unwrap(), hist.trace().unwrap());
    assert_eq!(ta.l2_sq, tb.l2_sq);
    assert_eq!(ta.hxx_sq, tb.hxx_sq);
}

#[test]
fn run_writes_indexed_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "smooth.toml", RUN);
    let o = sgmlab(&["run", cfg.to_str().unwrap(), "--jobs", "2"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("sgmlab-out/smooth");
    let m = Manifest::load(&out.join(MANIFEST)).unwrap();
    assert_eq!(m.status, Status::Complete);
    assert_eq!(m.kind, ManifestKind::Experiment);
    assert_eq!(m.mode, "sgm-run");
    for f in &m.files {
        let bytes = fs::read(out.join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes, "{}", f.path);
        assert_eq!(sgmlab::artifacts::sha256_hex(&bytes), f.sha256);
    }
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for want in [
        "exponents.csv",
        "quantities.csv",
        "summary.json",
        "trace.csv",
        "history/history.json",
        "history/snapshots/00000.sgm",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    // 3 radii x 9 quantities at one center
    let rows = csv_rows(&out.join("quantities.csv"));
    assert_eq!(rows.len(), 27);
    assert!(rows.iter().all(|r| r[0] == "1" && r[1] == "0.1"));
}

#[test]
fn config_errors_exit_2_with_location() {
    let tmp = TempDir::new().unwrap();
    let bad = write_config(
        tmp.path(),
        "bad.toml",
        &RUN.replace("dt = 1e-3", "dt = = 1e-3"),
    );
    let o = sgmlab(&["run", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));

    let neg = write_config(
        tmp.path(),
        "neg.toml",
        &RUN.replace("dt = 1e-3", "dt = -1e-3"),
    );
    let o = sgmlab(&["run", neg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solver"), "{}", stderr(&o));

    let radii = write_config(
        tmp.path(),
        "radii.toml",
        &RUN.replace("[0.5, 0.25, 0.125]", "[0.5, -0.25]"),
    );
    let o = sgmlab(&["run", radii.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("diagnostics.radii"), "{}", stderr(&o));
    // nothing was computed or written
    assert!(!tmp.path().join("sgmlab-out").exists());

    let o = sgmlab(&["run", "missing.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn collisions_need_force_and_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", RUN);
    let c = cfg.to_str().unwrap();
    assert!(sgmlab(&["run", c, "--out", "o"], tmp.path())
        .status
        .success());
    let o = sgmlab(&["run", c, "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("--force"));
    assert!(sgmlab(&["run", c, "--out", "o", "--force"], tmp.path())
        .status
        .success());

    let foreign = tmp.path().join("foreign");
    fs::create_dir(&foreign).unwrap();
    fs::write(foreign.join("keep.txt"), "mine").unwrap();
    let o = sgmlab(&["run", c, "--out", "foreign", "--force"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(
        fs::read_to_string(foreign.join("keep.txt")).unwrap(),
        "mine"
    );
}

#[test]
fn output_directory_precedence() {
    let cfg = ExperimentConfig::from_toml(RUN).unwrap();
    let p = Path::new("configs/a.toml");
    assert_eq!(
        resolve_output_dir(None, &cfg, p, None),
        PathBuf::from("sgmlab-out/a")
    );
    assert_eq!(
        resolve_output_dir(None, &cfg, p, Some(Path::new("/r"))),
        PathBuf::from("/r/a")
    );
    let mut with_dir = cfg.clone();
    with_dir.output_dir = Some("fixed".into());
    assert_eq!(
        resolve_output_dir(None, &with_dir, p, Some(Path::new("/r"))),
        PathBuf::from("fixed")
    );
    assert_eq!(
        resolve_output_dir(Some(Path::new("cli")), &with_dir, p, None),
        PathBuf::from("cli")
    );
}

#[test]
fn env_root_is_honored() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "env.toml", RUN);
    let o = Command::new(env!("CARGO_BIN_EXE_sgmlab"))
        .args(["run", cfg.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("SGMLAB_OUT", tmp.path().join("root"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("root/env").join(MANIFEST).is_file());
}

#[test]
fn empty_horizon_gives_one_snapshot_and_empty_reports() {
    let text = RUN
        .replace("t_end = 0.2", "t_end = 0.0")
        .replace("centers = [[1.0, 0.1]]", "");
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    let tmp = TempDir::new().unwrap();
    let o = run_experiment(&cfg, &tmp.path().join("o"), false).unwrap();
    assert_eq!(o.exit_code, 0);
    assert_eq!(o.manifest.status, Status::Complete);
    let hist = read_sgm_history(&o.dir.join("history")).unwrap();
    assert_eq!(hist.len(), 1);
    assert_eq!(hist.times(), &[0.0]);
    assert!(csv_rows(&o.dir.join("quantities.csv")).is_empty());
    let header = fs::read_to_string(o.dir.join("quantities.csv")).unwrap();
    assert_eq!(header, "x0,t0,r,quantity_id,value\n");
    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(o.dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["snapshots"], 1);
    assert!(s["energy_residual"].is_null());
    assert_eq!(s["ladders"].as_array().unwrap().len(), 0);
    assert_eq!(s["exponents"].as_array().unwrap().len(), 10);
}

#[test]
fn blow_up_keeps_partial_artifacts_and_exits_3() {
    let text = RUN
        .replace(
            "forcing = { kind = \"modes\", modes = [{ k = 2, amplitude = 0.3 }] }",
            "forcing = { kind = \"modes\", modes = [{ k = 1, amplitude = 1000.0 }] }\nsup_ceiling = 5.0",
        )
        .replace("centers = [[1.0, 0.1]]", "");
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "boom.toml", &text);
    let o = sgmlab(&["run", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let out = tmp.path().join("o");
    let m = Manifest::load(&out.join(MANIFEST)).unwrap();
    assert_eq!(m.status, Status::Partial);
    assert!(m.error.unwrap().contains("blow-up"));
    let hist = read_sgm_history(&out.join("history")).unwrap();
    assert!(!hist.is_empty());
    assert!(hist.t_last() < 0.2);
}

#[test]
fn sweep_makes_one_manifest_per_alpha_and_one_summary() {
    let cfg = ExperimentConfig::from_toml(RUN).unwrap();
    let tmp = TempDir::new().unwrap();
    let alphas: Vec<String> = DEFAULT_ALPHAS.iter().map(|s| s.to_string()).collect();
    let o = sweep(&cfg, &alphas, &tmp.path().join("sw"), false).unwrap();
    assert_eq!(o.exit_code, 0);
    assert_eq!(o.items.len(), 5);
    let manifests: Vec<PathBuf> = fs::read_dir(&o.dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .map(|p| p.join(MANIFEST))
        .filter(|p| p.is_file())
        .collect();
    assert_eq!(manifests.len(), 5);
    assert!(o.dir.join("sweep_summary.json").is_file());
    assert_eq!(o.manifest.kind, ManifestKind::Sweep);

    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(o.dir.join("sweep_summary.json")).unwrap()).unwrap();
    let items = s["items"].as_array().unwrap();
    assert_eq!(items.len(), 5);
    for it in items {
        let a = it["alpha_value"].as_f64().unwrap();
        let want = (3.0 * a - 5.0) / (a - 1.0);
        assert!((it["singular_set_exponent"].as_f64().unwrap() - want).abs() < 1e-14);
        assert_eq!(it["summary"]["alpha"].as_f64().unwrap(), a);
    }
    let rows = csv_rows(&o.dir.join("exponents.csv"));
    let sing = |label: &str| {
        rows.iter()
            .find(|r| r[0] == label && r[2] == "singular_set")
            .map(|r| r[4].clone())
            .unwrap()
    };
    assert_eq!(sing("2"), "1");
    assert_eq!(sing("5/3"), "0");
    assert_eq!(sing("2.2"), "4/3");
}

#[test]
fn critical_alpha_is_rejected_before_compute() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", RUN);
    let o = sgmlab(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--alphas",
            "2,7/3",
            "--out",
            "sw",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("critical case"), "{}", stderr(&o));
    assert!(!tmp.path().join("sw").exists());
}

#[test]
fn sweeps_reject_mns_configurations() {
    let text = r#"
mode = "mns-run"
[mns]
n = 16
alpha = 2.0
dt = 1e-2
t_end = 0.02
initial = { kind = "taylor_green", amplitude = 1.0 }
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let tmp = TempDir::new().unwrap();
    let err = sweep(&cfg, &["2".into()], &tmp.path().join("o"), false).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn replay_is_bit_exact_and_detects_tampering() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "r.toml", RUN);
    assert!(
        sgmlab(&["run", cfg.to_str().unwrap(), "--out", "a"], tmp.path())
            .status
            .success()
    );
    let o = sgmlab(&["replay", "a"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("a-replay").join(MANIFEST).is_file());

    // a recorded digest that no rerun can match
    let path = tmp.path().join("a").join(MANIFEST);
    let mut m = Manifest::load(&path).unwrap();
    let f = m.files.iter_mut().find(|f| f.path == "trace.csv").unwrap();
    f.sha256 = "0".repeat(64);
    fs::write(&path, serde_json::to_vec_pretty(&m).unwrap()).unwrap();
    let r = replay(&tmp.path().join("a"), &tmp.path().join("b"), false).unwrap();
    assert_eq!(r.mismatches.len(), 1);
    assert_eq!(r.mismatches[0].path, "trace.csv");
    assert_eq!(r.exit_code(), 1);
    let o = sgmlab(&["replay", "a", "--out", "c"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scan_and_check_subcommands_force_their_mode() {
    let tmp = TempDir::new().unwrap();
    let text = format!(
        "{RUN}lattice = {{ nx = 4, nt = 2, t_lo = 0.08, t_hi = 0.12 }}\n\n[suite]\nalphas = [2.0]\nruns = 1\ncylinders = [[3.0, 0.1, 0.5]]\nwindow = [0.05, 0.15]\ncancellation_fields = 3\n"
    );
    let cfg = write_config(tmp.path(), "m.toml", &text);
    let c = cfg.to_str().unwrap();
    let o = sgmlab(&["scan", c, "--out", "scan"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let verdicts = csv_rows(&tmp.path().join("scan/verdicts.csv"));
    assert_eq!(verdicts.len(), 4 * 2 * 4);
    assert!(verdicts
        .iter()
        .all(|r| r[4] == "REGULAR-INDICATED" || r[4] == "UNDETERMINED"));

    let o = sgmlab(&["check", c, "--out", "check"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("check/verdicts.csv"));
    let count = |name: &str| rows.iter().filter(|r| r[3] == name).count();
    // 1 cylinder x 2 Poincare exponents, each with a keypoin row
    assert_eq!(count("poincare"), 2);
    assert_eq!(count("keypoin"), 2);
    assert_eq!(count("inter1"), 1);
    assert_eq!(count("inter2"), 2);
    assert_eq!(count("biharmonic"), 1);
    assert_eq!(count("cancellation"), 3);
    assert!(tmp.path().join("check/suite_manifest.json").is_file());
    let m = Manifest::load(&tmp.path().join("check").join(MANIFEST)).unwrap();
    assert_eq!(m.mode, "inequalities");
}

#[test]
fn mns_run_writes_identities() {
    let text = r#"
mode = "mns-run"
[mns]
n = 16
alpha = 2.0
dt = 1e-2
t_end = 0.05
initial = { kind = "taylor_green", amplitude = 1.0 }

[diagnostics]
radii = [0.2, 0.1]
centers = [[3.14, 3.14, 3.14, 0.05]]
serrin_q = 4.0
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    let tmp = TempDir::new().unwrap();
    let o = run_experiment(&cfg, &tmp.path().join("m"), false).unwrap();
    assert_eq!(o.exit_code, 0);
    let ids = csv_rows(&o.dir.join("identities.csv"));
    assert_eq!(ids.len(), 6);
    for r in &ids {
        let div: f64 = r[1].parse().unwrap();
        let (c, s): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(div <= 1e-12);
        assert!(c.abs() <= 1e-10 * s.max(f64::MIN_POSITIVE));
    }
    let q = csv_rows(&o.dir.join("quantities.csv"));
    assert_eq!(q.len(), 8);
    assert!(q.iter().all(|r| r[0] == "3.14 3.14 3.14" && r[5] == "2"));
    assert_eq!(csv_rows(&o.dir.join("serrin.csv")).len(), 6);
    let back = sgmlab::snapshot::read_mns_history(&o.dir.join("history")).unwrap();
    assert_eq!(back.len(), 6);
}

#[test]
fn csv_headers_match_published_tables() {
    let tables: serde_json::Value = serde_json::from_str(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schemas/tables.json"
    )))
    .unwrap();
    let tmp = TempDir::new().unwrap();
    let suite = "lattice = { nx = 2, nt = 1, t_lo = 0.1, t_hi = 0.1 }\n\n[suite]\nalphas = [2.0]\nruns = 1\ncylinders = [[3.0, 0.1, 0.5]]\nwindow = [0.05, 0.15]\ncancellation_fields = 1\n";
    let mut dirs = Vec::new();
    for mode in ["sgm-run", "scan", "scaling-check", "inequalities"] {
        let text =
            format!("{RUN}{suite}").replace("mode = \"sgm-run\"", &format!("mode = \"{mode}\""));
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let o = run_experiment(&cfg, &tmp.path().join(mode), false).unwrap();
        dirs.push((mode.to_string(), o.manifest, o.dir));
    }
    let mns = ExperimentConfig::from_toml(
        "mode = \"mns-run\"\n[mns]\nn = 16\nalpha = 2.0\ndt = 1e-2\nt_end = 0.02\ninitial = { kind = \"taylor_green\", amplitude = 1.0 }\n[diagnostics]\nradii = [0.1]\nserrin_q = 4.0\n",
    )
    .unwrap();
    let o = run_experiment(&mns, &tmp.path().join("mns"), false).unwrap();
    dirs.push(("mns-run".into(), o.manifest, o.dir));
    let cfg = ExperimentConfig::from_toml(RUN).unwrap();
    let sw = sweep(&cfg, &["2".into()], &tmp.path().join("sw"), false).unwrap();
    dirs.push(("sweep".into(), sw.manifest, sw.dir));

    for (mode, manifest, dir) in dirs {
        let want = tables[&mode].as_object().unwrap();
        // nested per-alpha tables of a sweep are checked under their own mode
        let own: Vec<_> = manifest
            .csv_files()
            .filter(|f| !f.path.contains('/'))
            .collect();
        assert_eq!(own.len(), want.len(), "{mode}: {:?}", own);
        for f in own {
            let cols: Vec<String> = want[&f.path]
                .as_array()
                .unwrap_or_else(|| panic!("{mode}/{} undocumented", f.path))
                .iter()
                .map(|c| c.as_str().unwrap().to_string())
                .collect();
            let mut r = csv::Reader::from_path(dir.join(&f.path)).unwrap();
            let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
            assert_eq!(header, cols, "{mode}/{}", f.path);
        }
    }
}
