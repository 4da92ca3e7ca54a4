use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crestwave::waterwave::read_checkpoint;

fn crestwave(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crestwave"));
    cmd.args(args).current_dir(dir);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Data rows of a schema-tagged CSV, header excluded.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema: crestwave/"));
    lines
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const FLAT: &str =
    "[grid]\nn_points = 64\n[physics]\nsigma = 0.01\nmax_steps = 100\nt_final = 100.0\n";

#[test]
fn flat_state_keeps_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("flat.toml"), FLAT).unwrap();
    let out = crestwave(
        &["simulate", "--config", "flat.toml", "--out", "run"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let energies = rows(&dir.path().join("run/energies.csv"));
    assert!(!energies.is_empty());
    assert!(energies.iter().all(|r| r[4].parse::<f64>().unwrap() == 0.0));
    assert_eq!(json(&dir.path().join("run/summary.json"))["steps"], 100);
}

#[test]
fn oversized_fixed_step_is_a_cfl_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("flat.toml"),
        format!("{FLAT}[output]\nfixed_dt = 10.0\n"),
    )
    .unwrap();
    let out = crestwave(
        &["simulate", "--config", "flat.toml", "--out", "run"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("CFL"));
}

#[test]
fn invalid_config_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\nn_points = 7\nlength = -1.0\n[physics]\nsigma = -0.5\n";
    fs::write(dir.path().join("bad.toml"), text).unwrap();
    let out = crestwave(
        &["validate-config", "--config", "bad.toml"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["grid.n_points", "grid.length", "physics.sigma"] {
        assert!(err.contains(key), "{key} missing from {err}");
    }

    fs::write(dir.path().join("typo.toml"), "[grid]\nn_point = 64\n").unwrap();
    let out = crestwave(&["simulate", "--config", "typo.toml"], dir.path(), &[]);
    assert_eq!(code(&out), 2);
}

#[test]
fn identical_pair_has_no_difference_energy() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\nn_points = 128\n[data]\nkind = \"crest\"\nepsilon = 0.2\n\
                [physics]\nsigma = 0.0\nt_final = 0.05\n[output]\nrecord_interval = 1\n";
    fs::write(dir.path().join("pair.toml"), text).unwrap();
    let out = crestwave(
        &["pair", "--config", "pair.toml", "--out", "run"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("run/summary.json"));
    assert!(summary["sup_e_delta"].as_f64().unwrap() < 1e-20);
    let delta: Vec<_> = rows(&dir.path().join("run/pair_energies.csv"))
        .into_iter()
        .filter(|r| r[4] == "delta")
        .collect();
    assert!(delta.len() > 1);
    assert!(delta.iter().all(|r| r[6].parse::<f64>().unwrap() < 1e-20));
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\nn_points = 64\n[data]\nkind = \"random_smooth\"\n[physics]\nsigma = 0.01\nt_final = 0.3\n";
    fs::write(dir.path().join("rs.toml"), text).unwrap();
    for name in ["one", "two"] {
        let out = crestwave(
            &[
                "simulate", "--config", "rs.toml", "--out", name, "--seed", "11",
            ],
            dir.path(),
            &[],
        );
        assert_eq!(code(&out), 0);
    }
    for file in ["energies.csv", "diagnostics.csv", "final.ckpt"] {
        let a = fs::read(dir.path().join("one").join(file)).unwrap();
        let b = fs::read(dir.path().join("two").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn resuming_from_a_checkpoint_matches_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\nn_points = 64\n[data]\nkind = \"random_smooth\"\n[physics]\nsigma = 0.01\nt_final = 1.0\n\
                [output]\ncheckpoint_interval = 10\n";
    fs::write(dir.path().join("full.toml"), text).unwrap();
    let out = crestwave(
        &[
            "simulate",
            "--config",
            "full.toml",
            "--out",
            "full",
            "--seed",
            "3",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0);
    let resume =
        "[data]\nkind = \"checkpoint\"\ncheckpoint = \"full/checkpoints/step_00000010.ckpt\"\n\
                  [physics]\nt_final = 1.0\n";
    fs::write(dir.path().join("resume.toml"), resume).unwrap();
    let out = crestwave(
        &["simulate", "--config", "resume.toml", "--out", "resumed"],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let load = |p: &str| read_checkpoint(fs::File::open(dir.path().join(p)).unwrap()).unwrap();
    let (a, b) = (load("full/final.ckpt"), load("resumed/final.ckpt"));
    assert_eq!(a.time, b.time);
    let diff =
        a.zp.max_diff(&b.zp)
            .max(a.zt.max_diff(&b.zt))
            .max(a.zdev.max_diff(&b.zdev));
    assert!(diff <= 1e-12, "resumed run drifted by {diff:e}");
}

#[test]
fn small_sweep_recovers_linear_sigma_dependence() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[grid]\nn_points = 512\n[data]\nkind = \"crest\"\n[physics]\nt_final = 0.05\n\
                [study]\nsigma_list = [1e-3, 1e-4, 1e-5]\nepsilon_list = [0.1]\n";
    fs::write(dir.path().join("sweep.toml"), text).unwrap();
    let out = crestwave(
        &[
            "sweep",
            "--config",
            "sweep.toml",
            "--out",
            "study",
            "--jobs",
            "2",
        ],
        dir.path(),
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let study = json(&dir.path().join("study/study.json"));
    assert_eq!(study["all_ok"], true);
    let slope = study["slopes"]["e_delta_0_vs_sigma"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    let spread = study["growth_spread"].as_f64().unwrap();
    assert!(spread < 3.0, "growth spread {spread}");
    assert_eq!(rows(&dir.path().join("study/study_summary.csv")).len(), 3);
    assert!(dir.path().join("study/runs/run_002.csv").exists());
}

#[test]
fn environment_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("flat.toml"), FLAT).unwrap();
    let out = crestwave(
        &["simulate", "--config", "flat.toml", "--out", "run"],
        dir.path(),
        &[("CRESTWAVE_PHYSICS_MAX_STEPS", "7")],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(json(&dir.path().join("run/summary.json"))["steps"], 7);

    let out = crestwave(
        &["validate-config", "--config", "flat.toml"],
        dir.path(),
        &[("CRESTWAVE_GRID_N_POINTS", "5")],
    );
    assert_eq!(code(&out), 2);
}
