//! End-to-end checks of the mcxc binary: output schemas, exit codes, and
//! byte-level reproducibility across reruns and thread counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mcxc")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("MCXC_THREADS", t),
        None => cmd.env_remove("MCXC_THREADS"),
    };
    cmd.output().unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mcxc-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SPIRAL: &str = "\
scene.name = spin_spiral
scene.q = 1.0
scene.m0 = 0.8
scene.n0 = 1.6
functional.name = slater_lsda
angular.scheme = lebedev
angular.order = 17
box.min = -0.5,-0.5,-0.5
box.max = 0.5,0.5,0.5
grid.n_per_axis = 3
rotation.count = 3
rotation.seed = 42
sweep.lebedev = 6,26,110
sweep.fibonacci = 64
";

#[test]
fn all_commands_run_and_emit_versioned_csv() {
    let dir = temp_dir("schema");
    let cfg = write_config(&dir, "run.cfg", SPIRAL);
    for command in ["energy", "convergence", "rotation", "torque"] {
        let out = run(&[command, "--config", cfg.to_str().unwrap()], None);
        assert!(
            out.status.success(),
            "{command} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(
            text.starts_with("# mcxc csv v1\n"),
            "{command}: missing schema header"
        );
        assert!(text.contains(&format!("# command = {command}")));
        assert!(!text.contains('\r'), "line endings must be bare newlines");
    }
}

#[test]
fn reruns_are_byte_identical_at_any_thread_count() {
    let dir = temp_dir("determinism");
    let cfg = write_config(&dir, "run.cfg", SPIRAL);
    for command in ["energy", "convergence", "rotation", "torque"] {
        let first = run(&[command, "--config", cfg.to_str().unwrap()], Some("1"));
        let second = run(&[command, "--config", cfg.to_str().unwrap()], Some("1"));
        let fourth = run(&[command, "--config", cfg.to_str().unwrap()], Some("4"));
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "{command}: rerun differs");
        assert_eq!(
            first.stdout, fourth.stdout,
            "{command}: thread count changed bytes"
        );
    }
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = temp_dir("outfile");
    let cfg = write_config(&dir, "run.cfg", SPIRAL);
    let out_path = dir.join("report.csv");
    let to_stdout = run(&["energy", "--config", cfg.to_str().unwrap()], Some("2"));
    let to_file = run(
        &[
            "energy",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ],
        Some("2"),
    );
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), to_stdout.stdout);
}

#[test]
fn registry_misses_exit_nonzero_with_a_message() {
    let dir = temp_dir("errors");
    let bad_functional = write_config(
        &dir,
        "bad_functional.cfg",
        &SPIRAL.replace("slater_lsda", "b3lyp"),
    );
    let out = run(
        &["energy", "--config", bad_functional.to_str().unwrap()],
        None,
    );
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown functional"), "{err}");

    let bad_scene = write_config(
        &dir,
        "bad_scene.cfg",
        &SPIRAL.replace("spin_spiral", "atom"),
    );
    let out = run(&["energy", "--config", bad_scene.to_str().unwrap()], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scene"));

    let out = run(&["spectrum", "--config", bad_scene.to_str().unwrap()], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown command"));

    let out = run(&["energy"], None);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn torque_map_of_the_quadratic_scene_shows_constant_torque() {
    let dir = temp_dir("quadratic");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "\
scene.name = quadratic_mx
functional.name = toy1_gga
angular.scheme = lebedev
angular.order = 3
box.min = -1,-1,-1
box.max = 1,1,1
grid.n_per_axis = 4
",
    );
    let out = run(&["torque", "--config", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("x,") || line.starts_with("global_torque") {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        // bxc = (4, 0, 0) and torque = (0, 4, 0) at every point
        assert!((fields[6] - 4.0).abs() < 1e-10 && fields[7].abs() < 1e-12);
        assert!(fields[9].abs() < 1e-12 && (fields[10] - 4.0).abs() < 1e-10);
    }
}

#[test]
fn lsda_energy_report_agrees_with_the_locally_collinear_reference() {
    let dir = temp_dir("lsda");
    let cfg = write_config(
        &dir,
        "run.cfg",
        "\
scene.name = uniform_collinear
scene.m0 = 0,0,0.5
functional.name = slater_lsda
angular.scheme = lebedev
angular.order = 53
box.min = -0.5,-0.5,-0.5
box.max = 0.5,0.5,0.5
grid.n_per_axis = 2
",
    );
    let out = run(&["energy", "--config", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let diff: f64 = text
        .lines()
        .find(|l| l.starts_with("abs_diff_mc_lc,"))
        .expect("lc diff row")
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-8, "|MC - LC| = {diff}");
}

#[test]
fn fibonacci_converges_slower_than_lebedev_at_matched_sizes() {
    let dir = temp_dir("matched");
    let cfg = write_config(
        &dir,
        "run.cfg",
        &SPIRAL
            .replace("sweep.lebedev = 6,26,110", "sweep.lebedev = 110,974")
            .replace("sweep.fibonacci = 64", "sweep.fibonacci = 110,974"),
    );
    let out = run(&["convergence", "--config", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let error_for = |scheme: &str, n: usize| -> f64 {
        text.lines()
            .find(|l| l.starts_with(&format!("{scheme},{n},")))
            .unwrap_or_else(|| panic!("missing {scheme} {n} row"))
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    for n in [110, 974] {
        let leb = error_for("lebedev", n);
        let fib = error_for("fibonacci", n);
        assert!(
            fib > leb,
            "at {n} points the lattice should trail the exact rule: {fib} vs {leb}"
        );
    }
}

#[test]
fn shipped_demo_configs_produce_expected_reports() {
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let run_cfg = |command: &str, name: &str| -> String {
        let out = run(
            &[command, "--config", configs.join(name).to_str().unwrap()],
            None,
        );
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };
    let value = |text: &str, row: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(row))
            .unwrap_or_else(|| panic!("missing row {row}"))
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };

    // spiral: multi-collinear sees the winding (E = 1), locally collinear does not
    let text = run_cfg("energy", "spiral_energy.cfg");
    assert!((value(&text, "mc_energy") - 1.0).abs() < 1e-12);
    assert_eq!(value(&text, "lc_energy"), 0.0);

    // antiparallel pair: MC < 0 < LC, the collinear-limit failure of the LC route
    let text = run_cfg("energy", "nonlocal_pair.cfg");
    let mc = value(&text, "mc_energy");
    let lc = value(&text, "lc_energy");
    assert!(
        mc < 0.0 && lc > 0.0,
        "expected MC < 0 < LC, got {mc} / {lc}"
    );

    // LSDA convergence: the 974-point row sits below 1e-8
    let text = run_cfg("convergence", "lsda_convergence.cfg");
    let err_974: f64 = text
        .lines()
        .find(|l| l.starts_with("lebedev,974,"))
        .expect("974-point row")
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(err_974 < 1e-8, "lebedev 974 error {err_974}");

    // rotation scan: identity row zero, random rows below 1e-10
    let text = run_cfg("rotation", "rotation_scan.cfg");
    for line in text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("rotation_index"))
    {
        let de: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(de < 1e-10, "rotation drift {de}");
    }

    // torque map: trailing summary row present
    let text = run_cfg("torque", "torque_map.cfg");
    assert!(text.lines().last().unwrap().starts_with("global_torque,"));
}

#[test]
fn convergence_errors_shrink_with_lebedev_size() {
    let dir = temp_dir("sweep");
    let cfg = write_config(&dir, "run.cfg", SPIRAL);
    let out = run(&["convergence", "--config", cfg.to_str().unwrap()], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lebedev_errors = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("lebedev,") {
            let err: f64 = rest.split(',').nth(1).unwrap().parse().unwrap();
            lebedev_errors.push(err);
        }
    }
    assert_eq!(lebedev_errors.len(), 3);
    assert!(
        lebedev_errors.windows(2).all(|w| w[1] <= w[0]),
        "errors not shrinking: {lebedev_errors:?}"
    );
}
