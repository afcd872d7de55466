//! Black-box checks of the command-line contract: exit codes, strict config
//! validation, and the shape of the emitted files.

use std::path::Path;
use std::process::{Command, Output};

fn pwscat(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwscat"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const BASE: &str = r#"
[potential]
family = "gaussian_modulated"
coupling = [0.4, 0.0]
support = [-0.5, 0.5]
alpha = 1.0
beta = 0.8

[physics]
k = 1.0
incidence = [{ side = "left", theta0_deg = 15.0 }]

[numerics]
n = 24
"#;

#[test]
fn missing_config_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pwscat(&["amplitude"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("\"kind\":\"config\""), "stderr: {msg}");
}

#[test]
fn unknown_keys_are_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &format!("{BASE}\nsomething_else = 1\n"),
    );
    let out = pwscat(&["amplitude", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("something_else"), "stderr: {msg}");
    assert!(!dir.path().join("o").exists(), "no output may be written");
}

#[test]
fn out_of_range_angle_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "angle.toml",
        &BASE.replace("theta0_deg = 15.0", "theta0_deg = 90.0"),
    );
    let out = pwscat(&["amplitude", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unused_family_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    // kappa belongs to sinc_line, not to the Gaussian family
    let cfg = write_config(dir.path(), "extra.toml", &format!("{BASE}\nkappa = 2.0\n"));
    let out = pwscat(&["amplitude", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("kappa"), "stderr: {msg}");
}

#[test]
fn verify_needs_the_evanescent_extension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "prop.toml", BASE);
    let out = pwscat(&["verify", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stiffness_guard_trips_as_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE.replace(
        "n = 24",
        "n = 24\nmode = \"full\"\nn_ev = 6\nlambda_over_k = 30.0\nstiffness_guard = 8.0",
    );
    let cfg = write_config(dir.path(), "stiff.toml", &body);
    let out = pwscat(&["amplitude", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("\"kind\":\"numerical\""), "stderr: {msg}");
}

#[test]
fn zero_coupling_produces_an_all_zero_amplitude_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.toml",
        &BASE.replace("coupling = [0.4, 0.0]", "coupling = [0.0, 0.0]"),
    );
    let out = pwscat(&["amplitude", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/amplitude_00.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0, "re_f must vanish: {line}");
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0, "im_f must vanish: {line}");
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0, "abs2_f must vanish: {line}");
        rows += 1;
    }
    // 24 budgeted nodes plus the one inserted for the incidence angle,
    // sampled in both hemispheres
    assert_eq!(rows, 50, "one row per outgoing direction");
}

#[test]
fn interchangeable_kernels_give_byte_identical_amplitude_columns() {
    // a sharp line and its band-limited version with the band edge at 2k
    // produce the same kernel on every transfer momentum the grid can form
    let dir = tempfile::tempdir().unwrap();
    let sharp = r#"
[potential]
family = "delta_line"
coupling = [0.5, 0.0]
support = [-0.25, 0.25]

[physics]
k = 1.0
incidence = [{ side = "left", theta0_deg = 10.0 }]

[numerics]
n = 24
"#;
    let banded = sharp.replace(
        "family = \"delta_line\"",
        "family = \"sinc_line\"\nkappa = 2.0",
    );
    let cfg_a = write_config(dir.path(), "sharp.toml", sharp);
    let cfg_b = write_config(dir.path(), "banded.toml", &banded);
    let out = pwscat(&["amplitude", "--config", &cfg_a, "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = pwscat(&["amplitude", "--config", &cfg_b, "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let strip = |path: &Path| -> Vec<String> {
        // drop the header echo (it records the differing family) and keep data
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    };
    assert_eq!(
        strip(&dir.path().join("a/amplitude_00.csv")),
        strip(&dir.path().join("b/amplitude_00.csv")),
        "amplitude rows must match byte for byte"
    );
}

#[test]
fn grid_report_lists_every_channel() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASE.replace("n = 24", "n = 24\nmode = \"full\"\nn_ev = 5\nlambda_over_k = 3.0");
    let cfg = write_config(dir.path(), "grid.toml", &body);
    let out = pwscat(&["grid-report", "--config", &cfg, "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/grid.csv")).unwrap();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).skip(1).count();
    // every channel appears: the propagating nodes (including the inserted
    // incidence angle) plus 5 evanescent nodes per side
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/grid.json")).unwrap())
            .unwrap();
    let n_prop = json["n_prop"].as_u64().unwrap() as usize;
    assert_eq!(json["n_ev_side"], 5);
    assert_eq!(rows, n_prop + 10);
}
