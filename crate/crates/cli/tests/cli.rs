use std::fs;
use std::path::Path;
use std::process::Command;

fn qmem(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qmem")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, extra: &str) -> String {
    let solver = r#"{"n_z": 40, "dt": 0.005, "window": [-3.0, 6.0]}"#;
    let text = format!(
        r#"{{
  "d_axis": [5.0, 40.0],
  "g_axis": [0.05, 1.0],
  "samples": 10,
  "grid_m": 3,
  "solver": {solver},
  "optimizer": {{"restarts": 2, "max_evals": 60, "param_tolerance": 1e-4,
                 "bounds": [[0.15707963267948966, 25.132741228718345], [-3.0, 4.0], [0.02, 5.0]],
                 "seed": 0, "spline_window": [-2.0, 6.0], "solver": {solver}}}{extra}
}}"#
    );
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn every_subcommand_succeeds_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    for (cmd, file) in [
        ("optimize", "optimize.csv"),
        ("fluctuations", "fluctuations.csv"),
        ("oat", "oat.csv"),
        ("sobol", "sobol.csv"),
    ] {
        let out = dir.path().join(cmd);
        let (code, _, err) = qmem(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{cmd}: {err}");
        assert_eq!(fs::read_to_string(out.join(file)).unwrap().lines().count(), 5, "{cmd}");
    }
    for (cmd, file) in [("shape-oat", "shape_oat.csv"), ("fidelity", "fidelity.csv")] {
        let out = dir.path().join(cmd);
        let (code, _, err) = qmem(&[
            cmd, "--config", &cfg, "--out", out.to_str().unwrap(), "--d", "20", "--g", "0.5", "--shape-points", "5",
        ]);
        assert_eq!(code, 0, "{cmd}: {err}");
        assert_eq!(fs::read_to_string(out.join(file)).unwrap().lines().count(), 2, "{cmd}");
    }
}

#[test]
fn sweep_takes_kind_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#", "kind": "oat""#);
    let out = dir.path().join("o");
    let (code, stdout, err) =
        qmem(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--d", "7", "--eps-g", "0.1"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("oat"));
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"eps_g\": 0.1"));
    assert_eq!(fs::read_to_string(out.join("oat.csv")).unwrap().lines().count(), 3);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(qmem(&["oat", "--config", &cfg, "--out", o, "--grid-m", "4"]).0, 1);
    assert_eq!(qmem(&["sweep", "--kind", "nonsense", "--out", o]).0, 1);
    assert_eq!(qmem(&["optimize", "--unknown-flag"]).0, 1);
    assert_eq!(qmem(&["optimize", "--config", "/definitely/missing.json"]).0, 1);
    fs::write(dir.path().join("bad.json"), r#"{"d_axis": [3, 1]}"#).unwrap();
    assert_eq!(qmem(&["optimize", "--config", dir.path().join("bad.json").to_str().unwrap(), "--out", o]).0, 1);
    assert_eq!(qmem(&["fluctuations", "--noise-mode", "loud", "--out", o]).0, 1);
    assert_eq!(qmem(&["--help"]).0, 0);
}

#[test]
fn point_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("f");
    let (code, _, err) = qmem(&["fluctuations", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps-m", "3"]);
    assert_eq!(code, 2, "{err}");
    assert!(fs::read_to_string(out.join("errors.csv")).unwrap().lines().count() > 1);
}

#[test]
fn manifest_rerun_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(qmem(&["fluctuations", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]).0, 0);
    let manifest = a.join("manifest.json");
    assert_eq!(
        qmem(&["sweep", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap(), "--workers", "8"]).0,
        0
    );
    for f in ["manifest.json", "fluctuations.csv", "optima.cache", "errors.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

