use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
equation = "nls"
[nonlinearity]
kind = "power"
p = 4.0
lambda = -1.0
[grid]
kind = "gauss-bessel"
r_max = 40.0
n = 128
[initial]
kind = "gaussian"
amplitude = 1.0
mu = 1.0
[integrator]
t_final = 1.0
dt = 0.01
snapshot_stride = 10
"#;

fn radscat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radscat"))
        .args(args)
        .env("RADSCAT_OUT", dir.join("default-root"))
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn minimal_defocusing_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "base.toml", BASE);
    let out = tmp.path().join("run");
    let o = radscat(tmp.path(), &["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("regime: defocusing-global"), "{text}");
    assert!(out.join("manifest.json").exists());
    assert!(out.join("monitor.csv").exists());
    let header = fs::read_to_string(out.join("monitor.csv")).unwrap();
    assert!(header.starts_with("t,mass,energy,grad_sq,g_integral,sup_norm"));

    // second call is a no-op
    let o = radscat(tmp.path(), &["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("completed earlier"));
}

#[test]
fn default_output_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "base.toml", BASE);
    let o = radscat(tmp.path(), &["classify", "--config", &cfg]);
    assert!(o.status.success());
    let entries: Vec<_> = fs::read_dir(tmp.path().join("default-root")).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn invalid_exponent_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &BASE.replace("p = 4.0", "p = 2.0"));
    let o = radscat(tmp.path(), &["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nonlinearity.p") && err.contains("p > 2"), "{err}");
}

#[test]
fn supercritical_focusing_run_reports_blowup() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BASE
        .replace("lambda = -1.0", "lambda = 1.0")
        .replace("kind = \"gaussian\"\namplitude = 1.0\nmu = 1.0", "kind = \"scaled-ground-state\"\nepsilon = 1.5")
        .replace("r_max = 40.0\nn = 128", "r_max = 20.0\nn = 256")
        .replace("t_final = 1.0", "t_final = 1.0\nmax_sup_norm = 6.0\nmax_grad_sq = 500.0")
        .replace("dt = 0.01", "dt = 0.0005");
    let cfg = write_config(tmp.path(), "foc.toml", &text);
    let out = tmp.path().join("foc");
    let o = radscat(tmp.path(), &["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("regime: focusing-below-threshold-K-negative"), "{stdout}");
    assert_eq!(o.status.code(), Some(4), "{stdout}");
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("blowup-suspected"));
}

#[test]
fn sweep_over_exponent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "base.toml", BASE);
    let out = tmp.path().join("sweep");
    let o = radscat(
        tmp.path(),
        &[
            "sweep",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            "2",
            "--axis",
            "nonlinearity.p",
            "--values",
            "2.5,3,4,6",
            "--stage",
            "ground-state",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "ground_state.grad_mass_ratio").unwrap();
    assert_eq!(table.lines().count(), 5);
    for line in table.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let p: f64 = f[0].parse().unwrap();
        let ratio: f64 = f[col].parse().unwrap();
        assert!((ratio - p / 2.0).abs() < 1e-4 * p, "p={p}: {ratio}");
    }
}
