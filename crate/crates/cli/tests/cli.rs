use std::path::Path;
use std::process::{Command, Output};

use quantum_vdp::export::{read_table, read_wigner_csv};

fn qvdp(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvdp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("qvdp runs")
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn ion_plan_reports_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = qvdp(dir.path(), &["ion-plan", "--label", "yb"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("eta   = 0.0350"), "{stdout}");
    assert!(stdout.contains("n_max = 19"), "{stdout}");
    let m = manifest(&dir.path().join("ion-plan/yb"));
    assert_eq!(m["status"], "ok");
    let v = m["diagnostics"]["rates"]["v"].as_f64().unwrap();
    assert!((v / std::f64::consts::TAU / 612.5 - 1.0).abs() < 0.01);
}

#[test]
fn quantum_limit_ring_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# quantum limit\nscenario = single\nkappa2 = 20\nresolution = 101\n").unwrap();
    let out = qvdp(dir.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--label", "q"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("single/q");
    let grid = read_wigner_csv(&run.join("wigner.csv")).unwrap();
    assert_eq!(grid.resolution, 101);
    assert!((grid.radial_peak(50) - 0.5).abs() < 0.1);
    let pops = read_table(&run.join("populations.csv")).unwrap();
    assert_eq!(pops.kind, "populations");
    let m = manifest(&run);
    assert_eq!(m["parameters"]["kappa2"], 20.0);
    assert!(m["outputs"].as_array().unwrap().len() >= 5);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = qvdp(dir.path(), &["simulate", "--set", "kapa2=1"]);
    assert_eq!(unknown.status.code(), Some(2));
    let negative = qvdp(dir.path(), &["simulate", "--set", "scenario=single", "--set", "kappa2=-1", "--label", "neg"]);
    assert_eq!(negative.status.code(), Some(2));
    // the manifest records the failure
    let m = manifest(&dir.path().join("single/neg"));
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("kappa2"));
    let no_seed = qvdp(dir.path(), &["simulate", "--set", "scenario=classical-ensemble", "--set", "kappa2=1"]);
    assert_eq!(no_seed.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |label: &'static str| {
        [
            "simulate", "--set", "scenario=classical-ensemble", "--set", "kappa2=1", "--set", "seed=7",
            "--set", "realizations=4", "--set", "t_final=40", "--set", "resolution=41", "--label", label,
        ]
    };
    for label in ["a", "b"] {
        assert!(qvdp(dir.path(), &args(label)).status.success());
    }
    let read = |l: &str| std::fs::read(dir.path().join("classical-ensemble").join(l).join("wigner_classical.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn vdp_ode_reaches_the_limit_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = qvdp(dir.path(), &["simulate", "--set", "scenario=vdp-ode", "--label", "ode"]);
    assert!(out.status.success());
    let t = read_table(&dir.path().join("vdp-ode/ode/trajectory.csv")).unwrap();
    let x = t.numbers("x").unwrap();
    let late = x[x.len() * 9 / 10..].iter().fold(0.0f64, |a, b| a.max(b.abs()));
    assert!((late - 2.0).abs() < 0.02);
}
