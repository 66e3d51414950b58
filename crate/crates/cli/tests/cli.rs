use std::path::Path;
use std::process::{Command, Output};

use oamcap::config::{ExperimentConfig, Overrides};
use oamcap::table::strip_volatile;
use oamcap::{run_experiment, Experiment};

fn oamcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oamcap")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_ELEMENTS: &str = "experiment = \"edof_vs_elements\"\n[link]\ntx_radius = 3\nrx_radius = 3\n[sweep]\ndistances = [20]\nelements = [2, 4, 8, 16]\n";

#[test]
fn run_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ELEMENTS);
    let out = dir.path().join("out");
    let o = oamcap(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("edof_vs_elements.csv")).unwrap();
    assert!(csv.contains("\nelements_count,edof_uca_d20_dof,edof_capa_d20_dof\n"));
    assert!(csv.starts_with("# generator: oamcap"));
    assert!(out.join("edof_vs_elements.svg").exists());
}

#[test]
fn no_plot_skips_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ELEMENTS);
    let out = dir.path().join("out");
    let o = oamcap(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--no-plot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!out.join("edof_vs_elements.svg").exists());
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[link]\nfrequency_hz = 0\n");
    let o = oamcap(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("link.frequency_hz"));

    let o = oamcap(&["run", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_ELEMENTS);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = oamcap(&["run", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bound_violation_exits_2_after_writing() {
    // twelve modes on a far link with a two-mode EDoF: C exceeds ε·log2(1 + SNR·γ/ε)
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = \"se_vs_snr\"\n[sweep]\ndistances = [1000]\nmodes = [12]\nelements = []\nhalf_wavelength_uca = false\nsnr_db = [30]\n",
    );
    let out = dir.path().join("out");
    let o = oamcap(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--no-plot"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(out.join("se_vs_snr.csv")).unwrap();
    assert!(csv.contains("# bound_check: fail"));
}

#[test]
fn bound_respected_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = \"se_vs_snr\"\n[sweep]\ndistances = [50]\nmodes = [4, 8]\nelements = []\nhalf_wavelength_uca = false\n",
    );
    let out = dir.path().join("out");
    let o = oamcap(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--no-plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("se_vs_snr.csv")).unwrap();
    assert!(csv.contains("# bound_check: pass"));
}

#[test]
fn verify_exits_0_with_json() {
    let o = oamcap(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn verify_warns_on_coarse_quadrature() {
    let o = oamcap(&["verify", "--quadrature", "8"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("degraded")));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn defaults_print_round_trips() {
    let o = oamcap(&["defaults", "--experiment", "link_ber"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg = ExperimentConfig::from_toml_str(&text, &Overrides::default()).unwrap();
    assert_eq!(cfg, ExperimentConfig::defaults(Experiment::LinkBer));
}

#[test]
fn identical_config_gives_identical_csv() {
    for experiment in [Experiment::LinkBer, Experiment::SeVsDistance, Experiment::Convergence] {
        let mut cfg = ExperimentConfig::defaults(experiment);
        cfg.numerics.symbols = 2000;
        cfg.seed = 42;
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&cfg).unwrap().to_csv();
        assert_eq!(strip_volatile(&a), strip_volatile(&b), "{experiment}");
    }
    let mut cfg = ExperimentConfig::defaults(Experiment::LinkBer);
    cfg.numerics.symbols = 2000;
    let a = run_experiment(&cfg).unwrap();
    cfg.seed += 1;
    let b = run_experiment(&cfg).unwrap();
    assert_ne!(a.column("ber_sim_prob"), b.column("ber_sim_prob"));
}
