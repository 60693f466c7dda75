use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

use dsrn_cli::config::{apply_env, load, RunConfig};

fn dsrn(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dsrn"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn dsrn")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter(|c| !c.is_empty()).map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn uncharged_geometry_marks_the_degenerate_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsrn(&["geometry", "--out", dir.path().to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("horizons.json")).unwrap()).unwrap();
    assert_eq!(doc["horizons"]["degenerate_q0"], true);
    assert_eq!(doc["horizons"]["r_c"], 0.0);
    assert!(doc["degenerate_case"].is_string());
    let chart = fs::read_to_string(dir.path().join("chart.csv")).unwrap();
    assert_eq!(chart.lines().count(), 1202);
}

#[test]
fn inadmissible_parameters_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = dsrn(&["geometry", "--out", d], &[("DSRN_PARAMS__LAMBDA", "0.2")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("NariaiViolation"), "{}", text(&out.stderr));
    let out = dsrn(&["geometry", "--out", d], &[("DSRN_PARAMS__LAMBDA", "0.1"), ("DSRN_PARAMS__BH_CHARGE", "2.0")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("DeltaViolation"), "{}", text(&out.stderr));
    // a charge product needs a charged black hole
    let out = dsrn(&["resonances", "--out", d, "--charge-product", "0.1"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = dsrn(&["ringdown", "--out", d], &[("DSRN_RINGDOWN__CFL", "1.5")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("ringdown.cfl"));
}

#[test]
fn box_below_the_strip_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsrn(&["resonances", "--out", dir.path().to_str().unwrap(), "--ell", "2"], &[("DSRN_RESONANCES__IM_MIN", "-5.0")]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("StripViolation"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let d = dir.path().to_str().unwrap();
        for cmd in ["geometry", "pseudopoles", "resonances"] {
            let out = dsrn(&[cmd, "--out", d, "--ell", "2,5", "--threads", threads], &[]);
            assert!(out.status.success(), "{cmd}: {}", text(&out.stderr));
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn empty_box_gives_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let env = [("DSRN_RESONANCES__RE_MIN", "0.75"), ("DSRN_RESONANCES__RE_MAX", "0.95")];
    let out = dsrn(&["resonances", "--out", dir.path().to_str().unwrap(), "--ell", "2"], &env);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = fs::read_to_string(dir.path().join("resonances_l2.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
    assert!(table.starts_with("ell,re_z,im_z,multiplicity,residual,matched_lattice_re,matched_lattice_im,drift"));
}

#[test]
fn opposite_charge_products_give_mirror_tables() {
    let plus = tempfile::tempdir().unwrap();
    let minus = tempfile::tempdir().unwrap();
    let env = [("DSRN_PARAMS__BH_CHARGE", "0.3")];
    for (dir, s) in [(&plus, "0.05"), (&minus, "-0.05")] {
        let out = dsrn(&["resonances", "--out", dir.path().to_str().unwrap(), "--ell", "2", "--charge-product", s], &env);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    let p = rows(&plus.path().join("resonances_l2.csv"));
    let mut m = rows(&minus.path().join("resonances_l2.csv"));
    assert_eq!(p.len(), 2);
    m.reverse();
    for (a, b) in p.iter().zip(&m) {
        // z ↦ -z̄
        assert!((a[1] + b[1]).abs() < 1e-10 && (a[2] - b[2]).abs() < 1e-10, "{a:?} {b:?}");
        assert_eq!(a[3], b[3]);
    }
}

#[test]
fn ringdown_warns_without_a_table_then_compares() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = dsrn(&["ringdown", "--out", d], &[]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("warning"));
    assert!(!dir.path().join("comparison.csv").exists());
    let ts = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(ts.lines().next().unwrap(), "t,re_u_0,im_u_0,local_energy");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ringdown.json")).unwrap()).unwrap();
    assert_eq!(report["energy_non_increasing_after_fit_start"], true);

    assert!(dsrn(&["resonances", "--out", d, "--ell", "2"], &[]).status.success());
    let out = dsrn(&["ringdown", "--out", d], &[]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let cmp = rows(&dir.path().join("comparison.csv"));
    assert_eq!(cmp.len(), 1);
    assert!(cmp[0][5] < 0.05 && cmp[0][6] < 0.10, "{:?}", cmp[0]);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsrn(&["selftest", "--out", dir.path().to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", text(&out.stdout));
    assert_eq!(text(&out.stdout).matches("PASS").count(), 4);
}

#[test]
fn environment_sits_between_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "[params]\nmass = 1.05\n[ringdown]\nell = 3\ncfl = 0.4\n").unwrap();
    let env = vec![("DSRN_RINGDOWN__CFL".to_string(), "0.3".to_string())];
    let cfg = load(Some(&path), env).unwrap();
    assert_eq!((cfg.params.mass, cfg.ringdown.ell, cfg.ringdown.cfl), (1.05, 3, 0.3));

    let out = dsrn(
        &["ringdown", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--ell", "1"],
        &[("DSRN_RINGDOWN__ELL", "4"), ("DSRN_RINGDOWN__HALF_WIDTH", "60")],
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ringdown.json")).unwrap()).unwrap();
    assert_eq!(report["ell"], 1);
    assert_eq!(report["params"]["mass"], 1.05);
}

proptest! {
    #[test]
    fn numeric_overrides_round_trip(mass in 0.5f64..2.0, ell in 0u32..50) {
        let mut t = toml::Table::new();
        apply_env(&mut t, vec![
            ("DSRN_PARAMS__MASS".to_string(), format!("{mass:?}")),
            ("DSRN_RINGDOWN__ELL".to_string(), ell.to_string()),
        ]).unwrap();
        let cfg: RunConfig = serde::Deserialize::deserialize(toml::Value::Table(t)).unwrap();
        prop_assert_eq!(cfg.params.mass, mass);
        prop_assert_eq!(cfg.ringdown.ell, ell);
    }
}
