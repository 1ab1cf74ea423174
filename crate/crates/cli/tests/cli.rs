use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsrigid"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dsrigid")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn config_cmd(cmd: &str, config: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config];
    args.extend_from_slice(extra);
    run(&args)
}

fn record<'a>(report: &'a str, name: &str) -> &'a str {
    let key = format!("check name={name} ");
    report.lines().find(|l| l.starts_with(&key)).unwrap_or_else(|| panic!("no record {name} in\n{report}"))
}

#[test]
fn cone_identity_is_plus_cone() {
    let o = run(&["check-cone", "identity 2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("label=PlusCone"));
}

#[test]
fn cone_outside() {
    let o = run(&["check-cone", "diag 1 -2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("label=Outside"));
}

#[test]
fn cone_pair_gap() {
    let o = run(&["check-cone", "identity 2", "diag 2 1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = record(&out, "garding_gap");
    assert!(line.contains("gap=\"8.578644e-2\""), "{line}");
}

#[test]
fn cone_input_errors_exit_2() {
    for args in [
        vec!["check-cone", "identity 2", "identity 3"],
        vec!["check-cone", "diag 1 x"],
        vec!["check-cone", "1 2; 3 4"],
        vec!["check-cone", "diag 1 -2", "identity 2"],
        vec!["check-cone"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn cone_random_sweep_is_seeded() {
    let a = run(&["check-cone", "--random", "2000", "--seed", "11"]);
    let b = run(&["check-cone", "--random", "2000", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(record(&stdout(&a), "garding_random").contains("pass=true"));
}

#[test]
fn geometry_example_passes() {
    let o = config_cmd("geometry", example("geometry.conf").to_str().unwrap(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["pre_integral", "sigma2_curvature", "newton_divergence", "deriv_v", "reflection", "curvature_gate"] {
        assert!(record(&out, name).contains("pass=true"), "{name}");
    }
    assert!(out.contains("anchor=\"Lemma preIntegral\""));
    assert!(out.contains("verdict overall=pass"));
}

#[test]
fn geometry_slice() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.conf", "[surface]\nrho0 = 0.5\n[quadrature]\nn_theta = 16\nn_phi = 32\n");
    assert_eq!(config_cmd("geometry", &cfg, &[]).status.code(), Some(0));
}

#[test]
fn geometry_equator_gate_fails_but_lemmas_pass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "eq.conf", "[surface]\nrho0 = 0\n[quadrature]\nn_theta = 16\nn_phi = 32\n");
    let report = dir.path().join("r.txt");
    let o = config_cmd("geometry", &cfg, &["--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GateFailed"));
    let text = std::fs::read_to_string(&report).unwrap();
    for name in ["pre_integral", "sigma2_curvature", "newton_divergence", "deriv_v", "reflection"] {
        assert!(record(&text, name).contains("pass=true"), "{name}");
    }
    assert!(record(&text, "curvature_gate").contains("pass=false"));
    assert!(text.ends_with("verdict overall=invalid checks=6 failed=1\n"));
}

#[test]
fn geometry_non_spacelike_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "ns.conf",
        "[surface]\nrho0 = 0.5\nterm = 3.0 2 0\n[quadrature]\nn_theta = 16\nn_phi = 32\n",
    );
    let o = config_cmd("geometry", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NonSpacelike"));
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let o = config_cmd("geometry", example("geometry.conf").to_str().unwrap(), &["--tol", "pointwise=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(record(&stdout(&o), "pre_integral").contains("pass=false"));
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let geom = example("geometry.conf");
    let pair = example("rigidity.conf");
    let cases: Vec<(&str, String, Vec<&str>)> = vec![
        ("geometry", geom.to_string_lossy().into(), vec!["--quad", "8x16"]),
        ("geometry", geom.to_string_lossy().into(), vec!["--tol", "nonsense=1"]),
        ("geometry", pair.to_string_lossy().into(), vec![]),
        ("rigidity", geom.to_string_lossy().into(), vec![]),
        (
            "rigidity",
            write_config(
                &dir,
                "fast.conf",
                "[surface]\nrho0 = 0.6\n[isometry]\nkind = boost\nrapidity = 1.5\naxis = 1 0 0\n",
            ),
            vec![],
        ),
        ("geometry", write_config(&dir, "bad.conf", "[surface]\nrho0 = half\n"), vec![]),
        ("geometry", dir.path().join("missing.conf").to_string_lossy().into(), vec![]),
    ];
    for (cmd, cfg, extra) in cases {
        let o = config_cmd(cmd, &cfg, &extra);
        assert_eq!(o.status.code(), Some(2), "{cmd} {cfg} {extra:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_identities_example_passes() {
    let o = config_cmd("verify-identities", example("verify-identities.conf").to_str().unwrap(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["identity_a", "identity_b", "identity_c", "identity_d", "tilde_symmetry", "metric_match"] {
        assert!(record(&out, name).contains("pass=true"), "{name}");
    }
}

#[test]
fn verify_identities_identity_pair() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "id.conf",
        "[surface]\nrho0 = 0.6\nterm = 0.05 2 0\n[isometry]\nkind = identity\n[quadrature]\nn_theta = 32\nn_phi = 64\n",
    );
    assert_eq!(config_cmd("verify-identities", &cfg, &[]).status.code(), Some(0));
}

#[test]
fn verify_identities_coarse_quadrature_still_reports() {
    let o = config_cmd("verify-identities", example("verify-identities.conf").to_str().unwrap(), &["--quad", "16x32"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let out = stdout(&o);
    for name in ["identity_a", "identity_b", "identity_c", "identity_d", "tilde_symmetry"] {
        record(&out, name);
    }
    assert!(out.contains("config key=quadrature value=\"16x32\""));
}

#[test]
fn rigidity_boosted_slice_is_rigid() {
    let o = config_cmd("rigidity", example("rigidity.conf").to_str().unwrap(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(record(&stdout(&o), "verdict").contains("verdict=\"Rigid\""));
}

#[test]
fn rigidity_mismatched_pair_not_isometric() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "mis.conf",
        "[surface]\nrho0 = 0.6\nterm = 0.05 2 0\n[surface_tilde]\nrho0 = 0.6\nterm = 0.08 2 0\n\
         [isometry]\nkind = identity\n[quadrature]\nn_theta = 32\nn_phi = 64\n",
    );
    let o = config_cmd("rigidity", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(record(&out, "verdict").contains("verdict=\"NotIsometric\""));
    let line = record(&out, "metric_match");
    let residual: f64 = line.split("residual=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(residual > 1e-3, "{line}");
}

#[test]
fn rigidity_below_equator_gate_failed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "neg.conf",
        "[surface]\nrho0 = -0.3\n[isometry]\nkind = identity\n[quadrature]\nn_theta = 16\nn_phi = 32\n",
    );
    let o = config_cmd("rigidity", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GateFailed"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = example("verify-identities.conf");
    let paths = [dir.path().join("a.txt"), dir.path().join("b.txt")];
    for p in &paths {
        let o = config_cmd(
            "verify-identities",
            cfg.to_str().unwrap(),
            &["--quad", "32x64", "--report", p.to_str().unwrap()],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}
