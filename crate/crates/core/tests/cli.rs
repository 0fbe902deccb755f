use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use schwarzschild_le::report::{exit, exit_code, ReportRecord, Summary};
use schwarzschild_le::Error;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwarzschild-le")).args(args).output().unwrap()
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn verify_defaults_all_dimensions_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = cli(&["verify", "--d", "1,2,3,4,5,6,7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let verdicts: Vec<_> = s.records.iter().filter(|r| matches!(r, ReportRecord::CaseVerdict(_))).collect();
    assert!(verdicts.len() >= 10 * 7);
    assert!(s.passed && verdicts.iter().all(|r| r.passed()));
    let csv = fs::read_to_string(out.join("case2_d3.csv")).unwrap();
    assert!(csv.starts_with("r,value,margin\n"));
    assert!(csv.lines().count() > 4096);
}

#[test]
fn alpha_six_fails_with_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("a6.toml");
    fs::write(&cfg, "[multiplier]\nalpha = 6.0\n").unwrap();
    let out = tmp.path().join("o");
    let o = cli(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CHECK_FAILED));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    let s = summary(&out);
    let failed: Vec<_> = s.failures().collect();
    assert!(!failed.is_empty());
    for r in failed {
        if let ReportRecord::CaseVerdict(v) = r {
            assert!(v.witness_r.is_finite() && v.witness_r > 1.0);
        }
    }
}

#[test]
fn invalid_config_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cli(&["verify", "--d", "0", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[multiplier]\ndelta = 1.5\neps = -1.0\n").unwrap();
    let o = cli(&["all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta") && err.contains("eps"), "{err}");
    assert_eq!(cli(&[]).status.code(), Some(exit::CONFIG));
}

#[test]
fn zero_datum_evolves_to_zero_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("z.toml");
    fs::write(&cfg, "[evolution]\namplitude = 0.0\nt_final = 10.0\ndx = 0.05\n").unwrap();
    let out = tmp.path().join("o");
    let o = cli(&["evolve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::OK));
    for r in summary(&out).records {
        let ReportRecord::Evolution(e) = r else { panic!("unexpected record") };
        assert_eq!((e.initial_energy, e.le_final, e.identity_residual), (0.0, 0.0, 0.0));
    }
    let csv = fs::read_to_string(out.join("evolve_d1_l1.csv")).unwrap();
    assert!(csv.starts_with("t,energy,le_accum,base_residual\n"));
    assert!(csv.lines().skip(1).all(|l| l.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0)));
}

#[test]
fn reports_are_deterministic_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = |dir: &Path| {
        vec![
            "all".to_string(),
            "--d".into(),
            "1,3".into(),
            "--grid-points".into(),
            "256".into(),
            "--seed".into(),
            "11".into(),
            "--config".into(),
            tmp.path().join("c.toml").to_str().unwrap().into(),
            "--out".into(),
            dir.to_str().unwrap().into(),
        ]
    };
    fs::write(tmp.path().join("c.toml"), "[evolution]\nt_final = 5.0\ndx = 0.05\nells = [1]\n").unwrap();
    let run = |dir: &Path| {
        let v = args(dir);
        cli(&v.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(run(&a).status.code(), Some(exit::OK));
    assert_eq!(run(&b).status.code(), Some(exit::OK));
    let ja = fs::read(a.join("summary.json")).unwrap();
    assert_eq!(ja, fs::read(b.join("summary.json")).unwrap());

    // re-running from the emitted config reproduces the report
    let c = tmp.path().join("c2");
    let o = cli(&["--config", a.join("config.toml").to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::OK));
    assert_eq!(ja, fs::read(c.join("summary.json")).unwrap());

    // lossless round trip
    let s = summary(&a);
    assert_eq!(serde_json::from_str::<Summary>(&s.to_json()).unwrap(), s);
    assert_eq!(s.provenance.config_hash.len(), 64);
}

#[test]
fn error_taxonomy() {
    assert_eq!(exit_code(&Error::Config("x".into())), exit::CONFIG);
    assert_eq!(exit_code(&Error::Cfl { dt: 1.0, limit: 0.5 }), exit::CONFIG);
    assert_eq!(exit_code(&Error::Instability { t: 1.0, detail: String::new() }), exit::INSTABILITY);
    assert_eq!(exit_code(&Error::EmptyGrid), exit::OTHER);
}
