//! Dispatch of a configured run and emission of its reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EnergyLeSeries, ProfileKind};
use crate::geometry::BackgroundParams;
use crate::multiplier::{MultiplierParams, MultiplierProfile};
use crate::verifier::{
    hardy_ratio, hardy_scan, verify_all, verify_budget, CaseReport, CaseVerdict, HardyProfile, HardyScan, Sample,
    TestFunction,
};

/// Exit statuses of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INSTABILITY: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
}

/// Exit status for an error that stopped the run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Cfl { .. } => exit::CONFIG,
        Error::Instability { .. } => exit::INSTABILITY,
        _ => exit::OTHER,
    }
}

/// Largest admissible `max / min` of the sliding-family Hardy ratios.
pub const HARDY_SPREAD_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyRecord {
    pub scan: HardyScan,
    /// Ratios of the seeded random family.
    pub random_ratios: Vec<f64>,
    pub passed: bool,
}

/// The reported digest of one mode run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub d: u32,
    pub ell: u32,
    pub kind: ProfileKind,
    pub t_final: f64,
    pub dx: f64,
    pub dt: f64,
    pub initial_energy: f64,
    pub sup_energy: f64,
    pub max_drift: f64,
    pub le_final: f64,
    pub le_ratio: f64,
    /// `(sup E + le_accum(T)) / E(0)`.
    pub bound_ratio: f64,
    pub identity_residual: f64,
    pub saturation_time_90: f64,
    pub contamination: Option<f64>,
    pub passed: bool,
}

impl EvolutionRecord {
    fn from_series(s: &EnergyLeSeries, d: u32, kind: ProfileKind, tol: f64) -> Self {
        let monotone = s.le_accum.windows(2).all(|w| w[1] >= w[0]);
        Self {
            d,
            ell: s.ell,
            kind,
            t_final: *s.times.last().expect("series is never empty"),
            dx: s.dx,
            dt: s.dt,
            initial_energy: s.initial_energy(),
            sup_energy: s.sup_energy(),
            max_drift: s.max_drift(),
            le_final: s.final_le(),
            le_ratio: s.le_ratio(),
            bound_ratio: s.bound_ratio(),
            identity_residual: s.final_residual(),
            saturation_time_90: s.saturation_time(0.9),
            contamination: s.contamination,
            passed: monotone && s.max_drift() <= tol && s.contamination.is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ReportRecord {
    CaseVerdict(CaseVerdict),
    Evolution(EvolutionRecord),
    Hardy(HardyRecord),
}

impl ReportRecord {
    pub fn passed(&self) -> bool {
        match self {
            ReportRecord::CaseVerdict(v) => v.passed,
            ReportRecord::Evolution(e) => e.passed,
            ReportRecord::Hardy(h) => h.passed,
        }
    }

    /// One-line description for terminal output.
    pub fn describe(&self) -> String {
        let mark = if self.passed() { "pass" } else { "FAIL" };
        match self {
            ReportRecord::CaseVerdict(v) => {
                format!("{mark} d={} {:<13} min_margin={:.6e} at r={:.6e}", v.d, v.case_id, v.min_margin, v.witness_r)
            }
            ReportRecord::Evolution(e) => format!(
                "{mark} d={} ell={} {:?} drift={:.2e} le/E0={:.6} (sup E + LE)/E0={:.6}",
                e.d, e.ell, e.kind, e.max_drift, e.le_ratio, e.bound_ratio
            ),
            ReportRecord::Hardy(h) => format!(
                "{mark} d={} hardy spread={:.3} growth near={:.3} far={:.3}",
                h.scan.d, h.scan.spread, h.scan.near_growth, h.scan.far_growth
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical configuration, output section excluded.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub provenance: Provenance,
    pub mode: Mode,
    pub passed: bool,
    pub records: Vec<ReportRecord>,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &ReportRecord> {
        self.records.iter().filter(|r| !r.passed())
    }

    pub fn exit_status(&self) -> i32 {
        if self.passed {
            exit::OK
        } else {
            exit::CHECK_FAILED
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is always serializable") + "\n"
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.output = Default::default();
    let digest = Sha256::digest(c.to_toml().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A finished run: the summary plus the CSV files it would write.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Summary,
    pub tables: Vec<(String, String)>,
}

fn scan_csv(samples: &[Sample]) -> String {
    let mut s = String::from("r,value,margin\n");
    for p in samples {
        let _ = writeln!(s, "{},{},{}", p.r, p.value, p.margin);
    }
    s
}

fn cases_for(mode: Mode, prof: &MultiplierProfile, cfg: &RunConfig) -> Result<Vec<CaseReport>> {
    let grid = cfg.scan_grid();
    match mode {
        Mode::Budget => Ok(vec![verify_budget(prof, &grid)?]),
        _ => verify_all(prof, &grid),
    }
}

fn hardy_for(bg: &BackgroundParams, cfg: &RunConfig) -> Result<(HardyRecord, Vec<(String, String)>)> {
    let scan = hardy_scan(bg, cfg.hardy.sliding)?;
    let family = TestFunction::random_family(cfg.seed, cfg.hardy.random, bg);
    let random_ratios = family.par_iter().map(|tf| hardy_ratio(tf, bg)).collect::<Result<Vec<f64>>>()?;
    let passed = scan.bounded(HARDY_SPREAD_LIMIT) && random_ratios.iter().all(|r| r.is_finite() && *r >= 0.0);

    // ρ from 1e-6 r_s to 1e3 r_s above the horizon
    let rs = bg.r_s();
    let radii: Vec<f64> = (0..=180).map(|i| rs * (1.0 + 10f64.powf(-6.0 + i as f64 / 20.0))).collect();
    let prof = HardyProfile::tabulate(bg, &radii)?;
    let d = bg.d();
    let mut rho = String::from("r,value,margin\n");
    for i in 0..radii.len() {
        let _ = writeln!(rho, "{},{},{}", prof.r[i], prof.rho[i], prof.rho_prime[i]);
    }
    let mut sliding = String::from("center,ratio\n");
    for (c, r) in scan.centers.iter().zip(&scan.ratios) {
        let _ = writeln!(sliding, "{c},{r}");
    }
    let tables = vec![(format!("hardy_rho_d{d}.csv"), rho), (format!("hardy_sliding_d{d}.csv"), sliding)];
    Ok((HardyRecord { scan, random_ratios, passed }, tables))
}

/// CSV tables as (file name, contents).
type Tables = Vec<(String, String)>;

fn evolution_for(
    bg: BackgroundParams,
    mp: MultiplierParams,
    cfg: &RunConfig,
) -> Result<(Vec<EvolutionRecord>, Tables)> {
    let ec = cfg.evolution_config(bg, mp);
    let series = evolve(&ec)?;
    let d = bg.d();
    let mut records = Vec::new();
    let mut tables = Vec::new();
    for s in &series {
        records.push(EvolutionRecord::from_series(s, d, ec.data.kind, cfg.evolution.drift_tolerance));
        let mut t = String::from("t,energy,le_accum,base_residual\n");
        for i in 0..s.times.len() {
            let _ = writeln!(t, "{},{},{},{}", s.times[i], s.energy[i], s.le_accum[i], s.base_residual[i]);
        }
        tables.push((format!("evolve_d{d}_l{}.csv", s.ell), t));
    }
    Ok((records, tables))
}

/// Runs `mode` without touching the filesystem.
pub fn execute(mode: Mode, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mp = cfg.multiplier_params()?;
    let bgs = cfg.backgrounds()?;
    let wants = |m: Mode| mode == m || mode == Mode::All;

    let per_d = bgs
        .par_iter()
        .map(|bg| -> Result<(Vec<ReportRecord>, Tables)> {
            let prof = MultiplierProfile::new(*bg, mp);
            let d = bg.d();
            let mut records = Vec::new();
            let mut tables = Vec::new();
            if wants(Mode::Verify) || mode == Mode::Budget {
                let m = if mode == Mode::Budget { Mode::Budget } else { Mode::Verify };
                for rep in cases_for(m, &prof, cfg)? {
                    if !rep.samples.is_empty() {
                        tables.push((format!("{}_d{d}.csv", rep.verdict.case_id), scan_csv(&rep.samples)));
                    }
                    records.push(ReportRecord::CaseVerdict(rep.verdict));
                }
            }
            if wants(Mode::Hardy) {
                let (rec, t) = hardy_for(bg, cfg)?;
                records.push(ReportRecord::Hardy(rec));
                tables.extend(t);
            }
            if wants(Mode::Evolve) {
                let (recs, t) = evolution_for(*bg, mp, cfg)?;
                records.extend(recs.into_iter().map(ReportRecord::Evolution));
                tables.extend(t);
            }
            Ok((records, tables))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut tables = Vec::new();
    for (r, t) in per_d {
        records.extend(r);
        tables.extend(t);
    }
    let mut effective = cfg.clone();
    effective.mode = Some(mode);
    let summary = Summary {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(&effective),
        },
        mode,
        passed: records.iter().all(ReportRecord::passed),
        records,
    };
    Ok(RunOutput { summary, tables })
}

/// Runs `mode` and writes `summary.json`, `config.toml` and the CSV tables
/// into the configured output directory.
pub fn run(mode: Mode, cfg: &RunConfig) -> Result<Summary> {
    let out = execute(mode, cfg)?;
    let dir = Path::new(&cfg.output.dir);
    fs::create_dir_all(dir)?;
    let mut effective = cfg.clone();
    effective.mode = Some(mode);
    fs::write(dir.join("config.toml"), effective.to_toml())?;
    fs::write(dir.join("summary.json"), out.summary.to_json())?;
    if cfg.output.csv {
        for (name, body) in &out.tables {
            fs::write(dir.join(name), body)?;
        }
    }
    Ok(out.summary)
}
