//! Sectioned TOML run configuration.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, InitialData, ProfileKind, REFERENCE_COURANT, REFERENCE_DX};
use crate::geometry::BackgroundParams;
use crate::multiplier::MultiplierParams;
use crate::verifier::ScanGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Budget,
    Hardy,
    Evolve,
    All,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Budget => "budget",
            Mode::Hardy => "hardy",
            Mode::Evolve => "evolve",
            Mode::All => "all",
        }
    }

    pub fn from_name(name: &str) -> Result<Mode> {
        [Mode::Verify, Mode::Budget, Mode::Hardy, Mode::Evolve, Mode::All]
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown mode `{name}`")))
    }
}

/// `d = 3` and `d = [1, 2, 3]` are both accepted.
fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<i64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(i64),
        Many(Vec<i64>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(d) => vec![d],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundSection {
    #[serde(deserialize_with = "one_or_many")]
    pub d: Vec<i64>,
    pub r_s: f64,
}

impl Default for BackgroundSection {
    fn default() -> Self {
        Self { d: vec![1], r_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiplierSection {
    pub eps: f64,
    pub delta: f64,
    pub delta0: f64,
    /// Overrides `α = 5 - δ₀`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl Default for MultiplierSection {
    fn default() -> Self {
        Self { eps: 0.05, delta: 0.1, delta0: 0.1, alpha: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub points_per_region: usize,
    pub refine: bool,
    pub horizon_depth: f64,
    pub far_factor: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = ScanGrid::default();
        Self {
            points_per_region: g.points_per_region,
            refine: g.refine,
            horizon_depth: g.horizon_depth,
            far_factor: g.far_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardySection {
    /// Centers in the sliding-bump family.
    pub sliding: usize,
    /// Size of the seeded random family.
    pub random: usize,
}

impl Default for HardySection {
    fn default() -> Self {
        Self { sliding: 25, random: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub ells: Vec<u32>,
    pub t_final: f64,
    pub dx: f64,
    pub courant: f64,
    pub kind: ProfileKind,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    /// Mesh ends in `r_*`; by default far enough that nothing reaches them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_hi: Option<f64>,
    pub sample_every: usize,
    /// Relative energy drift that fails the run.
    pub drift_tolerance: f64,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let data = InitialData::default();
        Self {
            ells: vec![0, 1, 2],
            t_final: 100.0,
            dx: REFERENCE_DX,
            courant: REFERENCE_COURANT,
            kind: data.kind,
            center: data.center,
            width: data.width,
            amplitude: data.amplitude,
            x_lo: None,
            x_hi: None,
            sample_every: 10,
            drift_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Write per-point CSV files next to the summary.
    pub csv: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub background: BackgroundSection,
    pub multiplier: MultiplierSection,
    pub grid: GridSection,
    pub hardy: HardySection,
    pub evolution: EvolutionSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn backgrounds(&self) -> Result<Vec<BackgroundParams>> {
        self.background.d.iter().map(|&d| BackgroundParams::new(d, self.background.r_s)).collect()
    }

    pub fn multiplier_params(&self) -> Result<MultiplierParams> {
        let m = &self.multiplier;
        let p = MultiplierParams::new(m.eps, m.delta, m.delta0)?;
        match m.alpha {
            Some(a) => p.with_alpha(a),
            None => Ok(p),
        }
    }

    pub fn scan_grid(&self) -> ScanGrid {
        ScanGrid {
            points_per_region: self.grid.points_per_region,
            refine: self.grid.refine,
            horizon_depth: self.grid.horizon_depth,
            far_factor: self.grid.far_factor,
        }
    }

    pub fn evolution_config(&self, bg: BackgroundParams, mp: MultiplierParams) -> EvolutionConfig {
        let e = &self.evolution;
        let data = InitialData { kind: e.kind, center: e.center, width: e.width, amplitude: e.amplitude };
        let mut c = EvolutionConfig::new(bg, mp, data, e.ells.clone(), e.t_final).with_resolution(e.dx, e.courant);
        if let Some(x) = e.x_lo {
            c.x_lo = x;
        }
        if let Some(x) = e.x_hi {
            c.x_hi = x;
        }
        c.sample_every = e.sample_every;
        c
    }

    /// Every violated precondition, as one message per line.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let b = &self.background;
        if b.d.is_empty() {
            out.push("background.d: no dimensions requested".to_string());
        }
        for &d in &b.d {
            if let Err(e) = BackgroundParams::new(d, b.r_s) {
                out.push(format!("background: {e}"));
            }
        }
        let m = &self.multiplier;
        for e in MultiplierParams::violations(m.eps, m.delta, m.delta0) {
            out.push(format!("multiplier: {e}"));
        }
        if let Some(a) = m.alpha {
            if !(a > 0.0 && a.is_finite()) {
                out.push(format!("multiplier.alpha: alpha = {a}, need alpha > 0"));
            }
        }
        let g = &self.grid;
        if g.points_per_region < 16 {
            out.push(format!("grid.points_per_region: {}, need at least 16", g.points_per_region));
        }
        if !(g.horizon_depth > 0.0) {
            out.push(format!("grid.horizon_depth: {}, need > 0", g.horizon_depth));
        }
        if !(g.far_factor > 1.0) {
            out.push(format!("grid.far_factor: {}, need > 1", g.far_factor));
        }
        if self.hardy.sliding < 8 {
            out.push(format!("hardy.sliding: {}, need at least 8", self.hardy.sliding));
        }
        if !(self.evolution.drift_tolerance > 0.0) {
            out.push(format!("evolution.drift_tolerance: {}, need > 0", self.evolution.drift_tolerance));
        }
        // the evolution checks need a valid background; any valid one will do
        let bg = BackgroundParams::new(1, 1.0).expect("valid");
        let mp = MultiplierParams::default();
        for e in self.evolution_config(bg, mp).violations() {
            out.push(format!("evolution: {e}"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("\n")))
        }
    }

    /// Canonical TOML of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}

/// Parses and validates configuration text. Absent keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
