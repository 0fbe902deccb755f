//! Run configuration, initial data and the monitored time loop.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identity::{History, IdentityWeights};
use super::operator::{gradient, RadialOperator, TortoiseMesh};
use super::state::{modified_energy, ModeState, CFL_LIMIT};
use crate::error::{param, Error, Result};
use crate::geometry::BackgroundParams;
use crate::multiplier::{MultiplierParams, MultiplierProfile};

/// Mesh spacing of the reference resolution.
pub const REFERENCE_DX: f64 = 0.025;
/// `dt / Δx` at the reference resolution.
pub const REFERENCE_COURANT: f64 = 0.4;
/// Relative amplitude at the mesh edge that counts as contamination.
pub const CONTAMINATION_LEVEL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `v = 0`.
    Symmetric,
    /// `v = -u_x`.
    Outgoing,
}

/// A Gaussian in `r_*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub kind: ProfileKind,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { kind: ProfileKind::Symmetric, center: 5.0, width: 0.5, amplitude: 1.0 }
    }
}

impl InitialData {
    pub fn sample(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let u: Vec<f64> =
            x.iter().map(|&x| self.amplitude * (-((x - self.center) / self.width).powi(2)).exp()).collect();
        let v = match self.kind {
            ProfileKind::Symmetric => vec![0.0; x.len()],
            ProfileKind::Outgoing => {
                x.iter().zip(&u).map(|(&x, &u)| 2.0 * (x - self.center) / (self.width * self.width) * u).collect()
            }
        };
        (u, v)
    }

    /// Interval outside which the datum is below `e^{-100}` of its peak.
    pub fn support(&self) -> (f64, f64) {
        (self.center - 10.0 * self.width, self.center + 10.0 * self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub bg: BackgroundParams,
    pub mp: MultiplierParams,
    pub ell_list: Vec<u32>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub data: InitialData,
    /// Series samples every this many steps.
    pub sample_every: usize,
    /// Field snapshots every this many steps, if any.
    pub history_every: Option<usize>,
}

impl EvolutionConfig {
    /// Reference resolution on a domain no signal leaves before `t_final`.
    pub fn new(
        bg: BackgroundParams,
        mp: MultiplierParams,
        data: InitialData,
        ell_list: Vec<u32>,
        t_final: f64,
    ) -> Self {
        let (x_lo, x_hi) = Self::auto_domain(&data, t_final);
        Self {
            bg,
            mp,
            ell_list,
            x_lo,
            x_hi,
            dx: REFERENCE_DX,
            dt: REFERENCE_COURANT * REFERENCE_DX,
            t_final,
            data,
            sample_every: 10,
            history_every: None,
        }
    }

    pub fn auto_domain(data: &InitialData, t_final: f64) -> (f64, f64) {
        let (lo, hi) = data.support();
        (lo - t_final - 5.0, hi + t_final + 5.0)
    }

    pub fn with_resolution(mut self, dx: f64, courant: f64) -> Self {
        self.dx = dx;
        self.dt = courant * dx;
        self
    }

    /// Every violated precondition.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if self.ell_list.is_empty() {
            out.push(param("ell_list", "no modes requested"));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            out.push(param("dx", format!("dx = {}, need dx > 0", self.dx)));
        }
        if !(self.dt > 0.0) {
            out.push(param("dt", format!("dt = {}, need dt > 0", self.dt)));
        } else if self.dt > CFL_LIMIT * self.dx {
            out.push(Error::Cfl { dt: self.dt, limit: CFL_LIMIT * self.dx });
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            out.push(param("t_final", format!("t_final = {}, need t_final >= 0", self.t_final)));
        }
        if !(self.x_hi > self.x_lo) {
            out.push(param("x_range", format!("[{}, {}] is empty", self.x_lo, self.x_hi)));
        }
        if !(self.data.width > 0.0) {
            out.push(param("width", format!("width = {}, need width > 0", self.data.width)));
        }
        if !self.data.amplitude.is_finite() || !self.data.center.is_finite() {
            out.push(param("data", "non-finite center or amplitude"));
        }
        let (lo, hi) = self.data.support();
        if self.data.amplitude != 0.0 && (lo <= self.x_lo || hi >= self.x_hi) {
            out.push(param("data", format!("support [{lo}, {hi}] not strictly inside [{}, {}]", self.x_lo, self.x_hi)));
        }
        if self.sample_every == 0 {
            out.push(param("sample_every", "need at least 1"));
        }
        if self.history_every == Some(0) {
            out.push(param("history_every", "need at least 1"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn mesh(&self) -> Result<TortoiseMesh> {
        TortoiseMesh::with_spacing(&self.bg, self.x_lo, self.x_hi, self.dx)
    }
}

/// Monitors of one mode, sampled along the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLeSeries {
    pub ell: u32,
    pub dx: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    /// The scheme's conserved energy.
    pub energy: Vec<f64>,
    pub le_accum: Vec<f64>,
    /// Left minus right side of the integrated identity on `[0, t]`.
    pub base_residual: Vec<f64>,
    /// First sample time at which the field reached the mesh edge.
    pub contamination: Option<f64>,
}

impl EnergyLeSeries {
    pub fn initial_energy(&self) -> f64 {
        self.energy[0]
    }

    pub fn sup_energy(&self) -> f64 {
        self.energy.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_t |E(t) - E(0)| / E(0)`, zero for zero data.
    pub fn max_drift(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    pub fn final_le(&self) -> f64 {
        *self.le_accum.last().expect("series is never empty")
    }

    pub fn final_residual(&self) -> f64 {
        *self.base_residual.last().expect("series is never empty")
    }

    /// `le_accum(T) / E(0)`.
    pub fn le_ratio(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            0.0
        } else {
            self.final_le() / e0
        }
    }

    /// `(sup_t E(t) + le_accum(T)) / E(0)`.
    pub fn bound_ratio(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            0.0
        } else {
            (self.sup_energy() + self.final_le()) / e0
        }
    }

    /// First sample time at which `le_accum` reaches `frac` of its final value.
    pub fn saturation_time(&self, frac: f64) -> f64 {
        let target = frac * self.final_le();
        let i = self.le_accum.partition_point(|&l| l < target);
        self.times[i.min(self.times.len() - 1)]
    }
}

/// A finished mode run.
#[derive(Debug, Clone)]
pub struct ModeRun {
    pub series: EnergyLeSeries,
    pub history: Option<History>,
}

/// Runs one mode on a prepared mesh.
pub fn evolve_mode(config: &EvolutionConfig, mesh: Arc<TortoiseMesh>, ell: u32) -> Result<ModeRun> {
    config.validate()?;
    let prof = MultiplierProfile::new(config.bg, config.mp);
    let op = Arc::new(RadialOperator::new(mesh, ell)?);
    let wts = IdentityWeights::new(&op, &prof)?;
    let n = op.len();
    let (u, v) = config.data.sample(op.mesh().x());
    let u0max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut state = ModeState::new(op.clone(), u, v)?;

    let steps = if config.t_final == 0.0 { 0 } else { (config.t_final / config.dt - 1e-9).ceil() as usize };
    let dt = if steps == 0 { config.dt } else { config.t_final / steps as f64 };

    let mut ux = vec![0.0; n];
    let monitors = |s: &ModeState, ux: &mut [f64]| {
        gradient(&s.u, op.dx(), ux);
        (op.le_density(&s.u, ux), wts.bulk(&s.u, ux) + wts.jump(&s.u), wts.flux(&s.u, ux, &s.v))
    };
    let (mut le_rate, mut rhs_rate, flux0) = monitors(&state, &mut ux);
    let e0 = modified_energy(&state, dt);
    let mut series = EnergyLeSeries {
        ell,
        dx: op.dx(),
        dt,
        times: vec![0.0],
        energy: vec![e0],
        le_accum: vec![0.0],
        base_residual: vec![0.0],
        contamination: None,
    };
    let mut history = config.history_every.map(|_| {
        let mut h = History::new(op.clone());
        h.push(&state);
        h
    });
    let (mut le, mut rhs) = (0.0, 0.0);
    let edge = |s: &ModeState| {
        let lo = s.u[1..4].iter();
        let hi = s.u[n - 4..n - 1].iter();
        lo.chain(hi).fold(0.0f64, |m, x| m.max(x.abs()))
    };

    for k in 1..=steps {
        state.advance(dt)?;
        let (lr, rr, flux) = monitors(&state, &mut ux);
        le += 0.5 * dt * (le_rate + lr);
        rhs += 0.5 * dt * (rhs_rate + rr);
        le_rate = lr;
        rhs_rate = rr;
        if let (Some(every), Some(h)) = (config.history_every, history.as_mut()) {
            if k % every == 0 || k == steps {
                h.push(&state);
            }
        }
        if k % config.sample_every == 0 || k == steps {
            let e = modified_energy(&state, dt);
            if !e.is_finite() || e > 10.0 * e0 + f64::MIN_POSITIVE {
                return Err(Error::Instability {
                    t: state.t,
                    detail: format!("energy {e:e} from initial {e0:e} (ell = {ell})"),
                });
            }
            if series.contamination.is_none() && u0max > 0.0 && edge(&state) > CONTAMINATION_LEVEL * u0max {
                series.contamination = Some(state.t);
            }
            series.times.push(state.t);
            series.energy.push(e);
            series.le_accum.push(le);
            series.base_residual.push(flux - flux0 - rhs);
        }
    }
    Ok(ModeRun { series, history })
}

/// Runs every requested mode, in parallel, on one shared mesh.
pub fn evolve(config: &EvolutionConfig) -> Result<Vec<EnergyLeSeries>> {
    config.validate()?;
    let mesh = Arc::new(config.mesh()?);
    config.ell_list.par_iter().map(|&ell| evolve_mode(config, mesh.clone(), ell).map(|r| r.series)).collect()
}
