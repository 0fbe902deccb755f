//! Discrete bookkeeping of the integrated multiplier identity.
//!
//! Multiplying `w u_tt = (w u_x)_x - w V u` by `-(f u_x + G u)`,
//! `G = (A f' + (d+2) A f / r)/2`, and integrating over a slab gives
//!
//! `[-∫ (f v u_x + G u v) w dx]_0^T = ∫∫ [A f' u_x² + (1 - (r_ps/r)^{d+1}) (f/r)(λ/r²) A u²
//!  + A l(f) u²] w dx dt + (1/4) w(r_b) A² (f''⁻ - f''⁺) ∫ u(r_b)² dt`.
//!
//! The last term is the delta mass of `l(f)` at `r_b = r_{-1/ε}`, where `f''` jumps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::operator::{gradient, RadialOperator};
use super::state::ModeState;
use crate::error::{Error, Result};
use crate::geometry::Radius;
use crate::multiplier::{MultiplierProfile, Side};

/// Largest history spacing accepted, in units of the mesh spacing.
pub const MAX_CADENCE: f64 = 4.0;

/// Quadrature weights for the two sides of the identity on one mesh.
#[derive(Debug, Clone)]
pub struct IdentityWeights {
    flux_grad: Vec<f64>,
    flux_zero: Vec<f64>,
    bulk_grad: Vec<f64>,
    bulk_zero: Vec<f64>,
    jump_cell: usize,
    jump_frac: f64,
    jump_coef: f64,
}

impl IdentityWeights {
    pub fn new(op: &RadialOperator, prof: &MultiplierProfile) -> Result<Self> {
        let mesh = op.mesh();
        let bg = *prof.background();
        if *mesh.background() != bg {
            return Err(Error::Domain("profile and mesh backgrounds differ".into()));
        }
        let n = op.len();
        let dx = op.dx();
        let xs = mesh.x();
        let pts = mesh.grid().points();
        let pw = bg.d() as i32 + 2;
        let lambda = op.lambda();
        let ratio = (bg.r_ps() / bg.r_s()).powi(bg.d() as i32 + 1);

        let grad_coef = |p: &Radius| prof.lapse_f_prime_at(p) * p.r.powi(pw);
        let zero_coef = |p: &Radius, side: Side| -> Result<f64> {
            // (r_ps/r)^{d+1} = ((d+3)/2) / (1 + u)
            let ang = (1.0 - ratio / (1.0 + p.excess())) * prof.f_at(p) / p.r * lambda / (p.r * p.r) * p.lapse();
            Ok((ang + prof.lapse_l_f_at(p, Some(side))?) * p.r.powi(pw))
        };

        let mut flux_grad = vec![0.0; n];
        let mut flux_zero = vec![0.0; n];
        for (i, p) in pts.iter().enumerate() {
            let m = p.r.powi(pw) * dx;
            let f = prof.f_at(p);
            flux_grad[i] = f * m;
            flux_zero[i] = 0.5 * (prof.lapse_f_prime_at(p) + (bg.d() as f64 + 2.0) * p.lapse() * f / p.r) * m;
        }

        let anchor = bg.point(bg.r_ps())?.ln_u;
        let mut breaks = Vec::new();
        for p in [prof.r_break_low(), bg.point(bg.r_ps())?, prof.r_break_high()] {
            breaks.push((bg.tortoise_between(anchor, p.ln_u)?, p));
        }

        let mut bulk_grad = vec![0.0; n];
        let mut bulk_zero = vec![0.0; n];
        for j in 0..n - 1 {
            let mut ends: Vec<(f64, Radius)> = vec![(0.0, pts[j])];
            for &(xb, p) in &breaks {
                let s = (xb - xs[j]) / dx;
                if s > 0.0 && s < 1.0 {
                    ends.push((s, p));
                }
            }
            ends.push((1.0, pts[j + 1]));
            for w in ends.windows(2) {
                let ((sa, pa), (sb, pb)) = (w[0], w[1]);
                let half = 0.5 * (sb - sa) * dx;
                for (s, c_grad, c_zero) in [
                    (sa, grad_coef(&pa), zero_coef(&pa, Side::Right)?),
                    (sb, grad_coef(&pb), zero_coef(&pb, Side::Left)?),
                ] {
                    bulk_grad[j] += half * c_grad * (1.0 - s);
                    bulk_grad[j + 1] += half * c_grad * s;
                    bulk_zero[j] += half * c_zero * (1.0 - s);
                    bulk_zero[j + 1] += half * c_zero * s;
                }
            }
        }

        let xb = breaks[0].0;
        let (jump_cell, jump_frac) = if xb <= xs[0] || xb >= xs[n - 1] {
            // outside the mesh: the field is zero there
            (0, 0.0)
        } else {
            let j = (((xb - xs[0]) / dx).floor() as usize).min(n - 2);
            (j, (xb - xs[j]) / dx)
        };
        let inside = xb > xs[0] && xb < xs[n - 1];
        let rb = prof.r_break_low();
        let jump_coef = if inside { 0.25 * rb.r.powi(pw) * prof.lapse_sq_f_second_jump() } else { 0.0 };
        Ok(Self { flux_grad, flux_zero, bulk_grad, bulk_zero, jump_cell, jump_frac, jump_coef })
    }

    /// `-∫ (f v u_x + G u v) w dx`.
    pub fn flux(&self, u: &[f64], ux: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..u.len() {
            s -= self.flux_grad[i] * v[i] * ux[i] + self.flux_zero[i] * u[i] * v[i];
        }
        s
    }

    /// The bulk integrand of the right side, integrated over the mesh.
    pub fn bulk(&self, u: &[f64], ux: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..u.len() {
            s += self.bulk_grad[i] * ux[i] * ux[i] + self.bulk_zero[i] * u[i] * u[i];
        }
        s
    }

    /// `(1/4) w(r_b) A² (f''⁻ - f''⁺) u(r_b)²`, with `u(r_b)` interpolated linearly.
    pub fn jump(&self, u: &[f64]) -> f64 {
        let j = self.jump_cell;
        let ub = (1.0 - self.jump_frac) * u[j] + self.jump_frac * u[j + 1];
        self.jump_coef * ub * ub
    }
}

/// Stored samples of one mode's evolution.
#[derive(Debug, Clone)]
pub struct History {
    op: Arc<RadialOperator>,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl History {
    pub fn new(op: Arc<RadialOperator>) -> Self {
        Self { op, times: Vec::new(), u: Vec::new(), v: Vec::new() }
    }

    pub fn push(&mut self, s: &ModeState) {
        self.times.push(s.t);
        self.u.push(s.u.clone());
        self.v.push(s.v.clone());
    }

    pub fn operator(&self) -> &Arc<RadialOperator> {
        &self.op
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// The two sides of the identity over a stored history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityBalance {
    pub flux_change: f64,
    pub bulk: f64,
    pub jump: f64,
    pub residual: f64,
}

pub fn identity_balance(history: &History, prof: &MultiplierProfile, include_jump: bool) -> Result<IdentityBalance> {
    let m = history.len();
    if m < 3 {
        return Err(Error::History(format!("{m} samples, need at least 3")));
    }
    let op = &history.op;
    let limit = MAX_CADENCE * op.dx();
    let widest = history.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if widest > limit * (1.0 + 1e-12) {
        return Err(Error::History(format!("sample spacing {widest} exceeds {limit} ({MAX_CADENCE} mesh spacings)")));
    }
    let wts = IdentityWeights::new(op, prof)?;
    let mut ux = vec![0.0; op.len()];
    let mut bulk = Vec::with_capacity(m);
    let mut jump = Vec::with_capacity(m);
    let mut flux = Vec::with_capacity(m);
    for (u, v) in history.u.iter().zip(&history.v) {
        gradient(u, op.dx(), &mut ux);
        bulk.push(wts.bulk(u, &ux));
        jump.push(wts.jump(u));
        flux.push(wts.flux(u, &ux, v));
    }
    let trapz = |y: &[f64]| -> f64 {
        history.times.windows(2).zip(y.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
    };
    let flux_change = flux[m - 1] - flux[0];
    let bulk = trapz(&bulk);
    let jump = if include_jump { trapz(&jump) } else { 0.0 };
    Ok(IdentityBalance { flux_change, bulk, jump, residual: flux_change - bulk - jump })
}

/// Left minus right side of the integrated identity over the history.
pub fn base_identity_residual(history: &History, prof: &MultiplierProfile, include_jump: bool) -> Result<f64> {
    identity_balance(history, prof, include_jump).map(|b| b.residual)
}
