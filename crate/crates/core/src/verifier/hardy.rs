//! The Hardy density `ρ`, the Hardy ratio and the time-boundary check.
//!
//! Integrals over `(r_s, 2 r_s]` are taken in `w = 1/(1 - ln y)`,
//! `y = (r - r_s)/r`, which turns the `1/(y ln² y)` singularity into a
//! smooth integrand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BackgroundParams, Radius};
use crate::multiplier::MultiplierProfile;
use crate::quadrature::GaussKronrod;

fn quad() -> GaussKronrod {
    GaussKronrod::with_tol(1e-13, 1e-11)
}

/// Gaussian bump `amplitude · exp(-((r - center)/width)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// Radial test function: a finite sum of Gaussian bumps (empty means `0`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub bumps: Vec<Bump>,
}

impl TestFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn gaussian(center: f64, width: f64, amplitude: f64) -> Self {
        Self { bumps: vec![Bump { center, width, amplitude }] }
    }

    /// Unit bump at `center` with width `(center - r_s)/4`.
    pub fn sliding(center: f64, bg: &BackgroundParams) -> Self {
        Self::gaussian(center, (center - bg.r_s()) / 4.0, 1.0)
    }

    /// `count` random sums of one to three bumps with centers in `[1.1 r_s, 50 r_s]`.
    pub fn random_family(seed: u64, count: usize, bg: &BackgroundParams) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rs = bg.r_s();
        (0..count)
            .map(|_| {
                let n = rng.random_range(1..=3);
                let bumps = (0..n)
                    .map(|_| {
                        let center = rs * (1.1f64.ln() + rng.random::<f64>() * (50.0f64 / 1.1).ln()).exp();
                        Bump {
                            center,
                            width: (center - rs) * rng.random_range(0.1..0.4),
                            amplitude: rng.random_range(-2.0..2.0),
                        }
                    })
                    .collect();
                Self { bumps }
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bumps.iter().all(|b| b.amplitude == 0.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.bumps.iter().map(|b| b.amplitude * (-((r - b.center) / b.width).powi(2)).exp()).sum()
    }

    pub fn deriv(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|b| {
                let z = (r - b.center) / b.width;
                -2.0 * z / b.width * b.amplitude * (-z * z).exp()
            })
            .sum()
    }

    /// Quadrature breakpoints in `r` and the truncation radius.
    fn breaks(&self, bg: &BackgroundParams) -> (Vec<f64>, f64) {
        let rs = bg.r_s();
        let mut pts: Vec<f64> = self
            .bumps
            .iter()
            .flat_map(|b| (-6..=6).map(move |j| b.center + j as f64 * b.width))
            .filter(|&r| r > rs)
            .collect();
        let r_max = self.bumps.iter().map(|b| b.center + 12.0 * b.width).fold(2.0 * rs, f64::max);
        pts.push(2.0 * rs);
        pts.push(r_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        (pts, r_max)
    }
}

fn w_of_ln_y(ln_y: f64) -> f64 {
    1.0 / (1.0 - ln_y)
}

/// `ln y` at the areal radius `r`.
fn ln_y_of(r: f64, bg: &BackgroundParams) -> Result<f64> {
    Ok(bg.point(r)?.ln_offset(bg))
}

/// `∫ F dr` over `(r_s, r_top]`, `r_top <= 2 r_s`, in the variable `w`.
/// `g(p, ln_y, w)` must return the integrand already multiplied by `dr/dw`.
fn horizon_integral<G>(bg: &BackgroundParams, r_top: f64, breaks: &[f64], g: G) -> Result<f64>
where
    G: Fn(&Radius, f64, f64) -> f64,
{
    let w_top = w_of_ln_y(ln_y_of(r_top, bg)?);
    let mut ws = vec![0.0];
    for &r in breaks {
        if r > bg.r_s() && r < r_top {
            ws.push(w_of_ln_y(ln_y_of(r, bg)?));
        }
    }
    ws.push(w_top);
    ws.sort_by(f64::total_cmp);
    ws.dedup();
    let q = quad().integrate_pieces(
        |w: f64| {
            let ln_y = 1.0 - 1.0 / w;
            let p = bg.point_from_ln_offset(ln_y);
            g(&p, ln_y, w)
        },
        &ws,
    )?;
    Ok(q.value)
}

/// `dr/dw = r_s y / ((1-y)² w²)`.
fn jacobian(bg: &BackgroundParams, ln_y: f64, w: f64) -> f64 {
    let y = ln_y.exp();
    bg.r_s() * y / ((1.0 - y).powi(2) * w * w)
}

/// `ρ'(r) = r^d / ((1 - ln y)² y)`.
pub fn rho_prime(r: f64, bg: &BackgroundParams) -> Result<f64> {
    let ln_y = ln_y_of(r, bg)?;
    let l = 1.0 - ln_y;
    Ok(r.powi(bg.d() as i32) / (l * l) * (-ln_y).exp())
}

/// `ρ(r) = ∫_{r_s}^r ρ'(x) dx`.
pub fn rho(r: f64, bg: &BackgroundParams) -> Result<f64> {
    let rs = bg.r_s();
    bg.point(r)?;
    let di = bg.d() as i32;
    // ρ' dr/dw = x^d r_s / (1-y)²
    let near = |p: &Radius, ln_y: f64, _w: f64| p.r.powi(di) * rs / (1.0 - ln_y.exp()).powi(2);
    if r <= 2.0 * rs {
        return horizon_integral(bg, r, &[], near);
    }
    let mut total = horizon_integral(bg, 2.0 * rs, &[], near)?;
    let mut a = 2.0 * rs;
    while a < r {
        let b = (2.0 * a).min(r);
        total += quad().integrate(|x| rho_prime(x, bg).unwrap_or(f64::NAN), a, b)?.value;
        a = b;
    }
    Ok(total)
}

/// `ρ² / ρ'`.
pub fn rho_weight(r: f64, bg: &BackgroundParams) -> Result<f64> {
    let v = rho(r, bg)?;
    Ok(v * v / rho_prime(r, bg)?)
}

/// `ρ`, `ρ'` and `ρ²/ρ'` tabulated on increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyProfile {
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_prime: Vec<f64>,
    pub hardy_weight: Vec<f64>,
}

impl HardyProfile {
    pub fn tabulate(bg: &BackgroundParams, radii: &[f64]) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("radii must be strictly increasing".into()));
        }
        let mut out = Self {
            r: radii.to_vec(),
            rho: Vec::with_capacity(radii.len()),
            rho_prime: Vec::with_capacity(radii.len()),
            hardy_weight: Vec::with_capacity(radii.len()),
        };
        for &r in radii {
            let v = rho(r, bg)?;
            let dv = rho_prime(r, bg)?;
            out.rho.push(v);
            out.rho_prime.push(dv);
            out.hardy_weight.push(v * v / dv);
        }
        Ok(out)
    }
}

/// `∫ F(r) dr` over `(r_s, ∞)` for a test-function integrand, split at `2 r_s`.
fn exterior_integral<N, F>(bg: &BackgroundParams, tf: &TestFunction, near: N, far: F) -> Result<f64>
where
    N: Fn(&Radius, f64, f64) -> f64,
    F: Fn(&Radius) -> f64,
{
    let (breaks, r_max) = tf.breaks(bg);
    let rs = bg.r_s();
    let inner = horizon_integral(bg, 2.0 * rs, &breaks, near)?;
    let mut pts: Vec<f64> = breaks.into_iter().filter(|&r| r >= 2.0 * rs && r <= r_max).collect();
    pts.insert(0, 2.0 * rs);
    pts.dedup();
    let outer = quad().integrate_pieces(
        |r| match bg.point(r) {
            Ok(p) => far(&p),
            Err(_) => f64::NAN,
        },
        &pts,
    )?;
    let total = inner + outer.value;
    if !total.is_finite() {
        return Err(Error::Divergent("test-function integral".into()));
    }
    Ok(total)
}

/// `∫ ρ' φ² dr / ∫ y (∂_r φ)² r^{d+2} dr`; `0` for the zero function.
pub fn hardy_ratio(tf: &TestFunction, bg: &BackgroundParams) -> Result<f64> {
    if tf.is_zero() {
        return Ok(0.0);
    }
    let rs = bg.r_s();
    let di = bg.d() as i32;
    let lhs = exterior_integral(
        bg,
        tf,
        |p, ln_y, _| p.r.powi(di) * rs / (1.0 - ln_y.exp()).powi(2) * tf.value(p.r).powi(2),
        |p| rho_prime(p.r, bg).unwrap_or(f64::NAN) * tf.value(p.r).powi(2),
    )?;
    let rhs = exterior_integral(
        bg,
        tf,
        |p, ln_y, w| ln_y.exp() * tf.deriv(p.r).powi(2) * p.r.powi(di + 2) * jacobian(bg, ln_y, w),
        |p| p.offset(bg) * tf.deriv(p.r).powi(2) * p.r.powi(di + 2),
    )?;
    if !(rhs > 0.0) {
        return Err(Error::Divergent("Hardy right-hand side vanishes".into()));
    }
    Ok(lhs / rhs)
}

/// Hardy ratios over the sliding-bump family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyScan {
    pub d: u32,
    pub centers: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max / min` of the ratios.
    pub spread: f64,
    /// Growth rate `d ln ratio / d ln(center - r_s)` over the outer quarter
    /// of the family, from a least-squares fit.
    pub far_growth: f64,
    /// Growth rate towards the horizon, `-d ln ratio / d ln(center - r_s)`,
    /// over the inner quarter.
    pub near_growth: f64,
}

/// Growth rates below this count as no blow-up.
pub const TREND_LIMIT: f64 = 0.1;

impl HardyScan {
    pub fn bounded(&self, max_spread: f64) -> bool {
        self.ratios.iter().all(|r| r.is_finite() && *r > 0.0)
            && self.spread <= max_spread
            && self.far_growth < TREND_LIMIT
            && self.near_growth < TREND_LIMIT
    }
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Sliding bumps with `count` centers log-spaced in `center - r_s` from
/// `r_s / 4` to `100 r_s`.
pub fn hardy_scan(bg: &BackgroundParams, count: usize) -> Result<HardyScan> {
    if count < 8 {
        return Err(Error::EmptyGrid);
    }
    let rs = bg.r_s();
    let logs: Vec<f64> = (0..count).map(|i| (0.25f64).ln() + (400.0f64).ln() * i as f64 / (count - 1) as f64).collect();
    let centers: Vec<f64> = logs.iter().map(|l| rs * (1.0 + l.exp())).collect();
    let ratios =
        centers.par_iter().map(|&c| hardy_ratio(&TestFunction::sliding(c, bg), bg)).collect::<Result<Vec<f64>>>()?;
    let ln_r: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let q = count / 4;
    Ok(HardyScan {
        d: bg.d(),
        near_growth: -ls_slope(&logs[..q], &ln_r[..q]),
        far_growth: ls_slope(&logs[count - q..], &ln_r[count - q..]),
        centers,
        ratios,
        spread: hi / lo,
    })
}

/// `A f' + (d+2) A f / r`, i.e. `A · r^{-(d+2)} ∂_r(f r^{d+2})`.
fn lapse_divergence(p: &Radius, prof: &MultiplierProfile) -> f64 {
    let d = prof.background().d() as f64;
    prof.lapse_f_prime_at(p) + (d + 2.0) * p.lapse() * prof.f_at(p) / p.r
}

/// Coefficient of the time-boundary integrand, `[r^{-(d+2)} ∂_r(f r^{d+2})]² A`.
pub fn time_coefficient(r: f64, prof: &MultiplierProfile) -> Result<f64> {
    let p = prof.background().point(r)?;
    Ok(lapse_divergence(&p, prof).powi(2) / p.lapse())
}

/// `K · y` at the point with `ln y = ln_y`, where `K` is [`time_coefficient`];
/// finite arbitrarily close to the horizon.
pub fn time_coefficient_offset_scaled(ln_y: f64, prof: &MultiplierProfile) -> f64 {
    let p = prof.background().point_from_ln_offset(ln_y);
    lapse_divergence(&p, prof).powi(2) * (ln_y - p.ln_lapse()).exp()
}

/// `∫ [r^{-(d+2)} ∂_r(f r^{d+2})]² A φ² r^{d+2} dr` divided by the static
/// energy `∫ A (∂_r φ)² r^{d+2} dr` of the same radial profile.
pub fn time_boundary_check(tf: &TestFunction, prof: &MultiplierProfile) -> Result<f64> {
    if tf.is_zero() {
        return Ok(0.0);
    }
    let bg = *prof.background();
    let di = bg.d() as i32;
    let lhs = exterior_integral(
        &bg,
        tf,
        |p, ln_y, w| {
            // K · dr/dw with K = (A·div)² / A; y/A stays finite at the horizon
            let y_over_a = (ln_y - p.ln_lapse()).exp();
            let y = ln_y.exp();
            lapse_divergence(p, prof).powi(2) * y_over_a * tf.value(p.r).powi(2) * p.r.powi(di + 2) * bg.r_s()
                / ((1.0 - y).powi(2) * w * w)
        },
        |p| lapse_divergence(p, prof).powi(2) / p.lapse() * tf.value(p.r).powi(2) * p.r.powi(di + 2),
    )?;
    let energy = exterior_integral(
        &bg,
        tf,
        |p, ln_y, w| p.lapse() * tf.deriv(p.r).powi(2) * p.r.powi(di + 2) * jacobian(&bg, ln_y, w),
        |p| p.lapse() * tf.deriv(p.r).powi(2) * p.r.powi(di + 2),
    )?;
    if !(energy > 0.0) {
        return Err(Error::Divergent("test function has zero energy".into()));
    }
    Ok(lhs / energy)
}
