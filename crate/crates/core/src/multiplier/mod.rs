//! The radial multiplier `f = g + (d+2)/(d+3) · r_ps r_s^{d+1} r^{-(d+2)} a(h(r))`,
//! its derivative, the zeroth-order operator `l(f)` and the `f''` jump.

mod oracle;
mod smoothing;

pub use oracle::{
    background_jets, l_f_oracle, l_operator_jet, l_operator_oracle, l_operator_oracle_at, Jet, OracleOptions,
};
pub use smoothing::{MultiplierParams, Side};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{BackgroundParams, Radius};

/// `g(r) = (r^{d+2} - r_ps^{d+2}) / r^{d+2}`.
pub fn g_eval(r: f64, bg: &BackgroundParams) -> Result<f64> {
    let p = bg.point(r)?;
    Ok(g_at(&p, bg))
}

pub(crate) fn g_at(p: &Radius, bg: &BackgroundParams) -> f64 {
    1.0 - (bg.r_ps() / p.r).powi(bg.d() as i32 + 2)
}

/// The four regions of the piecewise construction, by the value of `h(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `r_s < r <= r_{-1/ε}`
    NearHorizon,
    /// `r_{-1/ε} <= r <= r_ps`
    Inner,
    /// `r_ps <= r <= r_α`
    Outer,
    /// `r >= r_α`
    Far,
}

/// The four summands of the closed form of `l(f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfTerms {
    /// `l(g)`.
    pub lg: f64,
    /// Term proportional to `a'(h)`.
    pub first: f64,
    /// Term proportional to `a''(h)`.
    pub second: f64,
    /// Term proportional to `a'''(h)`.
    pub third: f64,
}

impl LfTerms {
    pub fn total(&self) -> f64 {
        self.lg + self.first + self.second + self.third
    }

    pub fn magnitude(&self) -> f64 {
        self.lg.abs() + self.first.abs() + self.second.abs() + self.third.abs()
    }
}

/// A multiplier for fixed background and smoothing parameters.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierProfile {
    bg: BackgroundParams,
    mp: MultiplierParams,
    /// `(d+2)/(d+3) r_ps r_s^{d+1}`.
    coef: f64,
    low: Radius,
    high: Radius,
}

impl MultiplierProfile {
    pub fn new(bg: BackgroundParams, mp: MultiplierParams) -> Self {
        let d = bg.d() as f64;
        let coef = (d + 2.0) / (d + 3.0) * bg.r_ps() * bg.r_s().powi(bg.d() as i32 + 1);
        let low = bg.point_at_theta(mp.theta_low());
        let high = bg.point_at_theta(mp.theta_high());
        Self { bg, mp, coef, low, high }
    }

    pub fn background(&self) -> &BackgroundParams {
        &self.bg
    }

    pub fn params(&self) -> &MultiplierParams {
        &self.mp
    }

    /// `(d+2)/(d+3) r_ps r_s^{d+1}`, the weight of the `a(h)` summand.
    pub fn coef(&self) -> f64 {
        self.coef
    }

    /// `r_{-1/ε}`.
    pub fn r_break_low(&self) -> Radius {
        self.low
    }

    /// `r_α`.
    pub fn r_break_high(&self) -> Radius {
        self.high
    }

    pub fn region(&self, p: &Radius) -> Region {
        let x = p.theta(&self.bg);
        if x <= self.mp.theta_low() {
            Region::NearHorizon
        } else if x <= 0.0 {
            Region::Inner
        } else if x <= self.mp.alpha {
            Region::Outer
        } else {
            Region::Far
        }
    }

    fn dplus(&self, k: f64) -> f64 {
        self.bg.d() as f64 + k
    }

    pub fn f_eval(&self, r: f64) -> Result<f64> {
        Ok(self.f_at(&self.bg.point(r)?))
    }

    pub fn f_at(&self, p: &Radius) -> f64 {
        let a = self.mp.derivs(p.theta(&self.bg), None)[0];
        g_at(p, &self.bg) + self.coef * a / p.r.powi(self.bg.d() as i32 + 2)
    }

    pub fn f_prime(&self, r: f64) -> Result<f64> {
        Ok(self.f_prime_at(&self.bg.point(r)?))
    }

    pub fn f_prime_at(&self, p: &Radius) -> f64 {
        let [a, a1, _, _] = self.mp.derivs(p.theta(&self.bg), None);
        let r = p.r;
        let di = self.bg.d() as i32;
        self.dplus(2.0) * (self.bg.r_ps().powi(di + 2) - self.coef * a) / r.powi(di + 3)
            + self.coef * a1 * p.h_prime(&self.bg) / r.powi(di + 2)
    }

    /// `A(r) f'(r)`, finite down to the horizon (uses `A h' = (d+1)/r`).
    pub fn lapse_f_prime_at(&self, p: &Radius) -> f64 {
        let [a, a1, _, _] = self.mp.derivs(p.theta(&self.bg), None);
        let r = p.r;
        let di = self.bg.d() as i32;
        p.lapse() * self.dplus(2.0) * (self.bg.r_ps().powi(di + 2) - self.coef * a) / r.powi(di + 3)
            + self.coef * a1 * self.bg.k() / r.powi(di + 3)
    }

    /// The summands of `f'` as displayed for the near-horizon region:
    /// `(d+2) r_ps^{d+2}/r^{d+3}`, `-(d+2)·coef·a/r^{d+3}`, `coef·a'·h'/r^{d+2}`.
    pub fn f_prime_terms_at(&self, p: &Radius) -> [f64; 3] {
        let [a, a1, _, _] = self.mp.derivs(p.theta(&self.bg), None);
        let r = p.r;
        let di = self.bg.d() as i32;
        [
            self.dplus(2.0) * self.bg.r_ps().powi(di + 2) / r.powi(di + 3),
            -self.dplus(2.0) * self.coef * a / r.powi(di + 3),
            self.coef * a1 * p.h_prime(&self.bg) / r.powi(di + 2),
        ]
    }

    /// `l(g) = (d+2)/(4 r^{2d+5}) (d r^{2d+2} + (d+3) r_s^{d+1} r^{d+1} - (d+2)^2 r_s^{2d+2})`.
    pub fn l_g_at(&self, p: &Radius) -> f64 {
        l_g(p.r, &self.bg)
    }

    /// `l` applied to `coef · r^{-(d+2)} h(r)`:
    /// `-(d+2)(d+1)/4 · r_ps r_s^{d+1} / r^{2d+6} · (2 r^{d+1} - (d+3) r_s^{d+1})`.
    pub fn l_h_at(&self, p: &Radius) -> f64 {
        let di = self.bg.d() as i32;
        let r = p.r;
        let rs_k = self.bg.r_s().powi(di + 1);
        -self.dplus(2.0) * self.dplus(1.0) / 4.0 * self.bg.r_ps() * rs_k / r.powi(2 * di + 6)
            * (2.0 * r.powi(di + 1) - self.dplus(3.0) * rs_k)
    }

    pub fn l_f_closed(&self, r: f64, side: Option<Side>) -> Result<f64> {
        let p = self.bg.point(r)?;
        Ok(self.l_f_terms_at(&p, side)?.total())
    }

    /// Closed form of `l(f)` split in its four summands. A side is required
    /// where `a'''` jumps (`h = -1/ε, 0, α`).
    pub fn l_f_terms_at(&self, p: &Radius, side: Option<Side>) -> Result<LfTerms> {
        self.terms(p, side, false)
    }

    /// `A · l(f)`, finite at the horizon.
    pub fn lapse_l_f_at(&self, p: &Radius, side: Option<Side>) -> Result<f64> {
        Ok(self.terms(p, side, true)?.total())
    }

    fn terms(&self, p: &Radius, side: Option<Side>, times_lapse: bool) -> Result<LfTerms> {
        let x = p.theta(&self.bg);
        // validates side at breakpoints
        self.mp.a_eval(x, 3, side)?;
        let [_, a1, a2, a3] = self.mp.derivs(x, side);
        let di = self.bg.d() as i32;
        let d = self.bg.d() as f64;
        let r = p.r;
        let rs_k = self.bg.r_s().powi(di + 1);
        let base = self.bg.r_ps() * rs_k;
        let lapse = if times_lapse { p.lapse() } else { 1.0 };
        // 1/(r^{d+1} - r_s^{d+1}), or A/(r^{d+1} - r_s^{d+1}) = 1/(r_s^{d+1}(1+u)) with the lapse
        let inv_gap = if times_lapse { 1.0 / (rs_k * (1.0 + p.excess())) } else { 1.0 / p.power_gap(&self.bg) };
        let lg = l_g(r, &self.bg) * lapse;
        let first = (d + 1.0) * (d + 2.0) / 2.0 * base / r.powi(2 * di + 6)
            * (self.bg.r_ps().powi(di + 1) - r.powi(di + 1))
            * a1
            * lapse;
        let second = (d + 1.0).powi(2) * (d + 2.0) * (d + 5.0) / (4.0 * (d + 3.0)) * base / r.powi(di + 5) * a2 * lapse;
        let third = -(d + 1.0).powi(3) * (d + 2.0) / (4.0 * (d + 3.0)) * base / r.powi(4) * inv_gap * a3;
        Ok(LfTerms { lg, first, second, third })
    }

    /// `f''(r_{-1/ε}^-) - f''(r_{-1/ε}^+) = 2δε · coef · r^{-(d+2)} (h'(r))^2` at `r_{-1/ε}`.
    pub fn f_second_jump(&self) -> f64 {
        let p = self.low;
        let hp = p.h_prime(&self.bg);
        2.0 * self.mp.delta * self.mp.eps * self.coef / p.r.powi(self.bg.d() as i32 + 2) * hp * hp
    }

    /// `A(r_b)^2 · (f''^- - f''^+)` at `r_b = r_{-1/ε}`, computed without the
    /// large `h'` factor.
    pub fn lapse_sq_f_second_jump(&self) -> f64 {
        let p = self.low;
        let k = self.bg.k();
        2.0 * self.mp.delta * self.mp.eps * self.coef / p.r.powi(self.bg.d() as i32 + 2) * (k / p.r).powi(2)
    }
}

/// `l(g)` in closed form.
pub fn l_g(r: f64, bg: &BackgroundParams) -> f64 {
    let di = bg.d() as i32;
    let d = bg.d() as f64;
    let rs_k = bg.r_s().powi(di + 1);
    let rk = r.powi(di + 1);
    (d + 2.0) / (4.0 * r.powi(2 * di + 5)) * (d * rk * rk + (d + 3.0) * rs_k * rk - (d + 2.0).powi(2) * rs_k * rs_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(d: i64) -> MultiplierProfile {
        MultiplierProfile::new(BackgroundParams::new(d, 1.0).unwrap(), MultiplierParams::default())
    }

    #[test]
    fn g_values() {
        let bg = BackgroundParams::new(1, 1.0).unwrap();
        assert!(g_eval(bg.r_ps(), &bg).unwrap().abs() < 1e-15);
        assert!((g_eval(2.0, &bg).unwrap() - (8.0 - 2.0 * 2f64.sqrt()) / 8.0).abs() < 1e-15);
        assert!((g_eval(1e9, &bg).unwrap() - 1.0).abs() < 1e-15);
        assert!(g_eval(1.0, &bg).is_err());
    }

    #[test]
    fn f_at_reference_point() {
        let prof = profile(1);
        // mpmath, 40 digits
        let f2 = prof.f_eval(2.0).unwrap();
        assert!((f2 - 0.787_295_701_693_206_6).abs() < 1e-12);
        // second route: hand-expanded quintic at x = ln 3
        let m = prof.params();
        let x = 3f64.ln();
        let a =
            x * (15.0 * m.alpha.powi(4) - 10.0 * m.alpha.powi(2) * x * x + 3.0 * x.powi(4)) / (15.0 * m.alpha.powi(4));
        // coef · r^{-(d+2)} = (3/4)·√2/8 at r = 2
        let alt = (8.0 - 2.0 * 2f64.sqrt()) / 8.0 + 0.75 * (2f64.sqrt() / 8.0) * a;
        assert!((f2 - alt).abs() < 1e-12);
    }

    #[test]
    fn f_vanishes_at_photon_sphere_and_tends_to_one() {
        for d in 1..=7 {
            let prof = profile(d);
            let bg = prof.background();
            assert!(prof.f_eval(bg.r_ps()).unwrap().abs() < 1e-14);
            assert!((prof.f_eval(1e8).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l_g_reference() {
        let bg = BackgroundParams::new(1, 1.0).unwrap();
        assert!((l_g(2.0, &bg) - 69.0 / 512.0).abs() < 1e-16);
    }

    #[test]
    fn l_h_vanishes_at_photon_sphere() {
        for d in 1..=7 {
            let prof = profile(d);
            let p = prof.background().point(prof.background().r_ps()).unwrap();
            assert!(prof.l_h_at(&p).abs() < 1e-13);
        }
    }

    #[test]
    fn inner_and_far_closed_forms_agree_with_general_formula() {
        for d in 1..=7 {
            let prof = profile(d);
            let bg = *prof.background();
            for &theta in &[-15.0, -3.0, -0.2] {
                let p = bg.point_at_theta(theta);
                let general = prof.l_f_terms_at(&p, None).unwrap().total();
                let split = prof.l_g_at(&p) + prof.l_h_at(&p);
                assert!((general - split).abs() < 1e-12 * general.abs().max(1.0));
            }
            let p = bg.point(50.0).unwrap();
            assert!(prof.l_f_closed(50.0, None).unwrap() == prof.l_g_at(&p));
        }
    }

    #[test]
    fn l_f_reference_value() {
        // mpmath nested-derivative value at d=1, r=2 (outer region)
        let v = profile(1).l_f_closed(2.0, None).unwrap();
        assert!((v - 0.093_836_256_189_825_86).abs() < 1e-14);
    }

    #[test]
    fn breakpoint_side_required() {
        let prof = profile(2);
        let b = prof.r_break_low();
        assert!(prof.l_f_terms_at(&b, None).is_err());
        assert!(prof.l_f_terms_at(&b, Some(Side::Left)).is_ok());
    }

    #[test]
    fn lapse_scaled_forms_match() {
        let prof = profile(3);
        let bg = *prof.background();
        for &theta in &[-30.0, -12.0, 1.0, 9.0] {
            let p = bg.point_at_theta(theta);
            let a = p.lapse();
            let lf = prof.l_f_terms_at(&p, None).unwrap().total();
            assert!((prof.lapse_l_f_at(&p, None).unwrap() - a * lf).abs() < 1e-10 * (a * lf).abs().max(1e-12));
            let fp = prof.f_prime_at(&p);
            assert!((prof.lapse_f_prime_at(&p) - a * fp).abs() < 1e-12 * (a * fp).abs());
        }
        let b = prof.r_break_low();
        let j = prof.f_second_jump() * b.lapse().powi(2);
        assert!((prof.lapse_sq_f_second_jump() / j - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jump_is_positive_and_linear_in_delta() {
        let bg = BackgroundParams::new(1, 1.0).unwrap();
        let j1 = MultiplierProfile::new(bg, MultiplierParams::new(0.05, 0.1, 0.1).unwrap()).f_second_jump();
        let j2 = MultiplierProfile::new(bg, MultiplierParams::new(0.05, 0.05, 0.1).unwrap()).f_second_jump();
        assert!(j1 > 0.0);
        assert!((j1 / j2 - 2.0).abs() < 1e-12);
        let tiny = MultiplierProfile::new(bg, MultiplierParams::new(0.05, 1e-300, 0.1).unwrap()).f_second_jump();
        assert!(tiny < 1e-280);
    }
}
