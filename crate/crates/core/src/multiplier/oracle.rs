//! Numerical evaluation of
//! `l(w) = -¼ r^{-(d+2)} ∂_r[A r^{d+2} ∂_r{A r^{-(d+2)} ∂_r(w r^{d+2})}]`
//! by nested finite differences.
//!
//! Every radial derivative is taken in `θ = h(r)` via `∂_r = h'(r) ∂_θ`, so a
//! fixed `θ`-step is automatically fine near the horizon and coarse far out.
//! This is independent of the closed forms in the parent module.
//!
//! Finite differences of `f64` samples cannot resolve `l` deep in the throat,
//! where it is an `A^{-1}`-amplified remainder of nearly constant brackets.
//! [`l_operator_jet`] evaluates the same definition by forward-mode
//! differentiation in `s = ln u` instead, which keeps small derivatives
//! relatively accurate.

use crate::error::{Error, Result};
use crate::fd::central5;
use crate::geometry::{BackgroundParams, Radius};
use crate::multiplier::{MultiplierProfile, Side};

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Step in `θ` for each nested 5-point stencil.
    pub step: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { step: 0.02 }
    }
}

pub fn l_operator_oracle<W>(w: W, r: f64, bg: &BackgroundParams, opts: OracleOptions) -> Result<f64>
where
    W: Fn(&Radius) -> f64,
{
    let p = bg.point(r)?;
    l_operator_oracle_at(w, &p, bg, opts)
}

pub fn l_operator_oracle_at<W>(w: W, p: &Radius, bg: &BackgroundParams, opts: OracleOptions) -> Result<f64>
where
    W: Fn(&Radius) -> f64,
{
    let theta0 = p.theta(bg);
    if !theta0.is_finite() {
        return Err(Error::HorizonProximity(p.r));
    }
    let s = opts.step;
    if !(s > 0.0) || theta0 + 0.125 * s == theta0 {
        return Err(Error::StepUnderflow(p.r));
    }
    let coarse = nested(&w, theta0, bg, s);
    let fine = nested(&w, theta0, bg, 0.5 * s);
    Ok((16.0 * fine - coarse) / 15.0)
}

fn nested<W: Fn(&Radius) -> f64>(w: &W, theta0: f64, bg: &BackgroundParams, s: f64) -> f64 {
    let e = bg.d() as i32 + 2;
    let at = |t: f64| bg.point_at_theta(t);
    let inner = |t: f64| {
        let q = at(t);
        w(&q) * q.r.powi(e)
    };
    let middle = |t: f64| {
        let q = at(t);
        q.lapse() * q.r.powi(-e) * q.h_prime(bg) * central5(&inner, t, s)
    };
    let outer = |t: f64| {
        let q = at(t);
        q.lapse() * q.r.powi(e) * q.h_prime(bg) * central5(&middle, t, s)
    };
    let q = at(theta0);
    -0.25 * q.r.powi(-e) * q.h_prime(bg) * central5(&outer, theta0, s)
}

/// Derivatives `[v, v', v'', v''']` with respect to `s = ln u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; 4]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0])
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `d/ds`; the top slot becomes unknown.
    pub fn deriv(&self) -> Self {
        let [_, a, b, c] = self.0;
        Jet([a, b, c, f64::NAN])
    }

    pub fn scale(&self, k: f64) -> Self {
        Jet(self.0.map(|x| k * x))
    }

    /// `φ ∘ self` from `[φ, φ', φ'', φ''']` at the value.
    pub fn compose(&self, phi: [f64; 4]) -> Self {
        let [_, x1, x2, x3] = self.0;
        Jet([
            phi[0],
            phi[1] * x1,
            phi[2] * x1 * x1 + phi[1] * x2,
            phi[3] * x1 * x1 * x1 + 3.0 * phi[2] * x1 * x2 + phi[1] * x3,
        ])
    }

    pub fn powf(&self, e: f64) -> Self {
        let v = self.value();
        self.compose([
            v.powf(e),
            e * v.powf(e - 1.0),
            e * (e - 1.0) * v.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * v.powf(e - 3.0),
        ])
    }

    pub fn exp(&self) -> Self {
        let v = self.value().exp();
        self.compose([v; 4])
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet([0, 1, 2, 3].map(|i| self.0[i] - o.0[i]))
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            a[3] * b[0] + 3.0 * (a[2] * b[1] + a[1] * b[2]) + a[0] * b[3],
        ])
    }
}

/// The lapse `A = u/(1+u)` and the radius as jets in `s = ln u`.
pub fn background_jets(ln_u: f64, bg: &BackgroundParams) -> (Jet, Jet) {
    // A is the logistic function of s, and ln(r/r_s) = ln(1 + e^s)/(d+1)
    let a = 1.0 / (1.0 + (-ln_u).exp());
    let a1 = a * (1.0 - a);
    let a2 = a1 * (1.0 - 2.0 * a);
    let a3 = a1 * (1.0 - 6.0 * a + 6.0 * a * a);
    let lapse = Jet([a, a1, a2, a3]);
    let softplus = if ln_u > 0.0 { ln_u + (-ln_u).exp().ln_1p() } else { ln_u.exp().ln_1p() };
    let log_r = Jet([softplus, a, a1, a2]).scale(1.0 / bg.k());
    (lapse, log_r.exp().scale(bg.r_s()))
}

/// `l(w)` at the point with `ln u = ln_u`, by forward-mode differentiation.
/// `w` receives the jets of `r` and `s` and returns the jet of `w`.
pub fn l_operator_jet<W>(w: W, ln_u: f64, bg: &BackgroundParams) -> Result<f64>
where
    W: Fn(Jet, Jet) -> Jet,
{
    if !ln_u.is_finite() {
        return Err(Error::HorizonProximity(bg.r_from_ln_excess(ln_u)));
    }
    let k = bg.k();
    let e = bg.d() as f64 + 2.0;
    let (lapse, r) = background_jets(ln_u, bg);
    let s = Jet([ln_u, 1.0, 0.0, 0.0]);
    // A ∂_r = (k/r) ∂_s
    let x = w(r, s) * r.powf(e);
    let y = x.deriv() * r.powf(-e - 1.0).scale(k);
    let b = y.deriv() * r.powf(e - 1.0).scale(k);
    Ok(-0.25 * r.value().powf(-e - 1.0) * k / lapse.value() * b.deriv().value())
}

/// `l(f)` at `p` through [`l_operator_jet`], with `f = g + coef · r^{-(d+2)} a(h)`
/// rebuilt from its definition. `side` picks the branch of `a` at a breakpoint.
pub fn l_f_oracle(prof: &MultiplierProfile, p: &Radius, side: Side) -> Result<f64> {
    let bg = prof.background();
    let e = bg.d() as f64 + 2.0;
    let c = bg.r_ps().powf(e);
    // h = s - ln((d+1)/2), so the jet of a(h) is the list of its derivatives
    let a = Jet(prof.params().a_derivs(p.theta(bg), side));
    let f = |r: Jet, _: Jet| Jet::constant(1.0) - r.powf(-e).scale(c) + a * r.powf(-e).scale(prof.coef());
    l_operator_jet(f, p.ln_u, bg)
}
