//! Region `r_ps <= r <= r_α`: the dominant polynomial `p`, the three
//! perturbations `n1, n2, n3`, and the one-variable reductions `q`, `s`.

use crate::error::{Error, Result};
use crate::geometry::Radius;
use crate::multiplier::MultiplierProfile;

/// `[p, n1, n2, n3]` at `r`, with `r` restricted to `[r_ps, r_α]`.
pub fn case3_polynomials(p: &Radius, prof: &MultiplierProfile) -> Result<[f64; 4]> {
    let bg = prof.background();
    let alpha = prof.params().alpha;
    let h = p.theta(bg);
    let slack = 1e-12 * (1.0 + alpha);
    if !(h >= -slack && h <= alpha + slack) {
        return Err(Error::RegionMismatch(format!("r = {} has h = {h}, outside [0, {alpha}]", p.r)));
    }
    Ok(case3_terms(p, prof))
}

pub(crate) fn case3_terms(p: &Radius, prof: &MultiplierProfile) -> [f64; 4] {
    let bg = prof.background();
    let alpha = prof.params().alpha;
    let h = p.theta(bg);
    let d = bg.d() as f64;
    let di = bg.d() as i32;
    let r = p.r;
    let rk = r.powi(di + 1);
    let sk = bg.r_s().powi(di + 1);
    let base = bg.r_ps() * sk;
    let a4 = alpha.powi(4);
    let gap = h * h - alpha * alpha;

    let poly = r * (d * rk * rk + (d + 3.0) * sk * rk - (d + 2.0).powi(2) * sk * sk);
    let n1 = -base * (d + 1.0) * (2.0 * rk - sk * (d + 3.0)) * gap * gap / a4;
    let n2 = base * (d + 1.0).powi(2) * (d + 5.0) / (d + 3.0) * rk * 4.0 * h * gap / a4;
    let n3 =
        base * (d + 1.0).powi(3) / (d + 3.0) * rk * rk / p.power_gap(bg) * 4.0 * (alpha * alpha - 3.0 * h * h) / a4;
    [poly, n1, n2, n3]
}

/// The reduction of `p/2 + n2` in `x = h(r)`.
pub fn q_eval(x: f64, d: u32, alpha: f64) -> f64 {
    let d = d as f64;
    let c = (d + 5.0) / (d + 3.0) / (alpha * alpha);
    let e = x.exp();
    d / 4.0 * e * e + 1.5 * e - 1.0 - 4.0 * c * (d + 1.0) * x * e - 8.0 * c * x
}

pub fn q_prime(x: f64, d: u32, alpha: f64) -> f64 {
    let d = d as f64;
    let e = x.exp();
    0.5 * e * (3.0 + d * e) - 4.0 / (alpha * alpha) * (d + 5.0) / (d + 3.0) * (2.0 + (1.0 + d) * e * (1.0 + x))
}

/// The reduction of the lower bound for `p/6 + n3` in `x = h(r)`.
pub fn s_eval(x: f64, d: u32, alpha: f64) -> f64 {
    let d = d as f64;
    let a2 = alpha * alpha;
    let e = x.exp();
    d / 4.0 * e * e + 1.5 * e - 1.0
        + 24.0 / a2 * (d + 1.0) / (d + 3.0) * (1.0 - 3.0 * x * x / a2) * ((d + 1.0) / 2.0 * e + 2.0)
        - 144.0 / (a2 * a2) / (d + 3.0) * x * x
}

pub fn s_prime(x: f64, d: u32, alpha: f64) -> f64 {
    let d = d as f64;
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    let e = x.exp();
    (24.0 * a2 * (d + 1.0).powi(2) * e + a4 * (d + 3.0) * e * (3.0 + d * e)
        - 72.0 * x * (8.0 * (d + 2.0) + (d + 1.0).powi(2) * e * (x + 2.0)))
        / (2.0 * a4 * (d + 3.0))
}

/// Lower bound for `s'` on `x <= 5`, obtained from `x <= e^x` and `x(x+2) <= 7e^x`.
pub fn s_prime_lower(x: f64, d: u32, alpha: f64) -> f64 {
    let d = d as f64;
    let a2 = alpha * alpha;
    let a4 = a2 * a2;
    let e = x.exp();
    (24.0 * a2 * (d + 1.0).powi(2) * e + a4 * (d + 3.0) * e * (3.0 + d * e)
        - 72.0 * e * (8.0 * (d + 2.0) + 7.0 * (d + 1.0).powi(2) * e))
        / (2.0 * a4 * (d + 3.0))
}

/// [`s_prime_lower`] specialised to `α = 5`.
pub fn s_prime_lower_alpha5(x: f64, d: u32) -> f64 {
    let d = d as f64;
    let e = x.exp();
    e / (1250.0 * (d + 3.0)) * (5073.0 - 504.0 * e + 51.0 * d * (49.0 + 17.0 * e) + d * d * (600.0 + 121.0 * e))
}
