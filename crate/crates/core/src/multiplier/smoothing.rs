//! The smoothing profile `a(x)` and its first three derivatives.
//!
//! Four branches: a rational branch for `x <= -1/ε` that removes the
//! logarithmic blow-up at the horizon, the identity on `[-1/ε, 0]`, a quintic
//! on `[0, α]` and the constant `8α/15` beyond `α`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Relative distance within which a sided evaluation treats `x` as a breakpoint.
pub const BREAK_SNAP: f64 = 1e-12;

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierParams {
    pub eps: f64,
    pub delta: f64,
    pub delta0: f64,
    pub alpha: f64,
    /// Set when `alpha` was forced instead of derived as `5 - delta0`.
    pub alpha_overridden: bool,
}

impl Default for MultiplierParams {
    fn default() -> Self {
        Self::new(0.05, 0.1, 0.1).expect("defaults are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Branch {
    Rational,
    Identity,
    Quintic,
    Constant,
}

impl MultiplierParams {
    pub fn new(eps: f64, delta: f64, delta0: f64) -> Result<Self> {
        let errs = Self::violations(eps, delta, delta0);
        if let Some(e) = errs.into_iter().next() {
            return Err(e);
        }
        Ok(Self { eps, delta, delta0, alpha: 5.0 - delta0, alpha_overridden: false })
    }

    /// Every violated precondition, for diagnostics that list all of them.
    pub fn violations(eps: f64, delta: f64, delta0: f64) -> Vec<Error> {
        let mut out = Vec::new();
        if !(eps > 0.0) || !eps.is_finite() {
            out.push(param("eps", format!("eps = {eps}, need eps > 0")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            out.push(param("delta", format!("delta = {delta}, need 0 < delta < 1")));
        }
        if !(delta0 > 0.0 && delta0 < 1.0) {
            out.push(param("delta0", format!("delta0 = {delta0}, need 0 < delta0 < 1")));
        }
        out
    }

    /// Replace `α` by an arbitrary positive value (used for ablations such as `α = 6`).
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(param("alpha", format!("alpha = {alpha}, need alpha > 0")));
        }
        self.alpha = alpha;
        self.alpha_overridden = true;
        Ok(self)
    }

    /// `-1/ε`, the `h`-value of the lower breakpoint.
    pub fn theta_low(&self) -> f64 {
        -1.0 / self.eps
    }

    pub fn theta_high(&self) -> f64 {
        self.alpha
    }

    pub(crate) fn branch(&self, x: f64, side: Option<Side>, order: u8) -> Result<Branch> {
        let lo = self.theta_low();
        let hi = self.alpha;
        let pick = |left: Branch, right: Branch, continuous_up_to: u8| -> Result<Branch> {
            match side {
                Some(Side::Left) => Ok(left),
                Some(Side::Right) => Ok(right),
                None if order <= continuous_up_to => Ok(left),
                None => Err(Error::SideRequired(x)),
            }
        };
        // with a side given, a point within rounding of a breakpoint is on it
        let on = |b: f64| x == b || (side.is_some() && (x - b).abs() <= BREAK_SNAP * b.abs().max(1.0));
        if on(lo) {
            pick(Branch::Rational, Branch::Identity, 1)
        } else if on(0.0) {
            pick(Branch::Identity, Branch::Quintic, 2)
        } else if on(hi) {
            pick(Branch::Quintic, Branch::Constant, 2)
        } else if x < lo {
            Ok(Branch::Rational)
        } else if x == lo {
            pick(Branch::Rational, Branch::Identity, 1)
        } else if x < 0.0 {
            Ok(Branch::Identity)
        } else if x == 0.0 {
            pick(Branch::Identity, Branch::Quintic, 2)
        } else if x < hi {
            Ok(Branch::Quintic)
        } else if x == hi {
            pick(Branch::Quintic, Branch::Constant, 2)
        } else {
            Ok(Branch::Constant)
        }
    }

    /// `a^{(order)}(x)`. `side` is needed only where that derivative jumps.
    pub fn a_eval(&self, x: f64, order: u8, side: Option<Side>) -> Result<f64> {
        if order > 3 {
            return Err(Error::InvalidOrder(order));
        }
        let b = self.branch(x, side, order)?;
        Ok(self.on_branch(b, x)[order as usize])
    }

    /// `[a, a', a'', a''']` at `x`, one-sided at breakpoints.
    pub fn a_derivs(&self, x: f64, side: Side) -> [f64; 4] {
        self.derivs(x, Some(side))
    }

    /// `[a, a', a'', a''']` on one branch.
    pub(crate) fn on_branch(&self, b: Branch, x: f64) -> [f64; 4] {
        let (eps, delta, alpha) = (self.eps, self.delta, self.alpha);
        match b {
            Branch::Rational => {
                let y = eps * x + 1.0;
                let den = delta * y - 1.0;
                [
                    -(y / den) / eps - 1.0 / eps,
                    1.0 / (den * den),
                    -2.0 * delta * eps / den.powi(3),
                    6.0 * delta * delta * eps * eps / den.powi(4),
                ]
            }
            Branch::Identity => [x, 1.0, 0.0, 0.0],
            Branch::Quintic => {
                let a2 = alpha * alpha;
                let a4 = a2 * a2;
                let x2 = x * x;
                let gap = x2 - a2;
                [
                    x - 2.0 * x * x2 / (3.0 * a2) + x * x2 * x2 / (5.0 * a4),
                    gap * gap / a4,
                    4.0 * x * gap / a4,
                    (12.0 * x2 - 4.0 * a2) / a4,
                ]
            }
            Branch::Constant => [8.0 * alpha / 15.0, 0.0, 0.0, 0.0],
        }
    }

    /// All four derivatives, with `Left` used at any breakpoint unless told otherwise.
    pub(crate) fn derivs(&self, x: f64, side: Option<Side>) -> [f64; 4] {
        let b = self.branch(x, Some(side.unwrap_or(Side::Left)), 3).expect("side supplied");
        self.on_branch(b, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> MultiplierParams {
        MultiplierParams::default()
    }

    #[test]
    fn values_at_anchors() {
        let m = mp();
        assert_eq!(m.a_eval(0.0, 0, None).unwrap(), 0.0);
        let top = 8.0 * m.alpha / 15.0;
        assert!((m.a_eval(m.alpha, 0, None).unwrap() - top).abs() < 1e-14);
        assert_eq!(m.a_eval(100.0, 0, None).unwrap(), top);
        // continuity of the quintic into the constant: α - 2α/3 + α/5 = 8α/15
        let q = m.on_branch(Branch::Quintic, m.alpha)[0];
        assert!((q - top).abs() < 1e-14);
    }

    #[test]
    fn first_derivative_is_one_at_low_break() {
        let m = mp();
        let x = m.theta_low();
        assert_eq!(m.a_eval(x, 1, Some(Side::Left)).unwrap(), 1.0);
        assert_eq!(m.a_eval(x, 1, Some(Side::Right)).unwrap(), 1.0);
        assert_eq!(m.a_eval(x, 1, None).unwrap(), 1.0);
        assert!((m.a_eval(x, 0, Some(Side::Left)).unwrap() - x).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_jump_is_two_delta_eps() {
        let m = mp();
        let x = m.theta_low();
        let jump = m.a_eval(x, 2, Some(Side::Left)).unwrap() - m.a_eval(x, 2, Some(Side::Right)).unwrap();
        assert!((jump - 2.0 * m.delta * m.eps).abs() < 1e-16);
        assert_eq!(m.a_eval(x, 2, None), Err(Error::SideRequired(x)));
    }

    #[test]
    fn third_derivative_needs_side_at_zero_and_alpha() {
        let m = mp();
        assert!(m.a_eval(0.0, 3, None).is_err());
        assert!(m.a_eval(m.alpha, 3, None).is_err());
        assert_eq!(m.a_eval(0.0, 2, None).unwrap(), 0.0);
        assert!(m.a_eval(m.alpha, 2, None).unwrap().abs() < 1e-15);
        let r = m.a_eval(0.0, 3, Some(Side::Right)).unwrap();
        assert!((r + 4.0 / (m.alpha * m.alpha)).abs() < 1e-15);
    }

    #[test]
    fn invalid_order() {
        assert_eq!(mp().a_eval(1.0, 4, None), Err(Error::InvalidOrder(4)));
    }

    #[test]
    fn branch_derivatives_match_finite_differences() {
        let m = mp();
        let h = 1e-4;
        for &x in &[-45.0, -25.0, -21.0, -10.0, 0.5, 2.0, 4.0, 7.0] {
            for order in 0..3u8 {
                let f = |t: f64| m.a_eval(t, order, None).unwrap();
                let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
                let exact = m.a_eval(x, order + 1, None).unwrap();
                assert!((fd - exact).abs() < 1e-8 * (1.0 + exact.abs()), "x={x} order={order}");
            }
        }
    }

    #[test]
    fn bounds() {
        let m = mp();
        let top = 8.0 * m.alpha / 15.0;
        for i in 0..2000 {
            let x = -80.0 + 0.05 * i as f64;
            let a = m.a_eval(x, 0, None).unwrap();
            assert!(a <= top + 1e-12);
            if x < m.alpha - 1e-9 {
                assert!(a < top);
            }
            if x <= m.theta_low() {
                assert!(a <= m.theta_low() + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(MultiplierParams::new(0.0, 0.1, 0.1).is_err());
        assert!(MultiplierParams::new(0.05, 1.5, 0.1).is_err());
        assert!(MultiplierParams::new(0.05, 0.1, 1.0).is_err());
        assert_eq!(MultiplierParams::violations(-1.0, 2.0, 0.0).len(), 3);
        let m = MultiplierParams::default().with_alpha(6.0).unwrap();
        assert!(m.alpha_overridden && m.alpha == 6.0);
    }
}
