//! Exterior geometry of the hyperspherical Schwarzschild black hole in `1 + n`
//! dimensions, `d = n - 3`.
//!
//! Points are carried as [`Radius`], which stores the areal radius together
//! with `ln u`, `u = (r/r_s)^(d+1) - 1`. The log-excess resolves points whose
//! distance to the horizon is far below the resolution of `r` itself, so every
//! near-horizon quantity (lapse, `h`, `(r - r_s)/r`) is computed without
//! cancellation.

use crate::error::{param, Error, Result};
use crate::quadrature::GaussKronrod;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BackgroundParams {
    d: u32,
    r_s: f64,
    r_ps: f64,
}

pub fn photon_sphere_radius(d: i64, r_s: f64) -> Result<f64> {
    if d < 1 {
        return Err(param("d", format!("d = {d}, need d >= 1 (n >= 4)")));
    }
    if !(r_s > 0.0) || !r_s.is_finite() {
        return Err(param("r_s", format!("r_s = {r_s}, need r_s > 0")));
    }
    let d = d as f64;
    Ok(((d + 3.0) / 2.0).powf(1.0 / (d + 1.0)) * r_s)
}

/// Eigenvalue `l(l + d + 1)` of `-Δ` on the unit sphere `S^{d+2}`.
pub fn sphere_eigenvalue(ell: i64, d: i64) -> Result<f64> {
    if ell < 0 {
        return Err(param("ell", format!("ell = {ell}, need ell >= 0")));
    }
    if d < 1 {
        return Err(param("d", format!("d = {d}, need d >= 1")));
    }
    Ok((ell * (ell + d + 1)) as f64)
}

impl BackgroundParams {
    pub fn new(d: i64, r_s: f64) -> Result<Self> {
        let r_ps = photon_sphere_radius(d, r_s)?;
        Ok(Self { d: d as u32, r_s, r_ps })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    pub fn r_ps(&self) -> f64 {
        self.r_ps
    }

    /// `d + 1` as a float; the exponent in the lapse.
    pub fn k(&self) -> f64 {
        self.d as f64 + 1.0
    }

    /// Areal radius from `ln u`.
    pub fn r_from_ln_excess(&self, ln_u: f64) -> f64 {
        self.r_s * (ln_u.exp().ln_1p() / self.k()).exp()
    }

    pub fn point(&self, r: f64) -> Result<Radius> {
        if !(r > self.r_s) || r.is_nan() {
            return Err(Error::Domain(format!("r = {r} is not outside the horizon r_s = {}", self.r_s)));
        }
        let ln_u = if r.is_infinite() {
            f64::INFINITY
        } else {
            let ratio_log = ((r - self.r_s) / self.r_s).ln_1p();
            (self.k() * ratio_log).exp_m1().ln()
        };
        Ok(Radius { r, ln_u })
    }

    pub fn point_from_ln_excess(&self, ln_u: f64) -> Radius {
        Radius { r: self.r_from_ln_excess(ln_u), ln_u }
    }

    /// The point with `ln((r - r_s)/r) = ln_y`, accurate for `y` far below machine epsilon.
    pub fn point_from_ln_offset(&self, ln_y: f64) -> Radius {
        let k = self.k();
        let ln_u = if ln_y < -30.0 {
            let y = ln_y.exp();
            ln_y + k.ln() + (0.5 * (k + 1.0) * y).ln_1p()
        } else {
            (-k * (-ln_y.exp()).ln_1p()).exp_m1().ln()
        };
        self.point_from_ln_excess(ln_u)
    }

    /// The point `r_θ` with `h(r_θ) = θ`.
    pub fn point_at_theta(&self, theta: f64) -> Radius {
        self.point_from_ln_excess(theta + (0.5 * self.k()).ln())
    }

    pub fn lapse(&self, r: f64) -> Result<f64> {
        Ok(self.point(r)?.lapse())
    }

    pub fn h_of_r(&self, r: f64) -> Result<f64> {
        Ok(self.point(r)?.theta(self))
    }

    /// `r_θ^{d+1} = r_s^{d+1}((d+1)/2 e^θ + 1)`.
    pub fn r_of_theta(&self, theta: f64) -> f64 {
        self.point_at_theta(theta).r
    }

    pub fn le_coefficients(&self, r: f64) -> Result<LeWeights> {
        Ok(self.point(r)?.le_weights(self))
    }

    /// `r_*(r) = ∫_{ref}^{r} ds / A(s)`.
    pub fn tortoise(&self, r: f64, ref_point: f64) -> Result<f64> {
        let p = self.point(r)?;
        let anchor = self.point(ref_point)?;
        self.tortoise_between(anchor.ln_u, p.ln_u)
    }

    /// Tortoise displacement between two log-excess values. In `s = ln u`,
    /// `dr_*/ds = r(s)/(d+1)`, which is smooth all the way to the horizon.
    pub fn tortoise_between(&self, ln_u_from: f64, ln_u_to: f64) -> Result<f64> {
        if !ln_u_from.is_finite() || !ln_u_to.is_finite() {
            return Err(Error::Domain("tortoise at the horizon or infinity".into()));
        }
        let k = self.k();
        GaussKronrod::with_tol(1e-10, 1e-14)
            .integrate(|s| self.r_from_ln_excess(s) / k, ln_u_from, ln_u_to)
            .map(|q| q.value)
    }

    /// Inverse of the tortoise map anchored at `r_ps`: the point with `r_* = x`.
    pub fn point_at_tortoise(&self, x: f64) -> Result<Radius> {
        let s0 = self.point(self.r_ps)?.ln_u;
        self.invert_tortoise_from(s0, 0.0, x)
    }

    /// Newton solve for `r_*(s) = x`, starting from a known pair `(s0, x0)`.
    pub fn invert_tortoise_from(&self, s0: f64, x0: f64, x: f64) -> Result<Radius> {
        let k = self.k();
        let mut s = s0 + (x - x0) * k / self.r_from_ln_excess(s0);
        // far out r_* ~ r, so the linear guess in s overshoots; clamp
        if x > x0 && x > 0.0 {
            let guess_r = x.max(self.r_from_ln_excess(s0));
            s = s.min(k * (guess_r / self.r_s).ln() + 1.0);
        }
        for _ in 0..100 {
            let val = x0 + self.tortoise_between(s0, s)?;
            let slope = self.r_from_ln_excess(s) / k;
            let step = (val - x) / slope;
            s -= step;
            if step.abs() <= 1e-14 * (1.0 + s.abs()) {
                return Ok(self.point_from_ln_excess(s));
            }
        }
        Err(Error::Domain(format!("tortoise inversion failed at x = {x}")))
    }
}

/// A point of the exterior, `r > r_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub r: f64,
    /// `ln((r/r_s)^(d+1) - 1)`.
    pub ln_u: f64,
}

impl Radius {
    pub fn excess(&self) -> f64 {
        self.ln_u.exp()
    }

    /// `A = u/(1+u)` written as a logistic in `ln u`.
    pub fn lapse(&self) -> f64 {
        1.0 / (1.0 + (-self.ln_u).exp())
    }

    pub fn ln_lapse(&self) -> f64 {
        if self.ln_u > 0.0 {
            -(-self.ln_u).exp().ln_1p()
        } else {
            self.ln_u - self.ln_u.exp().ln_1p()
        }
    }

    /// `h(r) = ln((r^{d+1} - r_s^{d+1}) / ((d+1)/2 r_s^{d+1}))`.
    pub fn theta(&self, bg: &BackgroundParams) -> f64 {
        self.ln_u - (0.5 * bg.k()).ln()
    }

    /// `r^{d+1} - r_s^{d+1}`.
    pub fn power_gap(&self, bg: &BackgroundParams) -> f64 {
        bg.r_s.powi(bg.d as i32 + 1) * self.excess()
    }

    /// `h'(r) = (d+1) r^d / (r^{d+1} - r_s^{d+1}) = (d+1)/(r A)`.
    pub fn h_prime(&self, bg: &BackgroundParams) -> f64 {
        bg.k() / (self.r * self.lapse())
    }

    /// `h''(r)`, from differentiating `(d+1)/(r A)`.
    pub fn h_second(&self, bg: &BackgroundParams) -> f64 {
        let a = self.lapse();
        let a_prime = bg.k() * (1.0 - a) / self.r;
        -bg.k() * (a + self.r * a_prime) / (self.r * a).powi(2)
    }

    /// `ln y`, `y = (r - r_s)/r = 1 - (1+u)^{-1/(d+1)}`.
    pub fn ln_offset(&self, bg: &BackgroundParams) -> f64 {
        let k = bg.k();
        if self.ln_u < -30.0 {
            let u = self.ln_u.exp();
            self.ln_u - k.ln() + (-(k + 1.0) * u / (2.0 * k)).ln_1p()
        } else if self.ln_u > 700.0 {
            // u = inf in f64; y = 1 - (r_s/r)
            (-(bg.r_s / self.r)).ln_1p()
        } else {
            let u = self.ln_u.exp();
            (-(-u.ln_1p() / k).exp_m1()).ln()
        }
    }

    pub fn offset(&self, bg: &BackgroundParams) -> f64 {
        self.ln_offset(bg).exp()
    }

    pub fn le_weights(&self, bg: &BackgroundParams) -> LeWeights {
        let r = self.r;
        let ln_y = self.ln_offset(bg);
        let log_term = 1.0 - ln_y;
        let c_r = 1.0 / (r.powi(bg.d as i32 + 3) * log_term * log_term);
        let rel = (r - bg.r_ps) / r;
        let c_omega = rel * rel / r;
        let denom = r.powi(3) * log_term.powi(4);
        let c_0 = (-ln_y).exp() / denom;
        let c_0_lapse = (self.ln_lapse() - ln_y).exp() / denom;
        LeWeights { c_r, c_omega, c_0, c_0_lapse }
    }
}

/// Weights of the localized energy norm at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeWeights {
    pub c_r: f64,
    pub c_omega: f64,
    pub c_0: f64,
    /// `c_0 · A`, finite at the horizon even where `c_0` overflows.
    pub c_0_lapse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateKind {
    ArealR,
    TortoiseRstar,
}

/// Ordered radial grid with lapse cached at construction.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    kind: CoordinateKind,
    points: Vec<Radius>,
    /// Coordinate values in `kind` (areal `r` or tortoise `r_*`).
    coords: Vec<f64>,
    lapse: Vec<f64>,
}

impl RadialGrid {
    fn build(kind: CoordinateKind, points: Vec<Radius>, coords: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if coords.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("grid coordinates not strictly increasing".into()));
        }
        let lapse = points.iter().map(Radius::lapse).collect();
        Ok(Self { kind, points, coords, lapse })
    }

    /// `n` points uniform in `h` over `[theta_lo, theta_hi]`.
    pub fn uniform_in_h(bg: &BackgroundParams, theta_lo: f64, theta_hi: f64, n: usize) -> Result<Self> {
        let thetas = linspace(theta_lo, theta_hi, n)?;
        let points: Vec<Radius> = thetas.iter().map(|&t| bg.point_at_theta(t)).collect();
        let coords = points.iter().map(|p| p.r).collect();
        Self::build(CoordinateKind::ArealR, points, coords)
    }

    /// `n` points uniform in `log r` over `[r_lo, r_hi]`.
    pub fn uniform_in_log_r(bg: &BackgroundParams, r_lo: f64, r_hi: f64, n: usize) -> Result<Self> {
        let logs = linspace(r_lo.ln(), r_hi.ln(), n)?;
        let mut points = Vec::with_capacity(n);
        for (i, l) in logs.iter().enumerate() {
            // pin the endpoints exactly
            let r = if i == 0 {
                r_lo
            } else if i + 1 == n {
                r_hi
            } else {
                l.exp()
            };
            points.push(bg.point(r)?);
        }
        let coords = points.iter().map(|p| p.r).collect();
        Self::build(CoordinateKind::ArealR, points, coords)
    }

    /// Areal grid from explicit points (must be increasing).
    pub fn from_points(points: Vec<Radius>) -> Result<Self> {
        let coords = points.iter().map(|p| p.r).collect();
        Self::build(CoordinateKind::ArealR, points, coords)
    }

    /// Tortoise grid from points and their (increasing) `r_*` values.
    pub fn from_tortoise(points: Vec<Radius>, coords: Vec<f64>) -> Result<Self> {
        if points.len() != coords.len() {
            return Err(Error::Domain("points and coordinates differ in length".into()));
        }
        Self::build(CoordinateKind::TortoiseRstar, points, coords)
    }

    /// `n` points uniform in the tortoise coordinate (anchored at `r_ps`).
    pub fn uniform_in_tortoise(bg: &BackgroundParams, x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        let xs = linspace(x_lo, x_hi, n)?;
        let anchor = bg.point(bg.r_ps)?;
        let mut points = vec![anchor; n];
        // march outwards from the anchor in both directions
        let split = xs.partition_point(|&x| x < 0.0);
        let (mut s, mut x0) = (anchor.ln_u, 0.0);
        for i in split..n {
            let p = bg.invert_tortoise_from(s, x0, xs[i])?;
            points[i] = p;
            s = p.ln_u;
            x0 = xs[i];
        }
        let (mut s, mut x0) = (anchor.ln_u, 0.0);
        for i in (0..split).rev() {
            let p = bg.invert_tortoise_from(s, x0, xs[i])?;
            points[i] = p;
            s = p.ln_u;
            x0 = xs[i];
        }
        Self::build(CoordinateKind::TortoiseRstar, points, xs)
    }

    pub fn kind(&self) -> CoordinateKind {
        self.kind
    }

    pub fn points(&self) -> &[Radius] {
        &self.points
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn lapse(&self) -> &[f64] {
        &self.lapse
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyGrid);
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect())
}
