//! Grid scans of the positivity inequalities behind the multiplier.
//!
//! Every scan evaluates a dimensionless margin at each grid point; a check
//! passes when the minimum margin is positive (or non-negative, up to a
//! `-1e-12` tolerance, for the non-strict displays).

mod budget;
mod case3;
mod hardy;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{linspace, BackgroundParams, Radius};
use crate::multiplier::{l_g, MultiplierParams, MultiplierProfile, Side};

pub use budget::{budget_breakdown, trace_constant, verify_budget, BudgetBreakdown, ABSORPTION};
pub use case3::{case3_polynomials, q_eval, q_prime, s_eval, s_prime, s_prime_lower, s_prime_lower_alpha5};
pub use hardy::{
    hardy_ratio, hardy_scan, rho, rho_prime, rho_weight, time_boundary_check, time_coefficient,
    time_coefficient_offset_scaled, HardyProfile, HardyScan, TestFunction, TREND_LIMIT,
};

/// Tolerance for the non-strict inequalities, relative to the margin scale.
pub const NON_STRICT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// Near-horizon region: signs of the `f'` summands and of the `a'`, `a''` terms of `l(f)`.
    Case1,
    /// `l(f)` above its explicit non-negative lower bound on `[r_{-1/ε}, r_ps]`.
    Case2,
    Case3N1,
    Case3N2,
    Case3N3,
    Case3Q,
    Case3S,
    Case3Fprime,
    /// `f' > 0` on the whole exterior.
    Fprime,
    Case4Fprime,
    Case4Lf,
    SignF,
    Budget,
}

impl CaseId {
    /// All pointwise scans (everything except the budget).
    pub const SCANS: [CaseId; 12] = [
        CaseId::Case1,
        CaseId::Case2,
        CaseId::Case3N1,
        CaseId::Case3N2,
        CaseId::Case3N3,
        CaseId::Case3Q,
        CaseId::Case3S,
        CaseId::Case3Fprime,
        CaseId::Fprime,
        CaseId::Case4Fprime,
        CaseId::Case4Lf,
        CaseId::SignF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3N1 => "case3_n1",
            CaseId::Case3N2 => "case3_n2",
            CaseId::Case3N3 => "case3_n3",
            CaseId::Case3Q => "case3_q",
            CaseId::Case3S => "case3_s",
            CaseId::Case3Fprime => "case3_fprime",
            CaseId::Fprime => "fprime",
            CaseId::Case4Fprime => "case4_fprime",
            CaseId::Case4Lf => "case4_lf",
            CaseId::SignF => "sign_f",
            CaseId::Budget => "budget",
        }
    }

    pub fn is_strict(self) -> bool {
        !matches!(self, CaseId::Case3N2 | CaseId::Case3N3 | CaseId::Case3Q)
    }

    pub fn parse(s: &str) -> Option<CaseId> {
        CaseId::SCANS.iter().chain(std::iter::once(&CaseId::Budget)).copied().find(|c| c.name() == s)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named sub-check, used by the budget verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubMargin {
    pub name: String,
    pub margin: f64,
    pub witness_r: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub case_id: CaseId,
    pub d: u32,
    pub params: MultiplierParams,
    pub grid_size: usize,
    pub min_margin: f64,
    pub witness_r: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_margins: Vec<SubMargin>,
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub r: f64,
    pub value: f64,
    pub margin: f64,
}

/// A verdict with the samples that produced it.
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub verdict: CaseVerdict,
    pub samples: Vec<Sample>,
}

/// How scan grids are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub points_per_region: usize,
    pub refine: bool,
    /// The near-horizon region spans `h ∈ [-1/ε - horizon_depth, -1/ε]`.
    pub horizon_depth: f64,
    /// The far region spans `[r_α, far_factor · r_α]`.
    pub far_factor: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { points_per_region: 4096, refine: true, horizon_depth: 30.0, far_factor: 100.0 }
    }
}

impl ScanGrid {
    pub fn with_points(points_per_region: usize) -> Self {
        Self { points_per_region, ..Self::default() }
    }
}

/// Scan coordinate. `Hybrid` is `h` below the photon sphere and `ln(r/r_ps)` above.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    Theta,
    LogR,
    Hybrid,
    X,
}

impl Coord {
    fn point(self, c: f64, bg: &BackgroundParams) -> Result<Radius> {
        match self {
            Coord::Theta | Coord::X => Ok(bg.point_at_theta(c)),
            Coord::LogR => bg.point(c.exp()),
            Coord::Hybrid if c <= 0.0 => Ok(bg.point_at_theta(c)),
            Coord::Hybrid => bg.point(bg.r_ps() * c.exp()),
        }
    }

    fn of(self, r: f64, bg: &BackgroundParams) -> Result<f64> {
        let p = bg.point(r)?;
        Ok(match self {
            Coord::Theta | Coord::X => p.theta(bg),
            Coord::LogR => r.ln(),
            Coord::Hybrid if r <= bg.r_ps() => p.theta(bg),
            Coord::Hybrid => (r / bg.r_ps()).ln(),
        })
    }
}

struct Layout {
    coord: Coord,
    /// Closed coordinate intervals making up the scan domain.
    pieces: Vec<(f64, f64)>,
}

fn layout(case: CaseId, prof: &MultiplierProfile, grid: &ScanGrid) -> Layout {
    let mp = prof.params();
    let lo = mp.theta_low();
    let ln_ps = prof.background().r_ps().ln();
    let r_alpha = prof.r_break_high().r;
    let region1 = (lo - grid.horizon_depth, lo);
    let region2 = (lo, 0.0);
    let region3 = (ln_ps, r_alpha.ln());
    let region4 = (r_alpha.ln(), (grid.far_factor * r_alpha).ln());
    let shift = |(a, b): (f64, f64)| (a - ln_ps, b - ln_ps);
    match case {
        CaseId::Case1 => Layout { coord: Coord::Theta, pieces: vec![region1] },
        CaseId::Case2 => Layout { coord: Coord::Theta, pieces: vec![region2] },
        CaseId::Case3N1 | CaseId::Case3N2 | CaseId::Case3N3 | CaseId::Case3Fprime => {
            Layout { coord: Coord::LogR, pieces: vec![region3] }
        }
        CaseId::Case3Q | CaseId::Case3S => Layout { coord: Coord::X, pieces: vec![(0.0, mp.alpha)] },
        CaseId::Case4Fprime | CaseId::Case4Lf => Layout { coord: Coord::LogR, pieces: vec![region4] },
        CaseId::Fprime | CaseId::SignF | CaseId::Budget => {
            Layout { coord: Coord::Hybrid, pieces: vec![region1, region2, shift(region3), shift(region4)] }
        }
    }
}

fn base_coords(lay: &Layout, n: usize) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(n * lay.pieces.len());
    for &(a, b) in &lay.pieces {
        for c in linspace(a, b, n)? {
            if out.last().is_none_or(|&l| c > l) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// `(d+2) r_s^{d+1} r_ps / r^{d+3}`, the natural size of `f'`.
fn fprime_scale(p: &Radius, bg: &BackgroundParams) -> f64 {
    let di = bg.d() as i32;
    (bg.d() as f64 + 2.0) * bg.r_s().powi(di + 1) * bg.r_ps() / p.r.powi(di + 3)
}

/// `(d+2)/(4 r^{2d+5}) · r^{2d+2}`, the natural size of `l(g)`.
fn lg_scale(p: &Radius, bg: &BackgroundParams) -> f64 {
    (bg.d() as f64 + 2.0) / (4.0 * p.r.powi(3))
}

/// Evaluates `(value, margin)` for one case at one point.
fn evaluate(case: CaseId, c: f64, p: &Radius, prof: &MultiplierProfile, lay: &Layout) -> Result<(f64, f64)> {
    let bg = prof.background();
    let mp = prof.params();
    let d = bg.d();
    // one-sided evaluation at region endpoints: take the limit from inside the region
    let (lo, _) = lay.pieces[0];
    let side = if c <= lo { Side::Right } else { Side::Left };
    let side = if case == CaseId::Case1 { Side::Left } else { side };
    Ok(match case {
        CaseId::Case1 => {
            // signs of the f' summands reduce to a < 0 (indeed a <= -1/ε) and a' > 0
            let [a, a1, _, _] = mp.a_derivs(p.theta(bg), Side::Left);
            let t = prof.l_f_terms_at(p, Some(side))?;
            let lf_min = t.first.min(t.second) / (t.lg.abs() + t.first.abs() + t.second.abs());
            (t.total(), lf_min.min(-a * mp.eps).min(a1))
        }
        CaseId::Case2 => {
            let lf = prof.l_f_terms_at(p, Some(side))?.total();
            let di = d as i32;
            let df = d as f64;
            let sk = bg.r_s().powi(di + 1);
            let rk = p.r.powi(di + 1);
            let lower = (df + 2.0) / (4.0 * p.r.powi(2 * di + 5)) * p.power_gap(bg) * (df * rk + sk);
            let scale = lg_scale(p, bg);
            let margin = if lf - lower >= -NON_STRICT_TOL * lf.abs().max(lower.abs()) && lower >= 0.0 {
                lf / scale
            } else {
                (lf - lower).min(lower) / scale
            };
            (lf, margin)
        }
        CaseId::Case3N1 | CaseId::Case3N2 | CaseId::Case3N3 => {
            let [poly, n1, n2, n3] = case3_polynomials(p, prof)?;
            let v = match case {
                CaseId::Case3N1 => poly / 3.0 + n1,
                CaseId::Case3N2 => poly / 2.0 + n2,
                _ => poly / 6.0 + n3,
            };
            (v, v / poly)
        }
        CaseId::Case3Q => {
            let qp = q_prime(c, d, mp.alpha);
            (qp, (qp * (-c).exp()).min(q_eval(0.0, d, mp.alpha)))
        }
        CaseId::Case3S => {
            let sp = s_prime(c, d, mp.alpha);
            let lower = s_prime_lower(c, d, mp.alpha);
            let m = (sp.min(lower) * (-c).exp()).min(s_eval(0.0, d, mp.alpha));
            (sp, m)
        }
        CaseId::Case3Fprime | CaseId::Case4Fprime | CaseId::Fprime => {
            let af = prof.lapse_f_prime_at(p);
            (af / p.lapse(), af / fprime_scale(p, bg))
        }
        CaseId::Case4Lf => {
            let v = l_g(p.r, bg);
            (v, v / lg_scale(p, bg))
        }
        CaseId::SignF => {
            let f = prof.f_at(p);
            let gap = p.r - bg.r_ps();
            if gap == 0.0 {
                (f, f64::INFINITY)
            } else {
                (f, f * p.r / gap)
            }
        }
        CaseId::Budget => return Err(Error::RegionMismatch("budget is not a pointwise scan".into())),
    })
}

fn scan_coords(case: CaseId, prof: &MultiplierProfile, lay: &Layout, coords: &[f64]) -> Result<Vec<(f64, Sample)>> {
    let bg = prof.background();
    coords
        .par_iter()
        .map(|&c| {
            let p = lay.coord.point(c, bg)?;
            let (value, margin) = evaluate(case, c, &p, prof, lay)?;
            Ok((c, Sample { r: p.r, value, margin }))
        })
        .collect()
}

fn argmin(samples: &[(f64, Sample)]) -> usize {
    samples.iter().enumerate().min_by(|a, b| a.1 .1.margin.total_cmp(&b.1 .1.margin)).map(|(i, _)| i).unwrap_or(0)
}

/// Triples the density on the tenth of the grid around the current minimum.
fn refine(case: CaseId, prof: &MultiplierProfile, lay: &Layout, samples: &mut Vec<(f64, Sample)>) -> Result<()> {
    let n = samples.len();
    if n < 2 {
        return Ok(());
    }
    let i = argmin(samples);
    let half = (n / 20).max(1);
    let lo = i.saturating_sub(half);
    let hi = (i + half).min(n - 1);
    let mut extra = Vec::with_capacity(2 * (hi - lo));
    for j in lo..hi {
        let (a, b) = (samples[j].0, samples[j + 1].0);
        extra.push(a + (b - a) / 3.0);
        extra.push(a + 2.0 * (b - a) / 3.0);
    }
    let new = scan_coords(case, prof, lay, &extra)?;
    samples.extend(new);
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(())
}

fn verdict_from(case: CaseId, prof: &MultiplierProfile, samples: Vec<(f64, Sample)>) -> Result<CaseReport> {
    if samples.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let i = argmin(&samples);
    let w = samples[i].1;
    let passed = if w.margin.is_nan() {
        false
    } else if case.is_strict() {
        w.margin > 0.0
    } else {
        w.margin >= -NON_STRICT_TOL
    };
    Ok(CaseReport {
        verdict: CaseVerdict {
            case_id: case,
            d: prof.background().d(),
            params: *prof.params(),
            grid_size: samples.len(),
            min_margin: w.margin,
            witness_r: w.r,
            passed,
            sub_margins: Vec::new(),
        },
        samples: samples.into_iter().map(|(_, s)| s).collect(),
    })
}

/// Scans one case over its region on the grid described by `grid`.
pub fn verify_case(case: CaseId, prof: &MultiplierProfile, grid: &ScanGrid) -> Result<CaseReport> {
    if case == CaseId::Budget {
        return verify_budget(prof, grid);
    }
    if grid.points_per_region < 2 {
        return Err(Error::EmptyGrid);
    }
    let lay = layout(case, prof, grid);
    let coords = base_coords(&lay, grid.points_per_region)?;
    let mut samples = scan_coords(case, prof, &lay, &coords)?;
    if grid.refine {
        refine(case, prof, &lay, &mut samples)?;
    }
    verdict_from(case, prof, samples)
}

/// Scans one case at caller-supplied radii, which must lie in the case's region.
pub fn verify_case_on(case: CaseId, prof: &MultiplierProfile, radii: &[f64], refine_min: bool) -> Result<CaseReport> {
    if case == CaseId::Budget {
        return Err(Error::RegionMismatch("budget needs a full scan grid".into()));
    }
    if radii.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let lay = layout(case, prof, &ScanGrid::default());
    let bg = prof.background();
    let (lo, hi) = lay.pieces.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(x, y)| (a.min(x), b.max(y)));
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let mut coords = Vec::with_capacity(radii.len());
    for &r in radii {
        let c = lay.coord.of(r, bg)?;
        // the global scans accept any exterior point
        let inside = matches!(case, CaseId::Fprime | CaseId::SignF) || (c >= lo - slack && c <= hi + slack);
        if !inside {
            return Err(Error::RegionMismatch(format!("r = {r} lies outside the region of {case}")));
        }
        let global = matches!(case, CaseId::Fprime | CaseId::SignF);
        coords.push(if global { c } else { c.clamp(lo, hi) });
    }
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    let mut samples = scan_coords(case, prof, &lay, &coords)?;
    if refine_min {
        refine(case, prof, &lay, &mut samples)?;
    }
    verdict_from(case, prof, samples)
}

/// Every pointwise case followed by the budget.
pub fn verify_all(prof: &MultiplierProfile, grid: &ScanGrid) -> Result<Vec<CaseReport>> {
    let mut out = Vec::with_capacity(CaseId::SCANS.len() + 1);
    for case in CaseId::SCANS {
        out.push(verify_case(case, prof, grid)?);
    }
    out.push(verify_budget(prof, grid)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(d: i64, r_s: f64, mp: MultiplierParams) -> MultiplierProfile {
        MultiplierProfile::new(BackgroundParams::new(d, r_s).unwrap(), mp)
    }

    #[test]
    fn case_names_roundtrip() {
        for c in CaseId::SCANS.iter().chain([CaseId::Budget].iter()) {
            assert_eq!(CaseId::parse(c.name()), Some(*c));
            let js = serde_json::to_string(c).unwrap();
            assert_eq!(js, format!("\"{}\"", c.name()));
        }
        assert_eq!(CaseId::parse("case5"), None);
    }

    #[test]
    fn defaults_pass_every_case() {
        let pr = prof(2, 1.0, MultiplierParams::default());
        for rep in verify_all(&pr, &ScanGrid::with_points(512)).unwrap() {
            assert!(rep.verdict.passed, "{:?}", rep.verdict);
        }
    }

    #[test]
    fn alpha_six_fails_with_witness_beyond_photon_sphere() {
        let mp = MultiplierParams::default().with_alpha(6.0).unwrap();
        let pr = prof(1, 1.0, mp);
        let v = verify_case(CaseId::Case4Fprime, &pr, &ScanGrid::with_points(256)).unwrap().verdict;
        assert!(!v.passed);
        assert!(v.min_margin < 0.0 && v.witness_r >= pr.r_break_high().r * (1.0 - 1e-12));
    }

    #[test]
    fn empty_and_mismatched_grids() {
        let pr = prof(1, 1.0, MultiplierParams::default());
        assert_eq!(verify_case(CaseId::Case1, &pr, &ScanGrid::with_points(1)).unwrap_err(), Error::EmptyGrid);
        assert_eq!(verify_case_on(CaseId::Case3N1, &pr, &[], false).unwrap_err(), Error::EmptyGrid);
        assert!(matches!(verify_case_on(CaseId::Case3N1, &pr, &[1.2], false), Err(Error::RegionMismatch(_))));
        let r_ps = pr.background().r_ps();
        let ok = verify_case_on(CaseId::Case3N1, &pr, &[r_ps, 1.6, 2.0], false).unwrap();
        assert!(ok.verdict.passed);
        assert_eq!(ok.verdict.grid_size, 3);
    }

    #[test]
    fn refinement_only_adds_points() {
        let pr = prof(3, 1.0, MultiplierParams::default());
        let mut g = ScanGrid::with_points(200);
        g.refine = false;
        let coarse = verify_case(CaseId::Case3N1, &pr, &g).unwrap().verdict;
        g.refine = true;
        let fine = verify_case(CaseId::Case3N1, &pr, &g).unwrap().verdict;
        assert!(fine.grid_size > coarse.grid_size);
        assert!(fine.min_margin <= coarse.min_margin);
    }

    #[test]
    fn scale_covariance() {
        let g = ScanGrid::with_points(300);
        for d in [1, 4] {
            let a = verify_all(&prof(d, 1.0, MultiplierParams::default()), &g).unwrap();
            let b = verify_all(&prof(d, 2.0, MultiplierParams::default()), &g).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.verdict.passed, y.verdict.passed);
                let (m, n) = (x.verdict.min_margin, y.verdict.min_margin);
                assert!((m - n).abs() <= 1e-8 * m.abs().max(1e-300), "{} {m} {n}", x.verdict.case_id);
                assert!((2.0 * x.verdict.witness_r - y.verdict.witness_r).abs() < 1e-9 * y.verdict.witness_r);
            }
        }
    }
}
