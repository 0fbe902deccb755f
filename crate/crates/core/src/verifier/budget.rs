//! The assembled positivity budget of the integrated identity.
//!
//! (i) absorption of the `13/18` radial-derivative deficit by `A² f'` on the
//! near-horizon region; (ii) the `a'''` coefficient dominating `2 sup|l(g)|`
//! there; (iii) the boundary terms at `r_{-1/ε}` controlled by the bulk of
//! `[r_{-1/ε}, r_ps]` through a cutoff trace bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CaseId, CaseReport, CaseVerdict, Sample, ScanGrid, SubMargin};
use crate::error::{Error, Result};
use crate::geometry::{linspace, Radius};
use crate::multiplier::{l_g, MultiplierProfile, Side};
use crate::quadrature::GaussKronrod;

/// Fraction of the radial-derivative term spent on the near-horizon bound.
pub const ABSORPTION: f64 = 13.0 / 18.0;

/// Intermediate quantities of the budget, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetBreakdown {
    pub absorption_margin: f64,
    pub absorption_witness_r: f64,
    pub eps_margin: f64,
    pub eps_witness_r: f64,
    /// `min (1/48)·(a'''-coefficient)` over the near-horizon region.
    pub a3_coefficient_min: f64,
    pub lg_sup: f64,
    /// Coefficient of `∫ φ(r_{-1/ε})² dω dt` to be controlled.
    pub boundary_coefficient: f64,
    /// `C` in `φ(r_{-1/ε})² <= C · (bulk on [r_{-1/ε}, r_ps])`.
    pub trace_constant: f64,
    pub delta_margin: f64,
}

/// `(1/48)(d+1)^3(d+2)/(d+3) · r_ps r_s^{d+1} / (r^4 (r^{d+1}-r_s^{d+1})) · a'''(h)`.
fn a3_coefficient(p: &Radius, prof: &MultiplierProfile) -> Result<f64> {
    let bg = prof.background();
    let d = bg.d() as f64;
    let a3 = prof.params().a_eval(p.theta(bg), 3, Some(Side::Left))?;
    Ok((d + 1.0).powi(3) * (d + 2.0) / (d + 3.0) * bg.r_ps() * bg.r_s().powi(bg.d() as i32 + 1)
        / (48.0 * p.r.powi(4) * p.power_gap(bg))
        * a3)
}

/// Cubic cutoff, `1` below `lo`, `0` above `hi`.
fn cutoff(r: f64, lo: f64, hi: f64) -> (f64, f64) {
    if r <= lo {
        return (1.0, 0.0);
    }
    if r >= hi {
        return (0.0, 0.0);
    }
    let w = hi - lo;
    let t = (r - lo) / w;
    (1.0 - t * t * (3.0 - 2.0 * t), -6.0 * t * (1.0 - t) / w)
}

/// The constant of the trace bound
/// `φ(r_{-1/ε})² <= C ∫_{r_{-1/ε}}^{r_ps} (A² f' (∂_rφ)² + l(f) φ²) r^{d+2} dr`,
/// from `φ(r_{-1/ε}) = -∫ ∂_r(βφ)` and Cauchy-Schwarz with the cubic cutoff `β`.
pub fn trace_constant(prof: &MultiplierProfile) -> Result<f64> {
    let bg = *prof.background();
    let di = bg.d() as i32;
    let k = bg.k();
    let r_m1 = bg.r_of_theta(-1.0);
    let r_ps = bg.r_ps();
    let gk = GaussKronrod::with_tol(1e-12, 1e-10);
    // ∫ β'^2 / (l(f) r^{d+2}) dr over [r_{-1}, r_ps]
    let i1 = gk.integrate(
        |r| {
            let p = match bg.point(r) {
                Ok(p) => p,
                Err(_) => return f64::NAN,
            };
            let (_, db) = cutoff(r, r_m1, r_ps);
            let lf = prof.l_f_terms_at(&p, Some(Side::Left)).map(|t| t.total()).unwrap_or(f64::NAN);
            db * db / (lf * r.powi(di + 2))
        },
        r_m1,
        r_ps,
    )?;
    // ∫ β^2 / (A^2 f' r^{d+2}) dr over [r_{-1/ε}, r_ps], in θ: dr = dθ / h', A h' = (d+1)/r
    let theta_low = prof.params().theta_low();
    let i2 = gk.integrate_pieces(
        |th| {
            let p = bg.point_at_theta(th);
            let (b, _) = cutoff(p.r, r_m1, r_ps);
            let af = prof.lapse_f_prime_at(&p);
            b * b / (k * p.r.powi(di + 1) * af)
        },
        &[theta_low, -1.0, 0.0],
    )?;
    if !(i1.value.is_finite() && i2.value.is_finite()) {
        return Err(Error::Divergent("trace constant".into()));
    }
    Ok(2.0 * i1.value.max(i2.value))
}

/// The three budget sub-checks.
pub fn budget_breakdown(prof: &MultiplierProfile, grid: &ScanGrid) -> Result<BudgetBreakdown> {
    if grid.points_per_region < 2 {
        return Err(Error::EmptyGrid);
    }
    let bg = *prof.background();
    let mp = *prof.params();
    let k = bg.k();
    let di = bg.d() as i32;
    let lo = mp.theta_low();
    let thetas = linspace(lo - grid.horizon_depth, lo, grid.points_per_region)?;

    let rows: Vec<(f64, f64, f64, f64)> = thetas
        .par_iter()
        .map(|&th| {
            let p = bg.point_at_theta(th);
            // (i): 1 - (13/18) · C / (A^2 f'), where C = A^2 · coef · a' h' / r^{d+2}
            let a1 = mp.a_eval(th, 1, Some(Side::Left))?;
            let deficit = prof.coef() * a1 * k / p.r.powi(di + 3);
            let absorption = 1.0 - ABSORPTION * deficit / prof.lapse_f_prime_at(&p);
            let a3c = a3_coefficient(&p, prof)?;
            Ok((p.r, absorption, a3c, l_g(p.r, &bg).abs()))
        })
        .collect::<Result<_>>()?;

    let (abs_r, abs_m) =
        rows.iter().map(|row| (row.0, row.1)).min_by(|a, b| a.1.total_cmp(&b.1)).ok_or(Error::EmptyGrid)?;
    let (a3_r, a3_min) =
        rows.iter().map(|row| (row.0, row.2)).min_by(|a, b| a.1.total_cmp(&b.1)).ok_or(Error::EmptyGrid)?;
    let lg_sup = rows.iter().map(|row| row.3).fold(0.0, f64::max);
    let eps_margin = a3_min / (2.0 * lg_sup) - 1.0;

    // (iii): boundary terms at r_b. The identity contributes +(1/2)·δε·coef·(d+1)^2/r_b^2,
    // the near-horizon bound -(13/12)·δε·coef·(d+1)^2/r_b^2. Both are charged at full size.
    let r_b = prof.r_break_low().r;
    let unit = mp.delta * mp.eps * prof.coef() * k * k / (r_b * r_b);
    let boundary = (0.5 + 13.0 / 12.0) * unit;
    let trace = trace_constant(prof)?;
    Ok(BudgetBreakdown {
        absorption_margin: abs_m,
        absorption_witness_r: abs_r,
        eps_margin,
        eps_witness_r: a3_r,
        a3_coefficient_min: a3_min,
        lg_sup,
        boundary_coefficient: boundary,
        trace_constant: trace,
        delta_margin: 1.0 - boundary * trace,
    })
}

/// Budget verdict: passes iff all three sub-margins are positive.
pub fn verify_budget(prof: &MultiplierProfile, grid: &ScanGrid) -> Result<CaseReport> {
    let b = budget_breakdown(prof, grid)?;
    let r_b = prof.r_break_low().r;
    let subs = vec![
        SubMargin {
            name: "absorption".into(),
            margin: b.absorption_margin,
            witness_r: b.absorption_witness_r,
            passed: b.absorption_margin > 0.0,
        },
        SubMargin {
            name: "eps_smallness".into(),
            margin: b.eps_margin,
            witness_r: b.eps_witness_r,
            passed: b.eps_margin > 0.0,
        },
        SubMargin {
            name: "delta_smallness".into(),
            margin: b.delta_margin,
            witness_r: r_b,
            passed: b.delta_margin > 0.0,
        },
    ];
    let worst = subs.iter().min_by(|a, c| a.margin.total_cmp(&c.margin)).expect("three sub-checks");
    let verdict = CaseVerdict {
        case_id: CaseId::Budget,
        d: prof.background().d(),
        params: *prof.params(),
        grid_size: grid.points_per_region,
        min_margin: worst.margin,
        witness_r: worst.witness_r,
        passed: subs.iter().all(|s| s.passed),
        sub_margins: subs.clone(),
    };
    let samples = subs.iter().map(|s| Sample { r: s.witness_r, value: s.margin, margin: s.margin }).collect();
    Ok(CaseReport { verdict, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BackgroundParams;
    use crate::multiplier::MultiplierParams;

    fn prof(d: i64, eps: f64, delta: f64) -> MultiplierProfile {
        MultiplierProfile::new(BackgroundParams::new(d, 1.0).unwrap(), MultiplierParams::new(eps, delta, 0.1).unwrap())
    }

    #[test]
    fn cutoff_endpoints() {
        assert_eq!(cutoff(0.5, 1.0, 2.0), (1.0, 0.0));
        assert_eq!(cutoff(2.5, 1.0, 2.0), (0.0, 0.0));
        let (b, db) = cutoff(1.5, 1.0, 2.0);
        assert!((b - 0.5).abs() < 1e-15);
        assert!((db + 1.5).abs() < 1e-15);
    }

    #[test]
    fn absorption_margin_at_least_five_eighteenths() {
        let b = budget_breakdown(&prof(1, 0.05, 0.1), &ScanGrid::with_points(256)).unwrap();
        assert!(b.absorption_margin >= 5.0 / 18.0 - 1e-12);
    }

    #[test]
    fn defaults_pass_and_large_eps_fails() {
        let g = ScanGrid::with_points(256);
        let ok = budget_breakdown(&prof(1, 0.05, 0.1), &g).unwrap();
        assert!(ok.eps_margin > 0.0 && ok.delta_margin > 0.0);
        let bad = budget_breakdown(&prof(1, 0.5, 0.1), &g).unwrap();
        assert!(bad.eps_margin < 0.0);
    }

    #[test]
    fn delta_margin_monotone_in_delta() {
        let g = ScanGrid::with_points(128);
        let mut last = f64::NEG_INFINITY;
        for &delta in &[0.5, 0.3, 0.1, 0.03, 0.01] {
            let m = budget_breakdown(&prof(2, 0.05, delta), &g).unwrap().delta_margin;
            assert!(m >= last);
            last = m;
        }
    }
}
