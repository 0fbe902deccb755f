//! Mode state, the velocity-Verlet step and the energy / LE monitors.

use std::sync::Arc;

use super::operator::{gradient, RadialOperator};
use crate::error::{Error, Result};
use crate::geometry::RadialGrid;

/// Largest admissible `dt / Δx`.
pub const CFL_LIMIT: f64 = 0.5;

/// One spherical-harmonic mode `u(t, r_*)` and its time derivative.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub ell: u32,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    op: Arc<RadialOperator>,
    accel: Vec<f64>,
}

impl ModeState {
    pub fn new(op: Arc<RadialOperator>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let n = op.len();
        if u.len() != n || v.len() != n {
            return Err(Error::Domain(format!("state arrays of length {}/{} on a grid of {n}", u.len(), v.len())));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Instability { t: 0.0, detail: "non-finite initial data".into() });
        }
        let mut accel = vec![0.0; n];
        op.accel(&u, &mut accel);
        Ok(Self { ell: op.ell(), t: 0.0, u, v, op, accel })
    }

    pub fn zero(op: Arc<RadialOperator>) -> Self {
        let n = op.len();
        Self { ell: op.ell(), t: 0.0, u: vec![0.0; n], v: vec![0.0; n], op, accel: vec![0.0; n] }
    }

    pub fn operator(&self) -> &Arc<RadialOperator> {
        &self.op
    }

    pub fn grid(&self) -> &RadialGrid {
        self.op.mesh().grid()
    }

    /// `-M⁻¹Ku` at the current `u`.
    pub fn accel(&self) -> &[f64] {
        &self.accel
    }

    /// The `v ↦ -v` conjugate.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        s.v.iter_mut().for_each(|x| *x = -*x);
        s
    }

    /// Advances in place by `dt`. Interior nodes use velocity Verlet, the end
    /// nodes first-order upwind outflow (`u_t = u_x` at the left, `u_t = -u_x`
    /// at the right).
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let dx = self.op.dx();
        if !(dt > 0.0) || dt > CFL_LIMIT * dx {
            return Err(Error::Cfl { dt, limit: CFL_LIMIT * dx });
        }
        let n = self.u.len();
        let c = dt / dx;
        let left = self.u[0] + c * (self.u[1] - self.u[0]);
        let right = self.u[n - 1] - c * (self.u[n - 1] - self.u[n - 2]);
        let (u0, un) = (self.u[0], self.u[n - 1]);
        for i in 1..n - 1 {
            self.v[i] += 0.5 * dt * self.accel[i];
            self.u[i] += dt * self.v[i];
        }
        self.u[0] = left;
        self.u[n - 1] = right;
        self.v[0] = (left - u0) / dt;
        self.v[n - 1] = (right - un) / dt;
        self.op.accel(&self.u, &mut self.accel);
        for i in 1..n - 1 {
            self.v[i] += 0.5 * dt * self.accel[i];
        }
        self.t += dt;
        if !self.u[n / 2].is_finite() || !self.v[n / 2].is_finite() {
            return Err(Error::Instability { t: self.t, detail: format!("non-finite field at node {}", n / 2) });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// One step of the symmetric scheme.
pub fn step(state: &ModeState, dt: f64) -> Result<ModeState> {
    let mut next = state.clone();
    next.advance(dt)?;
    if next.u.iter().chain(&next.v).any(|x| !x.is_finite()) {
        return Err(Error::Instability { t: next.t, detail: "non-finite field after step".into() });
    }
    Ok(next)
}

/// `∫ [v² + u_x² + A λ u²/r²] r^{d+2} dr_*`, the mode energy, in the
/// discretisation's natural form.
pub fn energy_of_mode(state: &ModeState) -> f64 {
    state.op.energy(&state.u, &state.v)
}

/// The energy corrected by `-(dt²/4) aᵀMa`, which velocity Verlet conserves
/// exactly for this linear system.
pub fn modified_energy(state: &ModeState, dt: f64) -> f64 {
    energy_of_mode(state) - 0.25 * dt * dt * state.op.accel_norm(&state.accel)
}

/// The localized-energy integrand of the mode, integrated over the mesh.
pub fn le_density(state: &ModeState) -> f64 {
    let mut ux = vec![0.0; state.u.len()];
    gradient(&state.u, state.op.dx(), &mut ux);
    state.op.le_density(&state.u, &ux)
}

/// Rectangle-rule contribution `dt · density` of this state.
pub fn le_increment(state: &ModeState, dt: f64) -> f64 {
    dt * le_density(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::operator::reduce_wave_operator;
    use crate::geometry::BackgroundParams;

    fn gaussian_state(n: usize, lo: f64, hi: f64, ell: u32) -> ModeState {
        let bg = BackgroundParams::new(1, 1.0).unwrap();
        let op = Arc::new(reduce_wave_operator(ell, &bg, lo, hi, n).unwrap());
        let u: Vec<f64> = op.mesh().x().iter().map(|x| (-((x - 5.0) / 0.5).powi(2)).exp()).collect();
        let v = vec![0.0; u.len()];
        ModeState::new(op, u, v).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let s = gaussian_state(101, -10.0, 10.0, 1);
        let z = ModeState::zero(s.operator().clone());
        let z1 = step(&z, 0.05).unwrap();
        assert!(z1.u.iter().chain(&z1.v).all(|&x| x == 0.0));
        assert_eq!(energy_of_mode(&z1), 0.0);
        assert_eq!(le_increment(&z1, 0.05), 0.0);
    }

    #[test]
    fn cfl_enforced() {
        let s = gaussian_state(101, -10.0, 10.0, 0);
        assert!(matches!(step(&s, 0.11), Err(Error::Cfl { .. })));
        assert!(step(&s, 0.1).is_ok());
    }

    #[test]
    fn time_reversal() {
        let s0 = gaussian_state(801, -15.0, 25.0, 2);
        let dt = 0.02;
        let mut s = s0.clone();
        for _ in 0..200 {
            s.advance(dt).unwrap();
        }
        let mut b = s.reversed();
        for _ in 0..200 {
            b.advance(dt).unwrap();
        }
        let b = b.reversed();
        let err = s0.u.iter().zip(&b.u).chain(s0.v.iter().zip(&b.v)).fold(0.0f64, |m, (a, c)| m.max((a - c).abs()));
        assert!(err < 1e-10, "{err}");
    }

    fn richardson(n_coarse: usize, f: impl Fn(&ModeState) -> f64) -> (f64, f64, f64) {
        let c = f(&gaussian_state(n_coarse, -5.0, 15.0, 1));
        let m = f(&gaussian_state(2 * n_coarse - 1, -5.0, 15.0, 1));
        let fine = f(&gaussian_state(4 * n_coarse - 3, -5.0, 15.0, 1));
        ((c - m) / (m - fine), fine, (4.0 * fine - m) / 3.0)
    }

    #[test]
    fn energy_matches_quadrature_oracle() {
        // high-precision quadrature of (u_x² + A λ u²/r²) r^{d+2} in r_*
        let oracle = 484.817_737_735_828_53;
        let (ratio, fine, extrapolated) = richardson(1001, energy_of_mode);
        assert!(ratio.log2() > 1.9, "{ratio}");
        assert!((fine - oracle).abs() / oracle < 1e-4);
        assert!((extrapolated - oracle).abs() / oracle < 1e-8, "{extrapolated}");
    }

    #[test]
    fn le_density_matches_quadrature_oracle() {
        let oracle = 1.703_381_338_225_746_1;
        let (ratio, fine, extrapolated) = richardson(1001, le_density);
        assert!(ratio.log2() > 1.9, "{ratio}");
        assert!((fine - oracle).abs() / oracle < 1e-4);
        assert!((extrapolated - oracle).abs() / oracle < 1e-8, "{extrapolated}");
    }

    #[test]
    fn modified_energy_conserved() {
        let s0 = gaussian_state(1601, -20.0, 30.0, 1);
        let dt = 0.4 * s0.operator().dx();
        let e0 = modified_energy(&s0, dt);
        let mut s = s0;
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            s.advance(dt).unwrap();
            worst = worst.max((modified_energy(&s, dt) - e0).abs() / e0);
        }
        assert!(worst < 1e-10, "{worst}");
    }
}
