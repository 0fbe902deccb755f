//! The mode-reduced wave operator on a uniform tortoise mesh.
//!
//! With `w = r^{d+2}` and `x = r_*`, a mode `u` of degree `ℓ` obeys
//! `w u_tt = (w u_x)_x - w V u`, `V = A λ_ℓ / r²`. Discretised in
//! self-adjoint form `M ü = -K u` with `M = diag(w_i Δx)` and face weights
//! taken at the cell midpoints, so `vᵀMv + uᵀKu` is the natural energy.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{sphere_eigenvalue, BackgroundParams, RadialGrid, Radius};

/// Nodes and cell midpoints of a uniform tortoise grid. Shared by all modes
/// of a run.
#[derive(Debug, Clone)]
pub struct TortoiseMesh {
    bg: BackgroundParams,
    nodes: RadialGrid,
    faces: Vec<Radius>,
    dx: f64,
}

impl TortoiseMesh {
    /// `n` nodes on `[x_lo, x_hi]`.
    pub fn new(bg: &BackgroundParams, x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        if n < 5 {
            return Err(Error::EmptyGrid);
        }
        if !(x_hi > x_lo) {
            return Err(Error::Domain(format!("empty tortoise range [{x_lo}, {x_hi}]")));
        }
        let fine = RadialGrid::uniform_in_tortoise(bg, x_lo, x_hi, 2 * n - 1)?;
        let pts = fine.points();
        let xs = fine.coords();
        let nodes = pts.iter().step_by(2).copied().collect();
        let faces = pts.iter().skip(1).step_by(2).copied().collect();
        let coords: Vec<f64> = xs.iter().step_by(2).copied().collect();
        let nodes = RadialGrid::from_tortoise(nodes, coords)?;
        Ok(Self { bg: *bg, nodes, faces, dx: (x_hi - x_lo) / (n - 1) as f64 })
    }

    /// Node count chosen so the spacing is as close to `dx` as possible.
    pub fn with_spacing(bg: &BackgroundParams, x_lo: f64, x_hi: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Domain(format!("grid spacing {dx} must be positive")));
        }
        let n = ((x_hi - x_lo) / dx).round() as usize + 1;
        Self::new(bg, x_lo, x_hi, n)
    }

    pub fn background(&self) -> &BackgroundParams {
        &self.bg
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.nodes
    }

    pub fn x(&self) -> &[f64] {
        self.nodes.coords()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Discretised radial operator for one `ℓ`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    mesh: Arc<TortoiseMesh>,
    ell: u32,
    lambda: f64,
    /// `r^{d+2}` at nodes.
    weight: Vec<f64>,
    /// `r^{d+2}` at cell midpoints.
    face: Vec<f64>,
    /// `A λ / r²` at nodes.
    potential: Vec<f64>,
    /// Localized-energy weights against `u_x²` and `u²`, times `r^{d+2} Δx`.
    le_grad: Vec<f64>,
    le_zero: Vec<f64>,
}

impl RadialOperator {
    pub fn new(mesh: Arc<TortoiseMesh>, ell: u32) -> Result<Self> {
        let bg = *mesh.background();
        let lambda = sphere_eigenvalue(ell as i64, bg.d() as i64)?;
        let pw = bg.d() as i32 + 2;
        let weight = mesh.grid().points().iter().map(|p| p.r.powi(pw)).collect();
        let face = mesh.faces.iter().map(|p| p.r.powi(pw)).collect();
        let potential = mesh.grid().points().iter().map(|p| p.lapse() * lambda / (p.r * p.r)).collect();
        let dx = mesh.dx;
        let (le_grad, le_zero) = mesh
            .grid()
            .points()
            .iter()
            .map(|p| {
                let c = p.le_weights(&bg);
                let m = p.r.powi(pw) * dx;
                let ang = c.c_omega * lambda * p.lapse() / (p.r * p.r);
                (c.c_r * m, (ang + c.c_0_lapse) * m)
            })
            .unzip();
        Ok(Self { mesh, ell, lambda, weight, face, potential, le_grad, le_zero })
    }

    pub fn mesh(&self) -> &Arc<TortoiseMesh> {
        &self.mesh
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.mesh.dx
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `-M⁻¹ K u` at interior nodes; the two end entries are left at zero.
    pub fn accel(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        let dx2 = self.mesh.dx * self.mesh.dx;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let flux = self.face[i] * (u[i + 1] - u[i]) - self.face[i - 1] * (u[i] - u[i - 1]);
            out[i] = flux / (dx2 * self.weight[i]) - self.potential[i] * u[i];
        }
    }

    /// `vᵀMv + uᵀKu`, interior nodes only.
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.len();
        let dx = self.mesh.dx;
        let mut e = 0.0;
        for i in 1..n - 1 {
            e += self.weight[i] * dx * (v[i] * v[i] + self.potential[i] * u[i] * u[i]);
        }
        for j in 0..n - 1 {
            let du = u[j + 1] - u[j];
            e += self.face[j] * du * du / dx;
        }
        e
    }

    /// The localized-energy integrand integrated over the mesh, given `u` and
    /// its nodal gradient.
    pub fn le_density(&self, u: &[f64], ux: &[f64]) -> f64 {
        (1..self.len() - 1).map(|i| self.le_grad[i] * ux[i] * ux[i] + self.le_zero[i] * u[i] * u[i]).sum()
    }

    /// `aᵀMa` with `a = -M⁻¹Ku`.
    pub fn accel_norm(&self, a: &[f64]) -> f64 {
        let dx = self.mesh.dx;
        (1..self.len() - 1).map(|i| self.weight[i] * dx * a[i] * a[i]).sum()
    }
}

/// The discretised radial operator for `ℓ` on `n` tortoise nodes over
/// `[x_lo, x_hi]`.
pub fn reduce_wave_operator(ell: u32, bg: &BackgroundParams, x_lo: f64, x_hi: f64, n: usize) -> Result<RadialOperator> {
    RadialOperator::new(Arc::new(TortoiseMesh::new(bg, x_lo, x_hi, n)?), ell)
}

/// Central differences inside, one-sided at the ends.
pub(crate) fn gradient(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] = (u[1] - u[0]) / dx;
    out[n - 1] = (u[n - 1] - u[n - 2]) / dx;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(d: i64, ell: u32, n: usize) -> RadialOperator {
        reduce_wave_operator(ell, &BackgroundParams::new(d, 1.0).unwrap(), -20.0, 20.0, n).unwrap()
    }

    #[test]
    fn constants_are_static_for_ell_zero() {
        let o = op(2, 0, 201);
        let u = vec![3.0; o.len()];
        let mut a = vec![1.0; o.len()];
        o.accel(&u, &mut a);
        assert!(a.iter().all(|&x| x.abs() < 1e-12));
        assert_eq!(o.energy(&u, &vec![0.0; o.len()]), 0.0);
    }

    #[test]
    fn operator_is_symmetric_in_the_mass_inner_product() {
        let o = op(1, 2, 101);
        let n = o.len();
        let xs = o.mesh().x().to_vec();
        let mut u: Vec<f64> = xs.iter().map(|x| (-(x / 4.0).powi(2)).exp()).collect();
        let mut w: Vec<f64> = xs.iter().map(|x| (-((x - 2.0) / 3.0).powi(2)).exp() * x.cos()).collect();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        w[0] = 0.0;
        w[n - 1] = 0.0;
        let (mut au, mut aw) = (vec![0.0; n], vec![0.0; n]);
        o.accel(&u, &mut au);
        o.accel(&w, &mut aw);
        let dx = o.dx();
        let lhs: f64 = (0..n).map(|i| o.weight()[i] * dx * w[i] * au[i]).sum();
        let rhs: f64 = (0..n).map(|i| o.weight()[i] * dx * u[i] * aw[i]).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs());
    }

    #[test]
    fn mesh_interleaves_faces() {
        let o = op(1, 0, 51);
        let m = o.mesh();
        let nodes = m.grid().points();
        for (j, f) in m.faces.iter().enumerate() {
            assert!(nodes[j].ln_u < f.ln_u && f.ln_u < nodes[j + 1].ln_u);
        }
        assert!((m.dx() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn too_small_mesh_rejected() {
        let bg = BackgroundParams::new(1, 1.0).unwrap();
        assert!(TortoiseMesh::new(&bg, 0.0, 1.0, 3).is_err());
        assert!(TortoiseMesh::new(&bg, 1.0, 0.0, 10).is_err());
    }
}
