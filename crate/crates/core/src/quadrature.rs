//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Global subdivision: the interval with the largest error estimate is bisected
//! until the summed estimate falls under `max(abs_tol, rel_tol * |I|)`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kronrod += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

impl GaussKronrod {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        if a == b {
            return Ok(QuadResult { value: 0.0, error: 0.0 });
        }
        if a > b {
            return self.integrate(f, b, a).map(|q| QuadResult { value: -q.value, error: q.error });
        }
        let (v, e) = panel(&f, a, b);
        let mut intervals = vec![(a, b, v, e)];
        loop {
            let value: f64 = intervals.iter().map(|iv| iv.2).sum();
            let error: f64 = intervals.iter().map(|iv| iv.3).sum();
            if !value.is_finite() {
                return Err(Error::Quadrature { estimate: value, error });
            }
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(QuadResult { value, error });
            }
            if intervals.len() >= self.max_intervals {
                return Err(Error::Quadrature { estimate: value, error });
            }
            let (idx, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
            let (lo, hi, _, _) = intervals.swap_remove(idx);
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                // cannot split further; accept what we have
                let (v, e) = panel(&f, lo, hi);
                intervals.push((lo, hi, v, e));
                let value: f64 = intervals.iter().map(|iv| iv.2).sum();
                let error: f64 = intervals.iter().map(|iv| iv.3).sum();
                return Err(Error::Quadrature { estimate: value, error });
            }
            let (v1, e1) = panel(&f, lo, mid);
            let (v2, e2) = panel(&f, mid, hi);
            intervals.push((lo, mid, v1, e1));
            intervals.push((mid, hi, v2, e2));
        }
    }

    /// Integrates over consecutive sub-intervals `[pts[i], pts[i+1]]` and sums.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, pts: &[f64]) -> Result<QuadResult> {
        let mut out = QuadResult { value: 0.0, error: 0.0 };
        for w in pts.windows(2) {
            let q = self.integrate(&f, w[0], w[1])?;
            out.value += q.value;
            out.error += q.error;
        }
        Ok(out)
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    GaussKronrod::default().integrate(f, a, b).map(|q| q.value)
}
