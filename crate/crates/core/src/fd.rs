//! Finite-difference stencils with Richardson extrapolation.

/// Five-point centered first derivative, O(h^4).
pub fn central5<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// `central5` at `h` and `h/2`, combined to cancel the h^4 term.
pub fn central5_richardson<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let coarse = central5(f, x, h);
    let fine = central5(f, x, 0.5 * h);
    (16.0 * fine - coarse) / 15.0
}

/// Five-point centered second derivative, O(h^4).
pub fn central5_second<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

/// One-sided second derivative from five samples on one side of `x`.
/// `dir = -1.0` uses `x, x-h, .., x-4h`; `dir = 1.0` uses `x, x+h, .., x+4h`. O(h^3).
pub fn one_sided_second<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, dir: f64) -> f64 {
    let s = dir * h;
    (35.0 * f(x) - 104.0 * f(x + s) + 114.0 * f(x + 2.0 * s) - 56.0 * f(x + 3.0 * s) + 11.0 * f(x + 4.0 * s))
        / (12.0 * h * h)
}

pub fn one_sided_second_richardson<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64, dir: f64) -> f64 {
    let coarse = one_sided_second(f, x, h, dir);
    let fine = one_sided_second(f, x, 0.5 * h, dir);
    (8.0 * fine - coarse) / 7.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_sine() {
        let f = |x: f64| x.sin();
        assert!((central5(&f, 0.3, 1e-2) - 0.3f64.cos()).abs() < 1e-9);
        assert!((central5_richardson(&f, 0.3, 1e-2) - 0.3f64.cos()).abs() < 1e-12);
        assert!((central5_second(&f, 0.3, 1e-2) + 0.3f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn one_sided_picks_branch() {
        // kink at 0: left branch x^2 (f''=2), right branch 3x^2 (f''=6)
        let f = |x: f64| if x < 0.0 { x * x } else { 3.0 * x * x };
        assert!((one_sided_second_richardson(&f, 0.0, 1e-2, -1.0) - 2.0).abs() < 1e-8);
        assert!((one_sided_second_richardson(&f, 0.0, 1e-2, 1.0) - 6.0).abs() < 1e-8);
    }
}
