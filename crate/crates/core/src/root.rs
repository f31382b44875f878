//! Bracketed scalar root finding: bisection refined by safeguarded secant steps.

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Function value at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the root of `f` on `[a, b]`, which must carry a sign change.
///
/// Each step tries the secant through the two latest iterates and falls back
/// to bisection when that step leaves the bracket or the bracket has not
/// halved over the last two steps. Stops once the bracket is narrower than
/// `xtol` (plus a few ulps of the iterate) or `f` vanishes exactly.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<Root> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }

    let (mut x_prev, mut f_prev) = (lo, f_lo);
    let (mut x_cur, mut f_cur) = (hi, f_hi);
    let mut width_two_back = f64::INFINITY;
    let mut width_one_back = hi - lo;

    for it in 1..=MAX_ITER {
        let width = hi - lo;
        let tol = xtol + 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        if width <= tol {
            let (x, residual) = if f_lo.abs() <= f_hi.abs() {
                (lo, f_lo)
            } else {
                (hi, f_hi)
            };
            return Ok(Root {
                x,
                residual,
                iterations: it - 1,
            });
        }

        let mid = lo + 0.5 * width;
        let mut x = mid;
        if width <= 0.5 * width_two_back && f_cur != f_prev {
            let secant = x_cur - f_cur * (x_cur - x_prev) / (f_cur - f_prev);
            let margin = 0.5 * tol;
            if secant.is_finite() && secant > lo + margin && secant < hi - margin {
                x = secant;
            }
        }

        let fx = f(x);
        if fx == 0.0 {
            return Ok(Root {
                x,
                residual: 0.0,
                iterations: it,
            });
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        x_prev = x_cur;
        f_prev = f_cur;
        x_cur = x;
        f_cur = fx;
        width_two_back = width_one_back;
        width_one_back = width;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
    })
}

/// Moves `lo` downward from `hi` by geometrically growing steps until
/// `f(lo)` has the sign opposite to `f(hi)`. Returns the bracket.
pub fn expand_down<F: FnMut(f64) -> f64>(mut f: F, hi: f64, first_step: f64) -> Result<(f64, f64)> {
    let f_hi = f(hi);
    let mut step = first_step;
    let mut lo = hi - step;
    for _ in 0..MAX_EXPANSIONS {
        let f_lo = f(lo);
        if f_lo.signum() != f_hi.signum() || f_lo == 0.0 {
            return Ok((lo, hi));
        }
        step *= 2.0;
        lo = hi - step;
    }
    Err(Error::NotBracketed {
        lo,
        hi,
        f_lo: f(lo),
        f_hi,
    })
}

/// Mirror of [`expand_down`].
pub fn expand_up<F: FnMut(f64) -> f64>(mut f: F, lo: f64, first_step: f64) -> Result<(f64, f64)> {
    let f_lo = f(lo);
    let mut step = first_step;
    let mut hi = lo + step;
    for _ in 0..MAX_EXPANSIONS {
        let f_hi = f(hi);
        if f_hi.signum() != f_lo.signum() || f_hi == 0.0 {
            return Ok((lo, hi));
        }
        step *= 2.0;
        hi = lo + step;
    }
    Err(Error::NotBracketed {
        lo,
        hi,
        f_lo,
        f_hi: f(hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic() {
        let r = find_root(|x| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 1e-14).unwrap();
        assert!((r.x - 2.094_551_481_542_326_5).abs() < 1e-13);
        assert!(r.iterations < 60);
    }

    #[test]
    fn flat_then_steep_still_converges() {
        // Secant steps stall on this shape; the halving guard must kick in.
        let f = |x: f64| if x < 0.99 { -1e-8 } else { (x - 0.995) * 1e6 };
        let r = find_root(f, 0.0, 1.0, 1e-13).unwrap();
        assert!((r.x - 0.995).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_and_exact_zero() {
        let r = find_root(|x| x - 1.0, 3.0, -1.0, 1e-12).unwrap();
        assert!((r.x - 1.0).abs() < 1e-12);
        let r = find_root(|x| x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.x, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(matches!(
            find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NotBracketed { .. })
        ));
    }

    #[test]
    fn expansion_finds_sign_change() {
        let (lo, hi) = expand_down(|x| x + 100.0, 0.0, 1.0).unwrap();
        assert!(lo <= -100.0 && hi == 0.0);
        let (lo, hi) = expand_up(|x| x - 37.5, 1.0, 0.5).unwrap();
        assert!(lo == 1.0 && hi >= 37.5);
    }
}
