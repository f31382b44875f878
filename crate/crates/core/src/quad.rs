//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! Used as the fallback for distributions without a closed-form partial
//! integral and for the Bayes re-derivation of the non-disclosure belief.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the 7-point rule (odd Kronrod nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 60;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let (left, left_err) = gk15(f, a, mid);
    let (right, right_err) = gk15(f, mid, b);
    adapt(f, a, mid, left, left_err, 0.5 * tol, depth + 1)
        + adapt(f, mid, b, right, right_err, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Reversed bounds flip the sign; an empty interval returns zero.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let (whole, err) = gk15(&f, a, b);
    adapt(&f, a, b, whole, err, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14);
        // x^6/6 - x^3 + x on [-1, 2]
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(f64::exp, 0.0, 1.0, 1e-14);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        let v = integrate(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, 1e-12);
        assert!((v - 2.0 * 50f64.atan()).abs() < 1e-11);
    }

    #[test]
    fn orientation() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-12), 0.0);
        let fwd = integrate(|x| x * x, 0.0, 3.0, 1e-12);
        let back = integrate(|x| x * x, 3.0, 0.0, 1e-12);
        assert!((fwd + back).abs() < 1e-14);
        assert!((fwd - 9.0).abs() < 1e-12);
    }

    #[test]
    fn kink_needs_subdivision() {
        let v = integrate(|x: f64| x.abs(), -1.0, 3.0, 1e-12);
        assert!((v - 5.0).abs() < 1e-11, "{v}");
    }
}
