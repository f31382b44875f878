//! Threshold sensitivities to the investor's competence `β` and the
//! information environment `q`.
//!
//! The analytic values come from the implicit function theorem applied to
//! the two equilibrium conditions (indifference at `μ_ND` plus the linear
//! constraint tying the two thresholds). Finite differences of the solver
//! are kept alongside as an independent check.

use serde::{Deserialize, Serialize};

use crate::baseline::{
    excess_cdf_integral, report_stats, solve_baseline, Case, Equilibrium, ModelParams, ReportStats,
};
use crate::dist::XDistribution;
use crate::error::{Error, Result};
use crate::extension::{solve_extension, ExtCase, ExtEquilibrium, ExtParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSensitivity {
    pub d_xlow_d_beta: f64,
    pub d_xhigh_d_beta: f64,
    pub d_xlow_d_q: f64,
    pub d_xhigh_d_q: f64,
    pub method: Method,
}

/// β-derivatives of the extension thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtSensitivity {
    pub d_xlow_d_beta: f64,
    pub d_xhigh_d_beta: f64,
    pub method: Method,
}

/// Derivatives of every report statistic with respect to `β` and `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSensitivity {
    pub d_beta: ReportStats,
    pub d_q: ReportStats,
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;

// Solves [[a11, a12], [a21, a22]]·(u, v) = (b1, b2) by Cramer's rule.
fn solve2(a11: f64, a12: f64, a21: f64, a22: f64, b1: f64, b2: f64) -> (f64, f64) {
    let det = a11 * a22 - a12 * a21;
    ((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det)
}

/// Implicit-function-theorem derivatives of the baseline thresholds.
///
/// Uses the ratio forms for `q < 1`; at `q = 1` the `(1 - q)` denominators
/// vanish and the linear system is solved directly.
pub fn sensitivity_analytic(p: &ModelParams, eq: &Equilibrium) -> ThresholdSensitivity {
    let d = &p.x_dist;
    let (b, q) = (p.beta, p.q);
    let (xl, xh) = (eq.x_low, eq.x_high);
    let width = xh - xl;
    let spread_cdf = d.cdf(xh) - d.cdf(xl);
    let (dl_b, dh_b, dl_q, dh_q) = match eq.case {
        Case::Short => {
            let k_l = b * spread_cdf + (1.0 - b);
            let k_h = -b * d.pdf(xh) * width;
            let k_b = excess_cdf_integral(d, xl, xh, xh) + (p.mu0() - xl);
            if q < 1.0 {
                let r = (1.0 + q) / (1.0 - q);
                (
                    -k_b / (k_l - k_h / r),
                    -k_b / (k_h - r * k_l),
                    (xl - xh) / (1.0 - q - (1.0 + q) * k_l / k_h),
                    (xl - xh) / (1.0 + q - (1.0 - q) * k_h / k_l),
                )
            } else {
                // constraint rows: (1-q)·dx_low + (1+q)·dx_high = -∂/∂θ
                let (dl_b, dh_b) = solve2(k_l, k_h, 1.0 - q, 1.0 + q, -k_b, 0.0);
                let (dl_q, dh_q) = solve2(k_l, k_h, 1.0 - q, 1.0 + q, 0.0, -width);
                (dl_b, dh_b, dl_q, dh_q)
            }
        }
        Case::Long => {
            let j_l = -b * d.pdf(xl) * width;
            let j_h = b * spread_cdf + (1.0 - b);
            let j_b = excess_cdf_integral(d, xl, xh, xl) + (p.mu0() - xh);
            if q < 1.0 {
                let r = (1.0 + q) / (1.0 - q);
                (
                    -j_b / (j_l - r * j_h),
                    -j_b / (j_h - j_l / r),
                    width / (1.0 + q - (1.0 - q) * j_l / j_h),
                    width / (1.0 - q - (1.0 + q) * j_h / j_l),
                )
            } else {
                // constraint rows: (1+q)·dx_low + (1-q)·dx_high = -∂/∂θ
                let (dl_b, dh_b) = solve2(j_l, j_h, 1.0 + q, 1.0 - q, -j_b, 0.0);
                let (dl_q, dh_q) = solve2(j_l, j_h, 1.0 + q, 1.0 - q, 0.0, width);
                (dl_b, dh_b, dl_q, dh_q)
            }
        }
    };
    ThresholdSensitivity {
        d_xlow_d_beta: dl_b,
        d_xhigh_d_beta: dh_b,
        d_xlow_d_q: dl_q,
        d_xhigh_d_q: dh_q,
        method: Method::Analytic,
    }
}

/// Derivative of a vector-valued `f` at `at` by central differences, falling
/// back to second-order one-sided differences where `at ± step` leaves the
/// region accepted by `valid`.
pub fn fd_derivative<const N: usize>(
    f: impl Fn(f64) -> Result<[f64; N]>,
    at: f64,
    step: f64,
    valid: impl Fn(f64) -> bool,
) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    if valid(at - step) && valid(at + step) {
        let (lo, hi) = (f(at - step)?, f(at + step)?);
        for i in 0..N {
            out[i] = (hi[i] - lo[i]) / (2.0 * step);
        }
        return Ok(out);
    }
    let h = if valid(at + 2.0 * step) {
        step
    } else if valid(at - 2.0 * step) {
        -step
    } else {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("{step} leaves the valid region on both sides of {at}"),
        });
    };
    let (f0, f1, f2) = (f(at)?, f(at + h)?, f(at + 2.0 * h)?);
    for i in 0..N {
        out[i] = (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h);
    }
    Ok(out)
}

fn beta_valid(b: f64) -> bool {
    b > 0.0 && b < 1.0
}

fn q_valid(q: f64) -> bool {
    (0.0..=1.0).contains(&q)
}

/// Finite-difference counterpart of [`sensitivity_analytic`].
pub fn sensitivity_fd(p: &ModelParams, step: f64, tol: f64) -> Result<ThresholdSensitivity> {
    let thresholds = |p: ModelParams| -> Result<[f64; 2]> {
        let eq = solve_baseline(&p, tol)?;
        Ok([eq.x_low, eq.x_high])
    };
    let [dl_b, dh_b] = fd_derivative(
        |b| thresholds(ModelParams { beta: b, ..*p }),
        p.beta,
        step,
        beta_valid,
    )?;
    let [dl_q, dh_q] = fd_derivative(|q| thresholds(ModelParams { q, ..*p }), p.q, step, q_valid)?;
    Ok(ThresholdSensitivity {
        d_xlow_d_beta: dl_b,
        d_xhigh_d_beta: dh_b,
        d_xlow_d_q: dl_q,
        d_xhigh_d_q: dh_q,
        method: Method::FiniteDifference,
    })
}

fn stats_array(s: &ReportStats) -> [f64; 8] {
    [
        s.freq_neg,
        s.freq_pos,
        s.elaborateness,
        s.extremity_neg,
        s.extremity_pos,
        s.extremity,
        s.misleading_prob,
        s.price_reaction,
    ]
}

fn stats_from(a: [f64; 8]) -> ReportStats {
    ReportStats {
        freq_neg: a[0],
        freq_pos: a[1],
        elaborateness: a[2],
        extremity_neg: a[3],
        extremity_pos: a[4],
        extremity: a[5],
        misleading_prob: a[6],
        price_reaction: a[7],
    }
}

/// Finite-difference derivatives of the report statistics.
pub fn stats_sensitivity_fd(p: &ModelParams, step: f64, tol: f64) -> Result<StatsSensitivity> {
    let stats = |p: ModelParams| -> Result<[f64; 8]> {
        let eq = solve_baseline(&p, tol)?;
        Ok(stats_array(&report_stats(&p, &eq)))
    };
    let d_beta = fd_derivative(
        |b| stats(ModelParams { beta: b, ..*p }),
        p.beta,
        step,
        beta_valid,
    )?;
    let d_q = fd_derivative(|q| stats(ModelParams { q, ..*p }), p.q, step, q_valid)?;
    Ok(StatsSensitivity {
        d_beta: stats_from(d_beta),
        d_q: stats_from(d_q),
    })
}

/// Report-statistic derivatives by the chain rule through
/// [`sensitivity_analytic`]. Stays accurate where the statistics are tail
/// probabilities too small for finite differences to resolve.
pub fn stats_sensitivity_analytic(p: &ModelParams, eq: &Equilibrium) -> StatsSensitivity {
    let s = sensitivity_analytic(p, eq);
    let d = &p.x_dist;
    let (g_low, g_high) = (d.pdf(eq.x_low), d.pdf(eq.x_high));
    let short = eq.case == Case::Short;
    let chain = |dl: f64, dh: f64| {
        let ext_neg = -g_low * dl;
        let ext_pos = g_high * dh;
        stats_from([
            g_low * dl,
            -g_high * dh,
            g_low * dl - g_high * dh,
            ext_neg,
            ext_pos,
            ext_neg + ext_pos,
            if short { ext_pos } else { ext_neg },
            if short { -p.r_obs * dl } else { p.r_obs * dh },
        ])
    };
    StatsSensitivity {
        d_beta: chain(s.d_xlow_d_beta, s.d_xhigh_d_beta),
        d_q: chain(s.d_xlow_d_q, s.d_xhigh_d_q),
    }
}

/// Implicit-function-theorem β-derivatives of the extension thresholds.
pub fn ext_sensitivity_analytic(e: &ExtParams, eq: &ExtEquilibrium) -> ExtSensitivity {
    let d = &e.x_dist;
    let (b, p) = (e.beta, e.p_firm);
    let (xl, xh) = (eq.x_low_p, eq.x_high_p);
    let odds = p / (1.0 - p);
    let spread_cdf = d.cdf(xh) - d.cdf(xl);
    let (dl, dh) = match eq.case {
        ExtCase::BelowRbar => {
            let w = b / (1.0 - b);
            let k_l = w * spread_cdf + odds * d.cdf(xl) + 1.0;
            let k_h = -w * d.pdf(xh) * (xh - xl);
            let k_b = excess_cdf_integral(d, xl, xh, xh) / ((1.0 - b) * (1.0 - b));
            let r = (1.0 + p) / (1.0 - p);
            (-k_b / (k_l - k_h / r), -k_b / (k_h - r * k_l))
        }
        ExtCase::AboveRbar => {
            let w = b / ((1.0 - b) * (1.0 - p));
            let s_l = -w * d.pdf(xl) * (xh - xl);
            let s_h = w * spread_cdf + odds * d.cdf(xh) + 1.0;
            let s_b = excess_cdf_integral(d, xl, xh, xl) / ((1.0 - b) * (1.0 - b) * (1.0 - p));
            let dh = -s_b / (s_h - s_l);
            (-dh, dh)
        }
    };
    ExtSensitivity {
        d_xlow_d_beta: dl,
        d_xhigh_d_beta: dh,
        method: Method::Analytic,
    }
}

pub fn ext_sensitivity_fd(e: &ExtParams, step: f64, tol: f64) -> Result<ExtSensitivity> {
    let [dl, dh] = fd_derivative(
        |b| {
            let eq = solve_extension(&ExtParams { beta: b, ..*e }, tol)?;
            Ok([eq.x_low_p, eq.x_high_p])
        },
        e.beta,
        step,
        beta_valid,
    )?;
    Ok(ExtSensitivity {
        d_xlow_d_beta: dl,
        d_xhigh_d_beta: dh,
        method: Method::FiniteDifference,
    })
}

/// `|a - b| ≤ rel·max(|a|, |b|) + abs`
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}
