//! Firm-response extension: no exogenous revelation, but after a simple
//! report the target firm, informed about `x` with probability `p`, may
//! disclose it to lift the price.
//!
//! The firm discloses exactly when `x > μ_ND`. Which investor threshold
//! coincides with `μ_ND` is decided by the cutoff `r̄`: below it simple
//! reports push the price down and `μ_ND = x_low_p`; above it they push it up
//! and `μ_ND = x_high_p`.

use serde::{Deserialize, Serialize};

use crate::baseline::{
    excess_cdf_integral, truncated_moments, Action, Message, Position, ReportStats,
};
use crate::dist::{XDist, XDistribution};
use crate::error::{check_positive, check_probability, Error, Result};
use crate::root::{expand_down, expand_up, find_root};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtParams {
    pub alpha: f64,
    pub beta: f64,
    pub r_obs: f64,
    pub r0: f64,
    pub x_dist: XDist,
    /// Probability the firm is informed about `x`.
    pub p_firm: f64,
}

impl ExtParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        r_obs: f64,
        r0: f64,
        x_dist: XDist,
        p_firm: f64,
    ) -> Result<Self> {
        let e = ExtParams {
            alpha,
            beta,
            r_obs,
            r0,
            x_dist,
            p_firm,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("alpha", self.alpha, true, false)?;
        check_probability("beta", self.beta, true, true)?;
        check_probability("p", self.p_firm, true, true)?;
        check_positive("r", self.r_obs)?;
        check_positive("r0", self.r0)?;
        self.x_dist.validate()?;
        check_positive("mu0", self.x_dist.mean())
    }

    pub fn mu0(&self) -> f64 {
        self.x_dist.mean()
    }

    pub fn neutral_point(&self) -> f64 {
        self.r0 * self.mu0() / self.r_obs
    }

    pub fn prior_price(&self) -> f64 {
        self.r0 * self.mu0()
    }

    fn odds(&self) -> f64 {
        self.p_firm / (1.0 - self.p_firm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExtCase {
    /// `r < r̄`: simple reports come with a short position.
    BelowRbar,
    /// `r > r̄`: simple reports come with a long position.
    AboveRbar,
}

impl ExtCase {
    pub fn position(self) -> Position {
        match self {
            ExtCase::BelowRbar => Position::Short,
            ExtCase::AboveRbar => Position::Long,
        }
    }
}

/// Case cutoff on `r`. `Infinite` is the corner where every `r` is below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum RBar {
    Finite(f64),
    Infinite,
}

impl RBar {
    pub fn value(self) -> f64 {
        match self {
            RBar::Finite(v) => v,
            RBar::Infinite => f64::INFINITY,
        }
    }

    pub fn is_corner(self) -> bool {
        matches!(self, RBar::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtEquilibrium {
    pub case: ExtCase,
    pub x_low_p: f64,
    pub x_high_p: f64,
    pub mu_nd: f64,
    pub r_bar: RBar,
    pub neutral_point: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FirmAction {
    Respond,
    Silent,
}

/// `V(r) = p/(1-p)·∫_{-∞}^{n} G - (μ0 - n)` with `n = r0·μ0 / r`.
/// Strictly decreasing in `r`; positive exactly when `r < r̄`.
pub fn v_cutoff(e: &ExtParams, r: f64) -> f64 {
    v_of_neutral(e, e.r0 * e.mu0() / r)
}

fn v_of_neutral(e: &ExtParams, n: f64) -> f64 {
    e.odds() * e.x_dist.lower_partial_integral(n) - (e.mu0() - n)
}

/// Limit of `V(r)` as `r → ∞`.
pub fn v_at_infinity(e: &ExtParams) -> f64 {
    v_of_neutral(e, 0.0)
}

/// Solves `V(r̄) = 0` on `(r0, ∞)`, or reports the corner `r̄ = +∞` when
/// `V(+∞) ≥ 0`.
///
/// The root is taken in `n = r0·μ0 / r ∈ (0, μ0)`, where the bracket is finite.
pub fn solve_r_bar(e: &ExtParams, tol: f64) -> Result<RBar> {
    e.validate()?;
    if v_at_infinity(e) >= 0.0 {
        return Ok(RBar::Infinite);
    }
    let root = find_root(|n| v_of_neutral(e, n), 0.0, e.mu0(), tol)?;
    Ok(RBar::Finite(e.r0 * e.mu0() / root.x))
}

fn case_of(e: &ExtParams) -> Result<ExtCase> {
    let v = v_cutoff(e, e.r_obs);
    if v > 0.0 {
        Ok(ExtCase::BelowRbar)
    } else if v < 0.0 {
        Ok(ExtCase::AboveRbar)
    } else {
        Err(Error::DegenerateCase("r equals the case cutoff r̄"))
    }
}

fn below_upper(e: &ExtParams, x_low_p: f64) -> f64 {
    (2.0 * e.neutral_point() - (1.0 - e.p_firm) * x_low_p) / (1.0 + e.p_firm)
}

fn above_lower(e: &ExtParams, x_high_p: f64) -> f64 {
    2.0 * e.neutral_point() - x_high_p
}

/// Root function in `x_low_p` for `r < r̄`; strictly increasing.
pub fn h_root(e: &ExtParams, x_low_p: f64) -> Result<f64> {
    if case_of(e)? != ExtCase::BelowRbar {
        return Err(Error::WrongCase {
            op: "h_root",
            expected: "r < r̄",
        });
    }
    Ok(h_unchecked(e, x_low_p))
}

fn h_unchecked(e: &ExtParams, x_low_p: f64) -> f64 {
    let b = e.beta;
    let x_high_p = below_upper(e, x_low_p);
    b / (1.0 - b) * excess_cdf_integral(&e.x_dist, x_low_p, x_high_p, x_high_p)
        + e.odds() * e.x_dist.lower_partial_integral(x_low_p)
        - (e.mu0() - x_low_p)
}

/// Root function in `x_high_p` for `r > r̄`; strictly increasing.
pub fn t_root(e: &ExtParams, x_high_p: f64) -> Result<f64> {
    if case_of(e)? != ExtCase::AboveRbar {
        return Err(Error::WrongCase {
            op: "t_root",
            expected: "r > r̄",
        });
    }
    Ok(t_unchecked(e, x_high_p))
}

pub(crate) fn t_unchecked(e: &ExtParams, x_high_p: f64) -> f64 {
    let b = e.beta;
    let x_low_p = above_lower(e, x_high_p);
    b / ((1.0 - b) * (1.0 - e.p_firm)) * excess_cdf_integral(&e.x_dist, x_low_p, x_high_p, x_low_p)
        + e.odds() * e.x_dist.lower_partial_integral(x_high_p)
        - (e.mu0() - x_high_p)
}

pub fn solve_extension(e: &ExtParams, tol: f64) -> Result<ExtEquilibrium> {
    e.validate()?;
    let r_bar = solve_r_bar(e, tol)?;
    let case = case_of(e)?;
    let n = e.neutral_point();
    let step = e.x_dist.spread().max(n.abs()).max(1.0);
    match case {
        ExtCase::BelowRbar => {
            let (lo, hi) = expand_down(|x| h_unchecked(e, x), n, step)?;
            let root = find_root(|x| h_unchecked(e, x), lo, hi, tol)?;
            Ok(ExtEquilibrium {
                case,
                x_low_p: root.x,
                x_high_p: below_upper(e, root.x),
                mu_nd: root.x,
                r_bar,
                neutral_point: n,
                residual: root.residual,
            })
        }
        ExtCase::AboveRbar => {
            let (lo, hi) = expand_up(|x| t_unchecked(e, x), n, step)?;
            let root = find_root(|x| t_unchecked(e, x), lo, hi, tol)?;
            Ok(ExtEquilibrium {
                case,
                x_low_p: above_lower(e, root.x),
                x_high_p: root.x,
                mu_nd: root.x,
                r_bar,
                neutral_point: n,
                residual: root.residual,
            })
        }
    }
}

/// The informed firm discloses after a simple report iff `x > μ_ND`;
/// at the threshold it stays silent.
pub fn firm_strategy(eq: &ExtEquilibrium, x: f64) -> FirmAction {
    if x > eq.mu_nd {
        FirmAction::Respond
    } else {
        FirmAction::Silent
    }
}

/// Investor strategy; `None` is the partially informed investor.
pub fn ext_strategy(eq: &ExtEquilibrium, x: Option<f64>) -> Action {
    match x {
        Some(x) if x < eq.x_low_p => Action {
            message: Message::Elaborate,
            position: Position::Short,
        },
        Some(x) if x > eq.x_high_p => Action {
            message: Message::Elaborate,
            position: Position::Long,
        },
        _ => Action {
            message: Message::Simple,
            position: eq.case.position(),
        },
    }
}

/// Distance between `eq.mu_nd` and the belief recomputed from the Bayes
/// mixture of the non-disclosure events, by quadrature.
pub fn verify_bayes_ext(e: &ExtParams, eq: &ExtEquilibrium) -> f64 {
    let d = &e.x_dist;
    let (b, p) = (e.beta, e.p_firm);
    let (mass_mid, first_mid) = truncated_moments(d, eq.x_low_p, eq.x_high_p);
    let (mass_tail, first_tail) = truncated_moments(d, f64::NEG_INFINITY, eq.mu_nd);
    // Below r̄ an informed firm reveals any withheld x (all above μ_ND), so
    // the investor's withholding only survives when the firm is uninformed.
    let mid_weight = match eq.case {
        ExtCase::BelowRbar => b * (1.0 - p),
        ExtCase::AboveRbar => b,
    };
    let num = (1.0 - b) * (1.0 - p) * e.mu0() + mid_weight * first_mid + p * (1.0 - b) * first_tail;
    let den = (1.0 - b) * (1.0 - p) + mid_weight * mass_mid + p * (1.0 - b) * mass_tail;
    (num / den - eq.mu_nd).abs()
}

pub fn ext_report_stats(e: &ExtParams, eq: &ExtEquilibrium) -> ReportStats {
    ReportStats::from_thresholds(
        &e.x_dist,
        eq.x_low_p,
        eq.x_high_p,
        eq.neutral_point,
        eq.case == ExtCase::BelowRbar,
        (e.prior_price() - e.r_obs * eq.mu_nd).abs(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{solve_baseline, ModelParams, DEFAULT_TOL};

    fn ext(beta: f64, p: f64, r: f64) -> ExtParams {
        ExtParams::new(0.5, beta, r, 1.0, XDist::normal(1.0, 0.5).unwrap(), p).unwrap()
    }

    #[test]
    fn v_cutoff_examples() {
        let e = ext(0.7, 0.5, 0.5);
        assert!(v_cutoff(&e, 1.0) > 0.0);
        // mpmath quadrature of ∫_{-∞}^{1/3} G.
        let v3 = v_cutoff(&e, 3.0);
        assert!((v3 - (-0.645_469_109_145_915_1)).abs() < 1e-12, "{v3}");
        let tiny = ext(0.7, 1e-12, 0.5);
        for r in [0.5, 1.0, 2.0] {
            assert!((v_cutoff(&tiny, r) - (1.0 / r - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn v_cutoff_decreases() {
        let e = ext(0.3, 0.8, 1.0);
        let mut prev = v_cutoff(&e, 0.05);
        for i in 1..200 {
            let v = v_cutoff(&e, 0.05 + 0.05 * i as f64);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn r_bar_fixture() {
        let e = ext(0.7, 0.5, 0.5);
        let RBar::Finite(r_bar) = solve_r_bar(&e, DEFAULT_TOL).unwrap() else {
            panic!("corner")
        };
        assert!((r_bar - 1.160_112_863_648_332_1).abs() < 1e-10, "{r_bar}");
        assert!(v_cutoff(&e, r_bar).abs() <= 1e-10);
        assert!(r_bar > e.r0);
    }

    #[test]
    fn r_bar_limits() {
        let RBar::Finite(r_bar) = solve_r_bar(&ext(0.5, 1e-9, 0.5), DEFAULT_TOL).unwrap() else {
            panic!()
        };
        assert!((r_bar - 1.0).abs() < 1e-6);
        // E[(-X)⁺] for Normal(0.05, 1) is ≈ 0.374, odds 0.9/0.1 = 9 → corner.
        let e = ExtParams::new(0.5, 0.5, 2.0, 1.0, XDist::normal(0.05, 1.0).unwrap(), 0.9).unwrap();
        assert!(e.odds() * e.x_dist.lower_partial_integral(0.0) > e.mu0());
        assert_eq!(solve_r_bar(&e, DEFAULT_TOL).unwrap(), RBar::Infinite);
        let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
        assert_eq!(eq.case, ExtCase::BelowRbar);
    }

    #[test]
    fn below_fixture() {
        let e = ext(0.7, 0.5, 0.5);
        let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
        assert_eq!(eq.case, ExtCase::BelowRbar);
        assert!(
            (eq.x_low_p - 1.096_057_174_470_101_2).abs() < 1e-11,
            "{}",
            eq.x_low_p
        );
        assert!(
            (eq.x_high_p - 2.301_314_275_176_632_9).abs() < 1e-11,
            "{}",
            eq.x_high_p
        );
        assert_eq!(eq.mu_nd, eq.x_low_p);
        let lhs = (1.0 + e.p_firm) * eq.x_high_p + (1.0 - e.p_firm) * eq.x_low_p;
        assert!((lhs - 2.0 * eq.neutral_point).abs() < 1e-13);
        assert!(verify_bayes_ext(&e, &eq) < 1e-8);
    }

    #[test]
    fn above_fixture() {
        let e = ext(0.7, 0.5, 3.0);
        let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
        assert_eq!(eq.case, ExtCase::AboveRbar);
        assert!(
            (eq.x_low_p - 0.001_598_912_957_930_57).abs() < 1e-11,
            "{}",
            eq.x_low_p
        );
        assert!(
            (eq.x_high_p - 0.665_067_753_708_736_1).abs() < 1e-11,
            "{}",
            eq.x_high_p
        );
        assert_eq!(eq.mu_nd, eq.x_high_p);
        assert!(eq.x_high_p > eq.neutral_point);
        assert!(verify_bayes_ext(&e, &eq) < 1e-8);
    }

    #[test]
    fn h_root_signs() {
        let e = ext(0.6, 0.4, 0.8);
        let n = e.neutral_point();
        assert!(h_root(&e, n).unwrap() > 0.0);
        assert!(h_root(&e, -50.0).unwrap() < 0.0);
        assert!(matches!(t_root(&e, n), Err(Error::WrongCase { .. })));
    }

    #[test]
    fn t_root_signs() {
        let e = ext(0.6, 0.4, 5.0);
        let n = e.neutral_point();
        assert!(t_root(&e, n).unwrap() < 0.0);
        assert!(t_root(&e, 1e3).unwrap() > 0.0);
        assert!(matches!(h_root(&e, n), Err(Error::WrongCase { .. })));
    }

    #[test]
    fn t_root_at_neutral_point_equals_v() {
        // Substituting x_high_p = n collapses the interval term.
        for (p, r) in [(0.2, 1.5), (0.5, 3.0), (0.5, 0.4), (0.9, 8.0)] {
            let e = ext(0.5, p, r);
            let n = e.neutral_point();
            assert!((t_unchecked(&e, n) - v_cutoff(&e, r)).abs() < 1e-14);
        }
    }

    #[test]
    fn h_root_reduces_to_baseline_at_p_zero() {
        // With p → 0 and q = 0: H(x) = Q(x) / (1 - β).
        for (beta, r) in [(0.2, 0.4), (0.5, 0.7), (0.8, 0.9)] {
            let e = ext(beta, 1e-12, r);
            let b = ModelParams::new(0.5, beta, 0.0, r, 1.0, e.x_dist).unwrap();
            for x in [1.0, 1.2, e.neutral_point()] {
                let q = crate::baseline::q_root(&b, x).unwrap();
                assert!((h_root(&e, x).unwrap() - q / (1.0 - beta)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tiny_p_matches_baseline_q_zero() {
        let e = ext(0.5, 1e-8, 0.6);
        let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
        let b = ModelParams::new(0.5, 0.5, 0.0, 0.6, 1.0, e.x_dist).unwrap();
        let base = solve_baseline(&b, DEFAULT_TOL).unwrap();
        assert!((eq.x_low_p - base.x_low).abs() < 1e-5);
        assert!((eq.x_high_p - base.x_high).abs() < 1e-5);
    }

    #[test]
    fn just_above_cutoff_upper_threshold_near_neutral() {
        let e0 = ext(0.7, 0.5, 1.0);
        let r_bar = solve_r_bar(&e0, DEFAULT_TOL).unwrap().value();
        let mut prev = f64::INFINITY;
        for d in [1e-2, 1e-3, 1e-4] {
            let e = ext(0.7, 0.5, r_bar + d);
            let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
            assert_eq!(eq.case, ExtCase::AboveRbar);
            let gap = eq.x_high_p - eq.neutral_point;
            assert!(gap > 0.0 && gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn firm_responds_above_belief_only() {
        let below = solve_extension(&ext(0.7, 0.5, 0.5), DEFAULT_TOL).unwrap();
        assert_eq!(firm_strategy(&below, below.mu_nd), FirmAction::Silent);
        let mid = 0.5 * (below.x_low_p + below.x_high_p);
        assert_eq!(firm_strategy(&below, mid), FirmAction::Respond);
        let above = solve_extension(&ext(0.7, 0.5, 3.0), DEFAULT_TOL).unwrap();
        let mid = 0.5 * (above.x_low_p + above.x_high_p);
        assert_eq!(firm_strategy(&above, mid), FirmAction::Silent);
        assert_eq!(ext_strategy(&above, Some(mid)).position, Position::Long);
        assert_eq!(ext_strategy(&above, None).message, Message::Simple);
    }

    #[test]
    fn case_matches_sign_of_price_move() {
        for r in [0.3, 0.9, 1.1, 1.15, 1.17, 2.0, 6.0] {
            let e = ext(0.7, 0.5, r);
            let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
            let short = e.r_obs * eq.mu_nd < e.prior_price();
            assert_eq!(short, r < eq.r_bar.value(), "r = {r}");
            assert_eq!(short, eq.case == ExtCase::BelowRbar);
        }
    }

    #[test]
    fn misleading_regions_nonempty() {
        for r in [0.5, 3.0] {
            let e = ext(0.7, 0.5, r);
            let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
            let s = ext_report_stats(&e, &eq);
            assert!(s.misleading_prob > 0.0);
            match eq.case {
                ExtCase::BelowRbar => assert!(eq.x_high_p > eq.neutral_point),
                ExtCase::AboveRbar => assert!(eq.x_low_p < eq.neutral_point),
            }
        }
    }
}
