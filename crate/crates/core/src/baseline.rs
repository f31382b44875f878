//! Baseline equilibrium: outside revelation with probability `q`.
//!
//! For a realized first signal `r`, the informed investor withholds `x` on an
//! interval `[x_low, x_high]` that contains the value-neutral point
//! `n = r0·μ0 / r`, and discloses outside it. With a red flag (`r < r0`) the
//! non-disclosure belief equals `x_low` and simple reports come with a short
//! position; with a green flag (`r > r0`) it equals `x_high` and the position
//! is long. Each case reduces to one monotone scalar root on a finite bracket.

use serde::{Deserialize, Serialize};

use crate::dist::{XDist, XDistribution};
use crate::error::{check_positive, check_probability, Error, Result};
use crate::quad;
use crate::root::find_root;

/// Argument tolerance used by the solvers unless the caller asks otherwise.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Probability the investor learns `r`.
    pub alpha: f64,
    /// Probability an `r`-informed investor also learns `x` (competence).
    pub beta: f64,
    /// Probability an outside source reveals firm value after the report.
    pub q: f64,
    /// Realized (and disclosed) first signal.
    pub r_obs: f64,
    /// Prior mean of `r`.
    pub r0: f64,
    pub x_dist: XDist,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, q: f64, r_obs: f64, r0: f64, x_dist: XDist) -> Result<Self> {
        let p = ModelParams {
            alpha,
            beta,
            q,
            r_obs,
            r0,
            x_dist,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("alpha", self.alpha, true, false)?;
        check_probability("beta", self.beta, true, true)?;
        check_probability("q", self.q, false, false)?;
        check_positive("r", self.r_obs)?;
        check_positive("r0", self.r0)?;
        self.x_dist.validate()?;
        check_positive("mu0", self.x_dist.mean())
    }

    pub fn mu0(&self) -> f64 {
        self.x_dist.mean()
    }

    /// `r0·μ0 / r`: the `x` at which an elaborate report leaves the price unchanged.
    pub fn neutral_point(&self) -> f64 {
        self.r0 * self.mu0() / self.r_obs
    }

    /// Date-1 price `r0·μ0`.
    pub fn prior_price(&self) -> f64 {
        self.r0 * self.mu0()
    }

    pub fn case(&self) -> Result<Case> {
        if self.r_obs < self.r0 {
            Ok(Case::Short)
        } else if self.r_obs > self.r0 {
            Ok(Case::Long)
        } else {
            Err(Error::DegenerateCase(
                "r equals r0: neither the red-flag nor the green-flag construction applies",
            ))
        }
    }
}

/// Which side the investor trades after a simple report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// `r < r0`
    Short,
    /// `r > r0`
    Long,
}

impl Case {
    pub fn position(self) -> Position {
        match self {
            Case::Short => Position::Short,
            Case::Long => Position::Long,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub case: Case,
    pub x_low: f64,
    pub x_high: f64,
    /// Market belief about `x` after a simple report with no revelation.
    pub mu_nd: f64,
    pub neutral_point: f64,
    /// Value of the case's root function at the solution.
    pub residual: f64,
}

/// What the investor discloses: both signals, `r` only, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Message {
    Elaborate,
    Simple,
    Silent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    Short = -1,
    Flat = 0,
    Long = 1,
}

impl Position {
    pub fn sign(self) -> f64 {
        self as i8 as f64
    }

    pub const ALL: [Position; 3] = [Position::Short, Position::Flat, Position::Long];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub message: Message,
    pub position: Position,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}, {:?})", self.message, self.position)
    }
}

/// Price volatility of a simple report: `|q·r·x + (1-q)·r·μ_ND - r0·μ0|`.
pub fn vol_simple(p: &ModelParams, mu_nd: f64, x: f64) -> f64 {
    (p.q * p.r_obs * x + (1.0 - p.q) * p.r_obs * mu_nd - p.prior_price()).abs()
}

/// Price volatility of an elaborate report: `|r·x - r0·μ0|`.
pub fn vol_elaborate(p: &ModelParams, x: f64) -> f64 {
    (p.r_obs * x - p.prior_price()).abs()
}

/// Upper threshold implied by the lower one when `r < r0`.
pub fn short_case_upper(p: &ModelParams, x_low: f64) -> f64 {
    (2.0 * p.neutral_point() - (1.0 - p.q) * x_low) / (1.0 + p.q)
}

/// Lower threshold implied by the upper one when `r > r0`.
pub fn long_case_lower(p: &ModelParams, x_high: f64) -> f64 {
    (2.0 * p.neutral_point() - (1.0 - p.q) * x_high) / (1.0 + p.q)
}

/// `∫_a^b (G(x) - G(c)) dx` for `a ≤ b`, reading negative widths as zero.
pub(crate) fn excess_cdf_integral(d: &XDist, a: f64, b: f64, c: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    d.lower_partial_integral(b) - d.lower_partial_integral(a) - (b - a) * d.cdf(c)
}

/// Red-flag root function in `x_low`, with `x_high` eliminated.
/// Strictly increasing; its root is the lower threshold.
pub fn q_root(p: &ModelParams, x_low: f64) -> Result<f64> {
    if p.r_obs >= p.r0 {
        return Err(Error::WrongCase {
            op: "q_root",
            expected: "r < r0",
        });
    }
    Ok(q_root_unchecked(p, x_low))
}

fn q_root_unchecked(p: &ModelParams, x_low: f64) -> f64 {
    let x_high = short_case_upper(p, x_low);
    p.beta * excess_cdf_integral(&p.x_dist, x_low, x_high, x_high)
        - (1.0 - p.beta) * (p.mu0() - x_low)
}

/// Green-flag root function in `x_high`, with `x_low` eliminated.
/// Strictly increasing; its root is the upper threshold.
pub fn r_root(p: &ModelParams, x_high: f64) -> Result<f64> {
    if p.r_obs <= p.r0 {
        return Err(Error::WrongCase {
            op: "r_root",
            expected: "r > r0",
        });
    }
    Ok(r_root_unchecked(p, x_high))
}

fn r_root_unchecked(p: &ModelParams, x_high: f64) -> f64 {
    let x_low = long_case_lower(p, x_high);
    p.beta * excess_cdf_integral(&p.x_dist, x_low, x_high, x_low)
        - (1.0 - p.beta) * (p.mu0() - x_high)
}

/// Solves the baseline equilibrium for the realized `r`.
pub fn solve_baseline(p: &ModelParams, tol: f64) -> Result<Equilibrium> {
    p.validate()?;
    let case = p.case()?;
    let mu0 = p.mu0();
    let neutral = p.neutral_point();
    match case {
        Case::Short => {
            let root = find_root(|x| q_root_unchecked(p, x), mu0, neutral, tol)?;
            Ok(Equilibrium {
                case,
                x_low: root.x,
                x_high: short_case_upper(p, root.x),
                mu_nd: root.x,
                neutral_point: neutral,
                residual: root.residual,
            })
        }
        Case::Long => {
            let root = find_root(|x| r_root_unchecked(p, x), neutral, mu0, tol)?;
            Ok(Equilibrium {
                case,
                x_low: long_case_lower(p, root.x),
                x_high: root.x,
                mu_nd: root.x,
                neutral_point: neutral,
                residual: root.residual,
            })
        }
    }
}

/// Recomputes the non-disclosure belief from the Bayes mixture
/// (uninformed-about-`x` mass at the prior mean, informed mass on the
/// withholding interval) by direct quadrature of `g` and `x·g`, and returns
/// its distance from `eq.mu_nd`.
pub fn verify_bayes(p: &ModelParams, eq: &Equilibrium) -> f64 {
    let d = &p.x_dist;
    let (mass, first) = truncated_moments(d, eq.x_low, eq.x_high);
    let b = p.beta;
    let recomputed = ((1.0 - b) * p.mu0() + b * first) / ((1.0 - b) + b * mass);
    (recomputed - eq.mu_nd).abs()
}

/// `(∫_a^b g, ∫_a^b x·g)` by quadrature on the density.
pub(crate) fn truncated_moments(d: &XDist, a: f64, b: f64) -> (f64, f64) {
    let lo = a.max(d.quantile(1e-16));
    let hi = b.min(d.quantile(1.0 - 1e-16));
    if hi <= lo {
        return (0.0, 0.0);
    }
    let mass = quad::integrate(|x| d.pdf(x), lo, hi, 1e-14);
    let first = quad::integrate(|x| x * d.pdf(x), lo, hi, 1e-14);
    (mass, first)
}

/// Equilibrium action of the informed investor who observed `x`, or of the
/// partially informed investor when `x` is `None`. Ties at the thresholds
/// resolve to withholding.
pub fn strategy(eq: &Equilibrium, x: Option<f64>) -> Action {
    let withhold = Action {
        message: Message::Simple,
        position: eq.case.position(),
    };
    match x {
        Some(x) if x < eq.x_low => Action {
            message: Message::Elaborate,
            position: Position::Short,
        },
        Some(x) if x > eq.x_high => Action {
            message: Message::Elaborate,
            position: Position::Long,
        },
        _ => withhold,
    }
}

/// Report statistics implied by a solved equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportStats {
    /// `Pr(x < x_low)`
    pub freq_neg: f64,
    /// `Pr(x > x_high)`
    pub freq_pos: f64,
    /// Probability of an elaborate report given the investor knows `x`.
    pub elaborateness: f64,
    /// `Pr(x ∈ [x_low, n])`
    pub extremity_neg: f64,
    /// `Pr(x ∈ [n, x_high])`
    pub extremity_pos: f64,
    /// `Pr(x ∈ [x_low, x_high])`
    pub extremity: f64,
    /// Probability that the informed investor's simple report is misleading.
    pub misleading_prob: f64,
    /// `|r0·μ0 - r·μ_ND|`
    pub price_reaction: f64,
}

impl ReportStats {
    /// `short_side` selects which half of the withholding interval misleads:
    /// the part above `n` when simple reports push the price down.
    pub(crate) fn from_thresholds(
        d: &XDist,
        x_low: f64,
        x_high: f64,
        neutral: f64,
        short_side: bool,
        price_reaction: f64,
    ) -> Self {
        let freq_neg = d.cdf(x_low);
        let freq_pos = d.sf(x_high);
        let extremity_neg = d.mass(x_low, neutral);
        let extremity_pos = d.mass(neutral, x_high);
        ReportStats {
            freq_neg,
            freq_pos,
            elaborateness: freq_neg + freq_pos,
            extremity_neg,
            extremity_pos,
            extremity: d.mass(x_low, x_high),
            misleading_prob: if short_side {
                extremity_pos
            } else {
                extremity_neg
            },
            price_reaction,
        }
    }
}

pub fn report_stats(p: &ModelParams, eq: &Equilibrium) -> ReportStats {
    ReportStats::from_thresholds(
        &p.x_dist,
        eq.x_low,
        eq.x_high,
        eq.neutral_point,
        eq.case == Case::Short,
        (p.prior_price() - p.r_obs * eq.mu_nd).abs(),
    )
}
