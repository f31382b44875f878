//! Monte Carlo simulation of the full game.
//!
//! Each path draws, in a fixed order, whether the investor learns `r` and
//! `x`, the signals themselves and the outside revelation (or the firm's
//! information in the extension), then plays the equilibrium strategies and
//! records the investor's profit `ρ·(P2 - r0·μ0)`.
//!
//! Path `i` uses its own ChaCha stream `i` under the master seed and paths are
//! reduced in fixed-size batches in index order, so results do not depend on
//! the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{
    report_stats, solve_baseline, strategy, Action, Message, ModelParams, Position,
};
use crate::dist::{open_unit, RDistribution, XDist, XDistribution};
use crate::error::{Error, Result};
use crate::extension::{
    ext_report_stats, ext_strategy, firm_strategy, solve_extension, ExtEquilibrium, ExtParams,
    FirmAction,
};

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "lowercase")]
pub enum SimModel {
    Baseline(ModelParams),
    Extension(ExtParams),
}

impl SimModel {
    fn alpha_beta(&self) -> (f64, f64) {
        match self {
            SimModel::Baseline(p) => (p.alpha, p.beta),
            SimModel::Extension(e) => (e.alpha, e.beta),
        }
    }

    fn x_dist(&self) -> &XDist {
        match self {
            SimModel::Baseline(p) => &p.x_dist,
            SimModel::Extension(e) => &e.x_dist,
        }
    }

    fn prior_price(&self) -> f64 {
        match self {
            SimModel::Baseline(p) => p.prior_price(),
            SimModel::Extension(e) => e.prior_price(),
        }
    }

    fn with_r(&self, r: f64) -> SimModel {
        match *self {
            SimModel::Baseline(p) => SimModel::Baseline(ModelParams { r_obs: r, ..p }),
            SimModel::Extension(e) => SimModel::Extension(ExtParams { r_obs: r, ..e }),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SimModel::Baseline(p) => p.validate(),
            SimModel::Extension(e) => e.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub model: SimModel,
    /// Distribution of `r` across paths; a point mass at the model's `r`
    /// simulates conditional on that realization.
    pub r_dist: RDistribution,
    pub tol: f64,
}

impl SimConfig {
    pub fn new(model: SimModel, n_paths: u64, seed: u64) -> Result<Self> {
        let r = match model {
            SimModel::Baseline(p) => p.r_obs,
            SimModel::Extension(e) => e.r_obs,
        };
        let cfg = SimConfig {
            n_paths,
            seed,
            model,
            r_dist: RDistribution::point(r)?,
            tol: crate::DEFAULT_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter {
                name: "paths",
                reason: "must be at least 1".into(),
            });
        }
        self.model.validate()?;
        self.r_dist.validate()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.se
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    // NaN mean for an empty sample; zero SE below two observations.
    fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate {
                mean: f64::NAN,
                se: f64::NAN,
                n: 0,
            };
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let se = if self.n < 2 {
            0.0
        } else {
            ((self.sum_sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
        };
        Estimate {
            mean,
            se,
            n: self.n,
        }
    }
}

const MESSAGES: [Message; 3] = [Message::Elaborate, Message::Simple, Message::Silent];

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    mu_nd: Moments,
    profit: [Moments; 3],
    uninformed_max_abs: f64,
    elaborate: Moments,
    misleading: Moments,
    response: Moments,
    price: [Moments; 3],
    value: [Moments; 3],
}

impl Acc {
    fn merge(&mut self, o: &Acc) {
        self.mu_nd.merge(&o.mu_nd);
        for i in 0..3 {
            self.profit[i].merge(&o.profit[i]);
            self.price[i].merge(&o.price[i]);
            self.value[i].merge(&o.value[i]);
        }
        self.uninformed_max_abs = self.uninformed_max_abs.max(o.uninformed_max_abs);
        self.elaborate.merge(&o.elaborate);
        self.misleading.merge(&o.misleading);
        self.response.merge(&o.response);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitByType {
    pub uninformed: Estimate,
    pub partially_informed: Estimate,
    pub informed: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageStats {
    pub message: Message,
    /// Mean date-3 price.
    pub price: Estimate,
    /// Mean firm value `r·x`.
    pub value: Estimate,
}

/// Closed-form counterparts of the simulated quantities, available when `r`
/// is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticValues {
    pub mu_nd: f64,
    /// Among `r`-informed paths.
    pub elaborate_freq: f64,
    /// Among `r`-informed paths.
    pub misleading_freq: f64,
    /// Among simple-report paths; extension only.
    pub response_rate: Option<f64>,
    pub simple_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n_paths: u64,
    pub seed: u64,
    /// Mean of `x` over simple reports with no outside revelation or response.
    pub empirical_mu_nd: Estimate,
    pub mean_profit_by_type: ProfitByType,
    /// Largest `|profit|` of the uninformed type on any path.
    pub uninformed_max_abs_profit: f64,
    /// Elaborate reports among `r`-informed paths.
    pub elaborate_freq: Estimate,
    /// Simple reports whose price moves against the sign of `r·x - r0·μ0`,
    /// among `r`-informed paths.
    pub misleading_freq: Estimate,
    /// Firm responses among simple reports; extension only.
    pub response_rate: Option<Estimate>,
    pub price_by_message: Vec<MessageStats>,
    pub analytic: Option<AnalyticValues>,
}

// Per-r equilibrium data the path loop needs.
#[derive(Debug, Clone, Copy)]
enum PathEq {
    Baseline { eq: crate::Equilibrium, q: f64 },
    Extension { eq: ExtEquilibrium, p: f64 },
}

impl PathEq {
    fn solve(model: &SimModel, tol: f64) -> Result<Self> {
        Ok(match model {
            SimModel::Baseline(p) => PathEq::Baseline {
                eq: solve_baseline(p, tol)?,
                q: p.q,
            },
            SimModel::Extension(e) => PathEq::Extension {
                eq: solve_extension(e, tol)?,
                p: e.p_firm,
            },
        })
    }

    fn mu_nd(&self) -> f64 {
        match self {
            PathEq::Baseline { eq, .. } => eq.mu_nd,
            PathEq::Extension { eq, .. } => eq.mu_nd,
        }
    }

    fn action(&self, x: Option<f64>) -> Action {
        match self {
            PathEq::Baseline { eq, .. } => strategy(eq, x),
            PathEq::Extension { eq, .. } => ext_strategy(eq, x),
        }
    }
}

fn message_index(m: Message) -> usize {
    match m {
        Message::Elaborate => 0,
        Message::Simple => 1,
        Message::Silent => 2,
    }
}

fn run_path(cfg: &SimConfig, fixed: Option<&PathEq>, index: u64, acc: &mut Acc) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let (alpha, beta) = cfg.model.alpha_beta();
    let u_alpha = open_unit(&mut rng);
    let u_beta = open_unit(&mut rng);
    let r = cfg.r_dist.sample(&mut rng);
    let x = cfg.model.x_dist().sample(&mut rng);
    let u_reveal = open_unit(&mut rng);

    let knows_r = u_alpha < alpha;
    let knows_x = knows_r && u_beta < beta;
    let p1 = cfg.model.prior_price();

    let solved;
    let peq = match fixed {
        Some(p) => p,
        None => {
            solved = PathEq::solve(&cfg.model.with_r(r), cfg.tol)?;
            &solved
        }
    };

    let action = match (knows_r, knows_x) {
        (false, _) => Action {
            message: Message::Silent,
            position: Position::Flat,
        },
        (true, false) => peq.action(None),
        (true, true) => peq.action(Some(x)),
    };
    let value = r * x;
    let message_price = match action.message {
        Message::Elaborate => value,
        Message::Simple => r * peq.mu_nd(),
        Message::Silent => p1,
    };
    // Whether the date-3 price ends at the true value.
    let revealed = match peq {
        PathEq::Baseline { q, .. } => u_reveal < *q,
        PathEq::Extension { eq, p } => {
            let responds = action.message == Message::Simple
                && u_reveal < *p
                && firm_strategy(eq, x) == FirmAction::Respond;
            if action.message == Message::Simple {
                acc.response.push(if responds { 1.0 } else { 0.0 });
            }
            responds
        }
    };
    let p2 = if revealed { value } else { message_price };
    let profit = action.position.sign() * (p2 - p1);

    let type_index = match (knows_r, knows_x) {
        (false, _) => 0,
        (true, false) => 1,
        (true, true) => 2,
    };
    acc.profit[type_index].push(profit);
    if !knows_r {
        acc.uninformed_max_abs = acc.uninformed_max_abs.max(profit.abs());
    }
    if action.message == Message::Simple && !revealed {
        acc.mu_nd.push(x);
    }
    if knows_r {
        acc.elaborate.push(if action.message == Message::Elaborate {
            1.0
        } else {
            0.0
        });
        let misleading = knows_x
            && action.message == Message::Simple
            && (message_price - p1) * (value - p1) < 0.0;
        acc.misleading.push(if misleading { 1.0 } else { 0.0 });
    }
    let m = message_index(action.message);
    acc.price[m].push(p2);
    acc.value[m].push(value);
    Ok(())
}

/// Runs the simulation.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let fixed = match cfg.r_dist {
        RDistribution::Point { r } => Some(PathEq::solve(&cfg.model.with_r(r), cfg.tol)?),
        RDistribution::LogNormal { .. } => None,
    };
    let n_batches = cfg.n_paths.div_ceil(BATCH);
    let batches: Vec<Result<Acc>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Acc::default();
            let end = ((b + 1) * BATCH).min(cfg.n_paths);
            for i in b * BATCH..end {
                run_path(cfg, fixed.as_ref(), i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = Acc::default();
    for acc in batches {
        total.merge(&acc?);
    }

    let analytic = match (fixed, cfg.model) {
        (Some(PathEq::Baseline { eq, .. }), SimModel::Baseline(p)) => {
            let stats = report_stats(&p, &eq);
            Some(AnalyticValues {
                mu_nd: eq.mu_nd,
                elaborate_freq: p.beta * stats.elaborateness,
                misleading_freq: p.beta * stats.misleading_prob,
                response_rate: None,
                simple_price: p.r_obs * eq.mu_nd,
            })
        }
        (Some(PathEq::Extension { eq, .. }), SimModel::Extension(e)) => {
            let stats = ext_report_stats(&e, &eq);
            Some(AnalyticValues {
                mu_nd: eq.mu_nd,
                elaborate_freq: e.beta * stats.elaborateness,
                misleading_freq: e.beta * stats.misleading_prob,
                response_rate: Some(analytic_response_rate(&e, &eq)),
                simple_price: e.r_obs * eq.mu_nd,
            })
        }
        _ => None,
    };

    Ok(SimReport {
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        empirical_mu_nd: total.mu_nd.estimate(),
        mean_profit_by_type: ProfitByType {
            uninformed: total.profit[0].estimate(),
            partially_informed: total.profit[1].estimate(),
            informed: total.profit[2].estimate(),
        },
        uninformed_max_abs_profit: total.uninformed_max_abs,
        elaborate_freq: total.elaborate.estimate(),
        misleading_freq: total.misleading.estimate(),
        response_rate: matches!(cfg.model, SimModel::Extension(_))
            .then(|| total.response.estimate()),
        price_by_message: MESSAGES
            .iter()
            .map(|&m| MessageStats {
                message: m,
                price: total.price[message_index(m)].estimate(),
                value: total.value[message_index(m)].estimate(),
            })
            .collect(),
        analytic,
    })
}

/// Probability that the firm responds to a simple report:
/// `p · Pr(x > μ_ND | simple report)`.
pub fn analytic_response_rate(e: &ExtParams, eq: &ExtEquilibrium) -> f64 {
    let d = &e.x_dist;
    let b = e.beta;
    let g = |x: f64| d.cdf(x);
    let simple = (1.0 - b) + b * (g(eq.x_high_p) - g(eq.x_low_p));
    let above = (1.0 - b) * (1.0 - g(eq.mu_nd))
        + b * (g(eq.x_high_p) - g(eq.mu_nd.max(eq.x_low_p))).max(0.0);
    e.p_firm * above / simple
}
