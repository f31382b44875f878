//! Exhaustive deviation check: for each investor state, every feasible
//! (message, position) pair is priced by its exact expected date-3 price
//! under the equilibrium beliefs, and the equilibrium action must attain the
//! maximum expected profit.

use serde::{Deserialize, Serialize};

use crate::baseline::{strategy, Action, Equilibrium, Message, ModelParams, Position};
use crate::dist::XDistribution;
use crate::error::{Error, Result};
use crate::extension::{ext_strategy, ExtEquilibrium, ExtParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InvestorState {
    Informed { x: f64 },
    PartiallyInformed,
    Uninformed,
}

impl InvestorState {
    /// Messages the state can send.
    pub fn messages(&self) -> &'static [Message] {
        match self {
            InvestorState::Informed { .. } => {
                &[Message::Elaborate, Message::Simple, Message::Silent]
            }
            InvestorState::PartiallyInformed => &[Message::Simple, Message::Silent],
            InvestorState::Uninformed => &[Message::Silent],
        }
    }
}

impl std::fmt::Display for InvestorState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InvestorState::Informed { x } => write!(f, "informed(x = {x})"),
            InvestorState::PartiallyInformed => f.write_str("partially informed"),
            InvestorState::Uninformed => f.write_str("uninformed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationEntry {
    pub state: InvestorState,
    pub action: Action,
    pub expected_profit: f64,
    pub equilibrium: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub entries: Vec<DeviationEntry>,
    /// Largest gain of any action over its state's equilibrium action.
    pub max_gain: f64,
    /// State and action attaining `max_gain`.
    pub worst: Option<(InvestorState, Action)>,
}

impl DeviationTable {
    fn build(
        states: &[InvestorState],
        prior_price: f64,
        expected_price: impl Fn(&InvestorState, Message) -> f64,
        equilibrium_action: impl Fn(&InvestorState) -> Action,
    ) -> Self {
        let mut entries = Vec::with_capacity(states.len() * 7);
        let mut max_gain = f64::NEG_INFINITY;
        let mut worst = None;
        for state in states {
            let eq_action = equilibrium_action(state);
            let start = entries.len();
            let mut eq_profit = f64::NAN;
            for &message in state.messages() {
                let drift = expected_price(state, message) - prior_price;
                for position in Position::ALL {
                    let action = Action { message, position };
                    let profit = position.sign() * drift;
                    let equilibrium = action == eq_action;
                    if equilibrium {
                        eq_profit = profit;
                    }
                    entries.push(DeviationEntry {
                        state: *state,
                        action,
                        expected_profit: profit,
                        equilibrium,
                    });
                }
            }
            for e in &entries[start..] {
                let gain = e.expected_profit - eq_profit;
                if gain > max_gain {
                    max_gain = gain;
                    worst = Some((*state, e.action));
                }
            }
        }
        DeviationTable {
            entries,
            max_gain,
            worst,
        }
    }

    fn check(self, tol: f64) -> Result<Self> {
        match self.worst {
            Some((state, action)) if self.max_gain > tol => Err(Error::EquilibriumViolation {
                state: state.to_string(),
                action: action.to_string(),
                gain: self.max_gain,
            }),
            _ => Ok(self),
        }
    }

    pub fn equilibrium_entries(&self) -> impl Iterator<Item = &DeviationEntry> {
        self.entries.iter().filter(|e| e.equilibrium)
    }
}

/// `n` evenly spaced points spanning both tails of `d` and the interval
/// `[x_low, x_high]`.
pub fn x_grid(d: &impl XDistribution, x_low: f64, x_high: f64, n: usize) -> Vec<f64> {
    let lo = d.quantile(1e-4).min(x_low - 1.0);
    let hi = d.quantile(1.0 - 1e-4).max(x_high + 1.0);
    if n < 2 {
        return vec![0.5 * (lo + hi); n];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn all_states(x_grid: &[f64]) -> Vec<InvestorState> {
    x_grid
        .iter()
        .map(|&x| InvestorState::Informed { x })
        .chain([InvestorState::PartiallyInformed, InvestorState::Uninformed])
        .collect()
}

fn equilibrium_action(state: &InvestorState, informed: impl Fn(Option<f64>) -> Action) -> Action {
    match *state {
        InvestorState::Informed { x } => informed(Some(x)),
        InvestorState::PartiallyInformed => informed(None),
        InvestorState::Uninformed => Action {
            message: Message::Silent,
            position: Position::Flat,
        },
    }
}

/// Deviation table for the baseline game. Never fails.
pub fn deviation_table(p: &ModelParams, eq: &Equilibrium, x_grid: &[f64]) -> DeviationTable {
    let (q, r, p1, mu0) = (p.q, p.r_obs, p.prior_price(), p.mu0());
    // Date-3 price: revealed value `r·x` with probability q, otherwise the
    // message's price. The partially informed type averages `x` to μ0.
    let expected_price = |s: &InvestorState, m: Message| -> f64 {
        let revealed = match *s {
            InvestorState::Informed { x } => r * x,
            InvestorState::PartiallyInformed => r * mu0,
            InvestorState::Uninformed => return p1,
        };
        match m {
            Message::Elaborate => revealed,
            Message::Simple => (1.0 - q) * r * eq.mu_nd + q * revealed,
            Message::Silent => (1.0 - q) * p1 + q * revealed,
        }
    };
    DeviationTable::build(&all_states(x_grid), p1, expected_price, |s| {
        equilibrium_action(s, |x| strategy(eq, x))
    })
}

/// Checks that no action beats the equilibrium action by more than `tol`,
/// and that the neutral point lies inside the withholding interval.
pub fn deviation_check(
    p: &ModelParams,
    eq: &Equilibrium,
    x_grid: &[f64],
    tol: f64,
) -> Result<DeviationTable> {
    check_containment(eq.x_low, eq.x_high, eq.neutral_point)?;
    deviation_table(p, eq, x_grid).check(tol)
}

/// Deviation table for the firm-response extension. Never fails.
pub fn ext_deviation_table(e: &ExtParams, eq: &ExtEquilibrium, x_grid: &[f64]) -> DeviationTable {
    let (r, p, p1) = (e.r_obs, e.p_firm, e.prior_price());
    let mu = eq.mu_nd;
    // E[(X - μ_ND)⁺], the firm's expected upward correction for an unknown x.
    let upside = e.mu0() - mu + e.x_dist.lower_partial_integral(mu);
    let expected_price = |s: &InvestorState, m: Message| -> f64 {
        match (*s, m) {
            (InvestorState::Informed { x }, Message::Elaborate) => r * x,
            (InvestorState::Informed { x }, Message::Simple) => r * mu + p * r * (x - mu).max(0.0),
            (InvestorState::PartiallyInformed, Message::Simple) => r * mu + p * r * upside,
            _ => p1,
        }
    };
    DeviationTable::build(&all_states(x_grid), p1, expected_price, |s| {
        equilibrium_action(s, |x| ext_strategy(eq, x))
    })
}

pub fn ext_deviation_check(
    e: &ExtParams,
    eq: &ExtEquilibrium,
    x_grid: &[f64],
    tol: f64,
) -> Result<DeviationTable> {
    check_containment(eq.x_low_p, eq.x_high_p, eq.neutral_point)?;
    ext_deviation_table(e, eq, x_grid).check(tol)
}

fn check_containment(x_low: f64, x_high: f64, neutral: f64) -> Result<()> {
    if x_low <= neutral && neutral <= x_high {
        Ok(())
    } else {
        Err(Error::EquilibriumViolation {
            state: format!("neutral point {neutral}"),
            action: format!("outside withholding interval [{x_low}, {x_high}]"),
            gain: f64::NAN,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{solve_baseline, vol_elaborate, vol_simple, DEFAULT_TOL};
    use crate::dist::XDist;
    use crate::extension::solve_extension;

    fn normal() -> XDist {
        XDist::normal(1.0, 0.5).unwrap()
    }

    #[test]
    fn baseline_equilibria_survive() {
        for (beta, q, r) in [
            (0.5, 0.8, 0.5),
            (0.7, 0.0, 0.3),
            (0.2, 1.0, 0.9),
            (0.5, 0.5, 2.0),
            (0.9, 0.3, 4.0),
        ] {
            let p = ModelParams::new(0.5, beta, q, r, 1.0, normal()).unwrap();
            let eq = solve_baseline(&p, DEFAULT_TOL).unwrap();
            let grid = x_grid(&p.x_dist, eq.x_low, eq.x_high, 201);
            let t = deviation_check(&p, &eq, &grid, 1e-9).unwrap();
            assert_eq!(t.equilibrium_entries().count(), 203);
            assert_eq!(t.entries.len(), 201 * 9 + 6 + 3);
        }
    }

    #[test]
    fn withholding_profit_is_simple_volatility() {
        let p = ModelParams::new(0.5, 0.5, 0.8, 0.5, 1.0, normal()).unwrap();
        let eq = solve_baseline(&p, DEFAULT_TOL).unwrap();
        let x = 0.5 * (eq.x_low + eq.x_high);
        let t = deviation_table(&p, &eq, &[x]);
        let eq_entry = t.equilibrium_entries().next().unwrap();
        assert_eq!(eq_entry.action.message, Message::Simple);
        assert!((eq_entry.expected_profit - vol_simple(&p, eq.mu_nd, x)).abs() < 1e-14);
        let best_elaborate = t
            .entries
            .iter()
            .filter(|e| e.action.message == Message::Elaborate)
            .map(|e| e.expected_profit)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best_elaborate - vol_elaborate(&p, x)).abs() < 1e-14);
        let best_silent = t
            .entries
            .iter()
            .filter(|e| {
                e.action.message == Message::Silent
                    && matches!(e.state, InvestorState::Informed { .. })
            })
            .map(|e| e.expected_profit)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best_silent < eq_entry.expected_profit);
    }

    #[test]
    fn uninformed_profit_is_zero() {
        let p = ModelParams::new(0.5, 0.5, 0.8, 0.5, 1.0, normal()).unwrap();
        let eq = solve_baseline(&p, DEFAULT_TOL).unwrap();
        let t = deviation_table(&p, &eq, &[]);
        for e in t
            .entries
            .iter()
            .filter(|e| e.state == InvestorState::Uninformed)
        {
            assert_eq!(e.expected_profit, 0.0);
        }
    }

    #[test]
    fn shifted_threshold_is_caught() {
        let p = ModelParams::new(0.5, 0.5, 0.8, 0.5, 1.0, normal()).unwrap();
        let mut eq = solve_baseline(&p, DEFAULT_TOL).unwrap();
        eq.x_high += 0.05;
        let grid = x_grid(&p.x_dist, eq.x_low, eq.x_high, 201);
        assert!(matches!(
            deviation_check(&p, &eq, &grid, 1e-9),
            Err(Error::EquilibriumViolation { .. })
        ));
    }

    #[test]
    fn extension_informed_types_survive() {
        for r in [0.3, 0.5, 3.0] {
            let e = ExtParams::new(0.5, 0.7, r, 1.0, normal(), 0.5).unwrap();
            let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
            let grid = x_grid(&e.x_dist, eq.x_low_p, eq.x_high_p, 201);
            ext_deviation_check(&e, &eq, &grid, 1e-9).unwrap();
        }
    }

    #[test]
    fn extension_partial_type_short_loses_between_r0_and_cutoff() {
        // Below the cutoff but above r0, firm responses only push the price up,
        // so the prescribed short position of the partially informed investor
        // has negative expected profit.
        let e = ExtParams::new(0.5, 0.7, 1.1, 1.0, normal(), 0.5).unwrap();
        let eq = solve_extension(&e, DEFAULT_TOL).unwrap();
        let t = ext_deviation_table(&e, &eq, &[]);
        let (state, action) = t.worst.unwrap();
        assert_eq!(state, InvestorState::PartiallyInformed);
        assert_eq!(
            action,
            Action {
                message: Message::Simple,
                position: Position::Long
            }
        );
        assert!(t.max_gain > 0.1);
    }
}
