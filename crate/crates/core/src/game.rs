//! Weak prisoner's dilemma: `R = 1`, `T = b`, `S = P = 0`.

use crate::lattice::{AgentId, Lattice, SiteIndex};
use crate::ParamError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Cooperate,
    Defect,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::Cooperate, Strategy::Defect];

    /// Row of this strategy in payoff and Q matrices (C = 0, D = 1).
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Strategy::Cooperate => 0,
            Strategy::Defect => 1,
        }
    }

    pub fn is_cooperator(self) -> bool {
        self == Strategy::Cooperate
    }
}

/// Payoff parameters. Only the temptation `b` is free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffParams {
    temptation: f64,
}

impl PayoffParams {
    pub fn new(temptation: f64) -> Result<Self, ParamError> {
        if temptation > 1.0 && temptation < 2.0 {
            Ok(PayoffParams { temptation })
        } else {
            Err(ParamError::Temptation(temptation))
        }
    }

    pub fn temptation(&self) -> f64 {
        self.temptation
    }

    /// The 2x2 payoff matrix, rows indexed by the focal strategy.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [self.temptation, 0.0]]
    }
}

/// Payoff of `mine` against `theirs`.
#[inline]
pub fn pair_payoff(mine: Strategy, theirs: Strategy, params: &PayoffParams) -> f64 {
    match (mine, theirs) {
        (Strategy::Cooperate, Strategy::Cooperate) => 1.0,
        (Strategy::Defect, Strategy::Cooperate) => params.temptation,
        (_, Strategy::Defect) => 0.0,
    }
}

/// Sum of pair payoffs between the player at `site` and its occupied von
/// Neumann neighbours. Empty neighbours are skipped.
///
/// Panics if `site` is empty.
pub fn site_payoff<F>(
    lattice: &Lattice,
    site: SiteIndex,
    params: &PayoffParams,
    strategy_of: F,
) -> f64
where
    F: Fn(AgentId) -> Strategy,
{
    let focal = lattice
        .occupant(site)
        .unwrap_or_else(|| panic!("payoff requested for empty site {site:?}"));
    let mine = strategy_of(focal);
    lattice
        .neighbors(site)
        .into_iter()
        .filter_map(|n| lattice.occupant(n))
        .map(|other| pair_payoff(mine, strategy_of(other), params))
        .sum()
}
