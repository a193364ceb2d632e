//! Tabular Q-learning for a single player.
//!
//! The state is the player's current strategy (C or D); the actions are fixed
//! per simulation by an [`ActionSet`]. Each player owns a 2 x n [`QTable`].

use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::game::Strategy;
use crate::ParamError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Cooperate,
    Defect,
    Move,
    CopyBest,
    Persist,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Cooperate,
        ActionKind::Defect,
        ActionKind::Move,
        ActionKind::CopyBest,
        ActionKind::Persist,
    ];

    /// Position in [`ActionKind::ALL`].
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            ActionKind::Cooperate => 'C',
            ActionKind::Defect => 'D',
            ActionKind::Move => 'M',
            ActionKind::CopyBest => 'B',
            ActionKind::Persist => 'P',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        ActionKind::ALL.into_iter().find(|a| a.symbol() == c)
    }

    /// The strategy a C or D action plays, `None` for the other actions.
    pub fn as_strategy(self) -> Option<Strategy> {
        match self {
            ActionKind::Cooperate => Some(Strategy::Cooperate),
            ActionKind::Defect => Some(Strategy::Defect),
            _ => None,
        }
    }

    pub fn from_strategy(s: Strategy) -> Self {
        match s {
            Strategy::Cooperate => ActionKind::Cooperate,
            Strategy::Defect => ActionKind::Defect,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

pub const MAX_ACTIONS: usize = 3;

/// The actions available to every player of a simulation. The listed order is
/// the Q-table column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionSet {
    /// {C, D}
    Static,
    /// {C, D, M}
    Mobile,
    /// {B, M}
    Best,
    /// {B, P, M}
    PersistBest,
}

impl ActionSet {
    pub const ALL: [ActionSet; 4] = [
        ActionSet::Static,
        ActionSet::Mobile,
        ActionSet::Best,
        ActionSet::PersistBest,
    ];

    pub fn actions(self) -> &'static [ActionKind] {
        use ActionKind::*;
        match self {
            ActionSet::Static => &[Cooperate, Defect],
            ActionSet::Mobile => &[Cooperate, Defect, Move],
            ActionSet::Best => &[CopyBest, Move],
            ActionSet::PersistBest => &[CopyBest, Persist, Move],
        }
    }

    pub fn len(self) -> usize {
        self.actions().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    #[inline]
    pub fn column(self, action: ActionKind) -> Option<usize> {
        self.actions().iter().position(|&a| a == action)
    }

    pub fn contains(self, action: ActionKind) -> bool {
        self.column(action).is_some()
    }

    /// Whether players choose C or D directly (as opposed to acquiring a
    /// strategy through copy-the-best).
    pub fn has_strategy_actions(self) -> bool {
        matches!(self, ActionSet::Static | ActionSet::Mobile)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionSet::Static => "static",
            ActionSet::Mobile => "mobile",
            ActionSet::Best => "best",
            ActionSet::PersistBest => "persist-best",
        }
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown action set {0:?} (expected static, mobile, best or persist-best)")]
pub struct UnknownActionSet(pub alloc::string::String);

impl FromStr for ActionSet {
    type Err = UnknownActionSet;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" | "s" => Ok(ActionSet::Static),
            "mobile" | "m" => Ok(ActionSet::Mobile),
            "best" | "b" => Ok(ActionSet::Best),
            "persist-best" | "persist_best" | "persistbest" | "pb" | "bp" => {
                Ok(ActionSet::PersistBest)
            }
            _ => Err(UnknownActionSet(s.into())),
        }
    }
}

/// Action values of one player: rows by strategy (C first), columns by the
/// action set order. Starts at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QTable {
    set: ActionSet,
    values: [[f64; MAX_ACTIONS]; 2],
}

impl QTable {
    pub fn new(set: ActionSet) -> Self {
        QTable {
            set,
            values: [[0.0; MAX_ACTIONS]; 2],
        }
    }

    pub fn action_set(&self) -> ActionSet {
        self.set
    }

    #[inline]
    pub fn row(&self, state: Strategy) -> &[f64] {
        &self.values[state.index()][..self.set.len()]
    }

    /// Panics if `action` is not part of the table's action set.
    #[inline]
    pub fn get(&self, state: Strategy, action: ActionKind) -> f64 {
        self.values[state.index()][self.column(action)]
    }

    /// Panics if `action` is not part of the table's action set.
    pub fn set(&mut self, state: Strategy, action: ActionKind, value: f64) {
        let col = self.column(action);
        self.values[state.index()][col] = value;
    }

    #[inline]
    pub fn max_in_row(&self, state: Strategy) -> f64 {
        self.row(state)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// All entries, C row then D row.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        Strategy::BOTH
            .into_iter()
            .flat_map(move |s| self.row(s).iter().copied())
    }

    fn column(&self, action: ActionKind) -> usize {
        self.set
            .column(action)
            .unwrap_or_else(|| panic!("action {action} is not in the {} set", self.set))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningParams {
    alpha: f64,
    gamma: f64,
    epsilon: f64,
}

impl LearningParams {
    pub fn new(alpha: f64, gamma: f64, epsilon: f64) -> Result<Self, ParamError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ParamError::LearningRate(alpha));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(ParamError::Discount(gamma));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ParamError::Exploration(epsilon));
        }
        Ok(LearningParams {
            alpha,
            gamma,
            epsilon,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub action: ActionKind,
    /// The action came from the exploration branch.
    pub explored: bool,
}

/// Epsilon-greedy choice from the `state` row of `q`.
///
/// One uniform draw decides exploration; a second draw picks the random
/// action, or breaks a tie between maximal entries. A unique maximum consumes
/// no second draw.
pub fn select_action<R: Rng + ?Sized>(
    q: &QTable,
    state: Strategy,
    params: &LearningParams,
    rng: &mut R,
) -> Selection {
    let actions = q.set.actions();
    if rng.random::<f64>() < params.epsilon {
        let action = actions[rng.random_range(0..actions.len())];
        return Selection {
            action,
            explored: true,
        };
    }
    let row = q.row(state);
    let best = q.max_in_row(state);
    let ties = row.iter().filter(|&&v| v == best).count();
    let pick = if ties > 1 {
        rng.random_range(0..ties)
    } else {
        0
    };
    let col = row
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("row has a maximum");
    Selection {
        action: actions[col],
        explored: false,
    }
}

/// `Q[s,a] <- (1 - alpha) Q[s,a] + alpha (reward + gamma max_a' Q[s',a'])`.
///
/// Panics on a non-finite reward or an action outside the table's set.
#[inline]
pub fn update_q(
    q: &mut QTable,
    state: Strategy,
    action: ActionKind,
    reward: f64,
    next_state: Strategy,
    params: &LearningParams,
) {
    assert!(reward.is_finite(), "non-finite reward {reward}");
    let target = reward + params.gamma * q.max_in_row(next_state);
    let old = q.get(state, action);
    q.set(
        state,
        action,
        (1.0 - params.alpha) * old + params.alpha * target,
    );
}
