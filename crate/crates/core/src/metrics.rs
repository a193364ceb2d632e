//! Observables measured on a [`World`].

use core::ops::{Index, IndexMut};

use crate::dynamics::World;
use crate::game::Strategy;
use crate::learning::ActionKind;

/// One value per [`ActionKind`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ActionTable<T>(pub [T; 5]);

impl<T> Index<ActionKind> for ActionTable<T> {
    type Output = T;

    fn index(&self, a: ActionKind) -> &T {
        &self.0[a.index()]
    }
}

impl<T> IndexMut<ActionKind> for ActionTable<T> {
    fn index_mut(&mut self, a: ActionKind) -> &mut T {
        &mut self.0[a.index()]
    }
}

impl<T: Copy> ActionTable<T> {
    pub fn iter(&self) -> impl Iterator<Item = (ActionKind, T)> + '_ {
        ActionKind::ALL.into_iter().map(move |a| (a, self[a]))
    }
}

/// Observables of a world after `mcs` Monte Carlo steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRecord {
    pub mcs: u64,
    pub coop_fraction: f64,
    /// Share of players whose last action is each kind. Zero for actions
    /// outside the world's action set.
    pub action_fractions: ActionTable<f64>,
    /// Pearson correlation between "is a cooperator" and "last action is
    /// this kind". `None` outside the action set or when an indicator is
    /// constant.
    pub correlations: ActionTable<Option<f64>>,
}

impl MetricsRecord {
    pub fn observe<R>(world: &World<R>) -> Self {
        let n = world.agents().len();
        assert!(n > 0, "metrics need at least one player");
        let mut coop = 0usize;
        let mut chose = [0usize; 5];
        let mut chose_and_coop = [0usize; 5];
        for a in world.agents() {
            let k = a.last_action.index();
            chose[k] += 1;
            if a.strategy == Strategy::Cooperate {
                coop += 1;
                chose_and_coop[k] += 1;
            }
        }
        let set = world.rules().action_set();
        let mut action_fractions = ActionTable::<f64>::default();
        let mut correlations = ActionTable::<Option<f64>>::default();
        for a in ActionKind::ALL {
            let k = a.index();
            action_fractions[a] = chose[k] as f64 / n as f64;
            if set.contains(a) {
                correlations[a] = indicator_correlation(n, coop, chose[k], chose_and_coop[k]);
            }
        }
        MetricsRecord {
            mcs: world.clock(),
            coop_fraction: coop as f64 / n as f64,
            action_fractions,
            correlations,
        }
    }
}

/// Share of players currently cooperating.
///
/// Panics on a world without players.
pub fn cooperator_fraction<R>(world: &World<R>) -> f64 {
    let n = world.agents().len();
    assert!(n > 0, "cooperator fraction of an empty world");
    let c = world
        .agents()
        .iter()
        .filter(|a| a.strategy == Strategy::Cooperate)
        .count();
    c as f64 / n as f64
}

/// Pearson correlation over players between "is a cooperator" and "last
/// action was `action`". Holes do not take part. `None` when either
/// indicator is constant or there are fewer than two players.
pub fn state_action_correlation<R>(world: &World<R>, action: ActionKind) -> Option<f64> {
    let n = world.agents().len();
    let (mut x, mut y, mut xy) = (0, 0, 0);
    for a in world.agents() {
        let is_c = a.strategy == Strategy::Cooperate;
        let chose = a.last_action == action;
        x += is_c as usize;
        y += chose as usize;
        xy += (is_c && chose) as usize;
    }
    indicator_correlation(n, x, y, xy)
}

/// Pearson correlation of two 0/1 vectors of length `n` from their counts of
/// ones (`x`, `y`) and joint ones (`xy`).
fn indicator_correlation(n: usize, x: usize, y: usize, xy: usize) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let (n, x, y, xy) = (n as f64, x as f64, y as f64, xy as f64);
    let var_x = x * (n - x);
    let var_y = y * (n - y);
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    let r = (n * xy - x * y) / libm::sqrt(var_x * var_y);
    Some(r.clamp(-1.0, 1.0))
}

/// Number of trailing entries averaged by [`tail_average`]:
/// `ceil(fraction * len)`, at least one.
pub fn tail_len(len: usize, fraction: f64) -> usize {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "tail fraction must lie in (0, 1], got {fraction}"
    );
    let exact = fraction * len as f64;
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    let k = libm::ceil(exact - exact * 1e-12) as usize;
    k.clamp(1, len.max(1))
}

/// Mean of the last `ceil(fraction * len)` entries of `series`.
///
/// Panics on an empty series or a fraction outside (0, 1].
pub fn tail_average(series: &[f64], fraction: f64) -> f64 {
    assert!(!series.is_empty(), "tail average of an empty series");
    let k = tail_len(series.len(), fraction);
    let tail = &series[series.len() - k..];
    tail.iter().sum::<f64>() / k as f64
}
