//! Action semantics and the asynchronous Monte Carlo scheduler.
//!
//! One *sample* picks a player uniformly at random (with replacement), lets
//! it choose an action epsilon-greedily, carries the action out and feeds the
//! resulting payoff back into its Q-table. A Monte Carlo step is `L^2`
//! samples.
//!
//! Random draws within a sample happen in a fixed order: player pick,
//! exploration draw, action or tie draw, mobility draw, vacancy pick, and
//! finally the tie draw among equally good neighbours for copy-the-best.

use alloc::vec::Vec;

use rand::Rng;

use crate::game::{site_payoff, PayoffParams, Strategy};
use crate::lattice::{AgentId, Lattice, SiteIndex};
use crate::learning::{
    select_action, update_q, ActionKind, ActionSet, LearningParams, QTable, Selection,
};
use crate::ParamError;

/// How players get their first strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum InitMode {
    /// Independent fair coin per player.
    #[default]
    Random,
    /// Horizontal bands of height `max(L / 10, 1)`; even bands cooperate,
    /// odd bands defect.
    Striped,
}

/// What happens when a move attempt fails (mobility draw lost, or no vacant
/// neighbour).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FailedMove {
    /// Nothing: no game, no payoff change, no Q-update.
    #[default]
    Skip,
    /// No game, but the Q-table is updated with a zero reward and the
    /// unchanged strategy as next state.
    LearnZero,
}

/// Fixed parameters of one simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rules {
    action_set: ActionSet,
    payoff: PayoffParams,
    learning: LearningParams,
    mobility: f64,
    failed_move: FailedMove,
}

impl Rules {
    pub fn new(
        action_set: ActionSet,
        payoff: PayoffParams,
        learning: LearningParams,
        mobility: f64,
    ) -> Result<Self, ParamError> {
        if !(0.0..=1.0).contains(&mobility) {
            return Err(ParamError::Mobility(mobility));
        }
        Ok(Rules {
            action_set,
            payoff,
            learning,
            mobility,
            failed_move: FailedMove::Skip,
        })
    }

    pub fn with_failed_move(mut self, failed_move: FailedMove) -> Self {
        self.failed_move = failed_move;
        self
    }

    pub fn action_set(&self) -> ActionSet {
        self.action_set
    }

    pub fn payoff(&self) -> &PayoffParams {
        &self.payoff
    }

    pub fn learning(&self) -> &LearningParams {
        &self.learning
    }

    /// Probability `p_d` that a move attempt succeeds.
    pub fn mobility(&self) -> f64 {
        self.mobility
    }

    pub fn failed_move(&self) -> FailedMove {
        self.failed_move
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub site: SiteIndex,
    /// Strategy played in the most recent game; also the Q-table row used
    /// for the next decision.
    pub strategy: Strategy,
    /// Payoff of the most recent game, 0 before the first one.
    pub last_payoff: f64,
    /// Most recent action that was carried out. Failed moves leave it alone.
    pub last_action: ActionKind,
    pub qtable: QTable,
}

/// Reward and next state produced by an action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub reward: f64,
    pub next_state: Strategy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MoveOutcome {
    Moved(Outcome),
    Skipped,
}

/// What happened during one [`World::sample_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub agent: AgentId,
    pub selection: Selection,
    /// `None` when the sample was skipped (failed move under
    /// [`FailedMove::Skip`]).
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("agent {0:?} is not found at its recorded site")]
    Misplaced(AgentId),
    #[error("site {0:?} holds an unknown agent")]
    Orphan(SiteIndex),
    #[error("lattice counts {lattice} players but the world has {agents}")]
    Count { lattice: usize, agents: usize },
}

#[derive(Clone, Debug)]
pub struct World<R> {
    lattice: Lattice,
    agents: Vec<Agent>,
    rules: Rules,
    rng: R,
    clock: u64,
}

impl<R> World<R> {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn side(&self) -> usize {
        self.lattice.side()
    }

    pub fn player_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.index()]
    }

    /// Mutable access for setting up scenarios. Moving an agent this way is
    /// not supported; `site` must stay in sync with the lattice.
    pub fn agent_mut(&mut self, id: AgentId) -> &mut Agent {
        &mut self.agents[id.index()]
    }

    pub fn agent_at(&self, site: SiteIndex) -> Option<&Agent> {
        self.lattice.occupant(site).map(|id| self.agent(id))
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    /// Completed Monte Carlo steps.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Payoff the player at `site` would earn from a game right now.
    #[inline]
    pub fn payoff_at(&self, site: SiteIndex) -> f64 {
        let agents = &self.agents;
        site_payoff(&self.lattice, site, &self.rules.payoff, |a| {
            agents[a.index()].strategy
        })
    }

    /// Checks that players and occupied sites are in one-to-one
    /// correspondence.
    pub fn audit(&self) -> Result<(), AuditError> {
        for a in &self.agents {
            if self.lattice.occupant(a.site) != Some(a.id) {
                return Err(AuditError::Misplaced(a.id));
            }
        }
        for (site, id) in self.lattice.occupied() {
            if id.index() >= self.agents.len() {
                return Err(AuditError::Orphan(site));
            }
        }
        if self.lattice.player_count() != self.agents.len() {
            return Err(AuditError::Count {
                lattice: self.lattice.player_count(),
                agents: self.agents.len(),
            });
        }
        Ok(())
    }
}

impl<R: Rng> World<R> {
    /// Dilutes a fresh `side x side` lattice to density `rho` and seeds every
    /// player with a zero Q-table, zero payoff and an initial strategy drawn
    /// according to `init`.
    pub fn populate(
        side: usize,
        rho: f64,
        init: InitMode,
        rules: Rules,
        mut rng: R,
    ) -> Result<Self, ParamError> {
        let lattice = Lattice::build(side, rho, &mut rng)?;
        if lattice.player_count() == 0 {
            return Err(ParamError::NoPlayers);
        }
        let band = (side / 10).max(1);
        let mut agents = Vec::with_capacity(lattice.player_count());
        for (site, id) in lattice.occupied() {
            let strategy = match init {
                InitMode::Random => {
                    if rng.random_bool(0.5) {
                        Strategy::Cooperate
                    } else {
                        Strategy::Defect
                    }
                }
                InitMode::Striped => {
                    if (site.row / band).is_multiple_of(2) {
                        Strategy::Cooperate
                    } else {
                        Strategy::Defect
                    }
                }
            };
            debug_assert_eq!(id.index(), agents.len());
            agents.push(fresh_agent(id, site, strategy, &rules));
        }
        Ok(World {
            lattice,
            agents,
            rules,
            rng,
            clock: 0,
        })
    }

    /// A world with players at the given sites. Handles follow the order of
    /// `placements`.
    pub fn from_placements(
        side: usize,
        placements: &[(SiteIndex, Strategy)],
        rules: Rules,
        rng: R,
    ) -> Result<Self, ParamError> {
        if placements.is_empty() {
            return Err(ParamError::NoPlayers);
        }
        let mut lattice = Lattice::empty(side)?;
        let mut agents = Vec::with_capacity(placements.len());
        for (i, &(site, strategy)) in placements.iter().enumerate() {
            if site.row >= side || site.col >= side {
                return Err(ParamError::SiteOutOfRange {
                    row: site.row,
                    col: site.col,
                    side,
                });
            }
            if lattice.is_occupied(site) {
                return Err(ParamError::DuplicateSite {
                    row: site.row,
                    col: site.col,
                });
            }
            let id = AgentId(i as u32);
            lattice.place(site, id);
            agents.push(fresh_agent(id, site, strategy, &rules));
        }
        Ok(World {
            lattice,
            agents,
            rules,
            rng,
            clock: 0,
        })
    }

    fn play(&mut self, id: AgentId) -> f64 {
        let payoff = self.payoff_at(self.agents[id.index()].site);
        self.agents[id.index()].last_payoff = payoff;
        payoff
    }

    /// Cooperate or defect: adopt `chosen` and play a game in place.
    pub fn act_strategy(&mut self, id: AgentId, chosen: Strategy) -> Outcome {
        self.agents[id.index()].strategy = chosen;
        let reward = self.play(id);
        Outcome {
            reward,
            next_state: chosen,
        }
    }

    /// Try to hop to a uniformly chosen vacant neighbour. Succeeds with
    /// probability `p_d` when a vacancy exists; the player then plays a game
    /// at its new site. A failed attempt changes nothing.
    pub fn act_move(&mut self, id: AgentId) -> MoveOutcome {
        let succeeds = self.rng.random::<f64>() < self.rules.mobility;
        if !succeeds {
            return MoveOutcome::Skipped;
        }
        let from = self.agents[id.index()].site;
        let vacant = self.lattice.vacant_neighbors(from);
        if vacant.is_empty() {
            return MoveOutcome::Skipped;
        }
        let to = vacant[self.rng.random_range(0..vacant.len())];
        self.lattice.relocate(from, to);
        self.agents[id.index()].site = to;
        let reward = self.play(id);
        MoveOutcome::Moved(Outcome {
            reward,
            next_state: self.agents[id.index()].strategy,
        })
    }

    /// Adopt the strategy of the highest-paid player among self and occupied
    /// neighbours (stored payoffs), then play a game in place. The player
    /// keeps its own strategy unless a neighbour earned strictly more; ties
    /// between neighbours are broken uniformly.
    pub fn act_copy_best(&mut self, id: AgentId) -> Outcome {
        let me = &self.agents[id.index()];
        let own = me.last_payoff;
        let mut adopted = me.strategy;
        let mut best = f64::NEG_INFINITY;
        let mut tied: [Strategy; 4] = [Strategy::Cooperate; 4];
        let mut n_tied = 0;
        for n in self.lattice.neighbors(me.site) {
            let Some(other) = self.lattice.occupant(n) else {
                continue;
            };
            let other = &self.agents[other.index()];
            if other.last_payoff > best {
                best = other.last_payoff;
                tied[0] = other.strategy;
                n_tied = 1;
            } else if other.last_payoff == best {
                tied[n_tied] = other.strategy;
                n_tied += 1;
            }
        }
        if n_tied > 0 && best > own {
            let pick = if n_tied > 1 {
                self.rng.random_range(0..n_tied)
            } else {
                0
            };
            adopted = tied[pick];
        }
        self.act_strategy(id, adopted)
    }

    /// Stay put and play no game. The stored payoff is reused as the reward.
    pub fn act_persist(&mut self, id: AgentId) -> Outcome {
        let me = &self.agents[id.index()];
        Outcome {
            reward: me.last_payoff,
            next_state: me.strategy,
        }
    }

    /// Carries out `action` for `id`. `None` means the sample is skipped.
    pub fn dispatch(&mut self, id: AgentId, action: ActionKind) -> Option<Outcome> {
        debug_assert!(self.rules.action_set.contains(action));
        match action {
            ActionKind::Cooperate => Some(self.act_strategy(id, Strategy::Cooperate)),
            ActionKind::Defect => Some(self.act_strategy(id, Strategy::Defect)),
            ActionKind::Move => match self.act_move(id) {
                MoveOutcome::Moved(o) => Some(o),
                MoveOutcome::Skipped => match self.rules.failed_move {
                    FailedMove::Skip => None,
                    FailedMove::LearnZero => Some(Outcome {
                        reward: 0.0,
                        next_state: self.agents[id.index()].strategy,
                    }),
                },
            },
            ActionKind::CopyBest => Some(self.act_copy_best(id)),
            ActionKind::Persist => Some(self.act_persist(id)),
        }
    }

    /// One asynchronous update of a uniformly sampled player.
    pub fn sample_step(&mut self) -> StepReport {
        let id = AgentId(self.rng.random_range(0..self.agents.len()) as u32);
        self.step_agent(id)
    }

    /// Decision, action and learning for a given player.
    pub fn step_agent(&mut self, id: AgentId) -> StepReport {
        let state = self.agents[id.index()].strategy;
        let selection = select_action(
            &self.agents[id.index()].qtable,
            state,
            &self.rules.learning,
            &mut self.rng,
        );
        let outcome = self.dispatch(id, selection.action);
        if let Some(o) = outcome {
            let learning = self.rules.learning;
            let agent = &mut self.agents[id.index()];
            update_q(
                &mut agent.qtable,
                state,
                selection.action,
                o.reward,
                o.next_state,
                &learning,
            );
            agent.strategy = o.next_state;
            agent.last_action = selection.action;
        }
        StepReport {
            agent: id,
            selection,
            outcome,
        }
    }

    /// One Monte Carlo step: `L^2` samples.
    pub fn mcs(&mut self) {
        let side = self.lattice.side();
        for _ in 0..side * side {
            self.sample_step();
        }
        self.clock += 1;
    }
}

fn fresh_agent(id: AgentId, site: SiteIndex, strategy: Strategy, rules: &Rules) -> Agent {
    let last_action = if rules.action_set.has_strategy_actions() {
        ActionKind::from_strategy(strategy)
    } else {
        ActionKind::CopyBest
    };
    Agent {
        id,
        site,
        strategy,
        last_payoff: 0.0,
        last_action,
        qtable: QTable::new(rules.action_set),
    }
}

#[cfg(test)]
mod tests;
