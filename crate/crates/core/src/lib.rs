//! Spatial prisoner's dilemma on a diluted, periodic square lattice where
//! every player is an independent tabular Q-learner.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the model:
//!
//! * [`lattice`]: the diluted `L x L` torus, occupancy and relocation.
//! * [`game`]: the weak prisoner's dilemma payoff and per-site payoff sums.
//! * [`learning`]: action sets, Q-tables, epsilon-greedy selection and the
//!   value update.
//! * [`dynamics`]: action semantics (cooperate, defect, move, copy-the-best,
//!   persist) and the asynchronous Monte Carlo scheduler.
//! * [`metrics`]: cooperator fraction, action populations, state/action
//!   correlation and tail averages.
//!
//! Running experiments, persisting results and the command line live in the
//! `dilemma-lab` crate.
//!
//! ```
//! use dilemma_core::prelude::*;
//! use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
//!
//! let rules = Rules::new(
//!     ActionSet::Static,
//!     PayoffParams::new(1.4).unwrap(),
//!     LearningParams::new(0.75, 0.8, 0.02).unwrap(),
//!     0.0,
//! )
//! .unwrap();
//! let mut world = World::populate(20, 0.6, InitMode::Random, rules, ChaCha8Rng::seed_from_u64(7)).unwrap();
//! world.mcs();
//! assert_eq!(world.player_count(), 240);
//! let fc = cooperator_fraction(&world);
//! assert!((0.0..=1.0).contains(&fc));
//! ```
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod game;
pub mod lattice;
pub mod learning;
pub mod metrics;

mod error;

pub use error::ParamError;

pub mod prelude {
    pub use crate::dynamics::{
        Agent, FailedMove, InitMode, MoveOutcome, Outcome, Rules, StepReport, World,
    };
    pub use crate::game::{pair_payoff, site_payoff, PayoffParams, Strategy};
    pub use crate::lattice::{AgentId, Lattice, SiteIndex};
    pub use crate::learning::{
        select_action, update_q, ActionKind, ActionSet, LearningParams, QTable, Selection,
    };
    pub use crate::metrics::{
        cooperator_fraction, state_action_correlation, tail_average, ActionTable, MetricsRecord,
    };
    pub use crate::ParamError;
}
