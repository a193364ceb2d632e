use thiserror::Error;

/// A model parameter outside its admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamError {
    #[error("lattice side must be at least 2, got {0}")]
    Side(usize),
    #[error("density must lie in (0, 1], got {0}")]
    Density(f64),
    #[error("temptation b must lie in (1, 2), got {0}")]
    Temptation(f64),
    #[error("learning rate alpha must lie in (0, 1], got {0}")]
    LearningRate(f64),
    #[error("discount gamma must lie in [0, 1), got {0}")]
    Discount(f64),
    #[error("exploration epsilon must lie in [0, 1], got {0}")]
    Exploration(f64),
    #[error("mobility p_d must lie in [0, 1], got {0}")]
    Mobility(f64),
    #[error("site ({row}, {col}) is outside a lattice of side {side}")]
    SiteOutOfRange { row: usize, col: usize, side: usize },
    #[error("site ({row}, {col}) is listed more than once")]
    DuplicateSite { row: usize, col: usize },
    #[error("a world needs at least one player")]
    NoPlayers,
}
