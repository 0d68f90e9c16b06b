//! Equilibria of two-player multi-battlefield Tullock contests with directed
//! spillover networks.
//!
//! ```
//! use netcontest::{solve, ContestGame};
//!
//! let game = ContestGame::plain(1.0, [1.0, 1.0], vec![1.0, 1.0]);
//! let report = solve(&game).unwrap();
//! assert!((report.total_efforts[0] - 0.5).abs() < 1e-12);
//! ```

pub mod design;
pub mod endogenous;
pub mod error;
pub mod game;
pub mod linalg;
pub mod oracle;
pub mod repro;
pub mod solver;
pub mod sweep;
pub mod verify;

mod one_based;

pub use error::{ContestError, Result};
pub use game::{
    effective_efforts, payoff_gradient, payoffs, validate_game, win_probabilities, ContestGame,
    EffectiveEfforts, EffortProfile, Player, Spillovers, TieConvention, ValidationReport,
    WinProbabilities,
};
pub use solver::{
    closed_form_totals, equilibrium_partition, kkt_residual, solve, solve_interior,
    solve_support, solve_with, EquilibriumReport, Partition, SolveOptions, SolveMethod,
    SupportPair,
};
pub use verify::VerificationReport;
