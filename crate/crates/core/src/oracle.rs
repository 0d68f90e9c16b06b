//! Best-response dynamics on the truncated game, used as an independent check
//! on the analytic solver.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{
    effective_efforts, payoff, payoff_gradient, payoffs, win_probabilities, ContestGame,
    EffortProfile, Player,
};
use crate::linalg;
use crate::solver::{equilibrium_partition, EquilibriumReport};

pub const DEFAULT_MAX_ROUNDS: usize = 4000;

/// Projected-gradient stationarity at which a best response is accepted.
const PG_TOL: f64 = 1e-10;
const MAX_PG_ITER: usize = 20_000;
const MOVEMENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub epsilon_sequence: Vec<f64>,
    pub effort_cap: [f64; 2],
}

impl TruncationSchedule {
    /// `epsilon` from 1e-2 down to 1e-8, caps `sum v / c_i`.
    pub fn for_game(game: &ContestGame) -> Self {
        let total = game.total_value();
        TruncationSchedule {
            epsilon_sequence: (2..=8).map(|p| 10f64.powi(-p)).collect(),
            effort_cap: [total / game.costs[0], total / game.costs[1]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_sequence.is_empty() {
            return Err(ContestError::InvalidArgument("empty epsilon schedule".into()));
        }
        if self.epsilon_sequence.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ContestError::InvalidArgument(
                "epsilon schedule must be strictly decreasing".into(),
            ));
        }
        let eps0 = self.epsilon_sequence[0];
        if eps0 <= 0.0 || self.effort_cap.iter().any(|&c| c <= eps0) {
            return Err(ContestError::InvalidArgument(
                "epsilon values must be positive and below the effort caps".into(),
            ));
        }
        Ok(())
    }
}

fn project(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Maximizes player's payoff over `[lo, hi]^m` against fixed opponent efforts.
pub fn best_response(
    game: &ContestGame,
    player: Player,
    opponent: &[f64],
    bounds: (f64, f64),
) -> Result<Vec<f64>> {
    let m = game.m();
    let start = vec![project(game.total_value() / (4.0 * m as f64 * game.cost(player)), bounds.0, bounds.1); m];
    best_response_from(game, player, opponent, bounds, &start)
}

/// As [`best_response`], warm-started at `start`.
pub fn best_response_from(
    game: &ContestGame,
    player: Player,
    opponent: &[f64],
    (lo, hi): (f64, f64),
    start: &[f64],
) -> Result<Vec<f64>> {
    let m = game.m();
    if opponent.len() != m || start.len() != m {
        return Err(ContestError::DimensionMismatch {
            what: "best response inputs",
            expected: m,
            actual: opponent.len().min(start.len()),
        });
    }
    let mut profile = EffortProfile::zeros(m);
    *profile.of_mut(player.other()) = opponent.to_vec();
    *profile.of_mut(player) = start.iter().map(|&x| project(x, lo, hi)).collect();

    let grad = |p: &EffortProfile| -> Result<Vec<f64>> {
        let g = payoff_gradient(game, player, p)?;
        if let Some(k) = g.iter().position(|x| !x.is_finite()) {
            return Err(ContestError::NonFiniteGradient { player: player.number(), battlefield: k + 1 });
        }
        Ok(g)
    };

    let mut x = profile.of(player).to_vec();
    let mut f = payoff(game, player, &profile)?;
    let mut g = grad(&profile)?;
    let mut step = 1.0 / game.cost(player).max(1e-12);
    for _ in 0..MAX_PG_ITER {
        let pg = x.iter().zip(&g).map(|(xi, gi)| (project(xi + gi, lo, hi) - xi).abs());
        if pg.fold(0.0, f64::max) < PG_TOL {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| project(xi + t * gi, lo, hi)).collect();
            let trial_profile = profile.with(player, trial.clone());
            let ft = payoff(game, player, &trial_profile)?;
            let gain: f64 = trial.iter().zip(&x).zip(&g).map(|((a, b), gi)| gi * (a - b)).sum();
            if ft >= f + 1e-4 * gain {
                accepted = Some((trial, trial_profile, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_profile, fnext)) = accepted else {
            break;
        };
        let g_next = grad(&next_profile)?;
        // Barzilai-Borwein step for the next iteration
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..m {
            let s = next[k] - x[k];
            ss += s * s;
            sy -= s * (g_next[k] - g[k]);
        }
        step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { t * 2.0 };
        if next == x {
            break;
        }
        x = next;
        profile = next_profile;
        f = fnext;
        g = g_next;
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub epsilon: f64,
    pub movement: f64,
    pub totals: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrRun {
    pub profile: EffortProfile,
    pub converged: bool,
    pub rounds: usize,
    pub trace: Vec<TraceRow>,
    /// Every accepted best response weakly raised the mover's payoff.
    pub monotone: bool,
    #[serde(default)]
    pub errors: Vec<String>,
}

impl BrRun {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("round,epsilon,movement,total1,total2\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:.16e},{:.16e}",
                r.round, r.epsilon, r.movement, r.totals[0], r.totals[1]
            );
        }
        out
    }
}

/// Alternating best responses inside `[epsilon, M_i]^m`, warm-started across
/// the epsilon schedule. Converged means the last level's movement fell below 1e-8.
pub fn br_dynamics(game: &ContestGame, schedule: &TruncationSchedule, max_rounds: usize) -> BrRun {
    let m = game.m();
    let mut profile = EffortProfile::new(
        game.values.iter().map(|v| v / (4.0 * game.costs[0])).collect(),
        game.values.iter().map(|v| v / (4.0 * game.costs[1])).collect(),
    );
    let mut trace = Vec::new();
    let mut errors = Vec::new();
    let mut monotone = true;
    let mut converged = false;
    let mut round = 0;
    if let Err(e) = schedule.validate() {
        errors.push(e.to_string());
        return BrRun { profile, converged, rounds: 0, trace, monotone, errors };
    }
    for &eps in &schedule.epsilon_sequence {
        converged = false;
        for _ in 0..max_rounds {
            round += 1;
            let before = profile.clone();
            for player in Player::BOTH {
                let cap = schedule.effort_cap[player.index()];
                let own: Vec<f64> = profile.of(player).iter().map(|&x| project(x, eps, cap)).collect();
                let old = payoff(game, player, &profile.with(player, own.clone())).unwrap_or(f64::NEG_INFINITY);
                match best_response_from(game, player, profile.of(player.other()), (eps, cap), &own) {
                    Ok(br) => {
                        let next = profile.with(player, br);
                        let new = payoff(game, player, &next).unwrap_or(f64::NEG_INFINITY);
                        if new < old - 1e-12 * old.abs().max(1.0) {
                            monotone = false;
                        }
                        profile = next;
                    }
                    Err(e) => {
                        errors.push(e.to_string());
                        return BrRun { profile, converged: false, rounds: round, trace, monotone, errors };
                    }
                }
            }
            let movement = linalg::max_abs_diff(&before.e1, &profile.e1)
                .max(linalg::max_abs_diff(&before.e2, &profile.e2));
            trace.push(TraceRow { round, epsilon: eps, movement, totals: profile.totals() });
            if movement < MOVEMENT_TOL {
                converged = true;
                break;
            }
        }
        debug_assert_eq!(profile.e1.len(), m);
    }
    BrRun { profile, converged, rounds: round, trace, monotone, errors }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub verdict: Verdict,
    pub tol: f64,
    pub totals_diff: f64,
    pub probs_diff: f64,
    pub payoffs_diff: f64,
    /// Largest effective-effort gap over battlefields both players contest.
    pub y_contested_diff: f64,
    pub oracle_totals: [f64; 2],
    pub oracle_payoffs: [f64; 2],
    pub oracle_converged: bool,
    pub rounds: usize,
}

/// Compares best-response dynamics against a certified report on the outcome
/// statistics that are unique across equilibria.
pub fn cross_validate(game: &ContestGame, report: &EquilibriumReport, tol: f64) -> AgreementReport {
    let run = br_dynamics(game, &TruncationSchedule::for_game(game), DEFAULT_MAX_ROUNDS);
    compare(game, report, &run, tol)
}

pub fn compare(game: &ContestGame, report: &EquilibriumReport, run: &BrRun, tol: f64) -> AgreementReport {
    let nan = f64::NAN;
    let view = effective_efforts(game, &run.profile).and_then(|y| {
        let probs = win_probabilities(game, &y)?;
        Ok((y, probs, payoffs(game, &run.profile)?))
    });
    let (totals_diff, probs_diff, payoffs_diff, y_diff, ot, op) = match view {
        Ok((y, probs, pay)) => {
            let totals = run.profile.totals();
            let td = linalg::max_abs_diff(&totals, &report.total_efforts);
            let pd = linalg::max_abs_diff(&probs.p1, &report.probs.p1);
            let od = linalg::max_abs_diff(&pay, &report.payoffs);
            let mut yd: f64 = 0.0;
            if let Ok(part) = equilibrium_partition(&report.y) {
                for &k in &part.both {
                    yd = yd.max((y.y1[k] - report.y.y1[k]).abs());
                    yd = yd.max((y.y2[k] - report.y.y2[k]).abs());
                }
            }
            (td, pd, od, yd, totals, pay)
        }
        Err(_) => (nan, nan, nan, nan, [nan; 2], [nan; 2]),
    };
    let worst = totals_diff.max(probs_diff).max(payoffs_diff).max(y_diff);
    let verdict = if !run.converged || worst.is_nan() {
        Verdict::Inconclusive
    } else if worst <= tol {
        Verdict::Agree
    } else {
        Verdict::Disagree
    };
    AgreementReport {
        verdict,
        tol,
        totals_diff,
        probs_diff,
        payoffs_diff,
        y_contested_diff: y_diff,
        oracle_totals: ot,
        oracle_payoffs: op,
        oracle_converged: run.converged,
        rounds: run.rounds,
    }
}
