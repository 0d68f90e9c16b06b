//! Support search: greedy active-set moves, a best-response seed, and
//! exhaustive enumeration.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{ContestError, Result};
use crate::game::{effective_efforts, ContestGame, Player};
use crate::oracle;

use super::support::{centrality_start, Candidate, SupportSystem};
use super::{
    build_report, rates_of_profile, scaled_tolerance, EquilibriumReport, SolveMethod,
    SolveOptions, SupportPair, POSITIVITY,
};

/// Allowed violation of the off-support inequalities in rate units.
const SLACK_TOL: f64 = 1e-8;
/// Up to this many battlefields enumeration runs before the best-response seed.
const EARLY_ENUM_LIMIT: usize = 4;

/// Turns a converged candidate into a certified report, or rejects it.
pub(super) fn accept(
    game: &ContestGame,
    sys: &SupportSystem,
    supports: &SupportPair,
    cand: Candidate,
    tol: f64,
    method: SolveMethod,
) -> Option<EquilibriumReport> {
    if violations(sys, supports, &cand).is_some() {
        return None;
    }
    let mu = cand.mu.clone().map(|v| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<_>>());
    let mut report = build_report(game, cand.profile, mu, method, tol).ok()?;
    if report.kkt_residual > scaled_tolerance(game, tol) {
        return None;
    }
    report.multiplicity = cand.rank_deficient;
    Some(report)
}

/// What is wrong with a candidate, per player: a support battlefield with
/// non-positive effort to drop, or an off-support battlefield to add.
#[derive(Debug, Default)]
struct Violations {
    drop: [Option<usize>; 2],
    add: [Option<usize>; 2],
}

fn violations(sys: &SupportSystem, supports: &SupportPair, cand: &Candidate) -> Option<Violations> {
    let mut out = Violations::default();
    let mut any = false;
    for player in Player::BOTH {
        let i = player.index();
        let e = cand.profile.of(player);
        let worst = supports
            .of(player)
            .iter()
            .map(|&k| (k, e[k]))
            .filter(|(_, x)| *x <= POSITIVITY)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((k, _)) = worst {
            out.drop[i] = Some(k);
            any = true;
        }
        if cand.mu[i].iter().any(|&x| x < -1e-12) {
            any = true;
        }
        let stat = sys.stationarity(player, &cand.mu[i]);
        let add = stat
            .iter()
            .enumerate()
            .filter(|(k, s)| !supports.of(player).contains(k) && **s > SLACK_TOL)
            .max_by(|a, b| a.1.total_cmp(b.1));
        if let Some((k, _)) = add {
            out.add[i] = Some(k);
            any = true;
        }
    }
    any.then_some(out)
}

fn floor_rates(game: &ContestGame, mu: &[f64]) -> Vec<f64> {
    let m = game.m();
    let mut out = mu.to_vec();
    for half in out.chunks_mut(m) {
        let top = half.iter().fold(0.0f64, |a, &x| a.max(x)).max(1e-3);
        for x in half.iter_mut() {
            if !x.is_finite() || *x < 1e-6 * top {
                *x = 1e-6 * top;
            }
        }
    }
    out
}

fn covers(game: &ContestGame, supports: &SupportPair) -> bool {
    let m = game.m();
    let reach = |player: Player| {
        let mut seen = vec![false; m];
        for &k in supports.of(player) {
            seen[k] = true;
            for (l, &w) in game.rho(player).row(k).iter().enumerate() {
                if w > 0.0 {
                    seen[l] = true;
                }
            }
        }
        seen
    };
    let (r1, r2) = (reach(Player::One), reach(Player::Two));
    if game.gamma < 1.0 {
        r1.iter().all(|&x| x) && r2.iter().all(|&x| x)
    } else {
        r1.iter().zip(&r2).all(|(a, b)| *a || *b)
    }
}

struct Attempt {
    report: Option<EquilibriumReport>,
    diverged: bool,
}

fn attempt(
    game: &ContestGame,
    supports: &SupportPair,
    start: &[f64],
    opts: &SolveOptions,
    tol: f64,
    method: SolveMethod,
) -> Attempt {
    if supports.p1.is_empty() || supports.p2.is_empty() || !covers(game, supports) {
        return Attempt { report: None, diverged: false };
    }
    let sys = SupportSystem::new(game, supports);
    match sys.newton(start, opts.max_newton_iter) {
        Ok(cand) => {
            let report = accept(game, &sys, supports, cand, tol, method);
            Attempt { report, diverged: false }
        }
        Err(_) => Attempt { report: None, diverged: true },
    }
}

fn greedy(
    game: &ContestGame,
    opts: &SolveOptions,
    tol: f64,
    tried: &mut usize,
) -> Option<EquilibriumReport> {
    let m = game.m();
    let mut supports = SupportPair::full(m);
    let mut start = centrality_start(game);
    let mut visited = HashSet::new();
    for _ in 0..4 * m + 4 {
        if !visited.insert(supports.clone()) {
            return None;
        }
        *tried += 1;
        let sys = SupportSystem::new(game, &supports);
        let cand = match sys.newton(&start, opts.max_newton_iter) {
            Ok(c) => c,
            Err(_) => return None,
        };
        let v = match violations(&sys, &supports, &cand) {
            None => return accept(game, &sys, &supports, cand, tol, SolveMethod::SupportSearch),
            Some(v) => v,
        };
        let mut next = supports.clone();
        let mut moved = false;
        for player in Player::BOTH {
            if let Some(k) = v.drop[player.index()] {
                if next.of(player).len() > 1 {
                    next = next.toggled(player, k);
                    moved = true;
                }
            }
        }
        if !moved {
            for player in Player::BOTH {
                if let Some(k) = v.add[player.index()] {
                    next = next.toggled(player, k);
                    moved = true;
                }
            }
        }
        if !moved {
            return None;
        }
        let mut flat = cand.mu[0].clone();
        flat.extend_from_slice(&cand.mu[1]);
        start = floor_rates(game, &flat);
        supports = next;
    }
    None
}

fn oracle_seeded(
    game: &ContestGame,
    opts: &SolveOptions,
    tol: f64,
    tried: &mut usize,
    diagnostics: &mut Vec<String>,
) -> Option<EquilibriumReport> {
    let run = oracle::br_dynamics(
        game,
        &oracle::TruncationSchedule::for_game(game),
        oracle::DEFAULT_MAX_ROUNDS,
    );
    if !run.converged {
        diagnostics.push("best-response seed did not converge".to_string());
    }
    let scale = game.total_value() / game.costs[0].min(game.costs[1]);
    let supports = SupportPair::of_profile(&run.profile, 1e-6 * scale);
    let y = effective_efforts(game, &run.profile).ok()?;
    let rates = rates_of_profile(game, &y);
    let mut flat = rates[0].clone();
    flat.extend_from_slice(&rates[1]);
    let start = floor_rates(game, &flat);
    *tried += 1;
    let first = attempt(game, &supports, &start, opts, tol, SolveMethod::OracleRefined);
    if first.report.is_some() {
        return first.report;
    }
    for player in Player::BOTH {
        for k in 0..game.m() {
            let alt = supports.toggled(player, k);
            *tried += 1;
            let a = attempt(game, &alt, &start, opts, tol, SolveMethod::OracleRefined);
            if a.report.is_some() {
                return a.report;
            }
        }
    }
    None
}

fn exhaustive(
    game: &ContestGame,
    opts: &SolveOptions,
    tol: f64,
    tried: &mut usize,
) -> Option<EquilibriumReport> {
    let m = game.m();
    let count = AtomicUsize::new(0);
    let start = centrality_start(game);
    let found = (1u32..(1u32 << m)).into_par_iter().find_map_first(|mask1| {
        for mask2 in 1u32..(1u32 << m) {
            let supports = SupportPair::from_masks(m, mask1, mask2);
            if !covers(game, &supports) {
                continue;
            }
            count.fetch_add(1, Ordering::Relaxed);
            let a = attempt(game, &supports, &start, opts, tol, SolveMethod::SupportSearch);
            if a.report.is_some() {
                return a.report;
            }
            if a.diverged {
                continue;
            }
        }
        None
    });
    *tried += count.into_inner();
    found
}

/// Looks for a second equilibrium next to a degenerate one: a battlefield
/// with zero effort and zero slack admits a support with it switched on.
fn probe_multiplicity(
    game: &ContestGame,
    opts: &SolveOptions,
    tol: f64,
    report: EquilibriumReport,
    tried: &mut usize,
) -> EquilibriumReport {
    if report.multiplicity {
        return report;
    }
    let mut rates = report.mu1.clone();
    rates.extend_from_slice(&report.mu2);
    let starts = [floor_rates(game, &rates), centrality_start(game)];
    for player in Player::BOTH {
        let slack = if player == Player::One { &report.s1 } else { &report.s2 };
        for (k, s) in slack.iter().enumerate() {
            if report.supports.of(player).contains(&k) || s.abs() > 1e-9 {
                continue;
            }
            let alt = report.supports.toggled(player, k);
            for start in starts.iter().rev() {
                *tried += 1;
                let a = attempt(game, &alt, start, opts, tol, SolveMethod::SupportSearch);
                if let Some(mut other) = a.report {
                    let gap = crate::linalg::max_abs_diff(&other.profile.e1, &report.profile.e1)
                        .max(crate::linalg::max_abs_diff(&other.profile.e2, &report.profile.e2));
                    if other.multiplicity || gap > 1e-8 {
                        other.multiplicity = true;
                        other.method = report.method;
                        other.diagnostics.push(format!(
                            "degenerate complementarity for player {} at battlefield {}",
                            player.number(),
                            k + 1
                        ));
                        return other;
                    }
                }
            }
        }
    }
    report
}

pub(super) fn search(
    game: &ContestGame,
    opts: &SolveOptions,
    tol: f64,
    diagnostics: &mut Vec<String>,
) -> Result<EquilibriumReport> {
    let mut tried = 0;
    if let Some(r) = greedy(game, opts, tol, &mut tried) {
        let mut r = probe_multiplicity(game, opts, tol, r, &mut tried);
        r.candidates_tried = tried;
        return Ok(r);
    }
    diagnostics.push(format!("greedy support search failed after {tried} candidates"));
    let early = game.m() <= EARLY_ENUM_LIMIT.min(opts.support_enum_limit);
    if early {
        if let Some(r) = exhaustive(game, opts, tol, &mut tried) {
            let mut r = probe_multiplicity(game, opts, tol, r, &mut tried);
            r.candidates_tried = tried;
            return Ok(r);
        }
    }
    if opts.oracle_seed {
        if let Some(r) = oracle_seeded(game, opts, tol, &mut tried, diagnostics) {
            let mut r = probe_multiplicity(game, opts, tol, r, &mut tried);
            r.candidates_tried = tried;
            return Ok(r);
        }
        diagnostics.push("best-response seeded search failed".to_string());
    }
    if !early && game.m() <= opts.support_enum_limit {
        if let Some(r) = exhaustive(game, opts, tol, &mut tried) {
            let mut r = probe_multiplicity(game, opts, tol, r, &mut tried);
            r.candidates_tried = tried;
            return Ok(r);
        }
    }
    Err(ContestError::NoCertifiedEquilibrium(format!(
        "{tried} support pairs tried; {}",
        diagnostics.join("; ")
    )))
}
