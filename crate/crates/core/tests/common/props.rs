//! Numerical properties checked on seeded random games. Each returns a
//! description of the first violation.

use netcontest::{
    closed_form_totals, effective_efforts, payoff_gradient, payoffs, solve, win_probabilities, ContestGame,
    EffortProfile, EquilibriumReport, Player,
};

use netcontest::oracle::{br_dynamics, compare, TruncationSchedule, Verdict, DEFAULT_MAX_ROUNDS};

use super::{random_game, random_profile, random_shared_network_game};

pub type Outcome = Result<(), String>;

pub const ORACLE_TOL: f64 = 1e-4;

fn near(what: &str, a: f64, b: f64, tol: f64) -> Outcome {
    if (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0) {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b} (tol {tol})"))
    }
}

fn near_all(what: &str, a: &[f64], b: &[f64], tol: f64) -> Outcome {
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        near(&format!("{what}[{}]", k + 1), *x, *y, tol)?;
    }
    Ok(())
}

fn solved(game: &ContestGame) -> Result<EquilibriumReport, String> {
    solve(game).map_err(|e| format!("solve failed: {e}"))
}

pub fn normalization(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let y = effective_efforts(&game, &random_profile(seed, m)).map_err(|e| e.to_string())?;
    let probs = win_probabilities(&game, &y).map_err(|e| e.to_string())?;
    let r = solved(&game)?;
    for p in [&probs, &r.probs] {
        for (a, b) in p.p1.iter().zip(&p.p2) {
            near("p1 + p2", a + b, 1.0, 1e-12)?;
        }
    }
    Ok(())
}

pub fn constant_sum(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let e = random_profile(seed, m);
    let p = payoffs(&game, &e).map_err(|e| e.to_string())?;
    let t = e.totals();
    near("constant sum", p[0] + p[1] + game.costs[0] * t[0] + game.costs[1] * t[1], game.total_value(), 1e-10)
}

pub fn linearity(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let a = random_profile(seed, m);
    let b = random_profile(seed.wrapping_add(1), m);
    let sum = EffortProfile::new(
        a.e1.iter().zip(&b.e1).map(|(x, y)| x + y).collect(),
        a.e2.iter().zip(&b.e2).map(|(x, y)| x + y).collect(),
    );
    let ya = effective_efforts(&game, &a).map_err(|e| e.to_string())?;
    let yb = effective_efforts(&game, &b).map_err(|e| e.to_string())?;
    let ys = effective_efforts(&game, &sum).map_err(|e| e.to_string())?;
    for player in Player::BOTH {
        let added: Vec<f64> = ya.of(player).iter().zip(yb.of(player)).map(|(x, y)| x + y).collect();
        near_all("effective effort", ys.of(player), &added, 1e-12)?;
    }
    Ok(())
}

pub fn gradient(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let e = random_profile(seed, m);
    for player in Player::BOTH {
        let g = payoff_gradient(&game, player, &e).map_err(|e| e.to_string())?;
        for k in 0..m {
            let h = 1e-5 * e.of(player)[k].max(1.0);
            let mut up = e.of(player).to_vec();
            let mut down = up.clone();
            up[k] += h;
            down[k] -= h;
            let pu = payoffs(&game, &e.with(player, up)).map_err(|e| e.to_string())?[player.index()];
            let pd = payoffs(&game, &e.with(player, down)).map_err(|e| e.to_string())?[player.index()];
            let fd = (pu - pd) / (2.0 * h);
            let rel = (g[k] - fd).abs() / g[k].abs().max(1e-3);
            if rel > 1e-6 {
                return Err(format!("gradient {player:?}[{}]: analytic {} vs difference {fd}", k + 1, g[k]));
            }
        }
    }
    Ok(())
}

pub fn closed_forms(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let r = solved(&game)?;
    let cf = closed_form_totals(&r, &game);
    near_all("total effort", &cf.totals, &r.profile.totals(), 1e-9)?;
    let direct = payoffs(&game, &r.profile).map_err(|e| e.to_string())?;
    near_all("payoff", &cf.payoffs, &direct, 1e-9)
}

pub fn ratio_identity(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let r = solved(&game)?;
    for &k in &r.partition.both {
        let lhs = r.probs.p1[k] / r.probs.p2[k];
        let rhs = (r.mu2[k] * game.costs[1] / (r.mu1[k] * game.costs[0])).powf(gamma);
        near(&format!("probability ratio at {}", k + 1), lhs, rhs, 1e-8)?;
    }
    Ok(())
}

fn compare_scaled(base: &EquilibriumReport, scaled: &EquilibriumReport, effort_factor: f64, payoff_factor: f64) -> Outcome {
    if base.supports != scaled.supports {
        return Err(format!("supports changed: {:?} vs {:?}", base.supports, scaled.supports));
    }
    near_all("p1", &scaled.probs.p1, &base.probs.p1, 1e-8)?;
    for player in Player::BOTH {
        let expected: Vec<f64> = base.profile.of(player).iter().map(|x| x * effort_factor).collect();
        near_all("effort", scaled.profile.of(player), &expected, 1e-8)?;
    }
    near_all("payoff", &scaled.payoffs, &base.payoffs.map(|p| p * payoff_factor), 1e-8)
}

pub fn value_homogeneity(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let base = solved(&game)?;
    for s in [0.25, 3.0] {
        let mut g = game.clone();
        g.values.iter_mut().for_each(|v| *v *= s);
        compare_scaled(&base, &solved(&g)?, s, s).map_err(|e| format!("values x{s}: {e}"))?;
    }
    Ok(())
}

pub fn cost_scaling(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let base = solved(&game)?;
    for s in [0.5, 4.0] {
        let mut g = game.clone();
        g.costs = g.costs.map(|c| c * s);
        compare_scaled(&base, &solved(&g)?, 1.0 / s, 1.0).map_err(|e| format!("costs x{s}: {e}"))?;
    }
    Ok(())
}

pub fn full_contest_below_unit_gamma(seed: u64, m: usize, gamma: f64) -> Outcome {
    if gamma >= 1.0 {
        return Ok(());
    }
    let r = solved(&random_game(seed, m, gamma))?;
    if r.partition.both.len() == m {
        Ok(())
    } else {
        Err(format!("uncontested battlefields: {:?} / {:?}", r.partition.only1, r.partition.only2))
    }
}

pub fn network_invariance(seed: u64, m: usize, gamma: f64) -> Outcome {
    let shared = random_shared_network_game(seed, m, gamma);
    let empty = ContestGame::plain(gamma, shared.costs, shared.values.clone());
    let a = solved(&shared)?;
    let b = solved(&empty)?;
    near_all("p1", &a.probs.p1, &b.probs.p1, 1e-8)?;
    near_all("total effort", &a.total_efforts, &b.total_efforts, 1e-8)?;
    near_all("payoff", &a.payoffs, &b.payoffs, 1e-8)
}

pub fn effort_bound(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let r = solved(&game)?;
    for player in Player::BOTH {
        let bound = gamma * game.total_value() / (4.0 * game.cost(player));
        let total = r.total_efforts[player.index()];
        if total > bound * (1.0 + 1e-9) {
            return Err(format!("total effort {total} above {bound}"));
        }
    }
    Ok(())
}

pub fn welfare_identity(seed: u64, m: usize, _gamma: f64) -> Outcome {
    let game = random_game(seed, m, 1.0);
    let r = solved(&game)?;
    let rhs: f64 = (0..m).map(|k| (1.0 - 2.0 * r.probs.p1[k] * r.probs.p2[k]) * game.values[k]).sum();
    let direct = payoffs(&game, &r.profile).map_err(|e| e.to_string())?;
    near("welfare", direct[0] + direct[1], rhs, 1e-9)
}

pub fn report_json_round_trip(seed: u64, m: usize, gamma: f64) -> Outcome {
    let r = solved(&random_game(seed, m, gamma))?;
    let text = r.to_json();
    let again = EquilibriumReport::from_json(&text).map_err(|e| e.to_string())?.to_json();
    if text == again {
        Ok(())
    } else {
        Err("report JSON changed after a round trip".into())
    }
}

/// Best-response dynamics agree with the solver, move monotonically and
/// stay clear of the effort caps.
pub fn oracle_agreement(seed: u64, m: usize, gamma: f64) -> Outcome {
    let game = random_game(seed, m, gamma);
    let r = solved(&game)?;
    let schedule = TruncationSchedule::for_game(&game);
    let run = br_dynamics(&game, &schedule, DEFAULT_MAX_ROUNDS);
    if !run.monotone {
        return Err("a best response lowered the mover's payoff".into());
    }
    for player in Player::BOTH {
        let cap = schedule.effort_cap[player.index()];
        if run.profile.of(player).iter().any(|&x| x >= cap) {
            return Err(format!("effort cap {cap} binds for {player:?}"));
        }
    }
    let a = compare(&game, &r, &run, ORACLE_TOL);
    if a.verdict == Verdict::Agree {
        Ok(())
    } else {
        Err(format!(
            "{:?}: totals {:.2e}, probs {:.2e}, payoffs {:.2e}, contested y {:.2e}",
            a.verdict, a.totals_diff, a.probs_diff, a.payoffs_diff, a.y_contested_diff
        ))
    }
}

pub type Property = fn(u64, usize, f64) -> Outcome;

/// Every property with its display name.
pub const ALL: [(&str, Property); 13] = [
    ("probability normalization", normalization),
    ("constant-sum identity", constant_sum),
    ("effective effort linearity", linearity),
    ("gradient vs finite differences", gradient),
    ("closed-form totals and payoffs", closed_forms),
    ("ratio identity on contested battlefields", ratio_identity),
    ("value homogeneity", value_homogeneity),
    ("cost scaling", cost_scaling),
    ("gamma below one contests everything", full_contest_below_unit_gamma),
    ("equal networks match empty networks", network_invariance),
    ("total effort bound", effort_bound),
    ("welfare identity", welfare_identity),
    ("report JSON round trip", report_json_round_trip),
];
