//! Equilibria when players choose spillover networks with entries in
//! `[0, 1]` together with their efforts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{effective_efforts, payoffs, ContestGame, EffortProfile, Player, Spillovers};
use crate::oracle;
use crate::repro::out_star;
use crate::verify::VerificationReport;

/// Upper bound on every spillover entry.
pub const RHO_BOUND: f64 = 1.0;
/// Tolerance on universal access, aggregate efforts and closed-form payoffs.
pub const EXACT_TOL: f64 = 1e-12;
/// Allowed payoff gain of the oracle's effort best response.
pub const EFFORT_DEVIATION_TOL: f64 = 1e-6;
/// Single-coordinate deviation sizes.
pub const GRID_STEPS: [f64; 2] = [0.1, 0.01];

/// Outcome of the single contest over the aggregate prize `V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateContest {
    pub efforts: [f64; 2],
    pub probs: [f64; 2],
    pub payoffs: [f64; 2],
}

/// `E_i = (gamma / c_i) p_i (1 - p_i) V` with `p_i = c_{-i}^g / (c_1^g + c_2^g)`.
pub fn aggregate_contest(c1: f64, c2: f64, gamma: f64, total_value: f64) -> Result<AggregateContest> {
    if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(ContestError::InvalidArgument(format!("costs must be positive, got ({c1}, {c2})")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(ContestError::InvalidArgument(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(total_value >= 0.0 && total_value.is_finite()) {
        return Err(ContestError::InvalidArgument(format!("aggregate value must be nonnegative, got {total_value}")));
    }
    let (a, b) = (c1.powf(gamma), c2.powf(gamma));
    let p1 = b / (a + b);
    let p2 = a / (a + b);
    let both = a * b / ((a + b) * (a + b));
    Ok(AggregateContest {
        efforts: [gamma / c1 * both * total_value, gamma / c2 * both * total_value],
        probs: [p1, p2],
        payoffs: [(p1 - gamma * both) * total_value, (p2 - gamma * both) * total_value],
    })
}

/// Efforts and bounded networks of both players, each concentrating its
/// effort at a hub that feeds every other battlefield with weight one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndogenousProfile {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub rho1: Spillovers,
    pub rho2: Spillovers,
    #[serde(with = "crate::one_based")]
    pub hubs: Vec<usize>,
    pub rho_bounds: f64,
}

impl EndogenousProfile {
    pub fn profile(&self) -> EffortProfile {
        EffortProfile::new(self.e1.clone(), self.e2.clone())
    }

    pub fn game(&self, values: &[f64], c1: f64, c2: f64, gamma: f64) -> ContestGame {
        ContestGame::new(gamma, [c1, c2], values.to_vec(), self.rho1.clone(), self.rho2.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serialization is infallible")
    }
}

/// The out-star profile with hubs `hub1`, `hub2` (0-based).
pub fn endogenous_equilibrium(
    values: &[f64],
    c1: f64,
    c2: f64,
    gamma: f64,
    hub1: usize,
    hub2: usize,
) -> Result<EndogenousProfile> {
    let m = values.len();
    if m == 0 {
        return Err(ContestError::InvalidArgument("at least one battlefield is required".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(ContestError::InvalidArgument(format!("battlefield values must be nonnegative, got {v}")));
    }
    for hub in [hub1, hub2] {
        if hub >= m {
            return Err(ContestError::InvalidArgument(format!(
                "hub {} is not a battlefield (m = {m})",
                hub + 1
            )));
        }
    }
    let agg = aggregate_contest(c1, c2, gamma, values.iter().sum())?;
    let place = |hub: usize, total: f64| {
        let mut e = vec![0.0; m];
        e[hub] = total;
        e
    };
    Ok(EndogenousProfile {
        e1: place(hub1, agg.efforts[0]),
        e2: place(hub2, agg.efforts[1]),
        rho1: out_star(m, hub1, RHO_BOUND),
        rho2: out_star(m, hub2, RHO_BOUND),
        hubs: vec![hub1, hub2],
        rho_bounds: RHO_BOUND,
    })
}

fn single_deviations(m: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for k in 0..m {
        for l in 0..m {
            if k == l {
                continue;
            }
            for step in GRID_STEPS {
                out.push((k, l, step));
                out.push((k, l, -step));
            }
        }
    }
    out
}

/// Checks a proposed profile: (a) universal access, (b) totals equal the
/// aggregate contest's, (c) no profitable effort deviation against the
/// oracle's best response, (d) no profitable single-entry deviation in
/// links or effort on the step grid, (e) closed-form payoffs.
pub fn verify_endogenous(
    profile: &EndogenousProfile,
    values: &[f64],
    c1: f64,
    c2: f64,
    gamma: f64,
) -> Result<VerificationReport> {
    let game = profile.game(values, c1, c2, gamma);
    game.ensure_valid()?;
    let efforts = profile.profile();
    let y = effective_efforts(&game, &efforts)?;
    let totals = efforts.totals();
    let agg = aggregate_contest(c1, c2, gamma, game.total_value())?;
    let base = payoffs(&game, &efforts)?;
    let scale = game.total_value().max(1.0);
    let mut out = VerificationReport::new();

    for player in Player::BOTH {
        let i = player.index();
        let n = player.number();
        let rho = game.rho(player);
        let bounded = rho.entries().all(|(_, _, w)| (0.0..=profile.rho_bounds).contains(&w));
        out.check(format!("bounded links {n}"), bounded, format!("entries within [0, {}]", profile.rho_bounds));

        let gaps: Vec<(usize, f64)> =
            y.of(player).iter().enumerate().map(|(k, yk)| (k, (yk - totals[i]).abs())).collect();
        let bad: Vec<usize> = gaps.iter().filter(|(_, g)| *g > EXACT_TOL * scale).map(|(k, _)| k + 1).collect();
        let worst = gaps.iter().map(|(_, g)| *g).fold(0.0, f64::max);
        let detail = if bad.is_empty() {
            format!("max |y - E| = {worst:.3e}")
        } else {
            format!("max |y - E| = {worst:.3e}; fails at battlefields {bad:?}")
        };
        out.check(format!("universal access {n}"), bad.is_empty(), detail);

        out.close(format!("aggregate effort {n}"), totals[i], agg.efforts[i], EXACT_TOL * scale);

        let hi = game.total_value() / game.cost(player);
        let br = oracle::best_response_from(&game, player, efforts.of(player.other()), (0.0, hi), efforts.of(player))?;
        let br_payoff = payoffs(&game, &efforts.with(player, br))?[i];
        let gain = br_payoff - base[i];
        out.check(
            format!("effort best response {n}"),
            gain <= EFFORT_DEVIATION_TOL,
            format!("oracle gain {gain:.3e}"),
        );

        let m = game.m();
        let link_gain = single_deviations(m)
            .into_par_iter()
            .filter_map(|(k, l, step)| {
                let w = rho.get(k, l);
                let next = (w + step).clamp(0.0, profile.rho_bounds);
                if next == w {
                    return None;
                }
                let mut dev = game.clone();
                dev.rho_mut(player).set(k, l, next);
                payoffs(&dev, &efforts).ok().map(|p| p[i] - base[i])
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        let own = efforts.of(player);
        let moved = (0..m)
            .flat_map(|from| (0..m).flat_map(move |to| GRID_STEPS.map(|s| (from, to, s))))
            .filter(|&(from, to, step)| from != to && own[from] >= step * totals[i] && totals[i] > 0.0)
            .map(|(from, to, step)| {
                let mut e = own.to_vec();
                e[from] -= step * totals[i];
                e[to] += step * totals[i];
                e
            });
        let rescaled = GRID_STEPS
            .iter()
            .flat_map(|s| [1.0 + s, 1.0 - s])
            .map(|f| own.iter().map(|x| x * f).collect::<Vec<_>>());
        let mut effort_gain = f64::NEG_INFINITY;
        for e in moved.chain(rescaled) {
            effort_gain = effort_gain.max(payoffs(&game, &efforts.with(player, e))?[i] - base[i]);
        }
        let gain = link_gain.max(effort_gain);
        out.check(
            format!("grid deviations {n}"),
            gain <= EXACT_TOL * scale,
            format!("best single-coordinate gain {gain:.3e} (links {link_gain:.3e}, efforts {effort_gain:.3e})"),
        );

        out.close(format!("closed-form payoff {n}"), base[i], agg.payoffs[i], EXACT_TOL * scale);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_symmetric() {
        let a = aggregate_contest(2.0, 2.0, 1.0, 8.0).unwrap();
        assert_eq!(a.probs, [0.5, 0.5]);
        assert!((a.efforts[0] - 1.0).abs() < 1e-15);
        assert!((a.payoffs[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn aggregate_unequal_costs() {
        let a = aggregate_contest(1.0, 2.0, 1.0, 10.0).unwrap();
        assert!((a.probs[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.efforts[0] - 20.0 / 9.0).abs() < 1e-14);
        assert!((a.efforts[1] - 10.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn aggregate_concave() {
        let a = aggregate_contest(1.0, 1.0, 0.5, 1.0).unwrap();
        assert!((a.efforts[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn hub_effort() {
        let p = endogenous_equilibrium(&[1.0, 2.0, 3.0], 1.0, 1.0, 1.0, 0, 2).unwrap();
        assert!((p.e1[0] - 1.5).abs() < 1e-15);
        assert!((p.e2[2] - 1.5).abs() < 1e-15);
        assert_eq!(p.e1[1], 0.0);
        assert_eq!(p.rho1.get(0, 1), 1.0);
        assert_eq!(p.rho2.get(0, 1), 0.0);
    }

    #[test]
    fn single_battlefield_has_no_links() {
        let p = endogenous_equilibrium(&[3.0], 1.0, 2.0, 1.0, 0, 0).unwrap();
        assert_eq!(p.rho1.total(), 0.0);
        assert!(verify_endogenous(&p, &[3.0], 1.0, 2.0, 1.0).unwrap().passed());
    }

    #[test]
    fn hubs_serialize_one_based() {
        let p = endogenous_equilibrium(&[1.0; 4], 1.0, 1.0, 1.0, 0, 3).unwrap();
        let json: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(json["hubs"], serde_json::json!([1, 4]));
        assert_eq!(json["rho_bounds"], 1.0);
    }

    #[test]
    fn bad_hub_rejected() {
        assert!(endogenous_equilibrium(&[1.0; 3], 1.0, 1.0, 1.0, 3, 0).is_err());
    }
}
