//! Equilibrium computation through the marginal-rate system, with support
//! search and first-order certification.

mod search;
mod support;

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::game::{
    effective_efforts, payoff_gradient, payoffs, win_probabilities, ContestGame,
    EffectiveEfforts, EffortProfile, Player, WinProbabilities,
};
use crate::linalg;

pub(crate) use support::effective_from_mu;

/// Efforts at or below this are treated as zero.
pub const POSITIVITY: f64 = 1e-11;

/// Largest `m` for which every support pair may be enumerated.
pub const SUPPORT_ENUM_LIMIT: usize = 10;

pub const TOL_LINEAR: f64 = 1e-9;
pub const TOL_CONCAVE: f64 = 1e-7;

/// Default certification tolerance for a game's exponent.
pub fn default_tolerance(gamma: f64) -> f64 {
    if gamma == 1.0 {
        TOL_LINEAR
    } else {
        TOL_CONCAVE
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportPair {
    #[serde(with = "crate::one_based")]
    pub p1: Vec<usize>,
    #[serde(with = "crate::one_based")]
    pub p2: Vec<usize>,
}

impl SupportPair {
    pub fn new(mut p1: Vec<usize>, mut p2: Vec<usize>) -> Self {
        p1.sort_unstable();
        p1.dedup();
        p2.sort_unstable();
        p2.dedup();
        SupportPair { p1, p2 }
    }

    pub fn full(m: usize) -> Self {
        SupportPair { p1: (0..m).collect(), p2: (0..m).collect() }
    }

    pub fn from_masks(m: usize, mask1: u32, mask2: u32) -> Self {
        let bits = |mask: u32| (0..m).filter(|k| mask & (1 << k) != 0).collect();
        SupportPair { p1: bits(mask1), p2: bits(mask2) }
    }

    /// Positive entries of a profile.
    pub fn of_profile(profile: &EffortProfile, threshold: f64) -> Self {
        let pick = |e: &[f64]| {
            e.iter().enumerate().filter(|(_, &x)| x > threshold).map(|(k, _)| k).collect()
        };
        SupportPair { p1: pick(&profile.e1), p2: pick(&profile.e2) }
    }

    pub fn of(&self, player: Player) -> &Vec<usize> {
        match player {
            Player::One => &self.p1,
            Player::Two => &self.p2,
        }
    }

    pub fn of_mut(&mut self, player: Player) -> &mut Vec<usize> {
        match player {
            Player::One => &mut self.p1,
            Player::Two => &mut self.p2,
        }
    }

    /// Toggles membership of `k` in player's support.
    pub fn toggled(&self, player: Player, k: usize) -> Self {
        let mut out = self.clone();
        let set = out.of_mut(player);
        match set.binary_search(&k) {
            Ok(pos) => {
                set.remove(pos);
            }
            Err(pos) => set.insert(pos, k),
        }
        out
    }
}

/// `B+`, `A_1`, `A_2`: contested by both, only by player 1, only by player 2.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    #[serde(with = "crate::one_based")]
    pub both: Vec<usize>,
    #[serde(with = "crate::one_based")]
    pub only1: Vec<usize>,
    #[serde(with = "crate::one_based")]
    pub only2: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Interior,
    SupportSearch,
    OracleRefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub profile: EffortProfile,
    pub y: EffectiveEfforts,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub supports: SupportPair,
    pub probs: WinProbabilities,
    pub total_efforts: [f64; 2],
    pub payoffs: [f64; 2],
    pub partition: Partition,
    pub kkt_residual: f64,
    pub tolerance: f64,
    pub method: SolveMethod,
    /// The rate system was rank-deficient: efforts need not be unique.
    pub multiplicity: bool,
    pub candidates_tried: usize,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl EquilibriumReport {
    pub fn mu(&self, player: Player) -> &[f64] {
        match player {
            Player::One => &self.mu1,
            Player::Two => &self.mu2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Certification tolerance; `None` picks by exponent.
    pub tol: Option<f64>,
    pub support_enum_limit: usize,
    pub max_newton_iter: usize,
    /// Seed the search with best-response dynamics before enumerating.
    pub oracle_seed: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: None,
            support_enum_limit: SUPPORT_ENUM_LIMIT,
            max_newton_iter: 200,
            oracle_seed: true,
        }
    }
}

impl SolveOptions {
    pub fn tolerance(&self, game: &ContestGame) -> f64 {
        self.tol.unwrap_or_else(|| default_tolerance(game.gamma))
    }
}

/// Certification threshold for a residual, in cost units.
pub(crate) fn scaled_tolerance(game: &ContestGame, tol: f64) -> f64 {
    tol * game.costs[0].max(game.costs[1]).max(1.0)
}

/// Max-norm violation of both players' first-order conditions: `|d Pi_i / d e_i^k|`
/// where `e_i^k > 0` and its positive part where `e_i^k = 0`.
pub fn kkt_residual(game: &ContestGame, profile: &EffortProfile) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for player in Player::BOTH {
        let grad = payoff_gradient(game, player, profile)?;
        for (k, (g, e)) in grad.iter().zip(profile.of(player)).enumerate() {
            let r = if *e > POSITIVITY { g.abs() } else { g.max(0.0) };
            if r.is_nan() {
                return Err(ContestError::NonFiniteGradient {
                    player: player.number(),
                    battlefield: k + 1,
                });
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

pub fn equilibrium_partition(y: &EffectiveEfforts) -> Result<Partition> {
    let mut out = Partition::default();
    for (k, (a, b)) in y.y1.iter().zip(&y.y2).enumerate() {
        match (*a > POSITIVITY, *b > POSITIVITY) {
            (true, true) => out.both.push(k),
            (true, false) => out.only1.push(k),
            (false, true) => out.only2.push(k),
            (false, false) => return Err(ContestError::ZeroEffectiveEffort { battlefield: k + 1 }),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub totals: [f64; 2],
    pub payoffs: [f64; 2],
}

/// Totals `(gamma / c_i) sum_k p_1 p_2 v` and payoffs `sum_k p_i (1 - gamma p_j) v`
/// from a report's win probabilities.
pub fn closed_form_totals(report: &EquilibriumReport, game: &ContestGame) -> ClosedForm {
    closed_form_from_probs(game, &report.probs)
}

pub fn closed_form_from_probs(game: &ContestGame, probs: &WinProbabilities) -> ClosedForm {
    let g = game.gamma;
    let mut contested = 0.0;
    let mut pay = [0.0; 2];
    for k in 0..game.m() {
        let (p1, p2, v) = (probs.p1[k], probs.p2[k], game.values[k]);
        contested += p1 * p2 * v;
        pay[0] += p1 * (1.0 - g * p2) * v;
        pay[1] += p2 * (1.0 - g * p1) * v;
    }
    ClosedForm {
        totals: [g / game.costs[0] * contested, g / game.costs[1] * contested],
        payoffs: pay,
    }
}

/// Rates `mu_i^k = g_i^k / c_i` implied by a profile's effective efforts.
pub fn rates_of_profile(game: &ContestGame, y: &EffectiveEfforts) -> [Vec<f64>; 2] {
    Player::BOTH.map(|p| {
        let c = game.cost(p);
        crate::game::marginal_returns(game, p, y).into_iter().map(|g| g / c).collect()
    })
}

/// Assembles a report around a profile and rates, computing every derived quantity.
pub(crate) fn build_report(
    game: &ContestGame,
    profile: EffortProfile,
    mu: [Vec<f64>; 2],
    method: SolveMethod,
    tol: f64,
) -> Result<EquilibriumReport> {
    let y = effective_efforts(game, &profile)?;
    let probs = win_probabilities(game, &y)?;
    let partition = equilibrium_partition(&y)?;
    let pay = payoffs(game, &profile)?;
    let kkt = kkt_residual(game, &profile)?;
    let slack = |player: Player, mu: &[f64]| -> Vec<f64> {
        let a = game.rho(player).identity_plus();
        linalg::matvec(&a, mu)
            .into_iter()
            .map(|x| {
                let s = 1.0 - x;
                if s < 0.0 && s > -1e-9 {
                    0.0
                } else {
                    s
                }
            })
            .collect()
    };
    let s1 = slack(Player::One, &mu[0]);
    let s2 = slack(Player::Two, &mu[1]);
    let supports = SupportPair::of_profile(&profile, POSITIVITY);
    let [mu1, mu2] = mu;
    Ok(EquilibriumReport {
        total_efforts: profile.totals(),
        profile,
        y,
        mu1,
        mu2,
        s1,
        s2,
        supports,
        probs,
        payoffs: pay,
        partition,
        kkt_residual: kkt,
        tolerance: tol,
        method,
        multiplicity: false,
        candidates_tried: 0,
        diagnostics: Vec::new(),
    })
}

/// Interior candidate from `mu_i = (I + rho_i)^{-1} 1`. `Ok(None)` when some
/// rate is negative or some effort is not strictly positive.
pub fn solve_interior(game: &ContestGame) -> Result<Option<EquilibriumReport>> {
    game.ensure_valid()?;
    let m = game.m();
    let mut mu = [Vec::new(), Vec::new()];
    for player in Player::BOTH {
        let a = game.rho(player).identity_plus();
        let what = format!("I + rho{}", player.number());
        mu[player.index()] = linalg::solve(&a, &vec![1.0; m], crate::game::RCOND_WARN, &what)?;
    }
    if mu.iter().flatten().any(|&x| x < 0.0) {
        return Ok(None);
    }
    let mut y = [vec![0.0; m], vec![0.0; m]];
    for k in 0..m {
        let a1 = mu[0][k] * game.costs[0];
        let a2 = mu[1][k] * game.costs[1];
        if a1 + a2 == 0.0 {
            return Ok(None);
        }
        y[0][k] = effective_from_mu(game.gamma, a1, a2, game.values[k]);
        y[1][k] = effective_from_mu(game.gamma, a2, a1, game.values[k]);
        if !(y[0][k].is_finite() && y[1][k].is_finite()) {
            return Ok(None);
        }
    }
    let mut profile = EffortProfile::zeros(m);
    for player in Player::BOTH {
        let at = game.rho(player).identity_plus().transpose();
        let e = linalg::solve(&at, &y[player.index()], crate::game::RCOND_WARN, "I + rho^T")?;
        if e.iter().any(|&x| x <= POSITIVITY) {
            return Ok(None);
        }
        *profile.of_mut(player) = e;
    }
    let tol = default_tolerance(game.gamma);
    let mut report = build_report(game, profile, mu, SolveMethod::Interior, tol)?;
    report.candidates_tried = 1;
    Ok(Some(report))
}

/// Solves the rate system for a fixed support pair and accepts the result only
/// if efforts are positive on the supports, rates are nonnegative and every
/// off-support first-order condition holds.
///
/// `Ok(None)` means the candidate is invalid; a Newton failure is an error.
pub fn solve_support(game: &ContestGame, supports: &SupportPair) -> Result<Option<EquilibriumReport>> {
    game.ensure_valid()?;
    let opts = SolveOptions::default();
    let sys = support::SupportSystem::new(game, supports);
    let tol = opts.tolerance(game);
    let centrality = support::centrality_start(game);
    let n = centrality.len();
    let starts = [centrality, vec![1.0; n], vec![0.5; n], vec![0.1; n], vec![2.0; n]];
    let mut last = None;
    for start in &starts {
        match sys.newton(start, opts.max_newton_iter) {
            Ok(cand) => {
                if let Some(report) = search::accept(game, &sys, supports, cand, tol, SolveMethod::SupportSearch) {
                    return Ok(Some(report));
                }
                last = Some(Ok(()));
            }
            Err(e) => {
                if last.is_none() {
                    last = Some(Err(e));
                }
            }
        }
    }
    match last {
        Some(Err(e)) => Err(e),
        _ => Ok(None),
    }
}

/// Certified equilibrium with default options.
pub fn solve(game: &ContestGame) -> Result<EquilibriumReport> {
    solve_with(game, &SolveOptions::default())
}

/// Interior solve, then greedy support search, then a best-response-seeded
/// search, then exhaustive enumeration for small `m`.
pub fn solve_with(game: &ContestGame, opts: &SolveOptions) -> Result<EquilibriumReport> {
    game.ensure_valid()?;
    let tol = opts.tolerance(game);
    let limit = scaled_tolerance(game, tol);
    let mut diagnostics = Vec::new();
    match solve_interior(game) {
        Ok(Some(mut report)) if report.kkt_residual <= limit => {
            report.tolerance = tol;
            return Ok(report);
        }
        Ok(Some(report)) => diagnostics.push(format!(
            "interior candidate rejected: kkt residual {:.3e}",
            report.kkt_residual
        )),
        Ok(None) => diagnostics.push("no interior equilibrium".to_string()),
        Err(e) => diagnostics.push(format!("interior solve skipped: {e}")),
    }
    let mut report = search::search(game, opts, tol, &mut diagnostics)?;
    report.candidates_tried += 1;
    report.diagnostics = diagnostics;
    Ok(report)
}
