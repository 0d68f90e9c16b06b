//! Contest instances and the primitive evaluations on them: effective efforts,
//! Tullock win probabilities, payoffs and payoff gradients.
//!
//! Battlefields are indexed from 0 internally. Every user-facing serialization
//! converts to 1-based indices.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::linalg;

/// Reciprocal condition number below which a matrix is reported as singular.
pub const RCOND_WARN: f64 = 1e-10;

/// Largest battlefield count for which every principal submatrix of `I + rho`
/// is checked during validation.
pub const SUBMATRIX_CHECK_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(n: usize) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.number())
    }
}

/// Square spillover matrix stored dense and row-major. Entry `(k, l)` is the
/// fraction of effort placed on battlefield `k` that also counts on `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Spillovers {
    dim: usize,
    data: Vec<f64>,
}

impl Spillovers {
    pub fn zeros(dim: usize) -> Self {
        Spillovers { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for k in 0..dim {
            for l in 0..dim {
                data.push(f(k, l));
            }
        }
        Spillovers { dim, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Spillovers::try_from(rows.to_vec())
    }

    /// Every off-diagonal entry equal to `weight`.
    pub fn complete(dim: usize, weight: f64) -> Self {
        Spillovers::from_fn(dim, |k, l| if k == l { 0.0 } else { weight })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.dim + to]
    }

    pub fn set(&mut self, from: usize, to: usize, weight: f64) {
        self.data[from * self.dim + to] = weight;
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.data[from * self.dim..(from + 1) * self.dim]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let dim = self.dim;
        self.data
            .iter()
            .enumerate()
            .map(move |(idx, &w)| (idx / dim, idx % dim, w))
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Spillovers { dim: self.dim, data: self.data.iter().map(|w| w * factor).collect() }
    }

    /// `I + rho` as a dense matrix.
    pub fn identity_plus(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, l| {
            self.get(k, l) + if k == l { 1.0 } else { 0.0 }
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|k| self.row(k).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Spillovers {
    type Error = ContestError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (k, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(ContestError::InvalidGame(format!(
                    "spillover matrix is not square: row {} has {} entries, expected {}",
                    k + 1,
                    row.len(),
                    dim
                )));
            }
            data.extend(row);
        }
        Ok(Spillovers { dim, data })
    }
}

impl From<Spillovers> for Vec<Vec<f64>> {
    fn from(s: Spillovers) -> Self {
        s.to_rows()
    }
}

/// What to do where both players put zero effective effort on a battlefield.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieConvention {
    /// Each player wins with probability one half; the battlefield is flagged.
    #[default]
    Half,
    Error,
}

impl TieConvention {
    fn is_default(&self) -> bool {
        *self == TieConvention::Half
    }
}

/// A full problem instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContestGame {
    pub gamma: f64,
    pub costs: [f64; 2],
    pub values: Vec<f64>,
    pub rho1: Spillovers,
    pub rho2: Spillovers,
    #[serde(default, skip_serializing_if = "TieConvention::is_default")]
    pub tie: TieConvention,
}

impl ContestGame {
    pub fn new(
        gamma: f64,
        costs: [f64; 2],
        values: Vec<f64>,
        rho1: Spillovers,
        rho2: Spillovers,
    ) -> Self {
        ContestGame { gamma, costs, values, rho1, rho2, tie: TieConvention::Half }
    }

    /// No spillovers for either player.
    pub fn plain(gamma: f64, costs: [f64; 2], values: Vec<f64>) -> Self {
        let m = values.len();
        ContestGame::new(gamma, costs, values, Spillovers::zeros(m), Spillovers::zeros(m))
    }

    pub fn with_tie(mut self, tie: TieConvention) -> Self {
        self.tie = tie;
        self
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn rho(&self, player: Player) -> &Spillovers {
        match player {
            Player::One => &self.rho1,
            Player::Two => &self.rho2,
        }
    }

    pub fn rho_mut(&mut self, player: Player) -> &mut Spillovers {
        match player {
            Player::One => &mut self.rho1,
            Player::Two => &mut self.rho2,
        }
    }

    pub fn cost(&self, player: Player) -> f64 {
        self.costs[player.index()]
    }

    pub fn total_value(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game serialization is infallible")
    }

    /// Fails on the first hard invariant violation; singularity is not checked.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = invariant_violations(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ContestError::InvalidGame(violations.join("; ")))
        }
    }
}

/// Nonnegative effort vectors for both players.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffortProfile {
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl EffortProfile {
    pub fn new(e1: Vec<f64>, e2: Vec<f64>) -> Self {
        EffortProfile { e1, e2 }
    }

    pub fn zeros(m: usize) -> Self {
        EffortProfile { e1: vec![0.0; m], e2: vec![0.0; m] }
    }

    pub fn of(&self, player: Player) -> &[f64] {
        match player {
            Player::One => &self.e1,
            Player::Two => &self.e2,
        }
    }

    pub fn of_mut(&mut self, player: Player) -> &mut Vec<f64> {
        match player {
            Player::One => &mut self.e1,
            Player::Two => &mut self.e2,
        }
    }

    pub fn with(&self, player: Player, efforts: Vec<f64>) -> Self {
        let mut out = self.clone();
        *out.of_mut(player) = efforts;
        out
    }

    pub fn totals(&self) -> [f64; 2] {
        [self.e1.iter().sum(), self.e2.iter().sum()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveEfforts {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl EffectiveEfforts {
    pub fn of(&self, player: Player) -> &[f64] {
        match player {
            Player::One => &self.y1,
            Player::Two => &self.y2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinProbabilities {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// 1-based battlefields where the tie convention was applied.
    #[serde(with = "crate::one_based")]
    pub tie_flags: Vec<usize>,
}

impl WinProbabilities {
    pub fn of(&self, player: Player) -> &[f64] {
        match player {
            Player::One => &self.p1,
            Player::Two => &self.p2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    /// Reciprocal condition number of `I + rho`.
    pub rcond: f64,
    pub singular: bool,
    /// Principal submatrices of `I + rho` flagged as singular (1-based index sets).
    pub singular_submatrices: Vec<Vec<usize>>,
    pub submatrices_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub conditioning: Vec<Conditioning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_singularity(&self) -> bool {
        self.conditioning
            .iter()
            .any(|c| c.singular || !c.singular_submatrices.is_empty())
    }
}

fn invariant_violations(game: &ContestGame) -> Vec<String> {
    let mut out = Vec::new();
    let m = game.m();
    if m == 0 {
        out.push("at least one battlefield is required".to_string());
    }
    if !(game.gamma > 0.0 && game.gamma <= 1.0) {
        out.push(format!("gamma must lie in (0, 1], got {}", game.gamma));
    }
    for player in Player::BOTH {
        let c = game.cost(player);
        if !(c.is_finite() && c > 0.0) {
            out.push(format!("cost of {player} must be positive, got {c}"));
        }
    }
    for (k, &v) in game.values.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            out.push(format!("value of battlefield {} must be positive, got {v}", k + 1));
        }
    }
    for player in Player::BOTH {
        let rho = game.rho(player);
        let name = format!("rho{}", player.number());
        if rho.dim() != m {
            out.push(format!("{name} is {0}x{0} but there are {m} battlefields", rho.dim()));
            continue;
        }
        for (k, l, w) in rho.entries() {
            if !w.is_finite() {
                out.push(format!("{name}[{}][{}] is not finite", k + 1, l + 1));
            } else if k == l && w != 0.0 {
                out.push(format!("{name} has nonzero diagonal at battlefield {}: {w}", k + 1));
            } else if w < 0.0 {
                out.push(format!("{name}[{}][{}] is negative: {w}", k + 1, l + 1));
            }
        }
    }
    out
}

fn conditioning(rho: &Spillovers) -> Conditioning {
    let a = rho.identity_plus();
    let rcond = linalg::rcond(&a);
    let m = rho.dim();
    let mut singular_submatrices = Vec::new();
    let submatrices_checked = m <= SUBMATRIX_CHECK_LIMIT;
    if submatrices_checked {
        for mask in 1u32..(1u32 << m) {
            let idx: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
            if idx.len() == m {
                continue;
            }
            let sub = a.select_rows(&idx).select_columns(&idx);
            if linalg::rcond(&sub) < RCOND_WARN {
                singular_submatrices.push(idx.iter().map(|k| k + 1).collect());
            }
        }
    }
    Conditioning { rcond, singular: rcond < RCOND_WARN, singular_submatrices, submatrices_checked }
}

/// Lists violated invariants and reports the numerical conditioning of
/// `I + rho_i` and its principal submatrices.
pub fn validate_game(game: &ContestGame) -> ValidationReport {
    let violations = invariant_violations(game);
    let mut warnings = Vec::new();
    let mut conds = Vec::new();
    let dims_ok = Player::BOTH.iter().all(|&p| game.rho(p).dim() == game.m());
    if dims_ok && game.m() > 0 {
        for player in Player::BOTH {
            let c = conditioning(game.rho(player));
            if c.singular {
                warnings.push(format!(
                    "I + rho{} is numerically singular (rcond {:.3e})",
                    player.number(),
                    c.rcond
                ));
            }
            if !c.singular_submatrices.is_empty() {
                warnings.push(format!(
                    "I + rho{} has {} singular principal submatrices",
                    player.number(),
                    c.singular_submatrices.len()
                ));
            }
            if !c.submatrices_checked {
                warnings.push(format!(
                    "principal submatrices of I + rho{} not checked (m > {SUBMATRIX_CHECK_LIMIT})",
                    player.number()
                ));
            }
            conds.push(c);
        }
    }
    ValidationReport { violations, warnings, conditioning: conds }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(ContestError::DimensionMismatch { what, expected, actual })
    }
}

/// `y = (I + rho^T) e` for a single player.
pub fn effective_effort(rho: &Spillovers, efforts: &[f64]) -> Vec<f64> {
    let mut y = efforts.to_vec();
    for (k, &ek) in efforts.iter().enumerate().take(rho.dim()) {
        if ek == 0.0 {
            continue;
        }
        for (l, &w) in rho.row(k).iter().enumerate() {
            if l != k {
                y[l] += w * ek;
            }
        }
    }
    y
}

pub fn effective_efforts(game: &ContestGame, profile: &EffortProfile) -> Result<EffectiveEfforts> {
    let m = game.m();
    check_len("player 1 efforts", m, profile.e1.len())?;
    check_len("player 2 efforts", m, profile.e2.len())?;
    check_len("rho1", m, game.rho1.dim())?;
    check_len("rho2", m, game.rho2.dim())?;
    Ok(EffectiveEfforts {
        y1: effective_effort(&game.rho1, &profile.e1),
        y2: effective_effort(&game.rho2, &profile.e2),
    })
}

/// Effective efforts in `[-NEG_ROUNDOFF, 0)` are treated as zero.
const NEG_ROUNDOFF: f64 = 1e-12;

fn clean(y: f64, battlefield: usize) -> Result<f64> {
    if y >= 0.0 {
        Ok(y)
    } else if y >= -NEG_ROUNDOFF {
        Ok(0.0)
    } else {
        Err(ContestError::InvalidArgument(format!(
            "negative effective effort {y} at battlefield {}",
            battlefield + 1
        )))
    }
}

/// Tullock probability that the first argument wins.
pub fn tullock(gamma: f64, own: f64, rival: f64) -> f64 {
    if rival == 0.0 {
        return 1.0;
    }
    if own == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 + (rival / own).powf(gamma))
}

pub fn win_probabilities(game: &ContestGame, y: &EffectiveEfforts) -> Result<WinProbabilities> {
    let m = game.m();
    check_len("player 1 effective efforts", m, y.y1.len())?;
    check_len("player 2 effective efforts", m, y.y2.len())?;
    let mut p1 = Vec::with_capacity(m);
    let mut p2 = Vec::with_capacity(m);
    let mut tie_flags = Vec::new();
    for k in 0..m {
        let a = clean(y.y1[k], k)?;
        let b = clean(y.y2[k], k)?;
        if a == 0.0 && b == 0.0 {
            match game.tie {
                TieConvention::Half => {
                    p1.push(0.5);
                    p2.push(0.5);
                    tie_flags.push(k);
                }
                TieConvention::Error => {
                    return Err(ContestError::ZeroEffectiveEffort { battlefield: k + 1 })
                }
            }
            continue;
        }
        let q = tullock(game.gamma, a, b);
        p1.push(q);
        p2.push(1.0 - q);
    }
    Ok(WinProbabilities { p1, p2, tie_flags })
}

/// Expected payoffs `sum_k v^k p_i^k - c_i sum_k e_i^k` of both players.
pub fn payoffs(game: &ContestGame, profile: &EffortProfile) -> Result<[f64; 2]> {
    let y = effective_efforts(game, profile)?;
    let p = win_probabilities(game, &y)?;
    let totals = profile.totals();
    let mut out = [0.0; 2];
    for player in Player::BOTH {
        let prize: f64 = game.values.iter().zip(p.of(player)).map(|(v, q)| v * q).sum();
        out[player.index()] = prize - game.cost(player) * totals[player.index()];
    }
    Ok(out)
}

pub fn payoff(game: &ContestGame, player: Player, profile: &EffortProfile) -> Result<f64> {
    Ok(payoffs(game, profile)?[player.index()])
}

/// Marginal prize value `d(p_i^k v^k)/d y_i^k` on every battlefield.
///
/// Infinite where the derivative does not exist: zero own effective effort
/// with `gamma < 1`, or zero effective effort from both players.
pub fn marginal_returns(game: &ContestGame, player: Player, y: &EffectiveEfforts) -> Vec<f64> {
    let own = y.of(player);
    let rival = y.of(player.other());
    let gamma = game.gamma;
    (0..game.m())
        .map(|k| {
            let (a, b, v) = (own[k].max(0.0), rival[k].max(0.0), game.values[k]);
            match (a > 0.0, b > 0.0) {
                (true, true) => {
                    let p = tullock(gamma, a, b);
                    gamma * p * (1.0 - p) * v / a
                }
                (true, false) => 0.0,
                (false, true) if gamma == 1.0 => v / b,
                _ => f64::INFINITY,
            }
        })
        .collect()
}

/// Gradient of player `i`'s payoff with respect to their own efforts:
/// `(I + rho_i) g_i - c_i` where `g_i` are the marginal returns.
pub fn payoff_gradient(game: &ContestGame, player: Player, profile: &EffortProfile) -> Result<Vec<f64>> {
    let y = effective_efforts(game, profile)?;
    let g = marginal_returns(game, player, &y);
    let rho = game.rho(player);
    let c = game.cost(player);
    Ok((0..game.m())
        .map(|k| {
            let mut total = g[k];
            for (l, &w) in rho.row(k).iter().enumerate() {
                if l != k && w != 0.0 {
                    total += w * g[l];
                }
            }
            total - c
        })
        .collect())
}
