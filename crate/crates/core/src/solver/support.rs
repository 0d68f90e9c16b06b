//! The marginal-rate system for a fixed support pair and its damped Newton solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{ContestError, Result};
use crate::game::{ContestGame, EffortProfile, Player};
use crate::linalg;

use super::SupportPair;

/// Effective efforts implied by marginal rates `mu` (one player's row `k`).
///
/// With `a_i = mu_i c_i`, `y_i = gamma a_i^(gamma-1) a_j^gamma v / (a_1^gamma + a_2^gamma)^2`.
pub(crate) fn effective_from_mu(gamma: f64, a_own: f64, a_rival: f64, v: f64) -> f64 {
    if gamma == 1.0 {
        let s = a_own + a_rival;
        return a_rival * v / (s * s);
    }
    if a_own <= 0.0 || a_rival <= 0.0 {
        return f64::NAN;
    }
    let (po, pr) = (a_own.powf(gamma), a_rival.powf(gamma));
    let s = po + pr;
    gamma * po / a_own * pr * v / (s * s)
}

/// Relative singular-value cutoff for Newton steps on a differenced Jacobian.
const JAC_RTOL: f64 = 1e-8;
/// Jacobians with `rcond` below this are reported as rank-deficient.
const RANK_RTOL: f64 = 1e-8;

struct PlayerBlock {
    /// Support, ascending.
    on: Vec<usize>,
    /// Complement of the support, ascending.
    off: Vec<usize>,
    /// `I + rho`.
    a: DMatrix<f64>,
    /// Pseudo-inverse of `(I + rho^{PP})^T`.
    recover: DMatrix<f64>,
    /// `(rho^{P,-P})^T` times `recover`: spillover into the complement.
    leak: DMatrix<f64>,
    /// Normalizer for the balance rows.
    scale: f64,
}

/// Residual map of the support system, unknowns `(mu_1, mu_2)` stacked.
pub(crate) struct SupportSystem<'g> {
    game: &'g ContestGame,
    blocks: [PlayerBlock; 2],
    /// Some `I + rho^{PP}` block is numerically singular.
    pub singular_block: bool,
}

#[derive(Clone)]
pub(crate) struct Candidate {
    pub mu: [Vec<f64>; 2],
    pub profile: EffortProfile,
    pub rank_deficient: bool,
}

impl<'g> SupportSystem<'g> {
    pub fn new(game: &'g ContestGame, supports: &SupportPair) -> Self {
        let m = game.m();
        let vmax = game.values.iter().fold(0.0f64, |a, &v| a.max(v));
        let mut singular_block = false;
        let blocks = Player::BOTH.map(|player| {
            let set = supports.of(player);
            let on: Vec<usize> = (0..m).filter(|k| set.contains(k)).collect();
            let off: Vec<usize> = (0..m).filter(|k| !set.contains(k)).collect();
            let rho = game.rho(player);
            let a = rho.identity_plus();
            let sub = a.select_rows(&on).select_columns(&on).transpose();
            if !on.is_empty() && linalg::rcond(&sub) < crate::game::RCOND_WARN {
                singular_block = true;
            }
            let recover = if on.is_empty() {
                DMatrix::zeros(0, 0)
            } else {
                sub.clone()
                    .pseudo_inverse(linalg::PINV_RTOL * sub.norm())
                    .unwrap_or_else(|_| DMatrix::zeros(on.len(), on.len()))
            };
            let cross = DMatrix::from_fn(off.len(), on.len(), |r, c| rho.get(on[c], off[r]));
            let leak = &cross * &recover;
            let cost = game.cost(player);
            PlayerBlock { on, off, a, recover, leak, scale: game.gamma * vmax / cost }
        });
        SupportSystem { game, blocks, singular_block }
    }

    fn m(&self) -> usize {
        self.game.m()
    }

    /// Effective efforts of both players at `mu`, or `None` if undefined.
    fn effective(&self, mu: &[f64]) -> Option<[Vec<f64>; 2]> {
        let m = self.m();
        let g = self.game.gamma;
        let c = self.game.costs;
        let mut y = [vec![0.0; m], vec![0.0; m]];
        for k in 0..m {
            let a1 = mu[k] * c[0];
            let a2 = mu[m + k] * c[1];
            let v = self.game.values[k];
            y[0][k] = effective_from_mu(g, a1, a2, v);
            y[1][k] = effective_from_mu(g, a2, a1, v);
            if !(y[0][k].is_finite() && y[1][k].is_finite()) {
                return None;
            }
        }
        Some(y)
    }

    pub fn residual(&self, mu: &[f64]) -> Option<Vec<f64>> {
        let m = self.m();
        let y = self.effective(mu)?;
        let mut out = Vec::with_capacity(2 * m);
        for (i, block) in self.blocks.iter().enumerate() {
            let mu_i = &mu[i * m..(i + 1) * m];
            for &k in &block.on {
                let row: f64 = (0..m).map(|l| block.a[(k, l)] * mu_i[l]).sum();
                out.push(row - 1.0);
            }
            let y_on: Vec<f64> = block.on.iter().map(|&k| y[i][k]).collect();
            let spill = linalg::matvec(&block.leak, &y_on);
            for (r, &l) in block.off.iter().enumerate() {
                out.push((y[i][l] - spill[r]) / block.scale);
            }
        }
        Some(out)
    }

    fn jacobian(&self, mu: &[f64]) -> Option<DMatrix<f64>> {
        let n = mu.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut probe = mu.to_vec();
        for j in 0..n {
            let h = 1e-7 * mu[j].abs().max(1e-2);
            probe[j] = mu[j] + h;
            let fp = self.residual(&probe);
            probe[j] = mu[j] - h;
            let fm = self.residual(&probe);
            probe[j] = mu[j];
            match (fp, fm) {
                (Some(fp), Some(fm)) => {
                    for r in 0..n {
                        jac[(r, j)] = (fp[r] - fm[r]) / (2.0 * h);
                    }
                }
                (Some(fp), None) => {
                    let f0 = self.residual(mu)?;
                    for r in 0..n {
                        jac[(r, j)] = (fp[r] - f0[r]) / h;
                    }
                }
                _ => return None,
            }
        }
        Some(jac)
    }

    /// Largest step fraction keeping every rate positive when `gamma < 1`.
    fn max_step(&self, mu: &[f64], step: &[f64]) -> f64 {
        if self.game.gamma == 1.0 {
            return 1.0;
        }
        let mut alpha: f64 = 1.0;
        for (x, d) in mu.iter().zip(step) {
            if *d < 0.0 {
                alpha = alpha.min(-0.99 * x / d);
            }
        }
        alpha
    }

    /// Damped Newton with a Levenberg-Marquardt fallback when the line search stalls.
    pub fn newton(&self, start: &[f64], max_iter: usize) -> Result<Candidate> {
        let n = start.len();
        let mut mu = start.to_vec();
        let mut f = match self.residual(&mu) {
            Some(f) => f,
            None => {
                return Err(ContestError::NewtonDiverged { iterations: 0, residual: f64::INFINITY })
            }
        };
        let mut norm = linalg::max_abs(&f);
        let mut iterations = 0;
        let mut lm: f64 = 1e-6;
        while norm > 1e-13 && iterations < max_iter {
            iterations += 1;
            let jac = match self.jacobian(&mu) {
                Some(j) => j,
                None => break,
            };
            let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
            let mut accepted = false;
            // finite-difference noise must not leak into null directions
            let newton_step = linalg::lstsq_rtol(&jac, &neg_f, JAC_RTOL);
            if let Some((next, fnext, nn)) = self.line_search(&mu, &newton_step, norm) {
                mu = next;
                f = fnext;
                norm = nn;
                accepted = true;
                lm = (lm * 0.1).max(1e-12);
            } else {
                let jt = jac.transpose();
                let jtj = &jt * &jac;
                let g = &jt * DVector::from_column_slice(&f);
                for _ in 0..12 {
                    let mut damped = jtj.clone();
                    for d in 0..n {
                        damped[(d, d)] += lm * (1.0 + jtj[(d, d)]);
                    }
                    let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
                    let step = linalg::lstsq_rtol(&damped, &rhs, JAC_RTOL);
                    if let Some((next, fnext, nn)) = self.line_search(&mu, &step, norm) {
                        mu = next;
                        f = fnext;
                        norm = nn;
                        accepted = true;
                        break;
                    }
                    lm *= 10.0;
                }
            }
            if !accepted {
                break;
            }
        }
        if norm > 1e-10 || !norm.is_finite() {
            return Err(ContestError::NewtonDiverged { iterations, residual: norm });
        }
        let rank_deficient = match self.jacobian(&mu) {
            Some(jac) => linalg::rcond(&jac) < RANK_RTOL,
            None => true,
        };
        let profile = self.efforts(&mu).ok_or(ContestError::NewtonDiverged {
            iterations,
            residual: f64::INFINITY,
        })?;
        let m = self.m();
        Ok(Candidate {
            mu: [mu[..m].to_vec(), mu[m..].to_vec()],
            profile,
            rank_deficient: rank_deficient || self.singular_block,
        })
    }

    fn line_search(
        &self,
        mu: &[f64],
        step: &[f64],
        norm: f64,
    ) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        if step.iter().any(|s| !s.is_finite()) {
            return None;
        }
        let mut alpha = self.max_step(mu, step);
        while alpha > 1e-10 {
            let trial: Vec<f64> = mu.iter().zip(step).map(|(x, d)| x + alpha * d).collect();
            if let Some(ft) = self.residual(&trial) {
                let nt = linalg::max_abs(&ft);
                if nt.is_finite() && nt < (1.0 - 1e-4 * alpha) * norm {
                    return Some((trial, ft, nt));
                }
            }
            alpha *= 0.5;
        }
        None
    }

    /// Reconstructs efforts from rates: zero off the support, recovered from
    /// the effective efforts on it.
    pub fn efforts(&self, mu: &[f64]) -> Option<EffortProfile> {
        let m = self.m();
        let y = self.effective(mu)?;
        let mut profile = EffortProfile::zeros(m);
        for (i, block) in self.blocks.iter().enumerate() {
            let y_on: Vec<f64> = block.on.iter().map(|&k| y[i][k]).collect();
            let e_on = linalg::matvec(&block.recover, &y_on);
            let target = if i == 0 { &mut profile.e1 } else { &mut profile.e2 };
            for (r, &k) in block.on.iter().enumerate() {
                target[k] = e_on[r];
            }
        }
        Some(profile)
    }

    /// `((I + rho_i) mu_i)_k - 1` for every battlefield.
    pub fn stationarity(&self, player: Player, mu: &[f64]) -> Vec<f64> {
        let block = &self.blocks[player.index()];
        linalg::matvec(&block.a, mu).into_iter().map(|x| x - 1.0).collect()
    }
}

/// Least-squares rates `(I + rho_i) mu_i = 1`, floored to stay positive.
pub(crate) fn centrality_start(game: &ContestGame) -> Vec<f64> {
    let m = game.m();
    let mut out = Vec::with_capacity(2 * m);
    for player in Player::BOTH {
        let mu = linalg::lstsq(&game.rho(player).identity_plus(), &vec![1.0; m]);
        let top = mu.iter().fold(0.0f64, |a, &x| a.max(x)).max(1e-3);
        out.extend(mu.into_iter().map(|x| x.max(1e-3 * top)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Spillovers;

    #[test]
    fn rates_reproduce_tullock_first_order_conditions() {
        for &gamma in &[1.0, 0.6] {
            let (a1, a2, v) = (0.8, 1.7, 2.5);
            let y1 = effective_from_mu(gamma, a1, a2, v);
            let y2 = effective_from_mu(gamma, a2, a1, v);
            let p1 = crate::game::tullock(gamma, y1, y2);
            let expected = a2.powf(gamma) / (a1.powf(gamma) + a2.powf(gamma));
            assert!((p1 - expected).abs() < 1e-14);
            // d/dy1 of p1 v equals a1
            let g1 = gamma * p1 * (1.0 - p1) * v / y1;
            assert!((g1 - a1).abs() < 1e-12, "gamma {gamma}: {g1} vs {a1}");
        }
    }

    #[test]
    fn symmetric_full_support_solves_in_one_shot() {
        let game = ContestGame::plain(1.0, [1.0, 1.0], vec![1.0; 3]);
        let sys = SupportSystem::new(&game, &SupportPair::full(3));
        let cand = sys.newton(&centrality_start(&game), 200).unwrap();
        for e in cand.profile.e1.iter().chain(&cand.profile.e2) {
            assert!((e - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn two_node_corner_support() {
        // lambda between the thresholds: player 2 only fights on battlefield 1
        let lambda = 2.0;
        let mut rho2 = Spillovers::zeros(2);
        rho2.set(0, 1, lambda);
        let game = ContestGame::new(1.0, [1.0, 2.0], vec![1.0, 1.0], Spillovers::zeros(2), rho2);
        let supports = SupportPair::new(vec![0, 1], vec![0]);
        let sys = SupportSystem::new(&game, &supports);
        let cand = sys.newton(&centrality_start(&game), 200).unwrap();
        let (c1, c2) = (1.0, 2.0);
        let expected = (1.0 + lambda.sqrt()).powi(2) * c1 / (c1 * (1.0 + lambda) + c2).powi(2);
        assert!((cand.profile.e2[0] - expected).abs() < 1e-10);
        assert_eq!(cand.profile.e2[1], 0.0);
    }
}
