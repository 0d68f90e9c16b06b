//! Seeded random games shared by the integration suites.
#![allow(dead_code)]

use netcontest::{validate_game, ContestGame, EffortProfile, Spillovers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GAMMAS: [f64; 3] = [0.5, 0.8, 1.0];

/// Random game with sparse nonnegative networks; resamples until every
/// principal submatrix of `I + rho_i` is comfortably nonsingular.
pub fn random_game(seed: u64, m: usize, gamma: f64) -> ContestGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..3.0)).collect();
        let costs = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
        let mut net = || {
            Spillovers::from_fn(m, |k, l| {
                if k != l && rng.gen_bool(0.35) {
                    rng.gen_range(0.05..1.0)
                } else {
                    0.0
                }
            })
        };
        let (rho1, rho2) = (net(), net());
        let game = ContestGame::new(gamma, costs, values, rho1, rho2);
        let report = validate_game(&game);
        if report.is_valid() && !report.has_singularity() && report.warnings.is_empty() {
            return game;
        }
    }
}

/// Same network for both players.
pub fn random_shared_network_game(seed: u64, m: usize, gamma: f64) -> ContestGame {
    let mut game = random_game(seed, m, gamma);
    game.rho2 = game.rho1.clone();
    game
}

/// Strictly positive random efforts.
pub fn random_profile(seed: u64, m: usize) -> EffortProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut draw = || (0..m).map(|_| rng.gen_range(0.05..2.0)).collect::<Vec<f64>>();
    let e1 = draw();
    EffortProfile::new(e1, draw())
}

pub mod props;
