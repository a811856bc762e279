//! Seeded random zero-sum games and random points in strategy space.
//!
//! Payoffs are i.i.d. uniform integers in `[-9, 9]`; symmetric games are
//! sampled as `K - Kᵀ` for a random integer `K`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::game::{Game, MixedProfile, Mode, Profile};

pub const PAYOFF_RANGE: i64 = 9;
pub const MAX_NONSYMMETRIC_DIM: usize = 5;
pub const MAX_SYMMETRIC_DIM: usize = 7;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream for item `index` of a batch seeded with `seed`, so
/// per-game sampling does not depend on evaluation order.
pub fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index as u64 + 1);
    r
}

pub fn random_nonsymmetric(rng: &mut impl Rng, max_dim: usize) -> Game {
    let n = rng.random_range(1..=max_dim);
    let m = rng.random_range(1..=max_dim);
    let matrix: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| rng.random_range(-PAYOFF_RANGE..=PAYOFF_RANGE))
                .collect()
        })
        .collect();
    Game::from_integers(Mode::NonSymmetric, &matrix).expect("random game is valid")
}

pub fn random_symmetric(rng: &mut impl Rng, max_dim: usize) -> Game {
    let n = rng.random_range(1..=max_dim);
    let k: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| rng.random_range(-PAYOFF_RANGE..=PAYOFF_RANGE))
                .collect()
        })
        .collect();
    let matrix: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| k[i][j] - k[j][i]).collect())
        .collect();
    Game::from_integers(Mode::Symmetric, &matrix).expect("K - Kᵀ is anti-symmetric")
}

/// `count` games alternating non-symmetric (even positions) and symmetric
/// (odd positions).
pub fn mixed_corpus(seed: u64, count: usize) -> Vec<Game> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                random_nonsymmetric(&mut r, MAX_NONSYMMETRIC_DIM)
            } else {
                random_symmetric(&mut r, MAX_SYMMETRIC_DIM)
            }
        })
        .collect()
}

pub fn nonsymmetric_corpus(seed: u64, count: usize) -> Vec<Game> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_nonsymmetric(&mut r, MAX_NONSYMMETRIC_DIM))
        .collect()
}

fn dirichlet(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let w: Vec<f64> = w.into_iter().map(|v: f64| v.max(1e-300)).collect();
    let total: f64 = w.iter().sum();
    let mut v: Vec<f64> = w.into_iter().map(|x| x / total).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - v.iter().sum::<f64>();
    let (imax, _) =
        v.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
        );
    v[imax] += residue;
    v
}

/// A uniformly random interior point of the strategy space.
pub fn random_interior(game: &Game, rng: &mut impl Rng) -> MixedProfile {
    match game.mode() {
        Mode::Symmetric => MixedProfile::Symmetric(dirichlet(rng, game.rows())),
        Mode::NonSymmetric => {
            MixedProfile::Pair(dirichlet(rng, game.rows()), dirichlet(rng, game.cols()))
        }
    }
}

/// A random interior point pulled towards pure profile `p` by a random
/// factor, which spreads `x_H` across `(0, 1)`.
pub fn random_interior_near(game: &Game, p: Profile, rng: &mut impl Rng) -> MixedProfile {
    let lambda: f64 = rng.random_range(0.01..1.0);
    let base = random_interior(game, rng);
    let pure = MixedProfile::pure(game, p).expect("profile belongs to the game");
    let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(u, e)| lambda * u + (1.0 - lambda) * e)
            .collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    };
    match (&base, &pure) {
        (MixedProfile::Symmetric(u), MixedProfile::Symmetric(e)) => {
            MixedProfile::Symmetric(mix(u, e))
        }
        (MixedProfile::Pair(u1, u2), MixedProfile::Pair(e1, e2)) => {
            MixedProfile::Pair(mix(u1, e1), mix(u2, e2))
        }
        _ => unreachable!("same game, same shape"),
    }
}
