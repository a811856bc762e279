//! Von Neumann symmetrisation: the anti-symmetric `(nm)×(nm)` matrix
//! `S[p][q] = M[p₁][q₂] - M[q₁][p₂]` indexed by profiles in row-major order.
//!
//! On comparable profiles `S` agrees with the weight matrix, and the
//! two-population replicator on `M` embeds in the single-population
//! replicator on `S` over product distributions.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{comparable, rational_to_f64, Game, Mode, Profile, Rational};

#[derive(Clone, Debug)]
pub struct SymmetrisedGame {
    base: Game,
    matrix: Vec<Vec<Rational>>,
    float: Vec<Vec<f64>>,
}

/// Builds `S_M` for a non-symmetric game.
pub fn symmetrise(game: &Game) -> Result<SymmetrisedGame> {
    if game.is_symmetric() {
        return Err(Error::WrongMode {
            expected: "non-symmetric",
        });
    }
    let profiles = game.profiles();
    let matrix: Vec<Vec<Rational>> = profiles
        .iter()
        .map(|&p| {
            profiles
                .iter()
                .map(|&q| symmetrised_entry(game, p, q))
                .collect()
        })
        .collect();
    let float = matrix
        .iter()
        .map(|row| row.iter().map(rational_to_f64).collect())
        .collect();
    Ok(SymmetrisedGame {
        base: game.clone(),
        matrix,
        float,
    })
}

fn symmetrised_entry(game: &Game, p: Profile, q: Profile) -> Rational {
    match (p, q) {
        (Profile::Pair(p1, p2), Profile::Pair(q1, q2)) => game.entry(p1, q2) - game.entry(q1, p2),
        _ => unreachable!("symmetrisation is only defined on profile pairs"),
    }
}

impl SymmetrisedGame {
    pub fn base(&self) -> &Game {
        &self.base
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn float_matrix(&self) -> &[Vec<f64>] {
        &self.float
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn entry(&self, p: Profile, q: Profile) -> Result<&Rational> {
        let i = self.base.profile_index(p)?;
        let j = self.base.profile_index(q)?;
        Ok(&self.matrix[i][j])
    }

    /// Exact check of `S = -Sᵀ`; returns the offending index pairs.
    pub fn antisymmetry_violations(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i..n {
                if self.matrix[i][j] != -self.matrix[j][i].clone() {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    /// The symmetrisation as a symmetric game whose strategies are labelled
    /// by the base game's profiles.
    pub fn to_game(&self) -> Result<Game> {
        let labels = self
            .base
            .profiles()
            .into_iter()
            .map(|p| self.base.profile_label(p))
            .collect();
        Game::new(Mode::Symmetric, self.matrix.clone(), Some(labels), None)
    }

    /// `(S x)_p` for the product distribution `masses` (row-major).
    pub fn apply(&self, masses: &[f64]) -> Vec<f64> {
        self.float
            .iter()
            .map(|row| row.iter().zip(masses).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `W_{p,q}` with the convention `W_{p,p} = 0`.
fn weight_or_zero(game: &Game, p: Profile, q: Profile) -> Result<Rational> {
    if p == q {
        Ok(Rational::zero())
    } else {
        game.weight(p, q)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityViolation {
    pub p: String,
    pub q: String,
    pub symmetrised: String,
    pub via_source: String,
    pub via_target: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightIdentityReport {
    pub pairs_checked: usize,
    pub antisymmetry_violations: usize,
    /// Comparable pairs where `S[p][q] != W_{p,q}`.
    pub comparable_mismatches: usize,
    /// Pairs where either decomposition of `S[p][q]` through the two
    /// intermediate profiles fails.
    pub violations: Vec<IdentityViolation>,
}

impl WeightIdentityReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry_violations == 0
            && self.comparable_mismatches == 0
            && self.violations.is_empty()
    }
}

/// Checks, for every ordered pair of profiles, that
/// `S[p][q] = W_{p,(p₁,q₂)} + W_{p,(q₁,p₂)} = W_{(p₁,q₂),q} + W_{(q₁,p₂),q}`
/// in exact arithmetic, along with anti-symmetry of `S` and its agreement
/// with `W` on comparable pairs.
pub fn check_weight_identity(game: &Game) -> Result<WeightIdentityReport> {
    let s = symmetrise(game)?;
    let profiles = game.profiles();
    let mut violations = Vec::new();
    let mut comparable_mismatches = 0;
    for &p in &profiles {
        for &q in &profiles {
            let (Profile::Pair(p1, p2), Profile::Pair(q1, q2)) = (p, q) else {
                unreachable!()
            };
            let a = Profile::Pair(p1, q2);
            let b = Profile::Pair(q1, p2);
            let sym = s.entry(p, q)?;
            let via_source = weight_or_zero(game, p, a)? + weight_or_zero(game, p, b)?;
            let via_target = weight_or_zero(game, a, q)? + weight_or_zero(game, b, q)?;
            if *sym != via_source || *sym != via_target {
                violations.push(IdentityViolation {
                    p: game.profile_label(p),
                    q: game.profile_label(q),
                    symmetrised: sym.to_string(),
                    via_source: via_source.to_string(),
                    via_target: via_target.to_string(),
                });
            }
            if comparable(p, q).is_some() && *sym != game.weight(p, q)? {
                comparable_mismatches += 1;
            }
        }
    }
    Ok(WeightIdentityReport {
        pairs_checked: profiles.len() * profiles.len(),
        antisymmetry_violations: s.antisymmetry_violations().len(),
        comparable_mismatches,
        violations,
    })
}
