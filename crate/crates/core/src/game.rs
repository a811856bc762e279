//! Exact two-player zero-sum games, pure profiles and mixed profiles.
//!
//! A game is stored as the single payoff matrix `M` of player 1; player 2
//! receives `-Mᵀ`. Symmetric games are the anti-symmetric square matrices,
//! and in that mode profiles and strategies coincide.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Tolerance used when validating that a mixed strategy lies on the simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symmetric,
    NonSymmetric,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Symmetric => f.write_str("symmetric"),
            Mode::NonSymmetric => f.write_str("non-symmetric"),
        }
    }
}

/// A pure profile. Non-symmetric games use `(row, col)` pairs; symmetric
/// games use a single strategy index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Profile {
    Pair(usize, usize),
    Strategy(usize),
}

/// Which player a pair of comparable profiles differ for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparability {
    Player1,
    Player2,
    /// Symmetric mode: every pair of distinct strategies is comparable.
    All,
}

/// Returns the player for which `a` and `b` differ, if they differ for
/// exactly one. Equal profiles are never comparable.
pub fn comparable(a: Profile, b: Profile) -> Option<Comparability> {
    match (a, b) {
        (Profile::Pair(a1, a2), Profile::Pair(b1, b2)) => {
            if a1 != b1 && a2 == b2 {
                Some(Comparability::Player1)
            } else if a1 == b1 && a2 != b2 {
                Some(Comparability::Player2)
            } else {
                None
            }
        }
        (Profile::Strategy(s), Profile::Strategy(t)) if s != t => Some(Comparability::All),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    mode: Mode,
    matrix: Vec<Vec<Rational>>,
    float: Vec<Vec<f64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl Game {
    /// Builds a game, validating shape, labels and (in symmetric mode)
    /// anti-symmetry. Missing labels default to `s0..` and `t0..`.
    pub fn new(
        mode: Mode,
        matrix: Vec<Vec<Rational>>,
        row_labels: Option<Vec<String>>,
        col_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidGame("empty matrix".into()));
        }
        let m = matrix[0].len();
        if m == 0 {
            return Err(Error::InvalidGame("empty matrix row".into()));
        }
        if let Some(i) = matrix.iter().position(|row| row.len() != m) {
            return Err(Error::InvalidGame(format!(
                "row {i} has {} entries, expected {m}",
                matrix[i].len()
            )));
        }
        if mode == Mode::Symmetric {
            if n != m {
                return Err(Error::InvalidGame(format!(
                    "symmetric game must be square, got {n}x{m}"
                )));
            }
            for i in 0..n {
                for j in i..n {
                    if matrix[i][j] != -matrix[j][i].clone() {
                        return Err(Error::InvalidGame(format!(
                            "symmetric game must be anti-symmetric: M[{i}][{j}] = {}, M[{j}][{i}] = {}",
                            matrix[i][j], matrix[j][i]
                        )));
                    }
                }
            }
        }

        let row_labels = match row_labels {
            Some(l) if l.len() != n => {
                return Err(Error::InvalidGame(format!(
                    "expected {n} row labels, got {}",
                    l.len()
                )))
            }
            Some(l) => l,
            None => (0..n).map(|i| format!("s{i}")).collect(),
        };
        let col_labels = match (mode, col_labels) {
            (Mode::Symmetric, _) => row_labels.clone(),
            (_, Some(l)) if l.len() != m => {
                return Err(Error::InvalidGame(format!(
                    "expected {m} column labels, got {}",
                    l.len()
                )))
            }
            (_, Some(l)) => l,
            (_, None) => (0..m).map(|j| format!("t{j}")).collect(),
        };
        check_unique(&row_labels, "row")?;
        check_unique(&col_labels, "column")?;

        let float = matrix
            .iter()
            .map(|row| row.iter().map(rational_to_f64).collect())
            .collect();

        Ok(Self {
            mode,
            matrix,
            float,
            row_labels,
            col_labels,
        })
    }

    /// Convenience constructor from integer payoffs with default labels.
    pub fn from_integers(mode: Mode, matrix: &[Vec<i64>]) -> Result<Self> {
        let matrix = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| Rational::from_integer(v.into()))
                    .collect()
            })
            .collect();
        Self::new(mode, matrix, None, None)
    }

    pub fn with_labels(mut self, rows: &[&str], cols: &[&str]) -> Result<Self> {
        let rows: Vec<String> = rows.iter().map(|s| s.to_string()).collect();
        let cols = match self.mode {
            Mode::Symmetric => None,
            Mode::NonSymmetric => Some(cols.iter().map(|s| s.to_string()).collect()),
        };
        let matrix = std::mem::take(&mut self.matrix);
        Self::new(self.mode, matrix, Some(rows), cols)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_symmetric(&self) -> bool {
        self.mode == Mode::Symmetric
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.matrix[row][col]
    }

    /// The payoff matrix converted to floats, for the dynamics.
    pub fn float_matrix(&self) -> &[Vec<f64>] {
        &self.float
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Number of pure profiles: `n·m` for non-symmetric games, `n` otherwise.
    pub fn profile_count(&self) -> usize {
        match self.mode {
            Mode::Symmetric => self.rows(),
            Mode::NonSymmetric => self.rows() * self.cols(),
        }
    }

    /// All pure profiles in row-major order.
    pub fn profiles(&self) -> Vec<Profile> {
        (0..self.profile_count())
            .map(|i| self.profile_at(i))
            .collect()
    }

    pub fn profile_at(&self, index: usize) -> Profile {
        match self.mode {
            Mode::Symmetric => Profile::Strategy(index),
            Mode::NonSymmetric => Profile::Pair(index / self.cols(), index % self.cols()),
        }
    }

    /// Row-major index of `p`, or an error if `p` does not belong to this game.
    pub fn profile_index(&self, p: Profile) -> Result<usize> {
        match (self.mode, p) {
            (Mode::NonSymmetric, Profile::Pair(r, c)) if r < self.rows() && c < self.cols() => {
                Ok(r * self.cols() + c)
            }
            (Mode::Symmetric, Profile::Strategy(s)) if s < self.rows() => Ok(s),
            _ => Err(Error::Dimension(format!(
                "profile {p:?} does not belong to this game"
            ))),
        }
    }

    pub fn profile_label(&self, p: Profile) -> String {
        match p {
            Profile::Pair(r, c) => format!("{},{}", self.row_labels[r], self.col_labels[c]),
            Profile::Strategy(s) => self.row_labels[s].clone(),
        }
    }

    /// Payoff to player 1 at a pure profile (symmetric mode has no such
    /// notion beyond the diagonal; use [`Game::entry`] instead).
    fn profile_payoff(&self, p: Profile) -> &Rational {
        match p {
            Profile::Pair(r, c) => &self.matrix[r][c],
            Profile::Strategy(s) => &self.matrix[s][s],
        }
    }

    pub fn comparable(&self, a: Profile, b: Profile) -> Result<Option<Comparability>> {
        self.profile_index(a)?;
        self.profile_index(b)?;
        Ok(comparable(a, b))
    }

    /// Entry `W_{p,q}` of the weight matrix: the payoff difference between
    /// comparable profiles, signed so that an arc `p → q` exists iff it is
    /// nonpositive.
    pub fn weight(&self, p: Profile, q: Profile) -> Result<Rational> {
        match self.comparable(p, q)? {
            Some(Comparability::Player1) => Ok(self.profile_payoff(p) - self.profile_payoff(q)),
            Some(Comparability::Player2) => Ok(self.profile_payoff(q) - self.profile_payoff(p)),
            Some(Comparability::All) => match (p, q) {
                (Profile::Strategy(s), Profile::Strategy(t)) => Ok(self.matrix[s][t].clone()),
                _ => unreachable!("symmetric comparability only holds between strategies"),
            },
            None => Err(Error::Incomparable(
                self.profile_label(p),
                self.profile_label(q),
            )),
        }
    }

    /// Player 1's expected payoff `xᵀMy` (or `xᵀMx` in symmetric mode).
    pub fn expected_payoff(&self, z: &MixedProfile) -> Result<f64> {
        z.check_dimensions(self)?;
        let (x, y) = match z {
            MixedProfile::Symmetric(x) => (x, x),
            MixedProfile::Pair(x, y) => (x, y),
        };
        Ok(bilinear(&self.float, x, y))
    }

    /// Multiplies every payoff by a rational factor.
    pub fn scaled(&self, factor: &Rational) -> Result<Self> {
        let matrix = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|v| v * factor).collect())
            .collect();
        Self::new(
            self.mode,
            matrix,
            Some(self.row_labels.clone()),
            match self.mode {
                Mode::Symmetric => None,
                Mode::NonSymmetric => Some(self.col_labels.clone()),
            },
        )
    }

    /// Parses the JSON game-file format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let matrix = file
            .matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        parse_rational(v).ok_or_else(|| {
                            Error::Parse(format!("entry [{i}][{j}] is not a rational: {v}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.mode, matrix, file.row_labels, file.col_labels)
    }

    /// Serialises into the game-file format. Integers are written as JSON
    /// numbers, other rationals as `"p/q"` strings.
    pub fn to_json(&self) -> String {
        let matrix = self
            .matrix
            .iter()
            .map(|row| row.iter().map(rational_to_json).collect())
            .collect();
        let file = GameFile {
            mode: self.mode,
            matrix,
            row_labels: Some(self.row_labels.clone()),
            col_labels: match self.mode {
                Mode::Symmetric => None,
                Mode::NonSymmetric => Some(self.col_labels.clone()),
            },
        };
        serde_json::to_string_pretty(&file).expect("game file serialisation cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    mode: Mode,
    matrix: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    col_labels: Option<Vec<String>>,
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidGame(format!("duplicate {what} label {l:?}")));
        }
    }
    Ok(())
}

fn parse_rational(v: &Value) -> Option<Rational> {
    match v {
        Value::Number(n) => n.as_i64().map(|i| Rational::from_integer(i.into())),
        Value::String(s) => {
            let s = s.trim();
            match s.split_once('/') {
                Some((num, den)) => {
                    let num: BigInt = num.trim().parse().ok()?;
                    let den: BigInt = den.trim().parse().ok()?;
                    if den.is_zero() {
                        None
                    } else {
                        Some(Rational::new(num, den))
                    }
                }
                None => s.parse::<BigInt>().ok().map(Rational::from_integer),
            }
        }
        _ => None,
    }
}

fn rational_to_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.to_integer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(r.to_string())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn bilinear(m: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    m.iter()
        .zip(x)
        .map(|(row, &xi)| xi * row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// A mixed profile: one distribution per population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MixedProfile {
    Symmetric(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

impl MixedProfile {
    pub fn symmetric(x: Vec<f64>) -> Result<Self> {
        check_simplex(&x, "strategy")?;
        Ok(Self::Symmetric(x))
    }

    pub fn pair(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_simplex(&x, "player 1 strategy")?;
        check_simplex(&y, "player 2 strategy")?;
        Ok(Self::Pair(x, y))
    }

    /// Builds a mixed profile of the right shape for `game` from
    /// per-population vectors.
    pub fn for_game(game: &Game, mut parts: Vec<Vec<f64>>) -> Result<Self> {
        let z = match (game.mode(), parts.len()) {
            (Mode::Symmetric, 1) => Self::symmetric(parts.pop().unwrap())?,
            (Mode::NonSymmetric, 2) => {
                let y = parts.pop().unwrap();
                let x = parts.pop().unwrap();
                Self::pair(x, y)?
            }
            (mode, k) => {
                return Err(Error::Dimension(format!(
                    "a {mode} game needs {} population vectors, got {k}",
                    if mode == Mode::Symmetric { 1 } else { 2 }
                )))
            }
        };
        z.check_dimensions(game)?;
        Ok(z)
    }

    pub fn uniform(game: &Game) -> Self {
        let u = |k: usize| vec![1.0 / k as f64; k];
        match game.mode() {
            Mode::Symmetric => Self::Symmetric(u(game.rows())),
            Mode::NonSymmetric => Self::Pair(u(game.rows()), u(game.cols())),
        }
    }

    pub fn pure(game: &Game, p: Profile) -> Result<Self> {
        game.profile_index(p)?;
        let e = |k: usize, i: usize| {
            let mut v = vec![0.0; k];
            v[i] = 1.0;
            v
        };
        Ok(match p {
            Profile::Pair(r, c) => Self::Pair(e(game.rows(), r), e(game.cols(), c)),
            Profile::Strategy(s) => Self::Symmetric(e(game.rows(), s)),
        })
    }

    /// The per-population vectors (one or two).
    pub fn parts(&self) -> Vec<&[f64]> {
        match self {
            Self::Symmetric(x) => vec![x],
            Self::Pair(x, y) => vec![x, y],
        }
    }

    pub fn parts_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Self::Symmetric(x) => vec![x],
            Self::Pair(x, y) => vec![x, y],
        }
    }

    pub fn check_dimensions(&self, game: &Game) -> Result<()> {
        let ok = match (self, game.mode()) {
            (Self::Symmetric(x), Mode::Symmetric) => x.len() == game.rows(),
            (Self::Pair(x, y), Mode::NonSymmetric) => {
                x.len() == game.rows() && y.len() == game.cols()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "mixed profile shape {:?} does not fit a {} {}x{} game",
                self.parts().iter().map(|p| p.len()).collect::<Vec<_>>(),
                game.mode(),
                game.rows(),
                game.cols()
            )))
        }
    }

    /// Mass `x_p` that the product distribution puts on pure profile `p`.
    pub fn product_mass(&self, p: Profile) -> f64 {
        match (self, p) {
            (Self::Pair(x, y), Profile::Pair(r, c)) => x[r] * y[c],
            (Self::Symmetric(x), Profile::Strategy(s)) => x[s],
            _ => 0.0,
        }
    }

    /// Product masses of every profile of `game`, in row-major order.
    pub fn profile_masses(&self, game: &Game) -> Vec<f64> {
        game.profiles()
            .into_iter()
            .map(|p| self.product_mass(p))
            .collect()
    }

    /// Indices with mass strictly above `threshold`, one list per population.
    pub fn support(&self, threshold: f64) -> Vec<Vec<usize>> {
        self.parts()
            .into_iter()
            .map(|v| (0..v.len()).filter(|&i| v[i] > threshold).collect())
            .collect()
    }

    /// Pure profiles in the support, as a product set.
    pub fn support_profiles(&self, threshold: f64) -> Vec<Profile> {
        let s = self.support(threshold);
        match self {
            Self::Symmetric(_) => s[0].iter().map(|&i| Profile::Strategy(i)).collect(),
            Self::Pair(..) => s[0]
                .iter()
                .flat_map(|&r| s[1].iter().map(move |&c| Profile::Pair(r, c)))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.parts().iter().all(|v| v.iter().all(|x| x.is_finite()))
    }
}

fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidMixedProfile(format!("{what} is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidMixedProfile(format!(
            "{what} has a negative or non-finite entry {x}"
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidMixedProfile(format!(
            "{what} sums to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Matching Pennies with strategies `H`, `T`: player 1 wants to match.
pub fn matching_pennies() -> Game {
    Game::from_integers(Mode::NonSymmetric, &[vec![1, -1], vec![-1, 1]])
        .and_then(|g| g.with_labels(&["H", "T"], &["H", "T"]))
        .expect("matching pennies is valid")
}

/// Rock-Paper-Scissors as a symmetric game.
pub fn rock_paper_scissors() -> Game {
    Game::from_integers(
        Mode::Symmetric,
        &[vec![0, -1, 1], vec![1, 0, -1], vec![-1, 1, 0]],
    )
    .and_then(|g| g.with_labels(&["R", "P", "S"], &[]))
    .expect("rock-paper-scissors is valid")
}
