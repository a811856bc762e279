//! The content of a set of pure profiles: every mixed profile whose support
//! lies inside the set.
//!
//! `x_H`, the total product mass on `H`, is 1 exactly on the content and
//! serves as the distance surrogate `1 - x_H`. The content is a union of
//! subgames; [`maximal_subgames`] lists the maximal ones.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::game::{Game, MixedProfile, Mode, Profile};

/// Support threshold for states produced by integration.
pub const INTEGRATED_SUPPORT_THRESHOLD: f64 = 1e-12;

/// A product set `rows × cols` of pure strategies. In symmetric mode the
/// subgame is a strategy set and `rows == cols`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Subgame {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl Subgame {
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        Self { rows, cols }
    }

    pub fn strategies(strategies: Vec<usize>) -> Self {
        Self::new(strategies.clone(), strategies)
    }

    pub fn whole(game: &Game) -> Self {
        Self::new((0..game.rows()).collect(), (0..game.cols()).collect())
    }

    pub fn profiles(&self, mode: Mode) -> Vec<Profile> {
        match mode {
            Mode::Symmetric => self.rows.iter().map(|&s| Profile::Strategy(s)).collect(),
            Mode::NonSymmetric => self
                .rows
                .iter()
                .flat_map(|&r| self.cols.iter().map(move |&c| Profile::Pair(r, c)))
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Subgame) -> bool {
        self.rows.iter().all(|r| other.rows.contains(r))
            && self.cols.iter().all(|c| other.cols.contains(c))
    }

    pub fn describe(&self, game: &Game) -> String {
        let names = |idx: &[usize], labels: &[String]| {
            let v: Vec<&str> = idx.iter().map(|&i| labels[i].as_str()).collect();
            format!("{{{}}}", v.join(","))
        };
        match game.mode() {
            Mode::Symmetric => names(&self.rows, game.row_labels()),
            Mode::NonSymmetric => format!(
                "{}x{}",
                names(&self.rows, game.row_labels()),
                names(&self.cols, game.col_labels())
            ),
        }
    }
}

/// Total product mass `x_H` on `h`.
pub fn mass_on(z: &MixedProfile, h: &[Profile]) -> f64 {
    let set: BTreeSet<Profile> = h.iter().copied().collect();
    set.into_iter()
        .map(|p| z.product_mass(p))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// `1 - x_H`: zero exactly on the content of `h`.
pub fn distance_to_content(z: &MixedProfile, h: &[Profile]) -> f64 {
    (1.0 - mass_on(z, h)).clamp(0.0, 1.0)
}

/// Whether every profile in the (product) support of `z` lies in `h`, with
/// support taken as the strictly positive entries.
pub fn in_content(z: &MixedProfile, h: &[Profile]) -> bool {
    in_content_with_threshold(z, h, 0.0)
}

/// As [`in_content`], but ignores entries at or below `threshold`.
pub fn in_content_with_threshold(z: &MixedProfile, h: &[Profile], threshold: f64) -> bool {
    let set: HashSet<Profile> = h.iter().copied().collect();
    z.support_profiles(threshold)
        .iter()
        .all(|p| set.contains(p))
}

/// All maximal subgames contained in `h`, sorted.
///
/// In symmetric mode profiles are strategies and the single maximal subgame
/// is `h` itself. Otherwise these are the maximal bicliques of `h` viewed as
/// a relation between rows and columns: every maximal column set is an
/// intersection of row neighbourhoods, so those intersections are closed
/// under pairwise intersection until no new set appears.
pub fn maximal_subgames(h: &[Profile], game: &Game) -> Vec<Subgame> {
    if h.is_empty() {
        return Vec::new();
    }
    if game.mode() == Mode::Symmetric {
        let strategies = h
            .iter()
            .filter_map(|p| match p {
                Profile::Strategy(s) => Some(*s),
                Profile::Pair(..) => None,
            })
            .collect();
        return vec![Subgame::strategies(strategies)];
    }

    let mut neighbourhood: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); game.rows()];
    for p in h {
        if let Profile::Pair(r, c) = *p {
            neighbourhood[r].insert(c);
        }
    }
    let row_sets: Vec<&BTreeSet<usize>> = neighbourhood.iter().filter(|n| !n.is_empty()).collect();

    let mut closed: HashSet<BTreeSet<usize>> = row_sets.iter().map(|n| (*n).clone()).collect();
    let mut frontier: Vec<BTreeSet<usize>> = closed.iter().cloned().collect();
    while let Some(set) = frontier.pop() {
        for n in &row_sets {
            let meet: BTreeSet<usize> = set.intersection(n).copied().collect();
            if !meet.is_empty() && closed.insert(meet.clone()) {
                frontier.push(meet);
            }
        }
    }

    let mut out: Vec<Subgame> = closed
        .into_iter()
        .map(|cols| {
            let rows = (0..game.rows())
                .filter(|&r| cols.is_subset(&neighbourhood[r]))
                .collect();
            Subgame::new(rows, cols.into_iter().collect())
        })
        .collect();
    out.sort();
    out
}

/// The sink profile set together with its maximal-subgame decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Content {
    pub profiles: Vec<Profile>,
    pub maximal_subgames: Vec<Subgame>,
}

impl Content {
    pub fn new(game: &Game, profiles: Vec<Profile>) -> Self {
        let maximal_subgames = maximal_subgames(&profiles, game);
        Self {
            profiles,
            maximal_subgames,
        }
    }

    pub fn contains(&self, z: &MixedProfile) -> bool {
        in_content(z, &self.profiles)
    }

    pub fn mass(&self, z: &MixedProfile) -> f64 {
        mass_on(z, &self.profiles)
    }

    pub fn report(&self, game: &Game) -> ContentReport {
        ContentReport {
            sink: self
                .profiles
                .iter()
                .map(|&p| game.profile_label(p))
                .collect(),
            maximal_subgames: self
                .maximal_subgames
                .iter()
                .map(|s| SubgameLabels {
                    rows: s
                        .rows
                        .iter()
                        .map(|&r| game.row_labels()[r].clone())
                        .collect(),
                    cols: s
                        .cols
                        .iter()
                        .map(|&c| game.col_labels()[c].clone())
                        .collect(),
                    description: s.describe(game),
                })
                .collect(),
            is_whole_game: self.profiles.len() == game.profile_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentReport {
    pub sink: Vec<String>,
    pub maximal_subgames: Vec<SubgameLabels>,
    pub is_whole_game: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgameLabels {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub description: String,
}
