//! Randomised verification suites over seeded corpora of zero-sum games.
//!
//! Each suite evaluates its games in parallel, collects results in corpus
//! order, and reports the first failing games verbatim so they can be
//! replayed.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::content::mass_on;
use crate::dynamics::{check_embedding, flow, SinkLyapunov};
use crate::equilibrium::{
    best_response_residual, col_guarantee, fixed_point_residual, row_guarantee, solve, solve_nash,
    verify_preference_nash, OPTIMALITY_TOLERANCE,
};
use crate::error::Result;
use crate::fuzz::{self, random_interior, random_interior_near, stream};
use crate::game::{Game, MixedProfile, Rational};
use crate::graph::PreferenceGraph;
use crate::symmetrise::check_weight_identity;

pub const EMBEDDING_TOLERANCE: f64 = 1e-10;
pub const EMBEDDING_POINTS: usize = 10;
pub const LYAPUNOV_POINTS: usize = 50;
pub const LYAPUNOV_BAND: (f64, f64) = (0.05, 0.95);
pub const FINITE_DIFFERENCE_STEP: f64 = 1e-4;
pub const FINITE_DIFFERENCE_TOLERANCE: f64 = 1e-5;
const MAX_FAILURES_KEPT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Graph,
    Symmetrisation,
    Embedding,
    Lyapunov,
    Nash,
    All,
}

impl Scope {
    pub const SUITES: [Scope; 5] = [
        Scope::Graph,
        Scope::Symmetrisation,
        Scope::Embedding,
        Scope::Lyapunov,
        Scope::Nash,
    ];
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scope::Graph => "graph",
            Scope::Symmetrisation => "symmetrisation",
            Scope::Embedding => "embedding",
            Scope::Lyapunov => "lyapunov",
            Scope::Nash => "nash",
            Scope::All => "all",
        };
        f.write_str(s)
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "graph" => Ok(Scope::Graph),
            "symmetrisation" | "symmetrization" => Ok(Scope::Symmetrisation),
            "embedding" => Ok(Scope::Embedding),
            "lyapunov" => Ok(Scope::Lyapunov),
            "nash" => Ok(Scope::Nash),
            "all" => Ok(Scope::All),
            other => Err(format!("unknown scope {other:?}")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub detail: String,
    /// The offending game in game-file format.
    pub game: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub scope: Scope,
    pub seed: u64,
    pub count: usize,
    pub failed: usize,
    pub metrics: BTreeMap<String, f64>,
    pub counterexamples: Vec<Counterexample>,
    pub passed: bool,
}

/// Per-game outcome: metric contributions plus an optional failure message.
struct Outcome {
    metrics: Vec<(&'static str, f64)>,
    failure: Option<String>,
}

impl Outcome {
    fn ok(metrics: Vec<(&'static str, f64)>) -> Self {
        Self {
            metrics,
            failure: None,
        }
    }
}

fn run_suite<F>(scope: Scope, seed: u64, games: Vec<Game>, check: F) -> SuiteReport
where
    F: Fn(usize, &Game) -> Result<Outcome> + Sync,
{
    let outcomes: Vec<Outcome> = games
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            check(i, g).unwrap_or_else(|e| Outcome {
                metrics: Vec::new(),
                failure: Some(e.to_string()),
            })
        })
        .collect();

    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();
    let mut counterexamples = Vec::new();
    let mut failed = 0;
    for (i, o) in outcomes.into_iter().enumerate() {
        for (name, v) in o.metrics {
            match metrics.entry(name.to_string()) {
                Entry::Vacant(e) => {
                    e.insert(v);
                }
                Entry::Occupied(mut e) => {
                    let cur = e.get_mut();
                    if name.starts_with("max_") {
                        *cur = cur.max(v);
                    } else if name.starts_with("min_") {
                        *cur = cur.min(v);
                    } else {
                        *cur += v;
                    }
                }
            }
        }
        if let Some(detail) = o.failure {
            failed += 1;
            if counterexamples.len() < MAX_FAILURES_KEPT {
                counterexamples.push(Counterexample {
                    index: i,
                    detail,
                    game: serde_json::from_str(&games[i].to_json()).expect("valid json"),
                });
            }
        }
    }
    SuiteReport {
        scope,
        seed,
        count: games.len(),
        failed,
        metrics,
        counterexamples,
        passed: failed == 0,
    }
}

/// Structural graph checks: a unique sink, deterministic construction,
/// the tournament arc count for tie-free symmetric games, arc directions
/// matching the sign of `W`, and invariance of the arc set under positive
/// rescaling of the payoffs.
pub fn graph_suite(seed: u64, count: usize) -> SuiteReport {
    let games = fuzz::mixed_corpus(seed, count);
    run_suite(Scope::Graph, seed, games, |i, g| {
        let pg = PreferenceGraph::build(g);
        let sink = pg.sink_component()?;
        let again = PreferenceGraph::build(g);
        if again.arcs() != pg.arcs() {
            return Ok(fail("graph construction is not deterministic"));
        }
        for a in pg.arcs() {
            let w = g.weight(pg.nodes()[a.source], pg.nodes()[a.target])?;
            if w > Rational::from_integer(0.into()) {
                return Ok(fail("arc against the sign of W"));
            }
        }
        let n = pg.node_count();
        if g.is_symmetric() && pg.ties().is_empty() && pg.arcs().len() != n * (n - 1) / 2 {
            return Ok(fail("tie-free symmetric graph is not a tournament"));
        }
        let mut r = stream(seed, i);
        let factor = Rational::new(
            rand::Rng::random_range(&mut r, 1..=20i64).into(),
            rand::Rng::random_range(&mut r, 1..=20i64).into(),
        );
        let scaled = PreferenceGraph::build(&g.scaled(&factor)?);
        let dirs = |p: &PreferenceGraph| -> Vec<(usize, usize)> {
            p.arcs().iter().map(|a| (a.source, a.target)).collect()
        };
        if dirs(&scaled) != dirs(&pg) {
            return Ok(fail("arc set changed under positive rescaling"));
        }
        Ok(Outcome::ok(vec![
            ("unique_sinks", 1.0),
            ("proper_sinks", f64::from(u8::from(sink.len() < n))),
        ]))
    })
}

fn fail(msg: impl Into<String>) -> Outcome {
    Outcome {
        metrics: Vec::new(),
        failure: Some(msg.into()),
    }
}

/// Exact anti-symmetry of `S_M`, agreement with `W` on comparable pairs,
/// and both two-step decompositions of every entry.
pub fn symmetrisation_suite(seed: u64, count: usize) -> SuiteReport {
    run_suite(
        Scope::Symmetrisation,
        seed,
        fuzz::nonsymmetric_corpus(seed, count),
        |_, g| {
            let r = check_weight_identity(g)?;
            if r.passed() {
                Ok(Outcome::ok(vec![("pairs_checked", r.pairs_checked as f64)]))
            } else {
                Ok(fail(format!(
                    "{} antisymmetry, {} comparable, {} identity violations",
                    r.antisymmetry_violations,
                    r.comparable_mismatches,
                    r.violations.len()
                )))
            }
        },
    )
}

/// Product-rule velocity of each `x_p` against `x_p (S_M x)_p` at random
/// interior points.
pub fn embedding_suite(seed: u64, count: usize) -> SuiteReport {
    run_suite(
        Scope::Embedding,
        seed,
        fuzz::nonsymmetric_corpus(seed, count),
        |i, g| {
            let mut r = stream(seed, i);
            let mut worst: f64 = 0.0;
            for _ in 0..EMBEDDING_POINTS {
                let z = random_interior(g, &mut r);
                worst = worst.max(check_embedding(g, &z)?.max_discrepancy);
            }
            let outcome = Outcome::ok(vec![("max_residual", worst)]);
            if worst > EMBEDDING_TOLERANCE {
                return Ok(Outcome {
                    failure: Some(format!("embedding residual {worst:e}")),
                    ..outcome
                });
            }
            Ok(outcome)
        },
    )
}

/// Samples `LYAPUNOV_POINTS` interior points with `x_H` inside the band.
pub fn lyapunov_points(
    game: &Game,
    lyap: &SinkLyapunov,
    rng: &mut impl rand::Rng,
) -> Vec<MixedProfile> {
    let sink = lyap.sink();
    let mut out = Vec::with_capacity(LYAPUNOV_POINTS);
    let mut attempts = 0;
    while out.len() < LYAPUNOV_POINTS && attempts < 200 * LYAPUNOV_POINTS {
        attempts += 1;
        let z = if rng.random_bool(0.5) {
            random_interior(game, rng)
        } else {
            let h = sink[rng.random_range(0..sink.len())];
            random_interior_near(game, h, rng)
        };
        let mass = lyap.mass(&z);
        if mass > LYAPUNOV_BAND.0 && mass < LYAPUNOV_BAND.1 {
            out.push(z);
        }
    }
    out
}

/// Centred finite difference of `x_H` along the reference flow.
pub fn finite_difference_rate(
    game: &Game,
    sink: &[crate::game::Profile],
    z: &MixedProfile,
) -> Result<f64> {
    let dt = FINITE_DIFFERENCE_STEP;
    let ahead = flow(game, z, dt, 4)?;
    let behind = flow(game, z, -dt, 4)?;
    Ok((mass_on(&ahead, sink) - mass_on(&behind, sink)) / (2.0 * dt))
}

/// Strict positivity of `ẋ_H` inside the band for every game with a proper
/// sink, and agreement of the closed form with a finite difference.
pub fn lyapunov_suite(seed: u64, count: usize) -> SuiteReport {
    run_suite(
        Scope::Lyapunov,
        seed,
        fuzz::mixed_corpus(seed, count),
        |i, g| {
            let sink = PreferenceGraph::build(g).sink_component()?;
            if sink.len() == g.profile_count() {
                return Ok(Outcome::ok(vec![]));
            }
            let lyap = SinkLyapunov::certify(g, &sink)?;
            let mut r = stream(seed, i);
            let points = lyapunov_points(g, &lyap, &mut r);
            if points.len() < LYAPUNOV_POINTS {
                return Ok(fail(format!(
                    "only {} sample points found in the band",
                    points.len()
                )));
            }
            let mut min_rate = f64::INFINITY;
            let mut worst_fd: f64 = 0.0;
            for z in &points {
                let rate = lyap.rate(z)?;
                min_rate = min_rate.min(rate);
                let fd = finite_difference_rate(g, &sink, z)?;
                worst_fd = worst_fd.max((rate - fd).abs());
            }
            let metrics = vec![
                ("proper_sink_games", 1.0),
                ("min_rate", min_rate),
                ("max_fd_error", worst_fd),
            ];
            let failure = if min_rate <= 0.0 {
                Some(format!("nonpositive rate {min_rate:e}"))
            } else if worst_fd > FINITE_DIFFERENCE_TOLERANCE {
                Some(format!("finite-difference mismatch {worst_fd:e}"))
            } else {
                None
            };
            Ok(Outcome { metrics, failure })
        },
    )
}

/// Equilibrium supports inside the sink and strongly connected, minimax
/// consistency, the fully-mixed corollary, and the equilibrium being a
/// replicator fixed point.
pub fn nash_suite(seed: u64, count: usize) -> SuiteReport {
    run_suite(
        Scope::Nash,
        seed,
        fuzz::mixed_corpus(seed, count),
        |_, g| {
            let report = verify_preference_nash(g)?;
            if !report.passed {
                return Ok(fail(format!(
                    "essential subgame {}: in_sink={}, strongly_connected={}",
                    report.essential_subgame, report.in_sink, report.strongly_connected
                )));
            }
            let sol = solve(g)?;
            let m = g.float_matrix();
            let (x, y) = sol.chosen();
            let minimax = (row_guarantee(m, x) - sol.value)
                .abs()
                .max((col_guarantee(m, y) - sol.value).abs());
            let cert = solve_nash(g)?;
            let br = best_response_residual(g, x, y, sol.value);
            let fixed = fixed_point_residual(g, &cert)?;
            let whole = report.essential_profiles.len() == g.profile_count();
            let pg = PreferenceGraph::build(g);
            if whole && !pg.is_strongly_connected(pg.nodes())? {
                return Ok(fail(
                    "fully-mixed equilibrium but graph not strongly connected",
                ));
            }
            let metrics = vec![
                ("max_minimax_gap", minimax),
                ("max_best_response_residual", br),
                ("max_fixed_point_residual", fixed),
                ("fully_mixed_games", f64::from(u8::from(whole))),
            ];
            let failure = if minimax > OPTIMALITY_TOLERANCE {
                Some(format!("minimax gap {minimax:e}"))
            } else if br > OPTIMALITY_TOLERANCE {
                Some(format!("best-response residual {br:e}"))
            } else if fixed > OPTIMALITY_TOLERANCE {
                Some(format!("equilibrium velocity {fixed:e}"))
            } else {
                None
            };
            Ok(Outcome { metrics, failure })
        },
    )
}

pub fn run(scope: Scope, seed: u64, count: usize) -> Vec<SuiteReport> {
    match scope {
        Scope::Graph => vec![graph_suite(seed, count)],
        Scope::Symmetrisation => vec![symmetrisation_suite(seed, count)],
        Scope::Embedding => vec![embedding_suite(seed, count)],
        Scope::Lyapunov => vec![lyapunov_suite(seed, count)],
        Scope::Nash => vec![nash_suite(seed, count)],
        Scope::All => Scope::SUITES
            .iter()
            .flat_map(|&s| run(s, seed, count))
            .collect(),
    }
}
