//! Acceptance suite. Runs every criterion at its stated tolerance and time
//! bound, printing one PASS/FAIL line each; exits non-zero if any fails.
//!
//! Run with `cargo test --test acceptance`; the output is not captured.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use replicator_attractor::cli;
use replicator_attractor::content::Subgame;
use replicator_attractor::dynamics::{
    integrate, mwu_step, time_average, IntegratorConfig, SinkLyapunov,
};
use replicator_attractor::equilibrium::{essential_subgame, solve};
use replicator_attractor::fuzz::{self, random_interior, stream};
use replicator_attractor::game::{matching_pennies, rock_paper_scissors};
use replicator_attractor::graph::PreferenceGraph;
use replicator_attractor::symmetrise::symmetrise;
use replicator_attractor::verify;
use replicator_attractor::{Game, MixedProfile, Mode, Profile};

use common::*;

const SEED: u64 = 42;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn games_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("games")
}

fn load(name: &str) -> Game {
    cli::load_game(&games_dir().join(name)).expect("bundled game file")
}

fn arc_labels(g: &Game) -> BTreeSet<(String, String)> {
    let pg = PreferenceGraph::build(g);
    pg.arcs()
        .iter()
        .map(|a| {
            (
                pg.label(a.source).to_string(),
                pg.label(a.target).to_string(),
            )
        })
        .collect()
}

fn label_set(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

fn criterion_1() -> Check {
    // player 1 matches, player 2 mismatches
    let mp = label_set(&[
        ("T,H", "H,H"),
        ("H,H", "H,T"),
        ("H,T", "T,T"),
        ("T,T", "T,H"),
    ]);
    let rps = label_set(&[("R", "P"), ("P", "S"), ("S", "R")]);
    for (name, game, expected) in [
        ("MP", matching_pennies(), mp.clone()),
        ("MP file", load("mp.json"), mp),
        ("RPS", rock_paper_scissors(), rps.clone()),
        ("RPS file", load("rps.json"), rps),
    ] {
        let got = arc_labels(&game);
        ensure(got == expected, || {
            format!("{name}: arcs {got:?}, expected {expected:?}")
        })?;
        let oracle = adjacency(&int_matrix(&game), game.is_symmetric());
        let count = oracle.iter().flatten().filter(|&&b| b).count();
        ensure(count == expected.len(), || {
            format!("{name}: oracle has {count} arcs")
        })?;
    }
    Ok("MP 4-cycle and RPS 3-cycle match exactly".into())
}

/// Every 3×3 integer matrix with entries in [-5, 5], `M[a][c] = 3`, whose
/// preference graph has the single sink "all profiles but (a,a)" and whose
/// unique equilibrium is ((0,½,½),(0,½,½)). The equilibrium forces
/// `M_bb = M_cc`, `M_bc = M_cb`, a non-constant {b,c} block and strictly
/// worse pure strategy a for both players, which prunes the search to
/// the remaining free entries.
fn figure_2_candidates() -> Vec<Vec<Vec<i64>>> {
    let range = -5..=5i64;
    let target: Vec<usize> = (1..9).collect();
    let mut out = Vec::new();
    for d in range.clone() {
        for e in range.clone() {
            if d == e {
                continue;
            }
            for ab in range.clone() {
                if ab + 3 >= d + e {
                    continue;
                }
                for aa in range.clone() {
                    for ba in range.clone() {
                        for ca in range.clone() {
                            if ba + ca <= d + e {
                                continue;
                            }
                            let m = vec![vec![aa, ab, 3], vec![ba, d, e], vec![ca, e, d]];
                            let sinks = sink_components(&adjacency(&m, false));
                            if sinks.len() == 1 && sinks[0] == target {
                                out.push(m);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|m| {
        let l1: i64 = m.iter().flatten().map(|v| v.abs()).sum();
        (l1, m.clone())
    });
    out
}

fn criterion_2() -> Check {
    let candidates = figure_2_candidates();
    let chosen = candidates
        .first()
        .ok_or("no matrix satisfies the figure constraints")?;
    let game = load("fig2.json");
    ensure(&int_matrix(&game) == chosen, || {
        format!("fig2.json differs from the search result {chosen:?}")
    })?;
    ensure(
        game.row_labels() == ["a", "b", "c"] && game.col_labels() == ["a", "b", "c"],
        || "fig2.json labels".into(),
    )?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = games_dir().join("fig2.json");
    let args = [
        "attractor",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "analyze",
        path.to_str().unwrap(),
    ];
    let parsed = <cli::Cli as clap::Parser>::try_parse_from(args).map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::execute(&parsed, &mut out, &mut err);
    ensure(code == 0, || format!("analyze exited with {code}"))?;
    let text =
        std::fs::read_to_string(dir.path().join("analysis.json")).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;

    let attractor: BTreeSet<String> = report["attractor"]["maximal_subgames"]
        .as_array()
        .ok_or("missing maximal subgames")?
        .iter()
        .map(|s| s["description"].as_str().unwrap_or_default().to_string())
        .collect();
    let expected: BTreeSet<String> = ["{a,b,c}x{b,c}", "{b,c}x{a,b,c}"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ensure(attractor == expected, || format!("attractor {attractor:?}"))?;

    // the two subgames cover exactly the oracle's sink
    let union: BTreeSet<usize> = Subgame::new(vec![0, 1, 2], vec![1, 2])
        .profiles(Mode::NonSymmetric)
        .into_iter()
        .chain(Subgame::new(vec![1, 2], vec![0, 1, 2]).profiles(Mode::NonSymmetric))
        .map(|p| game.profile_index(p).unwrap())
        .collect();
    ensure(union == (1..9).collect(), || {
        format!("subgame union {union:?}")
    })?;

    let eq: Vec<Vec<f64>> =
        serde_json::from_value(report["nash"]["equilibrium"].clone()).map_err(|e| e.to_string())?;
    let want = [[0.0, 0.5, 0.5], [0.0, 0.5, 0.5]];
    let err = eq
        .iter()
        .zip(&want)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    ensure(eq.len() == 2 && err <= 1e-9, || {
        format!("equilibrium {eq:?}")
    })?;
    Ok(format!(
        "{} candidates, chosen {:?}; equilibrium error {err:.1e}",
        candidates.len(),
        chosen
    ))
}

fn criterion_3() -> Check {
    let report = verify::graph_suite(SEED, 1000);
    ensure(report.passed, || {
        format!("library suite failed: {:?}", report.counterexamples)
    })?;
    let mut unique = 0;
    for (i, g) in fuzz::mixed_corpus(SEED, 1000).iter().enumerate() {
        let sinks = sink_components(&adjacency(&int_matrix(g), g.is_symmetric()));
        ensure(sinks.len() == 1, || {
            format!("game {i}: {} sinks", sinks.len())
        })?;
        let lib: Vec<usize> = PreferenceGraph::build(g)
            .sink_component()
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|p| g.profile_index(p).unwrap())
            .collect();
        ensure(lib == sinks[0], || {
            format!("game {i}: sink {lib:?} vs oracle {:?}", sinks[0])
        })?;
        unique += 1;
    }
    Ok(format!("{unique}/1000 games have exactly one sink"))
}

fn criterion_4() -> Check {
    let report = verify::symmetrisation_suite(SEED, 200);
    ensure(report.passed, || {
        format!("library suite failed: {:?}", report.counterexamples)
    })?;
    for (i, g) in fuzz::nonsymmetric_corpus(SEED, 200).iter().enumerate() {
        let m = int_matrix(g);
        let s = symmetrised(&m);
        let lib = symmetrise(g).map_err(|e| e.to_string())?;
        let lib_int: Vec<Vec<i64>> = int_matrix(&lib.to_game().map_err(|e| e.to_string())?);
        ensure(lib_int == s, || {
            format!("game {i}: S_M differs from the oracle")
        })?;
        let cols = m[0].len();
        let size = s.len();
        let entry = |p: usize| m[p / cols][p % cols];
        // W with W_pp = 0; pairs here always share a row or column
        let w = |p: usize, q: usize| -> i64 {
            if p == q {
                0
            } else if p % cols == q % cols {
                entry(p) - entry(q)
            } else {
                entry(q) - entry(p)
            }
        };
        for p in 0..size {
            for q in 0..size {
                ensure(s[p][q] == -s[q][p], || {
                    format!("game {i}: not anti-symmetric")
                })?;
                let a = (p / cols) * cols + q % cols;
                let b = (q / cols) * cols + p % cols;
                ensure(
                    s[p][q] == w(p, a) + w(p, b) && s[p][q] == w(a, q) + w(b, q),
                    || format!("game {i}: weight identity fails at ({p},{q})"),
                )?;
            }
        }
    }
    Ok("200 games: exact anti-symmetry and both weight identities".into())
}

fn criterion_5() -> Check {
    let report = verify::embedding_suite(SEED, 100);
    ensure(report.passed, || {
        format!("library suite failed: {:?}", report.counterexamples)
    })?;
    let mut worst: f64 = 0.0;
    for (i, g) in fuzz::nonsymmetric_corpus(SEED, 100).iter().enumerate() {
        let m = int_matrix(g);
        let s = float_matrix(&symmetrised(&m));
        let mf = float_matrix(&m);
        let cols = m[0].len();
        let mut r = stream(SEED, 1000 + i);
        for _ in 0..10 {
            let z = parts(&random_interior(g, &mut r));
            let v = velocity(&mf, &z);
            let xp: Vec<f64> = (0..s.len())
                .map(|p| z[0][p / cols] * z[1][p % cols])
                .collect();
            for p in 0..s.len() {
                let (r1, c1) = (p / cols, p % cols);
                let product_rule = v[0][r1] * z[1][c1] + z[0][r1] * v[1][c1];
                let sx: f64 = s[p].iter().zip(&xp).map(|(a, b)| a * b).sum();
                worst = worst.max((product_rule - xp[p] * sx).abs());
            }
        }
    }
    let lib = report
        .metrics
        .get("max_residual")
        .copied()
        .unwrap_or(f64::NAN);
    ensure(worst <= 1e-10 && lib <= 1e-10, || {
        format!("residual {worst:e} (library {lib:e})")
    })?;
    Ok(format!("max residual {worst:.2e} (library {lib:.2e})"))
}

fn criterion_6() -> Check {
    let report = verify::lyapunov_suite(SEED, 1000);
    ensure(report.passed, || {
        format!("library suite failed: {:?}", report.counterexamples)
    })?;
    let mut proper = 0;
    let mut min_rate = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for (i, g) in fuzz::mixed_corpus(SEED, 1000).iter().enumerate() {
        let m = int_matrix(g);
        let sinks = sink_components(&adjacency(&m, g.is_symmetric()));
        let h = &sinks[0];
        if h.len() == g.profile_count() {
            continue;
        }
        proper += 1;
        let profiles: Vec<Profile> = h.iter().map(|&k| g.profile_at(k)).collect();
        let lyap = SinkLyapunov::certify(g, &profiles).map_err(|e| e.to_string())?;
        let mf = float_matrix(&m);
        let points = verify::lyapunov_points(g, &lyap, &mut stream(SEED, 5000 + i));
        ensure(points.len() == verify::LYAPUNOV_POINTS, || {
            format!("game {i}: too few points")
        })?;
        for z in &points {
            let z = parts(z);
            // d/dt x_H from the velocity field
            let v = velocity(&mf, &z);
            let exact = if z.len() == 1 {
                h.iter().map(|&s| v[0][s]).sum::<f64>()
            } else {
                let cols = z[1].len();
                h.iter()
                    .map(|&p| v[0][p / cols] * z[1][p % cols] + z[0][p / cols] * v[1][p % cols])
                    .sum()
            };
            let rate = lyap
                .rate(&replicator_attractor::MixedProfile::for_game(g, z.clone()).unwrap())
                .map_err(|e| e.to_string())?;
            let mass_h = mass(&z, h);
            ensure(mass_h > 0.05 && mass_h < 0.95, || {
                format!("game {i}: x_H {mass_h} off band")
            })?;
            ensure(rate > 0.0, || format!("game {i}: rate {rate:e}"))?;
            min_rate = min_rate.min(rate);
            worst = worst.max((rate - exact).abs());
        }
    }
    let fd = report.metrics.get("max_fd_error").copied().unwrap_or(0.0);
    ensure(worst <= 1e-9 && fd <= 1e-5, || {
        format!("closed form off by {worst:e}, finite difference {fd:e}")
    })?;
    Ok(format!(
        "{proper} proper-sink games; min rate {min_rate:.3e}; finite-difference error {fd:.2e}"
    ))
}

fn random_starts(game: &Game, count: usize) -> Vec<MixedProfile> {
    (0..count)
        .map(|i| random_interior(game, &mut stream(SEED, i)))
        .collect()
}

struct Conservation {
    drift: f64,
    faces: bool,
    trajectories: usize,
}

impl Conservation {
    fn new() -> Self {
        Self {
            drift: 0.0,
            faces: true,
            trajectories: 0,
        }
    }

    fn record(&mut self, starts: &MixedProfile, states: &[MixedProfile]) {
        self.trajectories += 1;
        let start = parts(starts);
        for z in states {
            for (part, init) in z.parts().iter().zip(&start) {
                self.drift = self.drift.max((part.iter().sum::<f64>() - 1.0).abs());
                for (v, v0) in part.iter().zip(init) {
                    if *v0 == 0.0 && *v != 0.0 {
                        self.faces = false;
                    }
                }
            }
        }
    }
}

fn criterion_7(cons: &mut Conservation) -> Check {
    let game = load("fig2.json");
    let h: Vec<usize> = (1..9).collect();
    let sink: Vec<Profile> = h.iter().map(|&k| game.profile_at(k)).collect();
    let cfg = IntegratorConfig::new(0.01, 200.0);
    let mut worst_gap: f64 = 0.0;
    let mut worst_drop: f64 = 0.0;
    let mut starts = random_starts(&game, 100);
    // a start on the face x_a = 0 for the conservation check
    starts.push(MixedProfile::pair(vec![0.0, 0.3, 0.7], vec![0.2, 0.3, 0.5]).unwrap());
    for (k, z0) in starts.iter().enumerate() {
        let tr = integrate(&game, z0, &cfg, Some(&sink)).map_err(|e| e.to_string())?;
        cons.record(z0, &tr.states);
        let masses: Vec<f64> = tr.states.iter().map(|z| mass(&parts(z), &h)).collect();
        for w in masses.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        if k < 100 {
            worst_gap = worst_gap.max(1.0 - masses[masses.len() - 1]);
        }
    }
    ensure(worst_gap < 1e-3, || {
        format!("final 1 - x_H up to {worst_gap:e}")
    })?;
    ensure(worst_drop <= 1e-8, || {
        format!("x_H dropped by {worst_drop:e}")
    })?;
    Ok(format!(
        "100 starts: max 1 - x_H {worst_gap:.2e}, max drop {worst_drop:.2e}"
    ))
}

fn criterion_8() -> Check {
    let report = verify::nash_suite(SEED, 500);
    ensure(report.passed, || {
        format!("library suite failed: {:?}", report.counterexamples)
    })?;
    for (i, g) in fuzz::mixed_corpus(SEED, 500).iter().enumerate() {
        let m = int_matrix(g);
        let mf = float_matrix(&m);
        let adj = adjacency(&m, g.is_symmetric());
        let sink = &sink_components(&adj)[0];
        let sol = solve(g).map_err(|e| e.to_string())?;
        let (x, y) = sol.chosen();
        let best_row = (0..mf.len())
            .map(|r| mf[r].iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_col = (0..mf[0].len())
            .map(|c| {
                mf.iter()
                    .zip(x.iter())
                    .map(|(row, xr)| row[c] * xr)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        ensure(
            (best_row - sol.value).abs() <= 1e-9 && (worst_col - sol.value).abs() <= 1e-9,
            || format!("game {i}: not an equilibrium"),
        )?;
        let essential: Vec<usize> = essential_subgame(g)
            .map_err(|e| e.to_string())?
            .profiles(g.mode())
            .into_iter()
            .map(|p| g.profile_index(p).unwrap())
            .collect();
        ensure(essential.iter().all(|p| sink.contains(p)), || {
            format!("game {i}: outside sink")
        })?;
        ensure(induces_strongly_connected(&adj, &essential), || {
            format!("game {i}: essential subgame not strongly connected")
        })?;
    }
    Ok("500 games: essential subgames in the sink and strongly connected".into())
}

fn criterion_9(cons: &mut Conservation) -> Check {
    let mp = load("mp.json");
    let z0 = MixedProfile::pair(vec![0.9, 0.1], vec![0.2, 0.8]).unwrap();
    let tr = integrate(&mp, &z0, &IntegratorConfig::new(0.01, 1000.0), None)
        .map_err(|e| e.to_string())?;
    cons.record(&z0, &tr.states);
    let avg = parts(&time_average(&tr).map_err(|e| e.to_string())?);
    // trapezoid average computed here as a cross-check
    let n = tr.states.len();
    let mut own = vec![vec![0.0; 2]; 2];
    for k in 0..n - 1 {
        let dt = tr.times[k + 1] - tr.times[k];
        for (i, (a, b)) in tr.states[k]
            .parts()
            .iter()
            .zip(tr.states[k + 1].parts())
            .enumerate()
        {
            for j in 0..2 {
                own[i][j] += 0.5 * dt * (a[j] + b[j]) / 1000.0;
            }
        }
    }
    let err = avg
        .iter()
        .flatten()
        .map(|v| (v - 0.5).abs())
        .fold(0.0, f64::max);
    let own_err = own
        .iter()
        .flatten()
        .map(|v| (v - 0.5).abs())
        .fold(0.0, f64::max);
    ensure(err <= 1e-2 && own_err <= 1e-2, || {
        format!("time average {avg:?} / {own:?}")
    })?;
    Ok(format!(
        "time average within {err:.2e} of ((1/2,1/2),(1/2,1/2))"
    ))
}

fn criterion_10() -> Check {
    let mp = load("mp.json");
    let z = MixedProfile::pair(vec![0.7, 0.3], vec![0.4, 0.6]).unwrap();
    let mf = float_matrix(&int_matrix(&mp));
    let err = |eta: f64| -> f64 {
        let step = parts(&mwu_step(&mp, &z, eta).unwrap());
        let exact = rk4_flow(&mf, &parts(&z), eta, 1000);
        step.iter()
            .flatten()
            .zip(exact.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / eta
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    let ratio = e2 / e1;
    ensure((0.4..=0.6).contains(&ratio), || {
        format!("ratio {ratio} ({e1:e} -> {e2:e})")
    })?;
    Ok(format!("error {e1:.3e} -> {e2:.3e}, ratio {ratio:.4}"))
}

fn criterion_11(cons: &Conservation) -> Check {
    ensure(cons.trajectories > 0, || "no trajectories recorded".into())?;
    ensure(cons.drift <= 1e-9, || {
        format!("simplex drift {:e}", cons.drift)
    })?;
    ensure(cons.faces, || "a zero coordinate became nonzero".into())?;
    Ok(format!(
        "{} trajectories: max drift {:.2e}, faces preserved",
        cons.trajectories, cons.drift
    ))
}

fn main() {
    let mut cons = Conservation::new();
    let mut results: Vec<(usize, &str, Duration, Check, Duration)> = Vec::new();
    let mut run = |id: usize, name: &'static str, bound: u64, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let bound = Duration::from_secs(bound);
        let outcome = match outcome {
            Ok(msg) if elapsed > bound => Err(format!("{msg}; took {elapsed:.2?} > {bound:?}")),
            other => other,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m.as_str()),
            Err(m) => ("FAIL", m.as_str()),
        };
        println!("[{tag}] {id:>2} {name:<28} {elapsed:>9.2?}  {msg}");
        results.push((id, name, elapsed, outcome, bound));
    };
    run(1, "preference graphs MP/RPS", 1, &mut criterion_1);
    run(2, "outer diamond game", 10, &mut criterion_2);
    run(3, "sink uniqueness", 10, &mut criterion_3);
    run(4, "symmetrisation identities", 5, &mut criterion_4);
    run(5, "embedding", 5, &mut criterion_5);
    run(6, "lyapunov positivity", 30, &mut criterion_6);
    run(7, "global convergence", 60, &mut || criterion_7(&mut cons));
    run(8, "equilibria in the sink", 120, &mut criterion_8);
    run(9, "time average", 5, &mut || criterion_9(&mut cons));
    run(10, "mwu consistency", 1, &mut criterion_10);
    run(11, "conservation", 1, &mut || criterion_11(&cons));

    let failed: Vec<_> = results
        .iter()
        .filter(|r| r.3.is_err())
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
