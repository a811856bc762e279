//! Zero-sum Nash equilibria by support enumeration, the essential subgame,
//! and the check that equilibrium supports sit inside the sink component
//! and induce strongly connected subgraphs.
//!
//! Every extreme optimal strategy of a matrix game is the solution of the
//! indifference system on some square submatrix (a Shapley–Snow kernel), so
//! enumerating all `k×k` row/column subsets and keeping the nonnegative,
//! minimax-optimal solutions finds every vertex of both optimal sets. Any
//! optimal row strategy paired with any optimal column strategy is an
//! equilibrium.

use serde::Serialize;

use crate::content::Subgame;
use crate::dynamics::velocity;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile, Mode, Profile};
use crate::graph::PreferenceGraph;

/// Entries at or below this are off the support of a computed equilibrium.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
/// Slack allowed in the best-response inequalities.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-9;
const PIVOT_TOLERANCE: f64 = 1e-12;

/// All extreme optimal strategies found for both players.
#[derive(Clone, Debug)]
pub struct NashSolution {
    pub value: f64,
    pub row_strategies: Vec<Vec<f64>>,
    pub col_strategies: Vec<Vec<f64>>,
}

fn support_of(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] > SUPPORT_THRESHOLD).collect()
}

fn union_support(vs: &[Vec<f64>]) -> Vec<usize> {
    let mut out: Vec<usize> = vs.iter().flat_map(|v| support_of(v)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The strategy with the largest support; ties go to the lexicographically
/// smallest support, then to enumeration order.
fn pick(vs: &[Vec<f64>]) -> &Vec<f64> {
    vs.iter()
        .min_by(|a, b| {
            let (sa, sb) = (support_of(a), support_of(b));
            sb.len().cmp(&sa.len()).then_with(|| sa.cmp(&sb))
        })
        .expect("at least one optimal strategy")
}

impl NashSolution {
    pub fn essential_rows(&self) -> Vec<usize> {
        union_support(&self.row_strategies)
    }

    pub fn essential_cols(&self) -> Vec<usize> {
        union_support(&self.col_strategies)
    }

    pub fn chosen(&self) -> (&Vec<f64>, &Vec<f64>) {
        (pick(&self.row_strategies), pick(&self.col_strategies))
    }

    /// Barycentre of the extreme strategies; its support is the essential
    /// subgame.
    pub fn central(&self) -> (Vec<f64>, Vec<f64>) {
        let mean = |vs: &[Vec<f64>]| {
            let mut acc = vec![0.0; vs[0].len()];
            for v in vs {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x / vs.len() as f64;
                }
            }
            acc
        };
        (mean(&self.row_strategies), mean(&self.col_strategies))
    }
}

/// Solves `A z = b` by Gaussian elimination with partial pivoting; `None`
/// when the system is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(1.0_f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < PIVOT_TOLERANCE * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * z[k]).sum();
        z[row] = (b[row] - s) / a[row][row];
    }
    Some(z)
}

/// Distribution `w` on `own` making every opponent strategy in `other`
/// indifferent, with `payoff(i, j)` the payoff when own plays `i` and the
/// opponent `j`. Returns `(w, value)` if the solution is nonnegative.
fn indifference(
    own: &[usize],
    other: &[usize],
    payoff: impl Fn(usize, usize) -> f64,
    dim: usize,
) -> Option<(Vec<f64>, f64)> {
    let k = own.len();
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &j) in other.iter().enumerate() {
        for (c, &i) in own.iter().enumerate() {
            a[r][c] = payoff(i, j);
        }
        a[r][k] = -1.0;
    }
    for c in 0..k {
        a[k][c] = 1.0;
    }
    b[k] = 1.0;
    let z = solve_linear(a, b)?;
    if z[..k].iter().any(|&w| w < -SUPPORT_THRESHOLD) {
        return None;
    }
    let mut w = vec![0.0; dim];
    for (c, &i) in own.iter().enumerate() {
        w[i] = z[c].max(0.0);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Some((w, z[k]))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn push_unique(list: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    if !list.iter().any(|w| {
        w.iter()
            .zip(&v)
            .all(|(a, b)| (a - b).abs() <= OPTIMALITY_TOLERANCE)
    }) {
        list.push(v);
    }
}

/// Guaranteed payoff of a row strategy: `min_t (xᵀM)_t`.
pub fn row_guarantee(m: &[Vec<f64>], x: &[f64]) -> f64 {
    (0..m[0].len())
        .map(|t| x.iter().zip(m).map(|(xi, row)| xi * row[t]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Worst-case loss of a column strategy: `max_s (My)_s`.
pub fn col_guarantee(m: &[Vec<f64>], y: &[f64]) -> f64 {
    m.iter()
        .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Enumerates all square kernels and returns every extreme optimal strategy
/// of both players along with the game value.
pub fn solve(game: &Game) -> Result<NashSolution> {
    let m = game.float_matrix();
    let (n, cols) = (game.rows(), game.cols());
    let mut candidates = Vec::new();
    for k in 1..=n.min(cols) {
        let row_sets = subsets(n, k);
        let col_sets = subsets(cols, k);
        for rs in &row_sets {
            for cs in &col_sets {
                let x = indifference(rs, cs, |i, j| m[i][j], n);
                let y = indifference(cs, rs, |j, i| m[i][j], cols);
                candidates.push((x, y));
            }
        }
    }

    let mut rows = Vec::new();
    let mut col_list = Vec::new();
    let mut best_row = f64::NEG_INFINITY;
    let mut best_col = f64::INFINITY;
    for (x, y) in candidates {
        if let Some((x, _)) = x {
            let g = row_guarantee(m, &x);
            best_row = best_row.max(g);
            rows.push((x, g));
        }
        if let Some((y, _)) = y {
            let g = col_guarantee(m, &y);
            best_col = best_col.min(g);
            col_list.push((y, g));
        }
    }
    if rows.is_empty() || col_list.is_empty() {
        return Err(Error::Solver(
            "no candidate kernel produced a strategy".into(),
        ));
    }
    if (best_row - best_col).abs() > OPTIMALITY_TOLERANCE * (1.0 + best_row.abs()) {
        return Err(Error::Solver(format!(
            "minimax mismatch: best guarantee {best_row} vs best cap {best_col}"
        )));
    }
    let value = best_row;

    let mut row_strategies = Vec::new();
    for (x, g) in rows {
        if g >= value - OPTIMALITY_TOLERANCE {
            push_unique(&mut row_strategies, x);
        }
    }
    let mut col_strategies = Vec::new();
    for (y, g) in col_list {
        if g <= value + OPTIMALITY_TOLERANCE {
            push_unique(&mut col_strategies, y);
        }
    }
    Ok(NashSolution {
        value,
        row_strategies,
        col_strategies,
    })
}

/// An equilibrium together with the preference-graph verdicts on its
/// support.
#[derive(Clone, Debug)]
pub struct NashCertificate {
    pub equilibrium: MixedProfile,
    /// Player 1's value.
    pub game_value: f64,
    pub support: Subgame,
    pub in_sink: bool,
    pub support_strongly_connected: bool,
}

fn subgame_for(game: &Game, rows: Vec<usize>, cols: Vec<usize>) -> Subgame {
    match game.mode() {
        Mode::Symmetric => {
            let mut all = rows;
            all.extend(cols);
            Subgame::strategies(all)
        }
        Mode::NonSymmetric => Subgame::new(rows, cols),
    }
}

fn verdicts(pg: &PreferenceGraph, sink: &[Profile], profiles: &[Profile]) -> Result<(bool, bool)> {
    let in_sink = profiles.iter().all(|p| sink.binary_search(p).is_ok());
    Ok((in_sink, pg.is_strongly_connected(profiles)?))
}

/// A Nash equilibrium of the zero-sum game, chosen as the extreme optimal
/// strategy of each player with the largest (then lexicographically
/// smallest) support.
pub fn solve_nash(game: &Game) -> Result<NashCertificate> {
    let sol = solve(game)?;
    let (x, y) = sol.chosen();
    let equilibrium = match game.mode() {
        Mode::Symmetric => MixedProfile::Symmetric(x.clone()),
        Mode::NonSymmetric => MixedProfile::Pair(x.clone(), y.clone()),
    };
    let support = match game.mode() {
        Mode::Symmetric => Subgame::strategies(support_of(x)),
        Mode::NonSymmetric => Subgame::new(support_of(x), support_of(y)),
    };
    let pg = PreferenceGraph::build(game);
    let sink = pg.sink_component()?;
    let (in_sink, support_strongly_connected) =
        verdicts(&pg, &sink, &support.profiles(game.mode()))?;
    Ok(NashCertificate {
        equilibrium,
        game_value: sol.value,
        support,
        in_sink,
        support_strongly_connected,
    })
}

/// The subgame spanned by the supports of all equilibria.
pub fn essential_subgame(game: &Game) -> Result<Subgame> {
    let sol = solve(game)?;
    Ok(subgame_for(
        game,
        sol.essential_rows(),
        sol.essential_cols(),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportVerdict {
    pub subgame: String,
    pub in_sink: bool,
    pub strongly_connected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PreferenceNashReport {
    pub value: f64,
    pub essential_subgame: String,
    pub essential_profiles: Vec<String>,
    pub in_sink: bool,
    pub strongly_connected: bool,
    /// Tied (0-weight) arc pairs inside the essential subgame.
    pub ties_in_subgame: Vec<(String, String)>,
    /// Verdicts on the support of every extreme equilibrium.
    pub extreme_supports: Vec<SupportVerdict>,
    pub passed: bool,
}

/// Checks that the essential subgame and every extreme equilibrium support
/// lie in the sink component and induce strongly connected subgraphs.
pub fn verify_preference_nash(game: &Game) -> Result<PreferenceNashReport> {
    let sol = solve(game)?;
    let pg = PreferenceGraph::build(game);
    let sink = pg.sink_component()?;
    let essential = subgame_for(game, sol.essential_rows(), sol.essential_cols());
    let profiles = essential.profiles(game.mode());
    let (in_sink, strongly_connected) = verdicts(&pg, &sink, &profiles)?;

    let ties_in_subgame = pg
        .ties()
        .into_iter()
        .filter(|&(a, b)| profiles.contains(&pg.nodes()[a]) && profiles.contains(&pg.nodes()[b]))
        .map(|(a, b)| (pg.label(a).to_string(), pg.label(b).to_string()))
        .collect();

    let mut extreme_supports = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for x in &sol.row_strategies {
        for y in &sol.col_strategies {
            let sub = match game.mode() {
                // each optimal strategy is a symmetric equilibrium on its own
                Mode::Symmetric => Subgame::strategies(support_of(x)),
                Mode::NonSymmetric => Subgame::new(support_of(x), support_of(y)),
            };
            if !seen.insert(sub.clone()) {
                continue;
            }
            let (a, b) = verdicts(&pg, &sink, &sub.profiles(game.mode()))?;
            extreme_supports.push(SupportVerdict {
                subgame: sub.describe(game),
                in_sink: a,
                strongly_connected: b,
            });
        }
    }
    if game.mode() == Mode::Symmetric {
        for y in &sol.col_strategies {
            let sub = Subgame::strategies(support_of(y));
            if seen.insert(sub.clone()) {
                let (a, b) = verdicts(&pg, &sink, &sub.profiles(game.mode()))?;
                extreme_supports.push(SupportVerdict {
                    subgame: sub.describe(game),
                    in_sink: a,
                    strongly_connected: b,
                });
            }
        }
    }

    let passed = in_sink
        && strongly_connected
        && extreme_supports
            .iter()
            .all(|v| v.in_sink && v.strongly_connected);
    Ok(PreferenceNashReport {
        value: sol.value,
        essential_subgame: essential.describe(game),
        essential_profiles: profiles.iter().map(|&p| game.profile_label(p)).collect(),
        in_sink,
        strongly_connected,
        ties_in_subgame,
        extreme_supports,
        passed,
    })
}

/// Largest violation of the best-response conditions at `(x, y)` against
/// `value`: deviations above the value for player 1 or below it for player
/// 2, and departures from the value on either support.
pub fn best_response_residual(game: &Game, x: &[f64], y: &[f64], value: f64) -> f64 {
    let m = game.float_matrix();
    let my: Vec<f64> = m
        .iter()
        .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    let mtx: Vec<f64> = (0..game.cols())
        .map(|t| x.iter().zip(m).map(|(xi, row)| xi * row[t]).sum())
        .collect();
    let mut worst: f64 = 0.0;
    for (s, u) in my.iter().enumerate() {
        worst = worst.max(u - value);
        if x[s] > SUPPORT_THRESHOLD {
            worst = worst.max((u - value).abs());
        }
    }
    for (t, u) in mtx.iter().enumerate() {
        worst = worst.max(value - u);
        if y[t] > SUPPORT_THRESHOLD {
            worst = worst.max((u - value).abs());
        }
    }
    worst
}

/// Euclidean norm of the replicator velocity at the certificate's
/// equilibrium.
pub fn fixed_point_residual(game: &Game, cert: &NashCertificate) -> Result<f64> {
    let v = velocity(game, &cert.equilibrium)?;
    Ok(v.iter().flatten().map(|a| a * a).sum::<f64>().sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub equilibrium: Vec<Vec<f64>>,
    pub value: f64,
    pub support: String,
    pub support_labels: Vec<String>,
    pub in_sink: bool,
    pub support_strongly_connected: bool,
}

impl NashCertificate {
    pub fn report(&self, game: &Game) -> CertificateReport {
        CertificateReport {
            equilibrium: self
                .equilibrium
                .parts()
                .iter()
                .map(|v| v.to_vec())
                .collect(),
            value: self.game_value,
            support: self.support.describe(game),
            support_labels: self
                .support
                .profiles(game.mode())
                .into_iter()
                .map(|p| game.profile_label(p))
                .collect(),
            in_sink: self.in_sink,
            support_strongly_connected: self.support_strongly_connected,
        }
    }
}
