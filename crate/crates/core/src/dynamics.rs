//! Replicator dynamics on zero-sum games.
//!
//! Symmetric games follow `ẋ_s = x_s (Mx)_s`; non-symmetric games follow
//! the two-population equation with player 2 receiving `-Mᵀ`. Integration is
//! classical RK4 with a fixed step. The default method works in log
//! coordinates on each population's support, so positive coordinates stay
//! positive, zero coordinates stay exactly zero and each state is a softmax
//! (hence on the simplex to rounding).

use serde::{Deserialize, Serialize};

use crate::content::{distance_to_content, mass_on};
use crate::error::{Error, Result};
use crate::game::{bilinear, Game, MixedProfile, Mode, Profile};
use crate::graph::PreferenceGraph;
use crate::symmetrise::{symmetrise, SymmetrisedGame};

/// `x_H` values this close to 1 count as converged for monotonicity checks.
pub const SATURATION: f64 = 1e-12;

fn mat_vec(m: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_t_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().zip(x).map(|(row, xi)| row[j] * xi).sum())
        .collect()
}

/// Per-capita growth rates `ẋ_s / x_s` for each population.
fn growth_rates(m: &[Vec<f64>], mode: Mode, parts: &[&[f64]]) -> Vec<Vec<f64>> {
    match mode {
        // xᵀMx vanishes for anti-symmetric M
        Mode::Symmetric => vec![mat_vec(m, parts[0])],
        Mode::NonSymmetric => {
            let (x, y) = (parts[0], parts[1]);
            let value = bilinear(m, x, y);
            let my = mat_vec(m, y);
            let mtx = mat_t_vec(m, x);
            vec![
                my.into_iter().map(|u| u - value).collect(),
                mtx.into_iter().map(|u| value - u).collect(),
            ]
        }
    }
}

/// Velocity of the symmetric replicator at `x`.
pub fn rhs_symmetric(game: &Game, x: &[f64]) -> Result<Vec<f64>> {
    if !game.is_symmetric() {
        return Err(Error::WrongMode {
            expected: "symmetric",
        });
    }
    if x.len() != game.rows() {
        return Err(Error::Dimension(format!(
            "strategy has {} entries, game has {} strategies",
            x.len(),
            game.rows()
        )));
    }
    let rates = mat_vec(game.float_matrix(), x);
    Ok(x.iter().zip(rates).map(|(xi, r)| xi * r).collect())
}

/// Velocities `(ẋ, ẏ)` of the two-population replicator at `z`.
pub fn rhs_nonsymmetric(game: &Game, z: &MixedProfile) -> Result<(Vec<f64>, Vec<f64>)> {
    if game.is_symmetric() {
        return Err(Error::WrongMode {
            expected: "non-symmetric",
        });
    }
    z.check_dimensions(game)?;
    let mut v = velocity(game, z)?;
    let dy = v.pop().unwrap();
    let dx = v.pop().unwrap();
    Ok((dx, dy))
}

/// Velocity of whichever replicator matches the game's mode, one vector per
/// population.
pub fn velocity(game: &Game, z: &MixedProfile) -> Result<Vec<Vec<f64>>> {
    z.check_dimensions(game)?;
    let parts = z.parts();
    let rates = growth_rates(game.float_matrix(), game.mode(), &parts);
    Ok(parts
        .iter()
        .zip(rates)
        .map(|(x, r)| x.iter().zip(r).map(|(xi, ri)| xi * ri).collect())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// RK4 on log-coordinates over the support, mapped back by softmax.
    Rk4Log,
    /// RK4 on the coordinates themselves.
    Rk4Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    pub horizon: f64,
    pub method: Method,
    /// Rescale each population to sum 1 after every direct step.
    pub renormalize: bool,
    pub mwu_eta: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 0.01,
            horizon: 200.0,
            method: Method::Rk4Log,
            renormalize: true,
            mwu_eta: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, horizon: f64) -> Self {
        Self {
            step,
            horizon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0 && self.step <= 0.1) {
            return Err(Error::InvalidConfig(format!(
                "step must lie in (0, 0.1], got {}",
                self.step
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be finite and nonnegative, got {}",
                self.horizon
            )));
        }
        if !(self.mwu_eta.is_finite() && self.mwu_eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mwu_eta must be positive, got {}",
                self.mwu_eta
            )));
        }
        Ok(())
    }

    /// Number of steps: `⌈horizon / step⌉`, each of length `horizon / steps`.
    pub fn steps(&self) -> usize {
        if self.horizon == 0.0 {
            0
        } else {
            ((self.horizon / self.step) - 1e-9).ceil().max(1.0) as usize
        }
    }
}

/// Log-coordinates on the support of each population.
#[derive(Clone, Debug)]
struct LogState {
    support: Vec<Vec<usize>>,
    logs: Vec<Vec<f64>>,
    dims: Vec<usize>,
}

impl LogState {
    fn new(z: &MixedProfile) -> Self {
        let parts = z.parts();
        let support: Vec<Vec<usize>> = parts
            .iter()
            .map(|v| (0..v.len()).filter(|&i| v[i] > 0.0).collect())
            .collect();
        let logs = parts
            .iter()
            .zip(&support)
            .map(|(v, s)| s.iter().map(|&i| v[i].ln()).collect())
            .collect();
        Self {
            support,
            logs,
            dims: parts.iter().map(|v| v.len()).collect(),
        }
    }

    fn to_parts(&self, logs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.dims
            .iter()
            .zip(&self.support)
            .zip(logs)
            .map(|((&d, s), u)| {
                let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = u.iter().map(|ui| (ui - max).exp()).collect();
                let total: f64 = w.iter().sum();
                let mut x = vec![0.0; d];
                for (&i, wi) in s.iter().zip(w) {
                    x[i] = wi / total;
                }
                x
            })
            .collect()
    }

    fn derivative(&self, m: &[Vec<f64>], mode: Mode, logs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let parts = self.to_parts(logs);
        let refs: Vec<&[f64]> = parts.iter().map(Vec::as_slice).collect();
        let rates = growth_rates(m, mode, &refs);
        self.support
            .iter()
            .zip(rates)
            .map(|(s, r)| s.iter().map(|&i| r[i]).collect())
            .collect()
    }
}

fn axpy(base: &[Vec<f64>], k: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(k)
        .map(|(b, k)| b.iter().zip(k).map(|(bi, ki)| bi + h * ki).collect())
        .collect()
}

fn rk4<F>(y: &[Vec<f64>], h: f64, f: F) -> Vec<Vec<f64>>
where
    F: Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
{
    let k1 = f(y);
    let k2 = f(&axpy(y, &k1, h / 2.0));
    let k3 = f(&axpy(y, &k2, h / 2.0));
    let k4 = f(&axpy(y, &k3, h));
    y.iter()
        .enumerate()
        .map(|(p, yp)| {
            yp.iter()
                .enumerate()
                .map(|(i, yi)| {
                    yi + h / 6.0 * (k1[p][i] + 2.0 * k2[p][i] + 2.0 * k3[p][i] + k4[p][i])
                })
                .collect()
        })
        .collect()
}

fn assemble(game: &Game, mut parts: Vec<Vec<f64>>) -> MixedProfile {
    match game.mode() {
        Mode::Symmetric => MixedProfile::Symmetric(parts.pop().unwrap()),
        Mode::NonSymmetric => {
            let y = parts.pop().unwrap();
            let x = parts.pop().unwrap();
            MixedProfile::Pair(x, y)
        }
    }
}

fn check_start(game: &Game, z: &MixedProfile) -> Result<()> {
    z.check_dimensions(game)?;
    for (k, v) in z.parts().iter().enumerate() {
        let sum: f64 = v.iter().sum();
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixedProfile(format!(
                "population {} is not on the simplex (sum {sum})",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Runs the replicator flow from `z` for time `duration` (which may be
/// negative) using `substeps` log-coordinate RK4 steps. Used as the
/// high-accuracy reference flow.
pub fn flow(game: &Game, z: &MixedProfile, duration: f64, substeps: usize) -> Result<MixedProfile> {
    check_start(game, z)?;
    let state = LogState::new(z);
    let m = game.float_matrix();
    let h = duration / substeps.max(1) as f64;
    let mut logs = state.logs.clone();
    for _ in 0..substeps.max(1) {
        logs = rk4(&logs, h, |u| state.derivative(m, game.mode(), u));
    }
    let out = assemble(game, state.to_parts(&logs));
    if !out.is_finite() {
        return Err(Error::Diverged {
            time: duration,
            detail: "non-finite state".into(),
        });
    }
    Ok(out)
}

/// A sampled solution of the replicator equation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MixedProfile>,
    /// Player 1's expected payoff per sample.
    pub payoff: Vec<f64>,
    /// `x_H` per sample, when a profile set was supplied.
    pub mass: Option<Vec<f64>>,
    /// `1 - x_H` per sample, when a profile set was supplied.
    pub distance: Option<Vec<f64>>,
    coordinate_labels: Vec<String>,
}

/// Integrates the replicator from `z0` on the grid described by `cfg`.
/// When `h` is given, `x_H` and the distance to its content are recorded.
pub fn integrate(
    game: &Game,
    z0: &MixedProfile,
    cfg: &IntegratorConfig,
    h: Option<&[Profile]>,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_start(game, z0)?;
    let steps = cfg.steps();
    let dt = if steps == 0 {
        0.0
    } else {
        cfg.horizon / steps as f64
    };
    let m = game.float_matrix();
    let mode = game.mode();

    let mut states = Vec::with_capacity(steps + 1);
    states.push(z0.clone());
    match cfg.method {
        Method::Rk4Log => {
            let state = LogState::new(z0);
            let mut logs = state.logs.clone();
            for k in 1..=steps {
                logs = rk4(&logs, dt, |u| state.derivative(m, mode, u));
                let z = assemble(game, state.to_parts(&logs));
                if !logs.iter().flatten().all(|u| u.is_finite()) || !z.is_finite() {
                    return Err(Error::Diverged {
                        time: k as f64 * dt,
                        detail: "non-finite log-coordinate".into(),
                    });
                }
                states.push(z);
            }
        }
        Method::Rk4Direct => {
            let f = |y: &[Vec<f64>]| {
                let refs: Vec<&[f64]> = y.iter().map(Vec::as_slice).collect();
                let rates = growth_rates(m, mode, &refs);
                y.iter()
                    .zip(rates)
                    .map(|(x, r)| x.iter().zip(r).map(|(xi, ri)| xi * ri).collect())
                    .collect()
            };
            let mut y: Vec<Vec<f64>> = z0.parts().iter().map(|v| v.to_vec()).collect();
            for k in 1..=steps {
                y = rk4(&y, dt, f);
                if cfg.renormalize {
                    for v in &mut y {
                        for x in v.iter_mut() {
                            if *x < 0.0 {
                                *x = 0.0;
                            }
                        }
                        let s: f64 = v.iter().sum();
                        v.iter_mut().for_each(|x| *x /= s);
                    }
                }
                if !y.iter().flatten().all(|x| x.is_finite()) {
                    return Err(Error::Diverged {
                        time: k as f64 * dt,
                        detail: "non-finite coordinate".into(),
                    });
                }
                states.push(assemble(game, y.clone()));
            }
        }
    }

    let times = (0..=steps).map(|k| k as f64 * dt).collect();
    let payoff = states
        .iter()
        .map(|z| game.expected_payoff(z))
        .collect::<Result<Vec<_>>>()?;
    let (mass, distance) = match h {
        Some(h) => (
            Some(states.iter().map(|z| mass_on(z, h)).collect()),
            Some(states.iter().map(|z| distance_to_content(z, h)).collect()),
        ),
        None => (None, None),
    };
    Ok(Trajectory {
        times,
        states,
        payoff,
        mass,
        distance,
        coordinate_labels: coordinate_labels(game),
    })
}

fn coordinate_labels(game: &Game) -> Vec<String> {
    match game.mode() {
        Mode::Symmetric => game
            .row_labels()
            .iter()
            .map(|l| format!("x[{l}]"))
            .collect(),
        Mode::NonSymmetric => game
            .row_labels()
            .iter()
            .map(|l| format!("x1[{l}]"))
            .chain(game.col_labels().iter().map(|l| format!("x2[{l}]")))
            .collect(),
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &MixedProfile {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }

    /// First sample index at which `x_H` drops by more than `slack` from the
    /// previous sample, ignoring samples already within [`SATURATION`] of 1.
    pub fn monotonicity_violation(&self, slack: f64) -> Option<usize> {
        let mass = self.mass.as_ref()?;
        mass.windows(2)
            .position(|w| w[0] <= 1.0 - SATURATION && w[1] < w[0] - slack)
            .map(|i| i + 1)
    }

    /// Largest `|Σ coordinates − 1|` over every population and sample.
    pub fn max_simplex_drift(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|z| {
                z.parts()
                    .into_iter()
                    .map(|v| (v.iter().sum::<f64>() - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Whether every coordinate that is zero initially is exactly zero at
    /// every sample.
    pub fn faces_preserved(&self) -> bool {
        let start = &self.states[0];
        let zeros: Vec<Vec<usize>> = start
            .parts()
            .iter()
            .map(|v| (0..v.len()).filter(|&i| v[i] == 0.0).collect())
            .collect();
        self.states.iter().all(|z| {
            z.parts()
                .iter()
                .zip(&zeros)
                .all(|(v, zs)| zs.iter().all(|&i| v[i] == 0.0))
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.coordinate_labels.iter().cloned());
        header.extend(["x_H", "payoff", "dist_content"].map(String::from));
        w.write_record(&header).map_err(csv_error)?;
        for (k, z) in self.states.iter().enumerate() {
            let mut row = vec![self.times[k].to_string()];
            row.extend(
                z.parts()
                    .iter()
                    .flat_map(|v| v.iter().map(|x| x.to_string())),
            );
            row.push(
                self.mass
                    .as_ref()
                    .map_or(String::new(), |m| m[k].to_string()),
            );
            row.push(self.payoff[k].to_string());
            row.push(
                self.distance
                    .as_ref()
                    .map_or(String::new(), |d| d[k].to_string()),
            );
            w.write_record(&row).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// A self-contained SVG line chart of `x_H` and `1 - x_H` against time
    /// (or of the payoff, when no profile set was tracked).
    pub fn to_svg(&self) -> String {
        let series: Vec<(&str, &str, &[f64])> = match (&self.mass, &self.distance) {
            (Some(m), Some(d)) => vec![("x_H", "#1f77b4", m), ("dist_content", "#d62728", d)],
            _ => vec![("payoff", "#2ca02c", &self.payoff)],
        };
        svg_chart(&self.times, &series)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn svg_chart(times: &[f64], series: &[(&str, &str, &[f64])]) -> String {
    use std::fmt::Write as _;
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let t_max = times.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|s| s.2.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let sx = |t: f64| PAD + (W - 2.0 * PAD) * t / t_max;
    let sy = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);
    // thin long trajectories to at most ~2000 points per series
    let stride = (times.len() / 2000).max(1);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<polyline points="{PAD},{PAD} {PAD},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="{}" font-size="12">{lo:.3}</text><text x="{PAD}" y="{}" font-size="12">{hi:.3}</text>"#,
        H - PAD + 15.0,
        PAD - 5.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">t = {t_max}</text>"#,
        W - PAD,
        H - PAD + 15.0
    );
    for (k, (name, colour, values)) in series.iter().enumerate() {
        let mut pts = String::new();
        let mut idx: Vec<usize> = (0..values.len()).step_by(stride).collect();
        if idx.last() != Some(&(values.len() - 1)) && !values.is_empty() {
            idx.push(values.len() - 1);
        }
        for i in idx {
            let _ = write!(pts, "{:.2},{:.2} ", sx(times[i]), sy(values[i]));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{name}</text>"#,
            W - PAD - 90.0,
            PAD + 15.0 * k as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Coordinate-wise mean of the sampled states.
pub fn time_average(tr: &Trajectory) -> Result<MixedProfile> {
    let first = tr
        .states
        .first()
        .ok_or_else(|| Error::InvalidMixedProfile("empty trajectory".into()))?;
    let mut sums: Vec<Vec<f64>> = first.parts().iter().map(|v| vec![0.0; v.len()]).collect();
    for z in &tr.states {
        for (acc, v) in sums.iter_mut().zip(z.parts()) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
    }
    let n = tr.states.len() as f64;
    let parts: Vec<Vec<f64>> = sums
        .into_iter()
        .map(|v| {
            let mean: Vec<f64> = v.into_iter().map(|s| s / n).collect();
            let total: f64 = mean.iter().sum();
            mean.into_iter().map(|x| x / total).collect()
        })
        .collect();
    Ok(match first {
        MixedProfile::Symmetric(_) => MixedProfile::Symmetric(parts.into_iter().next().unwrap()),
        MixedProfile::Pair(..) => {
            let mut it = parts.into_iter();
            MixedProfile::Pair(it.next().unwrap(), it.next().unwrap())
        }
    })
}

/// One step of multiplicative weights: each population reweights its
/// strategies by `exp(eta · payoff)` and renormalises. Player 2's payoffs are
/// `-Mᵀx`. Zero coordinates stay zero.
pub fn mwu_step(game: &Game, z: &MixedProfile, eta: f64) -> Result<MixedProfile> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "eta must be positive, got {eta}"
        )));
    }
    check_start(game, z)?;
    let m = game.float_matrix();
    let parts = z.parts();
    let payoffs: Vec<Vec<f64>> = match game.mode() {
        Mode::Symmetric => vec![mat_vec(m, parts[0])],
        Mode::NonSymmetric => vec![
            mat_vec(m, parts[1]),
            mat_t_vec(m, parts[0]).into_iter().map(|u| -u).collect(),
        ],
    };
    let next: Vec<Vec<f64>> = parts
        .iter()
        .zip(&payoffs)
        .map(|(x, u)| {
            let shift = x
                .iter()
                .zip(u)
                .filter(|(xi, _)| **xi > 0.0)
                .map(|(_, ui)| *ui)
                .fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = x
                .iter()
                .zip(u)
                .map(|(xi, ui)| {
                    if *xi > 0.0 {
                        xi * (eta * (ui - shift)).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|wi| wi / total).collect()
        })
        .collect();
    Ok(assemble(game, next))
}

/// The rate of change of `x_H` for a certified sink component `H`.
///
/// `ẋ_H = Σ_{q∉H} Σ_{h∈H} x_q x_h A[h][q]`, with `A = M` for symmetric games
/// and `A = S_M` (over product masses) otherwise.
#[derive(Clone, Debug)]
pub struct SinkLyapunov {
    game: Game,
    inside: Vec<bool>,
    symmetrised: Option<SymmetrisedGame>,
}

impl SinkLyapunov {
    /// Refuses any `h` that is not exactly the sink component of the game's
    /// preference graph.
    pub fn certify(game: &Game, h: &[Profile]) -> Result<Self> {
        let sink = PreferenceGraph::build(game).sink_component()?;
        let mut given: Vec<Profile> = h.to_vec();
        given.sort_unstable();
        given.dedup();
        if given != sink {
            return Err(Error::Certification(format!(
                "profile set of size {} is not the sink component (size {})",
                given.len(),
                sink.len()
            )));
        }
        let mut inside = vec![false; game.profile_count()];
        for &p in &sink {
            inside[game.profile_index(p)?] = true;
        }
        let symmetrised = match game.mode() {
            Mode::Symmetric => None,
            Mode::NonSymmetric => Some(symmetrise(game)?),
        };
        Ok(Self {
            game: game.clone(),
            inside,
            symmetrised,
        })
    }

    pub fn sink(&self) -> Vec<Profile> {
        (0..self.inside.len())
            .filter(|&i| self.inside[i])
            .map(|i| self.game.profile_at(i))
            .collect()
    }

    pub fn mass(&self, z: &MixedProfile) -> f64 {
        z.profile_masses(&self.game)
            .iter()
            .zip(&self.inside)
            .filter(|(_, &inside)| inside)
            .map(|(x, _)| x)
            .sum()
    }

    pub fn rate(&self, z: &MixedProfile) -> Result<f64> {
        z.check_dimensions(&self.game)?;
        let masses = z.profile_masses(&self.game);
        let a = match &self.symmetrised {
            Some(s) => s.float_matrix(),
            None => self.game.float_matrix(),
        };
        let mut total = 0.0;
        for (h, &xh) in masses.iter().enumerate() {
            if !self.inside[h] || xh == 0.0 {
                continue;
            }
            for (q, &xq) in masses.iter().enumerate() {
                if !self.inside[q] {
                    total += xq * xh * a[h][q];
                }
            }
        }
        Ok(total)
    }
}

/// `ẋ_H` at `z`, after certifying that `h` is the sink component.
pub fn lyapunov_rate(game: &Game, h: &[Profile], z: &MixedProfile) -> Result<f64> {
    SinkLyapunov::certify(game, h)?.rate(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    /// `d/dt (x1_{p₁} x2_{p₂})` by the product rule, row-major.
    pub product_rule: Vec<f64>,
    /// `x_p (S_M x)_p`, row-major.
    pub symmetrised: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Compares the two routes to the velocity of every product mass `x_p`.
pub fn check_embedding(game: &Game, z: &MixedProfile) -> Result<EmbeddingReport> {
    let s = symmetrise(game)?;
    let (dx, dy) = rhs_nonsymmetric(game, z)?;
    let MixedProfile::Pair(x, y) = z else {
        unreachable!("checked by rhs_nonsymmetric")
    };
    let masses = z.profile_masses(game);
    let sx = s.apply(&masses);

    let mut product_rule = Vec::with_capacity(masses.len());
    let mut symmetrised = Vec::with_capacity(masses.len());
    let mut max_discrepancy: f64 = 0.0;
    for (i, p) in game.profiles().into_iter().enumerate() {
        let Profile::Pair(r, c) = p else {
            unreachable!()
        };
        let lhs = dx[r] * y[c] + x[r] * dy[c];
        let rhs = masses[i] * sx[i];
        max_discrepancy = max_discrepancy.max((lhs - rhs).abs());
        product_rule.push(lhs);
        symmetrised.push(rhs);
    }
    Ok(EmbeddingReport {
        product_rule,
        symmetrised,
        max_discrepancy,
    })
}
