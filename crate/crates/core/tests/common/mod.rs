//! Reference implementations used as oracles by the integration tests.
//! They work directly on integer or float matrices and share no code with
//! the library beyond reading a game's entries.

#![allow(dead_code, clippy::needless_range_loop)]

use num_traits::ToPrimitive;
use replicator_attractor::{Game, MixedProfile};

pub fn int_matrix(game: &Game) -> Vec<Vec<i64>> {
    game.matrix()
        .iter()
        .map(|row| {
            row.iter()
                .map(|r| {
                    assert!(r.is_integer(), "oracle expects integer payoffs");
                    r.to_integer().to_i64().unwrap()
                })
                .collect()
        })
        .collect()
}

/// Adjacency of the preference graph over profiles (row-major for
/// non-symmetric games): an arc means the source is weakly dispreferred.
pub fn adjacency(m: &[Vec<i64>], symmetric: bool) -> Vec<Vec<bool>> {
    let n = m.len();
    if symmetric {
        return (0..n)
            .map(|s| (0..n).map(|t| s != t && m[s][t] <= 0).collect())
            .collect();
    }
    let cols = m[0].len();
    let size = n * cols;
    let mut adj = vec![vec![false; size]; size];
    for p in 0..size {
        let (r, c) = (p / cols, p % cols);
        for q in 0..size {
            let (r2, c2) = (q / cols, q % cols);
            if p == q {
                continue;
            }
            if c == c2 {
                // player 1 deviates and maximises
                adj[p][q] = m[r2][c] >= m[r][c];
            } else if r == r2 {
                // player 2 deviates and minimises
                adj[p][q] = m[r][c2] <= m[r][c];
            }
        }
    }
    adj
}

pub fn closure(adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut reach: Vec<Vec<bool>> = adj.to_vec();
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// All sink strongly connected components, each sorted.
pub fn sink_components(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let reach = closure(adj);
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut sinks = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        let closed = (0..n).all(|j| !reach[i][j] || class.contains(&j));
        if closed {
            sinks.push(class);
        }
    }
    sinks
}

/// Whether `nodes` induce a strongly connected subgraph of `adj`.
pub fn induces_strongly_connected(adj: &[Vec<bool>], nodes: &[usize]) -> bool {
    let sub: Vec<Vec<bool>> = nodes
        .iter()
        .map(|&i| nodes.iter().map(|&j| adj[i][j]).collect())
        .collect();
    closure(&sub).iter().all(|row| row.iter().all(|&b| b))
}

pub fn float_matrix(m: &[Vec<i64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect()
}

/// Replicator velocity written out coordinate by coordinate.
pub fn velocity(m: &[Vec<f64>], parts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if parts.len() == 1 {
        let x = &parts[0];
        let n = x.len();
        let fit: Vec<f64> = (0..n)
            .map(|s| (0..n).map(|t| m[s][t] * x[t]).sum())
            .collect();
        let avg: f64 = (0..n).map(|s| x[s] * fit[s]).sum();
        return vec![(0..n).map(|s| x[s] * (fit[s] - avg)).collect()];
    }
    let (x, y) = (&parts[0], &parts[1]);
    let (n, k) = (x.len(), y.len());
    let u1: Vec<f64> = (0..n)
        .map(|r| (0..k).map(|c| m[r][c] * y[c]).sum())
        .collect();
    let u2: Vec<f64> = (0..k)
        .map(|c| -(0..n).map(|r| m[r][c] * x[r]).sum::<f64>())
        .collect();
    let a1: f64 = (0..n).map(|r| x[r] * u1[r]).sum();
    let a2: f64 = (0..k).map(|c| y[c] * u2[c]).sum();
    vec![
        (0..n).map(|r| x[r] * (u1[r] - a1)).collect(),
        (0..k).map(|c| y[c] * (u2[c] - a2)).collect(),
    ]
}

/// Plain RK4 in the original coordinates.
pub fn rk4_flow(m: &[Vec<f64>], start: &[Vec<f64>], duration: f64, steps: usize) -> Vec<Vec<f64>> {
    let h = duration / steps as f64;
    let add = |z: &[Vec<f64>], k: &[Vec<f64>], s: f64| -> Vec<Vec<f64>> {
        z.iter()
            .zip(k)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + s * v).collect())
            .collect()
    };
    let mut z = start.to_vec();
    for _ in 0..steps {
        let k1 = velocity(m, &z);
        let k2 = velocity(m, &add(&z, &k1, h / 2.0));
        let k3 = velocity(m, &add(&z, &k2, h / 2.0));
        let k4 = velocity(m, &add(&z, &k3, h));
        z = z
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.iter()
                    .enumerate()
                    .map(|(j, val)| {
                        val + h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j])
                    })
                    .collect()
            })
            .collect();
    }
    z
}

pub fn parts(z: &MixedProfile) -> Vec<Vec<f64>> {
    z.parts().iter().map(|v| v.to_vec()).collect()
}

/// Mass of the profile indices `h` (row-major) under the product of `parts`.
pub fn mass(parts: &[Vec<f64>], h: &[usize]) -> f64 {
    if parts.len() == 1 {
        return h.iter().map(|&s| parts[0][s]).sum();
    }
    let cols = parts[1].len();
    h.iter()
        .map(|&p| parts[0][p / cols] * parts[1][p % cols])
        .sum()
}

/// `S[p][q] = M[p1][q2] - M[q1][p2]`.
pub fn symmetrised(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let cols = m[0].len();
    let size = m.len() * cols;
    (0..size)
        .map(|p| {
            (0..size)
                .map(|q| m[p / cols][q % cols] - m[q / cols][p % cols])
                .collect()
        })
        .collect()
}
