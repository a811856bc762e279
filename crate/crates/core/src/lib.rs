//! Preference graphs, sink components and replicator dynamics for
//! two-player zero-sum games.
//!
//! A game is either symmetric (an anti-symmetric payoff matrix played by a
//! single population) or an arbitrary `n×m` matrix played by two
//! populations. The preference graph over pure profiles has a unique sink
//! strongly connected component; the replicator flow is attracted to the
//! content of that sink, and every Nash equilibrium is supported inside it.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod content;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fuzz;
pub mod game;
pub mod graph;
pub mod symmetrise;
pub mod verify;

pub use content::{Content, Subgame};
pub use dynamics::{integrate, IntegratorConfig, Method, SinkLyapunov, Trajectory};
pub use equilibrium::{solve_nash, NashCertificate};
pub use error::{Error, Result};
pub use game::{Game, MixedProfile, Mode, Profile, Rational};
pub use graph::PreferenceGraph;
pub use symmetrise::{symmetrise, SymmetrisedGame};
