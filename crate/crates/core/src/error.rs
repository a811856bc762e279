use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed game file: {0}")]
    Parse(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("profiles {0} and {1} are not comparable; their weight is undefined")]
    Incomparable(String, String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operation requires a {expected} game")]
    WrongMode { expected: &'static str },

    #[error("invalid mixed profile: {0}")]
    InvalidMixedProfile(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("integration diverged at t = {time}: {detail}")]
    Diverged { time: f64, detail: String },

    #[error("sink component certification failed: {0}")]
    Certification(String),

    #[error("equilibrium solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
