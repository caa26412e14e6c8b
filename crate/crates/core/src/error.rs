use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid link: {0}")]
    InvalidLink(String),

    #[error("elevation angle {0} rad outside [0, pi/2]")]
    Domain(f64),

    #[error("user {0} cannot be served (non-positive rate)")]
    UnservableUser(usize),

    #[error("candidate grid is empty: {0}")]
    EmptyGrid(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no placement achieves full coverage: {0}")]
    InfeasibleCoverage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot generate users: {0}")]
    GenerationInfeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for outcomes that mean "no feasible deployment" rather than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::InfeasibleCoverage(_) | Error::EmptyGrid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
