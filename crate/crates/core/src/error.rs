use std::fmt;

use thiserror::Error;

/// Identifies the realization that produced an error so it can be rebuilt
/// with [`crate::model::draw_realization`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replay {
    pub seed: u64,
    pub index: usize,
}

impl fmt::Display for Replay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed={}, realization={}", self.seed, self.index)
    }
}

fn replay_suffix(replay: &Option<Replay>) -> String {
    match replay {
        Some(r) => format!(" [{r}]"),
        None => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("site {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("chain of {n} sites exceeds the exact-oracle capacity of {cap} sites")]
    Capacity { n: usize, cap: usize },

    #[error("numerical failure: {message}{}", replay_suffix(.replay))]
    Numerical {
        message: String,
        replay: Option<Replay>,
    },

    #[error("degenerate ground state (gap = {gap:e}){}", replay_suffix(.replay))]
    Degenerate { gap: f64, replay: Option<Replay> },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("not localized: decay rate {eta} is not positive")]
    NotLocalized { eta: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
            replay: None,
        }
    }

    /// Attach realization metadata to numerical and degeneracy errors.
    pub fn with_replay(self, seed: u64, index: usize) -> Self {
        let r = Some(Replay { seed, index });
        match self {
            Error::Numerical { message, .. } => Error::Numerical { message, replay: r },
            Error::Degenerate { gap, .. } => Error::Degenerate { gap, replay: r },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
