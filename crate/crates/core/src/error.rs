use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver, the certifier and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coefficient overflow: order {order} with R = {r}, mu = {mu}")]
    Overflow { order: usize, r: f64, mu: f64 },

    #[error("singular pivot at node {node} (unknown {row})")]
    SingularPivot { node: usize, row: usize },

    #[error(
        "Picard iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(
        "positivity violated: {component}[{node}] = {value:e} below clip threshold {threshold:e}"
    )]
    Positivity {
        component: &'static str,
        node: usize,
        value: f64,
        threshold: f64,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
