//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad numeric input to a pure computation (non-finite, non-positive, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed magnitude text such as `4.7x` or `k10`.
    #[error("magnitude parse error at byte {offset}: {msg}")]
    Magnitude { offset: usize, msg: String },

    /// Parameter-file problem (missing key, bad value, invariant violation).
    #[error("config error: {0}")]
    Config(String),

    /// A design engine could not satisfy the requested specification.
    #[error("design error: {0}")]
    Design(String),

    /// Netlist text that does not conform to the dialect.
    #[error("netlist parse error at line {line}: {msg}")]
    NetlistParse { line: usize, msg: String },

    /// A circuit is missing pieces or wired inconsistently.
    #[error("structural error: {0}")]
    Structure(String),

    /// An element or construct the small-signal model cannot represent.
    #[error("model error: {0}")]
    Model(String),

    /// Numerical failure in the nodal solver.
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
