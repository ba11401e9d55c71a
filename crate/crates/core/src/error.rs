use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// The memristor model has M(q) < 0 somewhere; `witness_q` is such a q.
    #[error("inadmissible memristor model (a={a}, b={b}, c={c}): M({witness_q}) = {memristance_at_witness} < 0")]
    Inadmissible {
        a: f64,
        b: f64,
        c: f64,
        witness_q: f64,
        memristance_at_witness: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
