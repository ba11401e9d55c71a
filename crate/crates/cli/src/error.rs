use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("inadmissible memristor a={a} b={b} c={c}: M({witness_q}) = {memristance_at_witness} < 0")]
    Inadmissible {
        a: f64,
        b: f64,
        c: f64,
        witness_q: f64,
        memristance_at_witness: f64,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) | CliError::Inadmissible { .. } => 3,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) | CliError::Inadmissible { .. } => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut error = json!({
            "class": self.class(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Inadmissible {
            a,
            b,
            c,
            witness_q,
            memristance_at_witness,
        } = self
        {
            error["model"] = json!({ "a": a, "b": b, "c": c });
            error["witness_q"] = json!(witness_q);
            error["memristance_at_witness"] = json!(memristance_at_witness);
        }
        json!({ "error": error })
    }

    pub fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Library errors met before any simulation starts are validation failures.
impl From<memaudit::Error> for CliError {
    fn from(err: memaudit::Error) -> Self {
        match err {
            memaudit::Error::Inadmissible {
                a,
                b,
                c,
                witness_q,
                memristance_at_witness,
            } => CliError::Inadmissible {
                a,
                b,
                c,
                witness_q,
                memristance_at_witness,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}
