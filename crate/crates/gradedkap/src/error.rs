use thiserror::Error;

/// Errors surfaced by the engine. The CLI maps these onto process exit
/// codes: parse errors exit 2, internal inconsistencies exit 3, failed
/// mathematical checks exit 1.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not an L-infinity structure: [Q,Q] has nonzero component on {coordinate}: {witness}")]
    NotHomological { coordinate: String, witness: String },
    #[error("connection has nonzero torsion: {0}")]
    Torsion(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("weight cap {cap} insufficient: {context}")]
    InsufficientCap { cap: u32, context: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
