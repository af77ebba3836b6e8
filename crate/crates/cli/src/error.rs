use std::fmt;

/// Failure classes; outputs are written before a semantic or numerical
/// failure is reported.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags.
    Input(String),
    /// Well-formed input the command refuses to evaluate.
    Semantic(String),
    /// A solver or optimizer did not produce a usable answer.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Semantic(m) => write!(f, "rejected: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
