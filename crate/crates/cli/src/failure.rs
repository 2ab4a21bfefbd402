use std::fmt;

/// A command failure carrying its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// An oracle disagreed or a validator did not pass (exit 1).
    Oracle(String),
    /// Malformed input or arguments (exit 2).
    Input(String),
    /// The input or a result violates an invariant (exit 3).
    Invariant(String),
}

impl Failure {
    pub fn oracle(msg: impl Into<String>) -> Self {
        Failure::Oracle(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Failure::Invariant(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Oracle(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Oracle(m) => write!(f, "oracle failure: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Invariant(m) => write!(f, "invariant violation: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<hyponorm::Error> for Failure {
    fn from(e: hyponorm::Error) -> Self {
        use hyponorm::Error as E;
        match e {
            E::Consistency(_) => Failure::invariant(e.to_string()),
            E::OutsideWindow { .. } => Failure::invariant(e.to_string()),
            E::Resolution(_) => Failure::oracle(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}
