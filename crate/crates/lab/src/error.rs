use argmin_lab_core::Error;

/// Documented process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 2;
    pub const ESTIMATION: u8 = 3;
    pub const TOO_MANY_FAILURES: u8 = 4;
    pub const VIOLATION: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("InvalidInput: {0}")]
    Input(String),
    #[error("{kind}: {0}", kind = .0.kind())]
    Core(Error),
    #[error("PropertyViolation: {0} violation(s)")]
    Violations(usize),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub(crate) fn from_core_input(e: Error) -> Self {
        CliError::Core(e)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => exit::INPUT,
            CliError::Violations(_) => exit::VIOLATION,
            CliError::Core(Error::TooManyFailures { .. }) => exit::TOO_MANY_FAILURES,
            CliError::Core(e)
                if e.is_estimation_failure() || matches!(e, Error::NonFiniteObjective) =>
            {
                exit::ESTIMATION
            }
            CliError::Core(_) => exit::INPUT,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::from(Error::NoEvents).exit_code(), 3);
        assert_eq!(
            CliError::from(Error::InvalidInput("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(Error::TooManyFailures {
                failures: 9,
                replications: 100
            })
            .exit_code(),
            4
        );
        assert_eq!(CliError::Violations(1).exit_code(), 5);
        assert!(CliError::from(Error::RankDeficient)
            .to_string()
            .starts_with("RankDeficient"));
    }
}
