use thiserror::Error;

/// Process exit status for a failed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    InvalidArguments,
    Io,
    InvariantFailure,
    NonConvergence,
}

impl ExitKind {
    pub fn code(self) -> u8 {
        match self {
            ExitKind::InvalidArguments => 2,
            ExitKind::Io => 3,
            ExitKind::InvariantFailure => 4,
            ExitKind::NonConvergence => 5,
        }
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(ExitKind::InvalidArguments, message)
    }
}

/// Exit code for an error chain: the first recognised cause decides.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.kind.code();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ExitKind::Io.code();
        }
        if let Some(e) = cause.downcast_ref::<gaussfrust::Error>() {
            use gaussfrust::Error::*;
            let kind = match e {
                Dimension(_) | Shape { .. } | InvalidArgument(_) => ExitKind::InvalidArguments,
                InvariantViolation { .. } | ConstraintViolation { .. } => {
                    ExitKind::InvariantFailure
                }
                NumericalDomain(_) | Evaluation(_) => ExitKind::NonConvergence,
            };
            return kind.code();
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn codes_follow_the_first_known_cause() {
        let f: anyhow::Error = Failure::new(ExitKind::InvariantFailure, "bad").into();
        assert_eq!(exit_code(&f), 4);
        let io = anyhow::Error::from(std::io::Error::other("disk")).context("writing");
        assert_eq!(exit_code(&io), 3);
        let core: anyhow::Error = gaussfrust::Error::Shape { n: 3, n_a: 2 }.into();
        assert_eq!(exit_code(&core), 2);
        let eval = Err::<(), _>(gaussfrust::Error::Evaluation("nan".into()))
            .context("sweep")
            .unwrap_err();
        assert_eq!(exit_code(&eval), 5);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }
}
