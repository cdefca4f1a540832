use darksight::Error;
use thiserror::Error;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// A command was invoked with missing or contradictory arguments.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Process exit code for a failed command.
///
/// | code | meaning |
/// |------|---------|
/// | 1 | I/O or other runtime failure |
/// | 2 | usage: bad arguments or configuration values |
/// | 3 | parse: malformed annotation, detection, config or weight files |
/// | 4 | validation: inputs parse but are inconsistent |
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidConfig(_) => EXIT_USAGE,
                Error::Parse { .. }
                | Error::Format(_)
                | Error::UnsupportedFormat(_)
                | Error::Truncated { .. } => EXIT_PARSE,
                Error::Validation(_)
                | Error::NoMapping(_)
                | Error::IncompatibleWeights { .. }
                | Error::InvalidInput(_)
                | Error::InvalidShape(_) => EXIT_VALIDATION,
                Error::Io(_) => EXIT_OTHER,
            };
        }
    }
    EXIT_OTHER
}
