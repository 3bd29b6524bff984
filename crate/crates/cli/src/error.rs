use std::path::PathBuf;

use causaldp::adversary::AdversaryError;
use causaldp::brp::BrpError;
use causaldp::checkers::CheckError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no file or bundled scenario named `{0}`")]
    UnknownInput(String),
    /// Syntax or type error; serde_json's message carries line and column.
    #[error("{input}: {message}")]
    Parse { input: String, message: String },
    /// Well-formed input that does not describe a valid object. `path`
    /// locates the offending section of the file.
    #[error("{input}: invalid {path}: {message}")]
    Validation {
        input: String,
        path: String,
        message: String,
    },
    #[error("{0} needs a population; pass --pop")]
    MissingPopulation(String),
    #[error("{0} quantifies over every population and does not take --pop")]
    UnexpectedPopulation(String),
    #[error("{0} needs a target ratio; pass --target-ratio p/q")]
    MissingTarget(String),
    #[error("{0}")]
    NotApplicable(String),
    #[error("output `{0}` is impossible under the prior")]
    ZeroEvidence(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Brp(#[from] BrpError),
}

impl CliError {
    /// 3 for degenerate inputs, 4 for everything that failed to parse or
    /// validate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ZeroEvidence(_) => 3,
            _ => 4,
        }
    }
}

impl From<AdversaryError> for CliError {
    fn from(e: AdversaryError) -> Self {
        match e {
            AdversaryError::ZeroEvidence(o) => CliError::ZeroEvidence(o),
            other => CliError::NotApplicable(other.to_string()),
        }
    }
}
