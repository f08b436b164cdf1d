use std::path::PathBuf;

use nhqmc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0} validation check(s) failed")]
    Validation(usize),
    #[error("numerical guard tripped at {0} time point(s)")]
    Guard(usize),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Guard(_) => 4,
            CliError::Core(e) => match e {
                CoreError::Input(_) | CoreError::Resource { .. } | CoreError::InvalidGenerator(_) => 2,
                CoreError::Numerical(_) | CoreError::Consistency(_) | CoreError::DenominatorVanishes { .. } => 4,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}
