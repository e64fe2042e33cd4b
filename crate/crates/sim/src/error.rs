use thiserror::Error;

pub type SimResult<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),

    #[error("log: {0}")]
    Log(String),

    #[error(transparent)]
    Core(#[from] usv_core::Error),

    #[error("{count} scenario runs failed: {first}")]
    Suite { count: usize, first: String },
}
