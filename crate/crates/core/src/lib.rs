//! EEG-driven Boolean expressions, compiled to Grover search circuits, simulated
//! exactly and rendered as sound.
//!
//! The flow is [`eeg`] → [`boolexpr`] → [`qlc`] → [`qsim`] → [`sonify`], with
//! [`pipeline`] running it over consecutive windows of a recording.

pub mod boolexpr;
pub mod eeg;
pub mod pipeline;
pub mod qlc;
pub mod qsim;
pub mod sonify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sim(#[from] qsim::SimError),
    #[error(transparent)]
    Expr(#[from] boolexpr::ExprError),
    #[error(transparent)]
    Compile(#[from] qlc::QlcError),
    #[error(transparent)]
    Eeg(#[from] eeg::EegError),
    #[error(transparent)]
    Sonify(#[from] sonify::SonifyError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Sim(_) => "simulation",
            Error::Expr(_) => "expression",
            Error::Compile(qlc::QlcError::Parse { .. }) => "parse",
            Error::Compile(_) => "compile",
            Error::Eeg(_) => "eeg",
            Error::Sonify(_) => "sonify",
            Error::Pipeline(_) => "pipeline",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
