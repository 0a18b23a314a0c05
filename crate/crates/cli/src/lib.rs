//! File formats, certificates, commands and suites behind the `exqip` binary.

pub mod certificate;
pub mod commands;
pub mod format;
pub mod suites;

use std::fmt;

/// Command failure, split by exit code: invalid input data (2) versus a
/// well-formed object that fails a mathematical check (1).
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Math(String),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    pub fn math(msg: impl Into<String>) -> Self {
        Failure::Math(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Math(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Math(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

impl From<exqip::Error> for Failure {
    fn from(e: exqip::Error) -> Self {
        use exqip::Error::*;
        match e {
            Shape(_) | NonFinite | Signature(_) => Failure::Input(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

pub type Result<T, E = Failure> = std::result::Result<T, E>;

/// What a command prints and whether it succeeded.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub success: bool,
}

impl Output {
    pub fn ok(text: impl Into<String>) -> Self {
        Output { text: text.into(), success: true }
    }

    pub fn failed(text: impl Into<String>) -> Self {
        Output { text: text.into(), success: false }
    }
}
