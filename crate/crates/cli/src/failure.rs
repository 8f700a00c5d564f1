use std::fmt;

/// Why a command stopped, mapped onto the process exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config file or parameter values (exit 2).
    Config(anyhow::Error),
    /// Everything that goes wrong after validation, such as I/O (exit 1).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl fmt::Display) -> Self {
        Failure::Config(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<uav_pricing::Error> for Failure {
    fn from(e: uav_pricing::Error) -> Self {
        match e {
            uav_pricing::Error::NotConverged { .. } => Failure::Runtime(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
