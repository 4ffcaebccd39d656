use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric argument fell outside the range an operation accepts.
    #[error("{name} = {value} is out of domain (expected {expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("policy was stepped past its horizon of {horizon}")]
    PastHorizon { horizon: u64 },
    #[error("observation refers to arm {label}, which the policy is not tracking")]
    UnknownArm { label: u64 },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
