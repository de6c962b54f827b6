use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported cell layout: L = {0} (supported: 1, 7, 19)")]
    UnsupportedLayout(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("zero distance between BS {bs} and user {user}")]
    ZeroDistance { bs: usize, user: usize },
    #[error("pilot capacity exceeded: {users} users for {length} orthogonal pilots")]
    PilotCapacity { users: usize, length: usize },
    #[error("unsupported QAM order {0}: must be 4^b with b >= 1")]
    UnsupportedQam(usize),
    #[error("user {0} has no pilot in this book")]
    UnknownPilot(usize),
    #[error("pilot amplitude must be positive, got {0}")]
    ZeroPilotAmplitude(f64),
    #[error("negative interference power {0}")]
    NegativeInterference(f64),
    #[error("user {0} belongs to neither set of the partition")]
    UserNotPartitioned(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("exhaustive search limited to 16 users, got {0}")]
    TooManyUsers(usize),
}
