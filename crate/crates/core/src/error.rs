use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("derivative order {0} not supported (expected 0..=3)")]
    InvalidOrder(u8),

    #[error("evaluation exactly at breakpoint x = {0} needs an explicit side")]
    SideRequired(f64),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("finite-difference step underflow at r = {0}")]
    StepUnderflow(f64),

    #[error("point r = {0} too close to the horizon for the stencil")]
    HorizonProximity(f64),

    #[error("empty grid")]
    EmptyGrid,

    #[error("grid does not match region: {0}")]
    RegionMismatch(String),

    #[error("CFL violated: dt = {dt} > {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("numerical instability at t = {t}: {detail}")]
    Instability { t: f64, detail: String },

    #[error("insufficient history: {0}")]
    History(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
