use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The exponent cannot be represented as an exact rational.
    #[error("exactness unavailable: {0} is not an exact rational exponent")]
    InexactExponent(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid warping model: {0}")]
    InvalidModel(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("t = {t} lies outside the model domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("grid model has no x-samples")]
    EmptyGrid,

    #[error("integrand evaluation failed at t = {t}: {reason}")]
    Evaluation { t: f64, reason: String },

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("t = {t} is not a grid point")]
    OffGrid { t: f64 },

    #[error("invalid cylinder: {0}")]
    InvalidCylinder(String),

    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
