use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "trust region exceeded: amplitude {amplitude:.3} needs n_cut >= {required_n_cut}, \
         space has n_cut = {n_cut}"
    )]
    TrustRegion {
        amplitude: f64,
        required_n_cut: usize,
        n_cut: usize,
    },

    #[error(
        "integrand does not decay at the path endpoints (endpoint/max ratio {ratio:.3e}); \
         suggested half-extent {suggested_extent:.3}"
    )]
    DecayCheck { ratio: f64, suggested_extent: f64 },

    #[error("ill-conditioned: {what} (estimate {estimate:.3e})")]
    IllConditioned { what: String, estimate: f64 },

    #[error("BA-functional ill-conditioned: |<B|A>| = {overlap:.3e} below {tol:.3e}")]
    NearOrthogonal { overlap: f64, tol: f64 },

    #[error("zero state cannot be normalized")]
    ZeroState,

    #[error("state norm overflow ({norm:.3e}); renormalize the trajectory more often")]
    NormOverflow { norm: f64 },

    #[error("effective mass singular: m_R = 0")]
    SingularMass,

    #[error("time {t} outside trajectory range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("peak not interior to the scan grid; widen the scan (half-width {halfwidth})")]
    PeakNotInterior { halfwidth: f64 },
}
