use thiserror::Error;

/// Bid or ask side of a two-sided quote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "bid",
            Side::Ask => "ask",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time {t} outside [0, {horizon}]")]
    InvalidTime { t: f64, horizon: f64 },

    #[error("stationary utility integral diverges at inventory {q}: discount w = {w} must exceed {bound}")]
    DivergentHorizon { q: i64, w: f64, bound: f64 },

    #[error("nonpositive log argument {argument} for the {side} reservation price (inventory {neighbor} after the trade is outside the convergence domain)")]
    NonpositiveLogArgument {
        side: Side,
        neighbor: i64,
        argument: f64,
    },

    #[error("offset must be nonnegative, got {0}")]
    NegativeOffset(f64),

    #[error("exponent {exponent} over/underflows double precision")]
    Overflow { exponent: f64 },

    #[error("explicit scheme unstable: sigma^2 dt / h^2 = {ratio} > 0.5, need n_t >= {required_n_t}")]
    CflViolation { ratio: f64, required_n_t: usize },

    #[error("explicit step not monotone: dt (sigma^2/h^2 + 2 kappa A/(kappa+gamma)) = {ratio} > 1, need n_t >= {required_n_t}")]
    StepTooLarge { ratio: f64, required_n_t: usize },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("non-finite value in solved field at time step {step} (t = {t})")]
    NonfiniteField { step: usize, t: f64 },

    #[error("point (s = {s}, q = {q}, t = {t}) outside the solved grid")]
    OutOfGrid { s: f64, q: i64, t: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("terminal utility overflows: gamma * wealth = {0}")]
    OverflowInUtility(f64),

    #[error("search bracket [{lo}, {hi}] does not contain the maximizer")]
    BracketMiss { lo: f64, hi: f64 },

    #[error("convergence study needs at least 2 levels, got {0}")]
    TooFewLevels(usize),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
