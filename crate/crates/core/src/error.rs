use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field is not holomorphic: positive-mode mass {mass:.3e} exceeds tolerance {tol:.3e}")]
    NotHolomorphic { mass: f64, tol: f64 },

    #[error("map is not monotone: min slope {min_slope:.3e}")]
    NonMonotone { min_slope: f64 },

    #[error("degenerate interface: min |Z_a'| = {0:.3e}")]
    Degenerate(f64),

    #[error("Taylor coefficient A1 dropped to {0:.12}")]
    TaylorSign(f64),

    #[error("CFL violation: dt {dt:.3e} exceeds the stable limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("state invariant violated: {0}")]
    Invariant(String),

    #[error("solution {which}: {source}")]
    InSolution {
        which: char,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Tags an error with the solution (`'a'` or `'b'`) of a pair run it came from.
    pub fn in_solution(self, which: char) -> Error {
        Error::InSolution {
            which,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through solution tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::InSolution { source, .. } => source.root(),
            other => other,
        }
    }
}
