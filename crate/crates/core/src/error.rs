use alloc::boxed::Box;
use alloc::string::String;

/// Errors reported by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("element id {0} is out of range")]
    InvalidElement(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid discretization: {0}")]
    Validation(String),

    #[error("singular diagonal block at element {block}")]
    SingularBlock { block: usize },

    #[error("linear solve failed on time slab {slab}: {source}")]
    Slab { slab: usize, source: Box<Error> },

    #[error("detail solve l = ({l_x}, {l_t}) failed: {source}")]
    Detail {
        l_x: usize,
        l_t: usize,
        source: Box<Error>,
    },

    #[error("level {level} failed: {source}")]
    Level { level: usize, source: Box<Error> },

    #[error("level constraint violated: L_x - L0_x = {dx} but L_t - L0_t = {dt}")]
    IndexSetLevels { dx: i64, dt: i64 },

    #[error("point ({0}, {1}) is not inside any element")]
    PointLocation(f64, f64),

    #[error("time {0} is not a slab boundary")]
    NotSlabBoundary(f64),

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
