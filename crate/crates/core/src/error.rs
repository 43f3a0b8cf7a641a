use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("weight at index {0} is not a positive finite number")]
    NonPositiveWeight(usize),
    #[error("interval [{0}, {1}] is not valid for {2} leaves")]
    BadInterval(usize, usize, usize),
    #[error("query plane is vertical")]
    VerticalQuery,
    #[error("no point lies in the query range")]
    EmptyRange,
    #[error("no group intersects the query")]
    NotFound,
    #[error("query lies above the highest level")]
    LevelOverflow,
    #[error("construction failed after {0} attempts")]
    ConstructionFailed(usize),
    #[error("enumeration needs {0} outcomes, above the limit")]
    TooLarge(u128),
    #[error("all bins are degenerate")]
    DegenerateBins,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
