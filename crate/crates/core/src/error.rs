use thiserror::Error;

use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not square or does not match the {labels} labels")]
    Shape { labels: usize },
    #[error("a metric needs at least two points")]
    TooFewPoints,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("nonzero diagonal entry at ({0}, {0})")]
    NonZeroDiagonal(usize),
    #[error("zero distance between distinct points {0} and {1}")]
    ZeroOffDiagonal(usize, usize),
    #[error("triangle inequality violated: d({0},{1}) > d({0},{2}) + d({2},{1})")]
    TriangleViolation(usize, usize, usize),

    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid edge {{{0}, {1}}}: {2}")]
    InvalidEdge(usize, usize, String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("no split separates {0:?} and {1:?}")]
    NotSeparated(String, String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("duplicate split {0}")]
    DuplicateSplit(String),
    #[error("non-positive split weight {0}")]
    NonPositiveWeight(Rat),
    #[error("metric is not totally decomposable (violating quintuple t,x,y,u,v = {0:?})")]
    NotTotallyDecomposable([usize; 5]),
    #[error("split decomposition left a nonzero residue at ({0}, {1})")]
    ResidueNonZero(usize, usize),
    #[error("ground set of size {size} exceeds the configured bound {bound}")]
    GroundSetTooLarge { size: usize, bound: usize },
    #[error("{count} splits exceed the configured bound {bound}")]
    TooManySplits { count: usize, bound: usize },

    #[error("missing coordinate for side {0}")]
    MissingCoordinate(String),
    #[error("split systems do not match")]
    SystemMismatch,

    #[error("metric is not two-decomposable: {0}")]
    NotTwoDecomposable(String),
    #[error("split system does not meet the Buneman route preconditions: {0}")]
    RouteUnavailable(String),

    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("no realisation found within the search bound: {0}")]
    SearchBoundTooSmall(String),
    #[error("no candidates to select from")]
    EmptyCandidates,
    #[error("graph is not a realisation of the metric")]
    NotARealisation,
    #[error("terminal {0:?} has a non-binary potential value")]
    TerminalValueNotBinary(String),

    #[error("vertex {0} is not mapped into the tight span")]
    NotInTightSpan(usize),
    #[error("vertex {0} has no preimage in the Buneman complex")]
    NoPreimage(usize),
    #[error("no path system satisfies the disjointness condition")]
    NoValidPathSystem,

    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Strips stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
