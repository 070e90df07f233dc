use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid degree: {0}")]
    InvalidDegree(String),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("polynomial is not homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("restriction is not real-rooted")]
    NotRealRooted,

    #[error("polynomial has no real roots")]
    NoRealRoots,

    #[error("malformed matching: {0}")]
    MalformedMatching(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("retry limit exceeded after {attempts} attempts (last family had {last_matchings} matchings before pruning, {last_good_sets} good sets)")]
    RetryLimit {
        attempts: usize,
        last_matchings: usize,
        last_good_sets: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not symmetric")]
    Asymmetric,

    #[error("cone does not contain the positive orthant: matrix {0} is not PSD on the kernel complement")]
    OrthantNotContained(usize),

    #[error("normalizer is singular (min eigenvalue {0:e}); rank threshold misconfigured")]
    SingularNormalizer(f64),

    #[error("representation is not normalized")]
    Unnormalized,

    #[error("perturbation budget violated: {0}")]
    BudgetViolation(String),

    #[error("no witnessing set separates the two perturbations")]
    NoWitness,

    #[error("no feasible samples found")]
    NoFeasibleSamples,

    #[error("membership oracle is not scale invariant at sample {0}")]
    OracleInconsistent(usize),

    #[error("tolerance must be strictly positive")]
    BadTolerance,

    #[error("p(e) = 0, so e is not a hyperbolicity direction")]
    DegenerateDirection,

    #[error("the two perturbations are identical")]
    IdenticalPerturbations,

    #[error("perturbations come from different families or different eps")]
    IncompatiblePerturbations,
}
