//! Construction and field-size reduction of linear network codes.
//!
//! Given a single-source acyclic network, this crate builds multicast
//! network codes and α-network-error-correcting codes over a binary
//! extension field, then shrinks the operating field: every coding
//! coefficient is lifted to a binary polynomial, the decodability
//! determinants are multiplied into one polynomial `f(X)`, a least-degree
//! irreducible `g(X)` coprime to `f(X)` is located through the
//! `X^(2^i)+X` filtration, and reducing all coefficients mod `g(X)` yields
//! an equivalent code over the smaller field `F_2[X]/(g(X))`.
//!
//! Modules follow the pipeline:
//! - [`gf2poly`]: exact bit-packed arithmetic in `F_2[X]`.
//! - [`field`]: `GF(2^k)` as residues mod an irreducible polynomial.
//! - [`graph`]: acyclic multigraphs, flows, disjoint paths, error taps.
//! - [`multicast`]: local coefficients, global vectors, transfer matrices.
//! - [`polymat`]: matrices over `F_2[X]`, exact determinants, minors.
//! - [`coprime`]: the least-degree coprime polynomial search.
//! - [`nec`]: network-error-correcting construction, verification and a
//!   brute-force decoding oracle.
//! - [`reduce`]: the field-reduction drivers and their reports.
//! - [`codefile`]: on-disk JSON forms of codes and pinned coefficients.

pub mod codefile;
pub mod coprime;
pub mod field;
pub mod gf2poly;
pub mod graph;
pub mod multicast;
pub mod nec;
pub mod reduce;
pub mod polymat;

pub use coprime::{least_degree_coprime, product_coprime_check, CoprimeResult};
pub use field::{Field, FieldElem};
pub use gf2poly::{irreducibles_of_degree, is_irreducible, BinPoly};
pub use graph::{gen_combination_network, insert_error_tap, EdgeId, FlowProfile, Network};
pub use multicast::{construct_multicast, propagate, transfer_matrix, verify_multicast, NetworkCode};
pub use nec::{construct_nec, decode_oracle, verify_nec, RankWitness};
pub use reduce::{reduce_multicast, reduce_nec, ReductionOutcome, ReductionReport};
pub use polymat::{argmax_minor_cost, find_full_rank_submatrix, PolyMatrix};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd(0, 0) is undefined")]
    GcdBothZero,
    #[error("the zero polynomial is divisible by everything")]
    ZeroPolynomial,
    #[error("constant polynomials are neither reducible nor irreducible")]
    ConstantPolynomial,
    #[error("fold modulus X^{0}+X needs n >= 2")]
    FoldModulusTooSmall(usize),
    #[error("degree {degree} outside supported range (max {max})")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("polynomial {0} is not irreducible")]
    NotIrreducible(String),
    #[error("field degree must be 1..={max}, got {k}")]
    BadFieldDegree { k: usize, max: usize },
    #[error("modulus {modulus} has degree {found}, expected {k}")]
    ModulusDegreeMismatch { modulus: String, found: usize, k: usize },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("cycle detected through edge {edge}")]
    Cycle { edge: String },
    #[error("sink {sink} is unreachable from the source")]
    UnreachableSink { sink: String },
    #[error("requested {requested} edge-disjoint paths, max flow is {max}")]
    FlowInfeasible { requested: usize, max: usize },
    #[error("invalid edge id {0}")]
    BadEdgeId(usize),
    #[error("field size {q} too small: need strictly more than {bound}")]
    FieldTooSmall { q: u64, bound: u64 },
    #[error("dimension {h_prime} exceeds the multicast capacity {h}")]
    DimensionTooLarge { h_prime: usize, h: usize },
    #[error("alpha {alpha} infeasible: Singleton bound needs h >= 2*alpha+1, h = {h}")]
    AlphaInfeasible { alpha: usize, h: usize },
    #[error("no coefficient assigned for required edge pair ({e_in}, {e_out})")]
    MissingCoefficient { e_in: usize, e_out: usize },
    #[error("no source row assigned for source edge {0}")]
    MissingSourceRow(usize),
    #[error("matrix rank {got} below requested {want}")]
    RankDeficient { want: usize, got: usize },
    #[error("determinant of a non-square matrix")]
    NonSquare,
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("coefficient search exhausted: {0}")]
    SearchExhausted(String),
    #[error("error-set enumeration would produce {count} subsets, over the budget {budget}")]
    EnumerationBudget { count: u128, budget: u128 },
    #[error("decode search needs {required} candidates, over the budget {budget}")]
    DecodeBudget { required: u128, budget: u128 },
    #[error("input code failed verification: {0}")]
    InvalidCode(String),
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
