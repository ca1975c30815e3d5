//! Soft-output closest point search in lattices via belief propagation on a
//! Tanner-graph representation of the lattice's label code.
//!
//! The pipeline has two stages. A linear front end (matched filters for
//! orthogonal effective channels, MMSE / IC-MMSE filter banks otherwise)
//! removes the channel and produces per-coordinate soft estimates with known
//! error variances. A lattice detector then partitions the constellation
//! into cosets labeled by an Abelian block code, runs non-binary belief
//! propagation on the label Tanner graph, and emits total and extrinsic a
//! posteriori probabilities for labels, lattice points and coordinates.
//!
//! Modules:
//!
//! - [`realmap`]: complex ↔ real transmission-model isomorphisms.
//! - [`lattice`]: Gram-Schmidt coordinate system, label groups, label code
//!   and dual label code of a lattice.
//! - [`tanner`]: Tanner graph built from dual-code generator vectors.
//! - [`bp`]: non-binary belief propagation, initialization schemes, label
//!   pruning.
//! - [`extrinsic`]: total/extrinsic APP of points and coordinates after BP.
//! - [`equalizer`]: unit-gain LMMSE filter bank and soft interference
//!   cancellation.
//! - [`socode`]: the 32-matrix superorthogonal space-time lattice code, its
//!   hypothesis-testing detector and an exhaustive-ML reference.
//! - [`sim`]: Monte Carlo frame-error-rate harness for quasistatic and
//!   fast-fading scenarios.

pub mod bp;
pub mod equalizer;
pub mod extrinsic;
pub mod lattice;
pub mod realmap;
pub mod sim;
pub mod socode;
pub mod tanner;

/// A label: one coset index per Gram-Schmidt direction, coordinate `i`
/// living in `Z_{g_i}`.
pub type Label = Vec<u32>;

/// Render a label the way code tables are usually printed: digits joined
/// when every group is small, comma-separated otherwise.
pub fn label_string(label: &[u32], group_sizes: &[u32]) -> String {
    if group_sizes.iter().all(|&g| g <= 10) {
        label.iter().map(|d| d.to_string()).collect()
    } else {
        let parts: Vec<String> = label.iter().map(|d| d.to_string()).collect();
        parts.join(",")
    }
}

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input carried a NaN or infinite entry.
    NonFinite(&'static str),
    /// A vector or matrix had the wrong dimensions.
    DimensionMismatch { context: &'static str, expected: usize, got: usize },
    /// Gram-Schmidt hit a pivot below tolerance: basis is rank deficient.
    RankDeficient { index: usize, pivot: f64 },
    /// No lattice point was found on an orthogonal direction within the
    /// enumeration radius; the orthogonal sublattice is not reachable by
    /// Gram-Schmidt on this basis.
    OrthogonalSublattice { direction: usize },
    /// A point failed the lattice membership / labeling tolerance.
    NotALatticePoint { direction: usize, ratio: f64 },
    /// The shaping region is empty or a label is not used by any region point.
    EmptyRegion,
    /// Label not present in the region label set.
    UnknownLabel(String),
    /// Covariance matrix was singular (e.g. `N0 = 0` with a rank-deficient
    /// channel).
    SingularCovariance,
    /// `h_i^T R^{-1} h_i` fell below tolerance in the MMSE solution.
    DegenerateBranch { branch: usize },
    /// Probabilities that must sum to one did not (beyond 1e-6).
    Unnormalized { context: &'static str, sum: f64 },
    /// The effective channel of one hypothesis failed the proportionality
    /// check `(H Γ_k)^T (H Γ_k) = α I`.
    NotProportional { hypothesis: usize, ratio: f64 },
    /// Degenerate channel (α below tolerance).
    DegenerateChannel,
    /// Invalid configuration or input file contents.
    Config(String),
    /// Frame length is not divisible by the interleaver depth.
    InterleaverLength { depth: usize, len: usize },
    /// I/O error surfaced from a sweep or CSV emission.
    Io(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "non-finite entries in {what}"),
            Error::DimensionMismatch { context, expected, got } => {
                write!(f, "{context}: expected length {expected}, got {got}")
            }
            Error::RankDeficient { index, pivot } => {
                write!(f, "rank-deficient basis: pivot {pivot:.3e} at column {index}")
            }
            Error::OrthogonalSublattice { direction } => write!(
                f,
                "no lattice point on direction {direction} within the enumeration radius; \
                 orthogonal sublattice not reachable by Gram-Schmidt"
            ),
            Error::NotALatticePoint { direction, ratio } => write!(
                f,
                "projection on direction {direction} is not a spacing multiple (ratio {ratio})"
            ),
            Error::EmptyRegion => write!(f, "shaping region is empty"),
            Error::UnknownLabel(l) => write!(f, "label {l} is not used by any region point"),
            Error::SingularCovariance => write!(f, "singular covariance matrix"),
            Error::DegenerateBranch { branch } => {
                write!(f, "h^T R^-1 h below tolerance on branch {branch}")
            }
            Error::Unnormalized { context, sum } => {
                write!(f, "{context}: probabilities sum to {sum}, expected 1")
            }
            Error::NotProportional { hypothesis, ratio } => write!(
                f,
                "effective channel of hypothesis {hypothesis} is not proportional to a \
                 unitary matrix (off-diagonal ratio {ratio:.3e})"
            ),
            Error::DegenerateChannel => write!(f, "degenerate (zero) channel"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InterleaverLength { depth, len } => {
                write!(f, "frame length {len} not divisible by interleaver depth {depth}")
            }
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
