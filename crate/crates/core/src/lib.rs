//! Numerical toolkit for mixed-norm Lebesgue and Morrey-type function spaces.
//!
//! The crate works with real-valued functions sampled at the cell centers of a
//! uniform rectangular grid over a bounded box in dimension 1 or 2. On top of
//! that representation it provides:
//!
//! - [`grid`]: the sampled-function type, midpoint quadrature, ball
//!   restriction, dilation/translation, and a binary serialization format;
//! - [`norms`]: mixed Lebesgue norms, classical / mixed / generalized-mixed
//!   Morrey norms, and three variants of the bounded-mean-oscillation norm;
//! - [`operators`]: Hardy-Littlewood and fractional maximal operators, the
//!   Riesz potential, a principal-value singular kernel, size-condition
//!   envelopes, and commutators with a symbol function;
//! - [`weights`]: Muckenhoupt-type weight characteristics and the iterated
//!   maximal-function majorant construction;
//! - [`hardy`]: weighted Hardy operators on the half-line and the supremum
//!   functionals that govern their boundedness on monotone inputs;
//! - [`phicond`]: radial growth families `phi(r)` and the integral conditions
//!   coupling a source/target pair of them;
//! - [`verify`]: a corpus-driven harness that estimates operator-norm ratios
//!   between Morrey-type spaces, sweeps dilations, runs negative controls,
//!   and emits deterministic JSON/CSV reports.
//!
//! All computations are pure functions of immutable inputs; the supremum and
//! pointwise loops are data-parallel via rayon with deterministic reductions.

pub mod grid;
pub mod hardy;
pub mod norms;
pub mod operators;
pub mod phicond;
pub mod verify;
pub mod weights;

pub use grid::{Ball, BoxDomain, ExponentVector, GridFunction};
pub use norms::BallGrid;
pub use phicond::PhiFamily;

/// Errors shared by the toolkit modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A box, resolution, or sample array violates the grid invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The sampling expression produced NaN or an infinity.
    #[error("non-finite sample {value} at cell {cell:?} (center {center:?})")]
    NonFiniteSample {
        cell: Vec<usize>,
        center: Vec<f64>,
        value: f64,
    },

    /// No cell center of the grid lies inside the requested ball.
    #[error("ball of radius {radius} at {center:?} has empty support on the grid")]
    EmptySupport { center: Vec<f64>, radius: f64 },

    /// An exponent (scalar or vector entry) lies outside its admissible range.
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    /// A precondition on operation parameters was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A norm or quadrature accumulated past the floating-point range.
    #[error("numerical overflow: {0}")]
    Overflow(String),

    /// A declared power-type tail does not integrate.
    #[error("divergent tail: {0}")]
    DivergentTail(String),

    /// Serialization / file format problems.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
