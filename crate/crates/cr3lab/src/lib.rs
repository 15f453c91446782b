//! Numerical pseudohermitian geometry on the CR 3-sphere.
//!
//! The crate implements a small laboratory for strictly pseudoconvex CR
//! 3-manifolds built over `S^3 = {|z|^2 + |w|^2 = 1} ⊂ C^2`. Smooth functions
//! are represented exactly as polynomials in `z, w, z̄, w̄` reduced modulo the
//! sphere relation, which keeps the reference frame action, integration and
//! all curvature operators free of discretization error. On top of that
//! algebra sit:
//!
//! * [`structures`] — admissible coframes, the Tanaka-Webster structure
//!   solver (connection form, torsion `A11`, scalar curvature `R`), conformal
//!   rescaling and a library of model structures (round sphere,
//!   left-invariant deformations, conformal perturbations);
//! * [`operators`] — weighted covariant derivatives, commutation-relation
//!   checks, the sublaplacian, the third-order CR-pluriharmonic operator
//!   `P1`, the CR Paneitz operator `P0`, the tangential Cauchy-Riemann
//!   complex and the conformal transformation-law checkers;
//! * [`hodge`] — the Chern potential `σ`, the Kohn decomposition of a
//!   (0,1)-form into `∂̄_b φ + γ` with `γ` harmonic, and the pseudo-Einstein
//!   construction pipeline with its identity checks;
//! * [`analysis`] — curvature-torsion convexity with its closed-form
//!   maximum, torsion quadratic forms and the Bôchner-type integral
//!   identities;
//! * [`spectral`] — Galerkin matrices for `P0` over truncated real function
//!   spaces, generalized eigensolves, kernel identification against the
//!   CR-pluriharmonic subspace and the eigenvalue upper bound check.
//!
//! All coefficient arithmetic is double-precision complex. "Exact" always
//! means "no discretization error"; rounding is controlled by logged
//! condition numbers and by the residual reports every solver returns.

pub mod analysis;
pub mod field;
pub mod forms;
pub mod hodge;
pub mod mono;
pub mod operators;
pub mod points;
pub mod report;
pub mod sampling;
pub mod spectral;
pub mod structures;
pub mod workspace;

/// Real scalar type used throughout the crate.
pub type Scalar = f64;
/// Complex scalar type used throughout the crate.
pub type C = num_complex::Complex64;

/// Shorthand for the imaginary unit.
pub const I: C = C::new(0.0, 1.0);

/// Total volume of `S^3` against the reference volume form `θ₀ ∧ dθ₀`.
///
/// Derived once via Stokes: `∫_{S³} θ∧dθ = ∫_{B⁴} dθ∧dθ = 8·Vol(B⁴) = 4π²`,
/// and cross-validated by Monte Carlo quadrature in the test suite.
pub const VOLUME: Scalar = 39.47841760435743; // 4 π²

/// Tanaka-Webster scalar curvature of the reference round sphere.
///
/// With the admissibility normalization `dθ = i θ¹∧θ¹̄`, `θ(T) = 1` the
/// connection form is `ω₁¹ = -2iθ` and `dω₁¹ = 2 θ¹∧θ¹̄`, so `R = 2`.
pub const SPHERE_R: Scalar = 2.0;

pub use field::{inner, integrate, Field};
pub use mono::Mono;
pub use structures::{Coframe, ModelSpec, StructureData};
pub use workspace::Workspace;

/// Errors reported by the laboratory.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A product or derivative chain would exceed the workspace degree cap.
    #[error("degree cap exceeded: needed {needed}, cap {cap}")]
    CapExceeded { needed: usize, cap: usize },
    /// Least-squares normal equations too ill-conditioned to trust.
    #[error("ill-conditioned solve: condition number {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: Scalar, limit: Scalar },
    /// A coframe failed the admissibility contract `dθ = i θ¹∧θ¹̄`.
    #[error("coframe not admissible: residual {residual:.3e} exceeds {tol:.3e}")]
    NonAdmissible { residual: Scalar, tol: Scalar },
    /// A conformal factor must be positive on the sample set.
    #[error("conformal factor not positive: min sampled value {min:.3e}")]
    NotPositive { min: Scalar },
    /// The pointwise linear solve for the Reeb field degenerated.
    #[error("Reeb solve singular at sample point {index}")]
    Singular { index: usize },
    /// No 1-form primitive of dω₁¹ found within the truncation budget.
    #[error("no primitive for dω₁¹ within tolerance: residual {residual:.3e}")]
    NoPrimitive { residual: Scalar },
    /// An operation required vanishing pseudohermitian torsion.
    #[error("structure is not Sasakian: |A11| = {torsion_norm:.3e}")]
    NotSasakian { torsion_norm: Scalar },
    /// A checker's stated precondition failed beyond tolerance.
    #[error("precondition violated for {what}: residual {residual:.3e} exceeds {tol:.3e}")]
    PreconditionViolated {
        what: &'static str,
        residual: Scalar,
        tol: Scalar,
    },
    /// Frame-dependent quantities could not be compared across structures.
    #[error("frame gauge mismatch: {0}")]
    FrameGaugeMismatch(String),
    /// The dense eigensolver did not converge.
    #[error("eigensolver failed to converge (dimension {dim})")]
    EigenFailure { dim: usize },
    /// Invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
