//! Numerical workbench for truncated vector-valued Hardy spaces `H²(𝔻, ℂᵐ)`.
//!
//! Functions are stored by their Taylor coefficients up to a finite degree and
//! every operation tracks degrees explicitly, so the exact identities of the
//! untruncated theory (shift isometry, adjoint relations, norm identities)
//! hold up to floating point whenever enough degree headroom is supplied.
//!
//! Module map:
//!
//! * [`coeff`]: truncated `ℂᵐ`-valued functions, shift and backward shift.
//! * [`operators`]: matrix-valued analytic symbols and block Toeplitz realizations.
//! * [`inner`]: Blaschke products, monomials and diagonal inner multipliers.
//! * [`subspace`]: orthonormal subspaces, Beurling and model spaces, defect certificates.
//! * [`nearly`]: decomposition of nearly `S*`-invariant subspaces with finite defect.
//! * [`cli`]: JSON formats, scripted scenarios and the command-line front end.

pub mod cli;
pub mod coeff;
pub mod constructions;
pub mod error;
pub mod inner;
pub(crate) mod linalg;
pub mod nearly;
pub mod operators;
pub mod subspace;

pub use coeff::{CoeffFn, C64};
pub use error::{Error, Result};
pub use inner::{blaschke_scalar, check_inner, diag_inner, monomial_inner, BlaschkeSpec};
pub use nearly::{DecompResult, NearlyOptions};
pub use operators::MatSymbol;
pub use subspace::{DefectCertificate, InvarianceMode, ShiftOp, Subspace};

/// Default rank tolerance shared by all subspace computations.
pub const DEFAULT_TOL: f64 = 1e-10;
