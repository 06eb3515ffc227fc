//! Exact-arithmetic construction and machine verification of
//! weight-truncated vertex rings over commutative base rings.
//!
//! The crate builds three families of instances — commutative rings with
//! a Hasse-Schmidt derivation, universal Virasoro vertex rings over any
//! base, and their direct sums and tensor products — and verifies the
//! defining identities (Jacobi, commutator, associator, locality,
//! skew-symmetry, translation covariance), the Goddard reconstruction
//! from generating fields, the center/idempotent/unit theory, and the
//! Pierce-bundle decomposition over finite Boolean spectra. All
//! arithmetic is exact; every check either passes with a zero residual,
//! fails with a witness, or is skipped because it would leave the
//! truncation window.

pub mod basering;
pub mod exactnum;
pub mod fields;
pub mod hsderiv;
pub mod linalg;
pub mod pierce;
pub mod report;
pub mod structure;
pub mod vertexcore;
pub mod virasoro;

pub use basering::{RingDescriptor, RingElement};
pub use report::GridReport;
pub use vertexcore::{Instance, State};
