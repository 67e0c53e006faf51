//! Krylov solvers for the Drazin-inverse solution `A^D b` of singular,
//! possibly inconsistent square systems.
//!
//! - [`densela`]: dense complex matrices, QR, least squares, rank and eigenvalues.
//! - [`oracle`]: dense Drazin inverse and index, used as ground truth.
//! - [`dgmres`]: restarted DGMRES(m).
//! - [`adgmres`]: DGMRES(m) augmented with `k` approximate eigenvectors.
//! - [`matrix_market`], [`problems`], [`report`]: inputs, test problems and
//!   side-by-side runs with history export.

pub mod adgmres;
pub mod densela;
pub mod dgmres;
pub mod matrix_market;
pub mod oracle;
pub mod problems;
pub mod report;
