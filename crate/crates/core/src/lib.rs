//! Momentum-space transfer-matrix solver for two-dimensional potential
//! scattering in the propagating-wave approximation.
//!
//! A monochromatic wave of wavenumber `k` enters a slab of potential
//! `v(x, y)` supported on `a_minus <= x <= a_plus`. Expanding the field in
//! transverse momentum channels `p` turns the Helmholtz equation into a
//! first-order matrix ODE along `x`; integrating it yields a block transfer
//! matrix that maps wave coefficients on the left of the slab to those on the
//! right. Keeping only the open channels `|p| < k` (the propagating-wave
//! approximation) gives a small dense system whose solution provides the
//! scattering amplitude; an extended mode retains a truncated set of closed
//! (evanescent) channels so the approximation can be audited.
//!
//! The crate is organized bottom-up:
//!
//! * [`quad`] — Gauss–Legendre rules, adaptive panel quadrature, and
//!   cumulative (Volterra) integration matrices;
//! * [`linalg`] — small dense complex kernels (LU, condition estimate,
//!   largest singular value);
//! * [`potentials`] — the supported interaction families and their partial
//!   Fourier transforms in `y`;
//! * [`grid`] — momentum discretization of open and closed channels;
//! * [`operators`] — channel-space convolution kernels, projectors and the
//!   block generator of the transfer ODE;
//! * [`transfer`] — adaptive ODE / Dyson-series / closed-form propagation of
//!   the transfer matrix;
//! * [`scattering`] — incident-wave setup, linear solves, amplitudes and
//!   cross sections;
//! * [`verify`] — independent consistency checks (projection identities,
//!   half-axis support structure, representation equivalence).

pub mod error;
pub mod grid;
pub mod linalg;
pub mod operators;
pub mod potentials;
pub mod quad;
pub mod scattering;
pub mod transfer;
pub mod verify;

pub use error::Error;
pub use grid::{Channel, IncidenceSpec, MomentumGrid, Side};
pub use operators::{BlockOperator, ChannelOperator, KernelBlock, Mode};
pub use potentials::{Family, HalfAxis, Potential, Profile, YKernel};
pub use scattering::{AmplitudeSample, AmplitudeSet, ScatteringResult, SolveOptions};
pub use transfer::{EvolveOptions, Method, TransferMatrix};
pub use verify::VerifyReport;

/// Complex double, the scalar type of every operator in this crate.
pub type C64 = num_complex::Complex64;

/// Result alias using the crate-wide error type.
pub type Result<T> = std::result::Result<T, Error>;
