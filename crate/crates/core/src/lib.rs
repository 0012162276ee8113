//! Numerical functional calculus for countable systems of generators of
//! contraction C0-semigroups, with polynomial tempered distributions on the
//! half-line as the symbol class.
//!
//! The crate is layered bottom-up:
//!
//! - [`halfline`]: quadrature grids on `[0, t_max]` and sampled test functions
//!   with the shift semigroup `T_s` and differentiation.
//! - [`distributions`]: Dirac atoms (with derivative orders) plus shifted
//!   regular densities; pairing, convolution, cross-correlation and the
//!   reconstruction of a cross-correlation symbol from an operator.
//! - [`fock`]: graded symmetric tensor algebras of polynomial test functions
//!   and polynomial distributions, the degreewise product, polynomial
//!   cross-correlation, polynomial shift and the graded derivation.
//! - [`transforms`]: Fourier transform on the half-line, the generalized
//!   Fourier duality, factorwise polynomial transforms and Laplace values.
//! - [`opcalc`]: generator systems acting on a truncated symmetric Fock space,
//!   the calculus map `p -> p~(A)`, the operator shift semigroup and the
//!   representation `f -> Phi_f`, including the Gaussian semigroup generated
//!   by second derivatives.
//! - [`harness`]: configuration, the standard corpus, the invariant suite and
//!   report emission used by the `polycalc` binary.
//! - [`io`]: CSV/JSON file formats for all of the above.

pub mod distributions;
pub mod error;
pub mod fock;
pub mod halfline;
pub mod harness;
pub mod io;
pub mod opcalc;
pub mod transforms;

pub use num_complex::Complex64;

pub use crate::error::{Error, Result};
pub use crate::distributions::{Atom, Density, Distribution, PairingReport};
pub use crate::fock::{PolyDist, PolyTest};
pub use crate::halfline::{DecayTag, Grid, QuadratureRule, TestFn};
pub use crate::opcalc::{FockLayout, FockState, Generator1D, GeneratorSystem};
pub use crate::transforms::{FreqFn, FreqGrid};

/// Stable 64-bit FNV-1a hash used for canonical term ordering.
pub(crate) fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
