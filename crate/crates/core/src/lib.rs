//! Exact, desk-scale experiments on counting problems for quantum verifiers
//! and local Hamiltonians.
//!
//! The crate is organized bottom-up:
//!
//! * [`numkit`]: dense complex Hermitian matrices, a Jacobi eigensolver,
//!   projector pairs and seeded random generators.
//! * [`qcirc`]: verifier circuits, their text format, state-vector
//!   simulation, the verifier operator `Ω`, planted instances, realification.
//! * [`bqpcount`]: the accepting-subspace dimension under a gap promise.
//! * [`hamdos`]: few-body Hamiltonians, window and ground-space counts, and
//!   the quadratic shift to a verifier.
//! * [`clockcomp`]: clock Hamiltonians of circuits and their spectral checks.
//! * [`pathsum`]: the path-integral trace and its integer model count.
//!
//! ```
//! use doslab::bqpcount::{accepting_dimension, VerifierInstance};
//! use doslab::qcirc::{omega, plant_verifier};
//!
//! let planted = plant_verifier(3, 5, 2, 0.0, 7).unwrap();
//! let v = VerifierInstance::new(omega(&planted.circuit), 3, 0.75, 0.25).unwrap();
//! assert_eq!(accepting_dimension(&v).unwrap().dim_accept, 5);
//! ```

pub mod bqpcount;
pub mod clockcomp;
pub mod hamdos;
pub mod numkit;
pub mod pathsum;
pub mod qcirc;

use thiserror::Error;

/// Any error raised by this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Num(#[from] numkit::NumError),
    #[error(transparent)]
    Circuit(#[from] qcirc::CircuitError),
    #[error(transparent)]
    Parse(#[from] qcirc::ParseError),
    #[error(transparent)]
    Bqp(#[from] bqpcount::BqpError),
    #[error(transparent)]
    Ham(#[from] hamdos::HamError),
    #[error(transparent)]
    Clock(#[from] clockcomp::ClockError),
    #[error(transparent)]
    Path(#[from] pathsum::PathError),
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/clock.md")]
    mod clock {}
    #[doc = include_str!("../../../book/src/pathsum.md")]
    mod pathsum {}
    #[doc = include_str!("../../../book/src/projectors.md")]
    mod projectors {}
}
