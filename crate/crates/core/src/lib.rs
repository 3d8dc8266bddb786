//! Likelihood ascent search (LAS) multiuser detection for synchronous CDMA.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] builds channels `y = RAb + n` and evaluates the likelihood
//!   `f(y|b) = -½ bᵀHb + bᵀAy` and its gradient.
//! * [`las`] implements the LAS detector family (SLAS, WSLAS, GPLAS, PLAS and
//!   custom periodic schedules) together with the fixed-point region
//!   predicates.
//! * [`baseline`] has the matched filter, decorrelator, MMSE and brute-force
//!   maximum likelihood detectors used as initials and oracles.
//! * [`error_analysis`] handles error vectors and the enumeration of
//!   indecomposable error vectors.
//! * [`bounds`] computes BER upper bounds, AME lower bounds and the
//!   equicorrelated closed forms.
//! * [`montecarlo`] is a reproducible simulation harness plus the audit
//!   suites that check the detector theory on sampled data.

pub mod baseline;
pub mod bounds;
pub mod channel;
pub mod error_analysis;
pub mod las;
pub mod montecarlo;
pub mod rng;

mod error;

pub use error::{Error, Result};

pub use channel::{BitVector, Channel, Observation, SpreadingMatrix};
pub use error_analysis::{ErrorVector, IndecomposableSet};
pub use las::{DetectionResult, DetectorState, LasDetector, Schedule, ScheduleKind, ThresholdVector};
