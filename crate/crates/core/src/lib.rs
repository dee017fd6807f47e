//! Packet loss, network availability and available range for short-packet
//! transmission over D2D, relayed cellular and multi-connectivity links.
//!
//! Decoding errors use the normal approximation of the finite-blocklength
//! rate together with a linearized Q-function, which turns the expectation
//! over Rayleigh fading into closed forms. Availability integrates over
//! correlated lognormal shadowing, and ranges come from monotone searches on
//! top of it. Monte Carlo estimators in [`oracle`] and in the AF modes check
//! or replace the analytic paths.

pub mod availability;
pub mod blocklength;
pub mod channel;
pub mod error;
pub mod modes;
pub mod oracle;
pub mod quadrature;
pub mod range;
pub mod rng;
pub mod special;

pub use availability::{AvailabilityScenario, QosRequirement};
pub use blocklength::{CodeSpec, DfMultiSnr, LinearizedQ};
pub use channel::{ChannelParams, FadingKind, LinkGeometry, ShadowingDraw};
pub use error::{Error, Result};
pub use modes::{DelayBudget, LargeScaleTriple, McBudget, ModeId, ProcessingModel, SystemParams};
pub use oracle::{EmpiricalCdf, McEstimate};
pub use range::{Candidate, ModeComparison, RangeResult};
