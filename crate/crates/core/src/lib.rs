//! Numerical core for a multiplexed, measurement-device-independent
//! multiparty key-sharing protocol with an untrusted central relay.
//!
//! The crate is organized around one validation spine: every closed-form
//! quantity produced by [`ghz`] is cross-checked against [`oracle`], a
//! brute-force Fock-state simulation of the same linear-optical analyzer.
//! On top of that sit the transmission statistics ([`multiplex`]), the
//! asymptotic and finite-size key rates ([`security`]), the rate-distance
//! benchmark bounds and signature rates ([`bounds`]), and a deterministic
//! sweep engine ([`sweep`]) that renders everything to CSV.

pub mod bounds;
pub mod config;
pub mod device;
pub mod error;
pub mod exec;
pub mod ghz;
pub mod multiplex;
pub mod numeric;
pub mod oracle;
pub mod security;
pub mod sweep;

pub use device::{ClickModel, DeviceParams};
pub use error::{QssError, Result};
pub use ghz::GhzProjectionStats;
pub use security::{FiniteKeyBudget, FiniteModel, RatePoint};
pub use sweep::{SweepConfig, SweepPoint};
