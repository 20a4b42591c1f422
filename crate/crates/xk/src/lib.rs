//! Exact rational computations on finite stages of Bourgain-Delbaen type spaces.

pub mod analysis;
pub mod certificate;
pub mod engine;
pub mod error;
pub mod func;
pub mod norms;
pub mod rational;
pub mod registry;
pub mod schedule;
pub mod spaces;
pub mod suites;

pub use certificate::{Certificate, Ledger, Verdict};
pub use error::{Error, Result};
pub use func::Func;
pub use rational::Q;
pub use registry::{Draft, ElementRecord, GammaId, Kind, OddGuard, Registry, Which};
pub use schedule::{Mode, ParameterSchedule};
