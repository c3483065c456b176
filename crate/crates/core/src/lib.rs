//! Capacities of amplified multi-mode fiber links: classical (Shannon),
//! unassisted quantum (Holevo) and entanglement-assisted.
//!
//! The numerical core lives in [`entropy`] and [`capacity`]; [`link`] maps a
//! segmented, amplified fiber onto a single thermal-noise channel, and
//! [`sweep`] tabulates everything over one parameter. [`oracle`] holds slow
//! high-precision reference implementations used for testing.

pub mod capacity;
pub mod cli;
pub mod config;
pub mod entropy;
pub mod error;
pub mod link;
pub mod oracle;
pub mod output;
pub mod physical;
pub mod sweep;

pub use capacity::{capacities, min_modes_for_advantage, CapacityResult, ChannelParams};
pub use entropy::{g, Branch, NoisePhotons, PhotonNumber, Transmittivity};
pub use error::{Error, Result};
pub use link::{effective_channel, EffectiveChannel, GainRule, Receiver, SegmentedLink};
pub use sweep::{run_sweep, SweepSpec};
