//! Chain parameters, disorder draws, observables and ensemble settings.
//!
//! Sites are 1-based everywhere in this crate's public interface.

mod chain;
pub mod config;
mod disorder;
mod ensemble;
mod observable;

pub use chain::ChainSpec;
pub use config::{GapStatsConfig, ProbeConfig, RunConfig};
pub use disorder::{draw_realization, DisorderFamily, DisorderSpec};
pub use ensemble::{DistanceWindow, EnsembleConfig, TimeGrid, ORACLE_CAP_LIMIT};
pub use observable::{ObservableKind, ObservablePair};
