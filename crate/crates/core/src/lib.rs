//! Joint placement of a RIS-mounted UAV that serves cellular users (CUs)
//! directly and device-to-device (D2D) pairs through its reflecting surface.
//!
//! The crate is split along the data flow of a single trial:
//!
//! - [`scenario`]: world geometry, user/obstacle generation, LoS/NLoS tests.
//! - [`channel`]: mmWave link budget, fading, and the per-link SNR prefactors.
//! - [`throughput`]: per-link and population rates, the ratio-deviation
//!   objective used by the joint search, and Jain's fairness index.
//! - [`placement`]: projected gradient ascent for the D2D and CU optima,
//!   directional coordinate search for the joint position, and a brute-force
//!   grid oracle.
//! - [`harness`]: configuration, seeded ensembles, sweeps and CSV output.

pub mod channel;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod harness;
pub mod placement;
pub mod scenario;
pub mod throughput;

pub use channel::{
    build_channel_state, dbm_to_watt, path_loss_db, sample_fading_amp, watt_to_dbm, ChannelMode,
    ChannelRealization, ChannelState, PathLossParams, RadioConfig,
};
pub use error::{Error, Result};
pub use placement::{
    grid_oracle, joint_search, optimize_cu, optimize_d2d, Bounds, JointResult, OptimizerConfig,
    PlacementResult, SearchConfig, StopReason,
};
pub use scenario::{
    classify_link, distance3, generate_scenario, segment_blocked, D2dPair, GenerationConfig,
    LinkClass, Obstacle, Position3, Region, Scenario,
};
pub use throughput::{jain_index, net_throughput, ratio_deviation, Jain, RateReport};
