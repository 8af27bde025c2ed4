//! Uplink analysis of a two-user NOMA link aided by a simultaneously
//! transmitting and reflecting RIS: closed-form channel statistics, pilot
//! based estimation, achievable rates, and a Monte Carlo engine that checks
//! them against simulation.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod noise;
pub mod estimation;
pub mod experiments;
pub mod rates;
pub mod scene;
pub mod statistics;

pub use beamforming::{optimal_phases, random_phases, PhaseDesign};
pub use channel::{draw_channels, equivalent_channel, equivalent_channels, ChannelRealization};
pub use error::{Error, Result};
pub use geometry::{derive_geometry, los_vector, LinkGeometry};
pub use noise::{xi_factor, PhaseNoiseKind, PhaseNoiseModel, RngStream, SimRng};
pub use scene::{ExplicitAngles, HardwareQuality, LinkAngles, PanelSize, SceneConfig, Side};
pub use statistics::{channel_moments, coherent_sum, ChannelMoments};
pub use estimation::{
    combine, lmmse_estimate, ls_estimate, nmse_closed_form, nmse_floor, pilot_sequences, simulate_pilot_rx,
    EstimationOutcome, FloorVariant, PilotConfig, Pilots,
};
pub use experiments::{figure_recipes, recipe, run_sweep, Axis, Metric, Recipe, SeriesResult, SweepSpec};
pub use rates::{RateInputs, RateReport, SicMode};
