//! Simulation and analysis of massive MIMO downlinks whose base station uses
//! one-bit ADCs for uplink training and one-bit DACs for matched-filter
//! precoding.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: complex matrices, Kronecker products, seeded Gaussian draws.
//! * [`quantizer`]: the one-bit quantizer and its Bussgang statistics.
//! * [`training`]: pilots, one-bit uplink training and the LMMSE estimate.
//! * [`downlink`]: MF precoding and the Monte-Carlo / closed-form rates.
//! * [`experiments`]: parameter sweeps written as versioned CSV.
//!
//! All powers are linear inside the library; dB values only appear at the
//! sweep and CLI boundary.

pub mod config;
pub mod downlink;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod quantizer;
pub mod stats;
pub mod training;

pub use config::{db_to_linear, linear_to_db, SystemConfig};
pub use downlink::{
    case1_limit, case2_limit, closed_form_rate, conventional_rate, empirical_mse_bound, gamma, monte_carlo_rate,
    required_antennas, use_and_forget_rate, ArraySystem, MseBound, RateMethod, RateReport, SinrComponents,
};
pub use error::{Error, Result};
pub use experiments::{
    parse_csv, AntennaComparison, Crossing, PowerScaling, RateVsPower, Scenario, SweepRow, SweepSpec, SweepTable,
    CSV_VERSION_TAG,
};
pub use numerics::{ComplexMatrix, RandomStream, C64};
pub use quantizer::{one_bit_quantize, BussgangModel};
pub use training::{ChannelEstimate, EstimateMode};
