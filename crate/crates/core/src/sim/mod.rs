//! DS-UWB SC-FDE scenario generator: synthetic multipath channels, Walsh
//! spreading, cyclic-prefix circulant transmission, the two estimation
//! scenarios and the oracle MMSE receiver.

mod chanmodel;
mod config;
mod receiver;
mod transmit;

pub use chanmodel::{gen_channel, load_channel, save_channel, ChannelProfile};
pub use config::{SystemConfig, DEFAULT_CHIP_DURATION};
pub use receiver::{
    detect, mmse_min_cost, mmse_receiver_ideal, mmse_weights_from_spectra, mmse_weights_ideal,
};
pub use transmit::{transmit_receiver, transmit_sce, LinkContext, ScenarioFrame};
