//! Joint demodulation and equalization of differential impulse-radio UWB
//! blocks with inter-symbol interference.
//!
//! The autocorrelation receiver output of a block is a second-order Volterra
//! function of the transmitted polarities. Decoding minimizes the squared
//! mismatch to that model, either exhaustively or through a semidefinite
//! relaxation solved by a small dense interior-point method.
//!
//! Times are in nanoseconds throughout.

pub mod decoder;
pub mod error;
pub mod pulse_channel;
pub mod sdp;
pub mod sim;
pub mod system_model;
pub mod waveform_rx;

pub use decoder::{
    decode_exhaustive, decode_sdp, lift_to_sdp, DecodeMethod, DecodeResult, DecodingProblem,
    LiftedInstance, Rounding, SdpDiagnostics,
};
pub use error::{Error, Result};
pub use pulse_channel::{
    draw_channel, synth_response, ChannelRealization, PulseSpec, SampledResponse, SvChannelParams,
    Tap,
};
pub use sdp::{solve_sdp, SdpProblem, SdpSolution, SdpStatus, SolverSettings};
pub use sim::{emit_report, run_block_trial, run_campaign, BerRecord, CampaignConfig, Scenario};
pub use system_model::{
    build_volterra, encode_affine, encode_recursive, model_decision, SystemConfig, VolterraModel,
};
pub use waveform_rx::{acr_demod, add_noise, synth_rx_waveform, NoiseSpec, ReceivedBlock};
