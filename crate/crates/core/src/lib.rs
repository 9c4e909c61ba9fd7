//! Simulation and analysis of a pulsed path-selection source: drive
//! waveforms, band-limited electro-optic chains, phase readout, inter-pulse
//! correlation statistics and a behavioral source model.

pub mod corrstats;
pub mod error;
pub mod ingest;
pub mod linsys;
pub mod phasemap;
pub mod pipeline;
pub mod plot;
pub mod presets;
pub mod sourcesim;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::{NominalPattern, Symbol, Waveform};
