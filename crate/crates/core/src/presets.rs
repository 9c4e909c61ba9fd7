//! Built-in response tables and the default equipment chain.
//!
//! The tables are authored approximations, not manufacturer data: a 12 GHz RF
//! driver amplifier with a slow low-frequency gain shelf, and a 15 GHz
//! intensity modulator. The same files ship under `fixtures/responses/` and
//! are regenerated by `cargo run --example make_fixtures`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{
    parse_response_table, ChainSpec, ExtrapolationSpec, PhaseModeSpec, StageDomain, StageSpec,
};
use crate::linsys::TablePoint;

pub const RF_AMP_12GHZ: &str = "rf_amp_12ghz";
pub const IM_15GHZ: &str = "im_15ghz";

const RF_AMP_TABLE: &str = include_str!("../fixtures/responses/rf_amp_12ghz.csv");
const IM_TABLE: &str = include_str!("../fixtures/responses/im_15ghz.csv");

pub const PRESET_NAMES: [&str; 2] = [RF_AMP_12GHZ, IM_15GHZ];

pub fn response_table(name: &str) -> Result<Vec<TablePoint>> {
    let text = match name {
        RF_AMP_12GHZ => RF_AMP_TABLE,
        IM_15GHZ => IM_TABLE,
        _ => {
            return Err(Error::Config(format!(
                "unknown response preset `{name}` (known: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    parse_response_table(text.as_bytes(), Path::new(&format!("<preset {name}>")))
}

/// AWG (Bessel 25 GHz) -> RF amplifier -> modulator -> scope (Bessel 12 GHz),
/// simulated at 80 GSa/s and digitized at 40 GSa/s.
pub fn default_chain() -> ChainSpec {
    ChainSpec {
        drive_sample_rate: 80e9,
        output_sample_rate: 40e9,
        stages: vec![
            StageSpec::Bessel {
                order: 4,
                cutoff_hz: 25e9,
                domain: StageDomain::Electrical,
            },
            StageSpec::Tabulated {
                table: None,
                preset: Some(RF_AMP_12GHZ.into()),
                phase_mode: PhaseModeSpec::Measured,
                group_delay_s: 0.0,
                extrapolation: ExtrapolationSpec::Rolloff,
                rolloff_db_per_octave: 6.0,
                domain: StageDomain::Electrical,
            },
            StageSpec::Tabulated {
                table: None,
                preset: Some(IM_15GHZ.into()),
                phase_mode: PhaseModeSpec::IdealLinear,
                group_delay_s: 0.0,
                extrapolation: ExtrapolationSpec::Rolloff,
                rolloff_db_per_octave: 6.0,
                domain: StageDomain::Electrical,
            },
            StageSpec::Bessel {
                order: 4,
                cutoff_hz: 12e9,
                domain: StageDomain::Optical,
            },
        ],
    }
}
