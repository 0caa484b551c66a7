//! Op-amp amplifier design.
//!
//! The sign of the requested gain picks the configuration. Non-inverting
//! stages use the plain `1 + R2/R1` pair with `R1 = r_base/10`; unity gain
//! degenerates to a follower with no resistors at all. Inverting stages
//! above magnitude two use a tee feedback arm (`R1 = R2 = R4 = r_base`,
//! `R3 = r_base/(|A|-2)`), which realizes large gains while keeping every
//! resistor at or below `r_base`; milder inverting gains fall back to the
//! plain two-resistor pair.

use super::{
    quantize_entry, ComponentSet, OpAmpConfig, OpAmpSpec, SeriesConfig, Topology,
};
use crate::error::{Error, Result};
use crate::values::{Direction, Unit};

pub fn design_opamp(spec: &OpAmpSpec, series: &SeriesConfig) -> Result<ComponentSet> {
    spec.validate()?;

    let a = spec.gain.value;
    let r_base = spec.r_base;
    if a.abs() < 1.0 {
        return Err(Error::Design(format!(
            "attenuator not supported: |gain| must be at least 1, got {a}"
        )));
    }

    let (config, entries, warnings) = if a == 1.0 {
        (OpAmpConfig::Follower, Vec::new(), Vec::new())
    } else if a > 1.0 {
        let r1 = r_base / 10.0;
        let r2 = (a - 1.0) * r1;
        let entries = vec![
            quantize_entry("R1", Unit::Ohm, r1, Direction::Nearest, series.resistors)?,
            quantize_entry("R2", Unit::Ohm, r2, Direction::Nearest, series.resistors)?,
        ];
        (OpAmpConfig::NonInverting, entries, Vec::new())
    } else {
        let magnitude = a.abs();
        if magnitude > 2.0 {
            // R1, R2 and R4 all take r_base and must share one quantization.
            let shared = quantize_entry("R1", Unit::Ohm, r_base, Direction::Nearest, series.resistors)?;
            let mut r2 = shared.clone();
            r2.label = "R2";
            let mut r4 = shared.clone();
            r4.label = "R4";
            let r3 = r_base / (magnitude - 2.0);
            let entries = vec![
                shared,
                r2,
                quantize_entry("R3", Unit::Ohm, r3, Direction::Nearest, series.resistors)?,
                r4,
            ];
            (OpAmpConfig::InvertingTee, entries, Vec::new())
        } else {
            let r1 = r_base;
            let r2 = magnitude * r_base;
            let entries = vec![
                quantize_entry("R1", Unit::Ohm, r1, Direction::Nearest, series.resistors)?,
                quantize_entry("R2", Unit::Ohm, r2, Direction::Nearest, series.resistors)?,
            ];
            let warnings = vec![
                "inverting gain magnitude at or below 2: using the plain feedback pair instead of the tee network".to_string(),
            ];
            (OpAmpConfig::InvertingPair, entries, warnings)
        }
    };

    Ok(ComponentSet {
        topology: Topology::OpAmp(config),
        entries,
        bias: None,
        bias_input_stage: None,
        load: None,
        source_res: 0.0,
        target_gain: Some(a),
        target_power: None,
        v0_peak: None,
        warnings,
    })
}
