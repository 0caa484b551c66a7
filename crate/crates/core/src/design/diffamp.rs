//! Op-amp difference amplifier design: four resistors in two matched pairs.
//!
//! `R1 = R3 = r_base` and `R2 = R4 = A_d * r_base`. Each pair shares a single
//! quantization so the ratio match — and with it the common-mode rejection of
//! the ideal model — survives the snap to standard values.

use super::{quantize_entry, ComponentSet, DiffAmpSpec, SeriesConfig, Topology};
use crate::error::Result;
use crate::values::{Direction, Unit};

pub fn design_diff_amp(spec: &DiffAmpSpec, series: &SeriesConfig) -> Result<ComponentSet> {
    spec.validate()?;

    let r1 = quantize_entry("R1", Unit::Ohm, spec.r_base, Direction::Nearest, series.resistors)?;
    let r2 = quantize_entry(
        "R2",
        Unit::Ohm,
        spec.a_d * spec.r_base,
        Direction::Nearest,
        series.resistors,
    )?;
    let mut r3 = r1.clone();
    r3.label = "R3";
    let mut r4 = r2.clone();
    r4.label = "R4";

    Ok(ComponentSet {
        topology: Topology::DiffAmp,
        entries: vec![r1, r2, r3, r4],
        bias: None,
        bias_input_stage: None,
        load: None,
        source_res: 0.0,
        target_gain: Some(spec.a_d),
        target_power: None,
        v0_peak: None,
        warnings: Vec::new(),
    })
}
