//! Class-A transformer-coupled power stage design.
//!
//! The supply fixes the emitter drop (one tenth of the rail) and the
//! operating point; the requested load power fixes the peak collector
//! current; the transformer turns ratio then matches the load to the
//! collector swing. The emitter bypass capacitor comes out impractically
//! large at these impedance levels, so the emitter is left unbypassed and
//! the computed value is only reported.

use super::divider::{capacitor_for, design_divider, parallel2, stability_achieved};
use super::{
    exact_entry, quantize_entry, BiasRecord, ComponentSet, PowerAmpSpec, PowerFigures,
    SeriesConfig, Topology,
};
use crate::devices::BjtParams;
use crate::error::{Error, Result};
use crate::values::{Direction, Unit};

/// Largest emitter resistance the engine will place before declaring the
/// requested power degenerate.
const MAX_EMITTER_OHMS: f64 = 1e9;

pub fn design_power_amp(
    spec: &PowerAmpSpec,
    p: &BjtParams,
    series: &SeriesConfig,
) -> Result<ComponentSet> {
    spec.validate()?;
    p.validate()?;

    let v_re = spec.v_cc / 10.0;
    let v_ceq = spec.v_cc - v_re;
    let v_ce_peak = v_ceq - p.v_ce_sat;
    if v_ce_peak <= 0.0 {
        return Err(Error::Design(format!(
            "supply too low for requested swing: V_CE,peak = {v_ce_peak:.3} V at V_cc = {} V",
            spec.v_cc
        )));
    }

    let i_c_peak = 2.0 * spec.p_load / v_ce_peak;
    let i_cq = i_c_peak + p.i_c_min;
    let r_e = v_re / i_cq;
    if r_e > MAX_EMITTER_OHMS {
        return Err(Error::Design(format!(
            "requested load power {} W is degenerate: emitter resistor would be {r_e:.3e} ohm",
            spec.p_load
        )));
    }
    let re_entry = quantize_entry("RE", Unit::Ohm, r_e, Direction::Lower, series.resistors)?;
    let p_re = v_re * v_re / r_e;

    // Reported but not placed: the stage runs with the emitter unbypassed.
    let c_e = capacitor_for(spec.r_l, spec.f_l);
    let mut ce_entry =
        quantize_entry("CE", Unit::Farad, c_e, Direction::Higher, series.capacitors)?;
    ce_entry.placed = false;

    let div = design_divider(
        spec.stability,
        p.h_fe_max,
        r_e,
        spec.v_cc,
        i_cq * r_e,
        p.v_be_on,
        series.resistors,
    )?;
    let r_b_q = div.quantized_thevenin();

    // Input coupling; the collector side needs none (the transformer primary
    // carries the DC).
    let x_cb = parallel2(r_b_q, p.h_ie);
    let cb_entry = quantize_entry(
        "CB",
        Unit::Farad,
        capacitor_for(x_cb, spec.f_l),
        Direction::Higher,
        series.capacitors,
    )?;

    let r_l_prime = v_ce_peak / i_c_peak;
    let turns_ratio = (r_l_prime / spec.r_l).sqrt();

    let bias = BiasRecord {
        v_ceq: spec.v_cc - i_cq * r_e,
        i_cq,
        v_re,
        v_cc: spec.v_cc,
        r_b: div.r_b,
        stability_achieved: stability_achieved(p.h_fe_max, r_b_q, re_entry.quantized),
        power: Some(PowerFigures { v_ce_peak, i_c_peak, r_l_prime, p_re, turns_ratio }),
    };

    let entries = vec![
        re_entry,
        super::Entry {
            label: "R1",
            unit: Unit::Ohm,
            raw: div.r1_raw,
            quantized: div.r1_q,
            direction: Some(Direction::Higher),
            placed: true,
        },
        super::Entry {
            label: "R2",
            unit: Unit::Ohm,
            raw: div.r2_raw,
            quantized: div.r2_q,
            direction: Some(Direction::Lower),
            placed: true,
        },
        cb_entry,
        ce_entry,
        exact_entry("N", Unit::Dimensionless, turns_ratio),
        exact_entry("VCC", Unit::Volt, spec.v_cc),
    ];

    Ok(ComponentSet {
        topology: Topology::PowerAmp,
        entries,
        bias: Some(bias),
        bias_input_stage: None,
        load: Some(spec.r_l),
        source_res: 0.0,
        target_gain: None,
        target_power: Some(spec.p_load),
        v0_peak: None,
        warnings: Vec::new(),
    })
}
