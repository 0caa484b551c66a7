//! Two-stage common-emitter cascade design.
//!
//! The overall gain splits evenly across the stages (each stage takes the
//! square root), which also satisfies the classic ratio assumption
//! `A_v1/A_v2 = R_C1/R_C2` after the fact because each stage gain is
//! proportional to its collector resistor. The output stage is sized first;
//! the input stage then sees the output stage's divider and input impedance
//! as part of its load.

use super::divider::{capacitor_for, design_divider, parallel2, stability_achieved};
use super::{
    quantize_entry, BiasRecord, ComponentSet, Entry, SeriesConfig, Topology, TwoStageSpec,
};
use crate::devices::BjtParams;
use crate::error::{Error, Result};
use crate::values::{quantize_supply, Direction, EngValue, Unit};

pub fn design_two_stage(
    spec: &TwoStageSpec,
    p: &BjtParams,
    series: &SeriesConfig,
) -> Result<ComponentSet> {
    spec.validate()?;
    p.validate()?;

    let mut warnings = Vec::new();
    let a_total = spec.gain.value;
    let a_stage = a_total.sqrt();
    let dir = spec.gain.direction();

    // --- output stage ---------------------------------------------------
    // A_v2 = h_fe * R_L2' / h_ie with R_L2' = R_C2 || R_L.
    let r_l2p = a_stage * p.h_ie / p.h_fe_typ;
    let r_c2 = match spec.r_l {
        Some(r_l) => {
            if r_l2p >= r_l {
                return Err(Error::Design(format!(
                    "stage 2: gain exceeds device capability into the {r_l} ohm load"
                )));
            }
            1.0 / (1.0 / r_l2p - 1.0 / r_l)
        }
        None => r_l2p,
    };
    let rc2_entry = quantize_entry("RC2", Unit::Ohm, r_c2, dir, series.resistors)?;

    let (i_cq2, v_re2, v_cc_final, vcc_entry) = match spec.v_cc {
        Some(v_cc) => {
            let v_ceq2 = match spec.v0_peak {
                Some(v0) => 1.5 * (v0 + p.v_ce_sat),
                None => v_cc / 2.0,
            };
            let v_re2 = spec.v_re2_fraction * v_cc;
            let v_rc2 = v_cc - v_ceq2 - v_re2;
            if v_rc2 <= 0.0 {
                return Err(Error::Design(format!(
                    "stage 2: supply too low, {v_rc2:.3} V left across the collector resistor"
                )));
            }
            let i_cq2 = v_rc2 / r_c2 + p.i_c_min;
            let vcc_entry = Entry {
                label: "VCC",
                unit: Unit::Volt,
                raw: v_cc,
                quantized: v_cc,
                direction: None,
                placed: true,
            };
            (i_cq2, v_re2, v_cc, vcc_entry)
        }
        None => {
            let v0 = spec.v0_peak.ok_or_else(|| {
                Error::Design("either v0_peak or v_cc must be specified".into())
            })?;
            let v_ceq2 = 1.5 * (v0 + p.v_ce_sat);
            let i_cq2 = v0 / r_l2p + p.i_c_min;
            let v_re2 = 2.0;
            let r_e2 = v_re2 / i_cq2;
            let raw = v_ceq2 + i_cq2 * (r_c2 + r_e2);
            let rail = quantize_supply(EngValue::volts(raw))?;
            if !rail.standard {
                warnings.push(format!(
                    "derived supply {raw} V exceeds the standard rail set; using it as-is"
                ));
            }
            let vcc_entry = Entry {
                label: "VCC",
                unit: Unit::Volt,
                raw,
                quantized: rail.value.magnitude,
                direction: rail.standard.then_some(Direction::Higher),
                placed: true,
            };
            (i_cq2, v_re2, rail.value.magnitude, vcc_entry)
        }
    };

    let r_e2 = v_re2 / i_cq2;
    let re2_entry = quantize_entry("RE2", Unit::Ohm, r_e2, Direction::Lower, series.resistors)?;

    let div2 = design_divider(
        spec.stability,
        p.h_fe_max,
        r_e2,
        v_cc_final,
        v_re2,
        p.v_be_on,
        series.resistors,
    )
    .map_err(|e| stage_err(2, e))?;

    // --- input stage ------------------------------------------------------
    // Loaded by the output stage's divider and the device input impedance:
    // R_L1' = R_C1 || R_b2 || h_ie.
    let r_l1p = a_stage * p.h_ie / p.h_fe_typ;
    let next_stage_load = parallel2(div2.r_b, p.h_ie);
    if r_l1p >= next_stage_load {
        return Err(Error::Design(format!(
            "stage 1: gain exceeds device capability; the next stage load limits R_L1' to {next_stage_load:.3} ohm"
        )));
    }
    let r_c1 = 1.0 / (1.0 / r_l1p - 1.0 / next_stage_load);
    let rc1_entry = quantize_entry("RC1", Unit::Ohm, r_c1, dir, series.resistors)?;

    // Mirror the output stage's voltage budget.
    let v_rc1 = i_cq2 * r_c2;
    let v_re1 = v_re2;
    let i_cq1 = v_rc1 / r_c1 + p.i_c_min;
    let r_e1 = v_re1 / i_cq1;
    let re1_entry = quantize_entry("RE1", Unit::Ohm, r_e1, Direction::Lower, series.resistors)?;

    let div1 = design_divider(
        spec.stability,
        p.h_fe_max,
        r_e1,
        v_cc_final,
        v_re1,
        p.v_be_on,
        series.resistors,
    )
    .map_err(|e| stage_err(1, e))?;

    // --- capacitors -------------------------------------------------------
    let r_b1_q = div1.quantized_thevenin();
    let r_b2_q = div2.quantized_thevenin();
    let c_e1 = capacitor_for(re1_entry.quantized / 10.0, spec.f_l);
    let c_e2 = capacitor_for(re2_entry.quantized / 10.0, spec.f_l);
    let c_b1 = capacitor_for(parallel2(r_b1_q, p.h_ie), spec.f_l);
    let c_b2 = capacitor_for(rc1_entry.quantized + parallel2(r_b2_q, p.h_ie), spec.f_l);
    let r_l_for_c0 = spec.r_l.unwrap_or_else(|| parallel2(r_b1_q, p.h_ie));
    let c_0 = capacitor_for(rc2_entry.quantized + r_l_for_c0, spec.f_l);

    let bias2 = BiasRecord {
        v_ceq: v_cc_final - i_cq2 * (r_c2 + r_e2),
        i_cq: i_cq2,
        v_re: v_re2,
        v_cc: v_cc_final,
        r_b: div2.r_b,
        stability_achieved: stability_achieved(p.h_fe_max, r_b2_q, re2_entry.quantized),
        power: None,
    };
    let bias1 = BiasRecord {
        v_ceq: v_cc_final - i_cq1 * (r_c1 + r_e1),
        i_cq: i_cq1,
        v_re: v_re1,
        v_cc: v_cc_final,
        r_b: div1.r_b,
        stability_achieved: stability_achieved(p.h_fe_max, r_b1_q, re1_entry.quantized),
        power: None,
    };
    for (stage, bias) in [(1, &bias1), (2, &bias2)] {
        if bias.v_ceq <= p.v_ce_sat {
            warnings.push(format!(
                "stage {stage}: operating point sits in saturation (V_CE = {:.3} V)",
                bias.v_ceq
            ));
        }
    }

    let entries = vec![
        rc1_entry,
        re1_entry,
        Entry {
            label: "R1",
            unit: Unit::Ohm,
            raw: div1.r1_raw,
            quantized: div1.r1_q,
            direction: Some(Direction::Higher),
            placed: true,
        },
        Entry {
            label: "R2",
            unit: Unit::Ohm,
            raw: div1.r2_raw,
            quantized: div1.r2_q,
            direction: Some(Direction::Lower),
            placed: true,
        },
        rc2_entry,
        re2_entry,
        Entry {
            label: "R3",
            unit: Unit::Ohm,
            raw: div2.r1_raw,
            quantized: div2.r1_q,
            direction: Some(Direction::Higher),
            placed: true,
        },
        Entry {
            label: "R4",
            unit: Unit::Ohm,
            raw: div2.r2_raw,
            quantized: div2.r2_q,
            direction: Some(Direction::Lower),
            placed: true,
        },
        quantize_entry("CB1", Unit::Farad, c_b1, Direction::Higher, series.capacitors)?,
        quantize_entry("CB2", Unit::Farad, c_b2, Direction::Higher, series.capacitors)?,
        quantize_entry("CE1", Unit::Farad, c_e1, Direction::Higher, series.capacitors)?,
        quantize_entry("CE2", Unit::Farad, c_e2, Direction::Higher, series.capacitors)?,
        quantize_entry("C0", Unit::Farad, c_0, Direction::Higher, series.capacitors)?,
        vcc_entry,
    ];

    Ok(ComponentSet {
        topology: Topology::TwoStage,
        entries,
        bias: Some(bias2),
        bias_input_stage: Some(bias1),
        load: spec.r_l,
        source_res: spec.r_s,
        target_gain: Some(a_total),
        target_power: None,
        v0_peak: spec.v0_peak,
        warnings,
    })
}

fn stage_err(stage: u8, e: Error) -> Error {
    match e {
        Error::Design(msg) => Error::Design(format!("stage {stage}: {msg}")),
        other => other,
    }
}
