//! Single-stage common-emitter design.
//!
//! The chain: invert the midband gain relation for the collector resistor,
//! place the operating point from the required output swing (or the given
//! supply), size the emitter resistor from its voltage drop, derive the
//! supply when absent, size the bias divider from the stability factor, and
//! finally pick the three capacitors from their reactance budgets at the
//! lower cutoff.

use super::divider::{capacitor_for, design_divider, parallel2, stability_achieved};
use super::{
    quantize_entry, BiasRecord, ComponentSet, Entry, SeriesConfig, SingleStageSpec, Topology,
};
use crate::devices::BjtParams;
use crate::error::{Error, Result};
use crate::values::{quantize_supply, Direction, EngValue, Unit};

pub fn design_single_stage(
    spec: &SingleStageSpec,
    p: &BjtParams,
    series: &SeriesConfig,
) -> Result<ComponentSet> {
    spec.validate()?;
    p.validate()?;

    let mut warnings = Vec::new();
    let gain = spec.gain.value;

    let r_c = solve_collector_resistor(gain, spec.r_l, p)?;
    let rc_entry = quantize_entry("RC", Unit::Ohm, r_c, spec.gain.direction(), series.resistors)?;

    let r_lp = super::parallel(r_c, spec.r_l);

    // Operating point and emitter drop.
    let (v_ceq_target, i_cq, v_re) = match (spec.v_cc, spec.v0_peak) {
        (None, None) => {
            return Err(Error::Design(
                "either v0_peak or v_cc must be specified to place the operating point".into(),
            ))
        }
        (None, Some(v0)) => {
            let v_ceq = 1.5 * (v0 + p.v_ce_sat);
            (v_ceq, v0 / r_lp + p.i_c_min, 1.0)
        }
        (Some(v_cc), Some(v0)) => (v_cc / 2.0, v0 / r_lp + p.i_c_min, 0.10 * v_cc),
        (Some(v_cc), None) => {
            // No swing requirement: budget the collector drop like the
            // cascade's output stage and bias from it.
            let v_ceq = v_cc / 2.0;
            let v_re = 0.10 * v_cc;
            let v_rc = v_cc - v_ceq - v_re;
            (v_ceq, v_rc / r_c + p.i_c_min, v_re)
        }
    };

    let r_e = v_re / i_cq;
    let re_entry = quantize_entry("RE", Unit::Ohm, r_e, Direction::Lower, series.resistors)?;

    // Supply selection.
    let (v_cc_final, vcc_entry) = match spec.v_cc {
        Some(v) => (
            v,
            Entry {
                label: "VCC",
                unit: Unit::Volt,
                raw: v,
                quantized: v,
                direction: None,
                placed: true,
            },
        ),
        None => {
            let raw = v_ceq_target + i_cq * (r_c + r_e);
            let rail = quantize_supply(EngValue::volts(raw))?;
            if !rail.standard {
                warnings.push(format!(
                    "derived supply {raw} V exceeds the standard rail set; using it as-is"
                ));
            }
            (
                rail.value.magnitude,
                Entry {
                    label: "VCC",
                    unit: Unit::Volt,
                    raw,
                    quantized: rail.value.magnitude,
                    direction: rail.standard.then_some(Direction::Higher),
                    placed: true,
                },
            )
        }
    };

    // Bias divider from the stability target, sized at the final supply.
    let div = design_divider(
        spec.stability,
        p.h_fe_max,
        r_e,
        v_cc_final,
        v_re,
        p.v_be_on,
        series.resistors,
    )?;

    // Capacitors, from the standard values actually placed.
    let r_b_q = div.quantized_thevenin();
    let x_ce = re_entry.quantized / 10.0;
    let c_e = capacitor_for(x_ce, spec.f_l);
    let x_cb = spec.r_s + parallel2(r_b_q, p.h_ie);
    let c_b = capacitor_for(x_cb, spec.f_l);
    let r_l_for_cc = spec.r_l.unwrap_or_else(|| parallel2(r_b_q, p.h_ie));
    let x_cc = rc_entry.quantized + r_l_for_cc;
    let c_c = capacitor_for(x_cc, spec.f_l);

    let v_ceq = v_cc_final - i_cq * (r_c + r_e);
    if v_ceq <= p.v_ce_sat {
        warnings.push(format!(
            "operating point sits in saturation (V_CE = {v_ceq:.3} V); increase the supply or reduce the gain"
        ));
    }

    let bias = BiasRecord {
        v_ceq,
        i_cq,
        v_re,
        v_cc: v_cc_final,
        r_b: div.r_b,
        stability_achieved: stability_achieved(p.h_fe_max, r_b_q, re_entry.quantized),
        power: None,
    };

    let entries = vec![
        rc_entry,
        re_entry,
        Entry {
            label: "R1",
            unit: Unit::Ohm,
            raw: div.r1_raw,
            quantized: div.r1_q,
            direction: Some(Direction::Higher),
            placed: true,
        },
        Entry {
            label: "R2",
            unit: Unit::Ohm,
            raw: div.r2_raw,
            quantized: div.r2_q,
            direction: Some(Direction::Lower),
            placed: true,
        },
        quantize_entry("CB", Unit::Farad, c_b, Direction::Higher, series.capacitors)?,
        quantize_entry("CE", Unit::Farad, c_e, Direction::Higher, series.capacitors)?,
        quantize_entry("CC", Unit::Farad, c_c, Direction::Higher, series.capacitors)?,
        vcc_entry,
    ];

    Ok(ComponentSet {
        topology: Topology::SingleStage,
        entries,
        bias: Some(bias),
        bias_input_stage: None,
        load: spec.r_l,
        source_res: spec.r_s,
        target_gain: Some(gain),
        target_power: None,
        v0_peak: spec.v0_peak,
        warnings,
    })
}

/// Inverts `A_V = h_fe * (R_C || R_L) / (h_ie + h * R_C)` for `R_C`.
fn solve_collector_resistor(gain: f64, r_l: Option<f64>, p: &BjtParams) -> Result<f64> {
    let h = p.h_composite();
    let infeasible = || {
        Error::Design(format!(
            "gain exceeds device capability: {gain} cannot be realized with h_fe={} h_ie={} h={h}",
            p.h_fe_typ, p.h_ie
        ))
    };

    let r_c = match r_l {
        None => {
            let denom = p.h_fe_typ - gain * h;
            if denom <= 0.0 {
                return Err(infeasible());
            }
            gain * p.h_ie / denom
        }
        Some(r_l) => {
            // A_V*(h_ie + h*R_C)*(R_C + R_L) = h_fe*R_C*R_L expands to a
            // quadratic a*R_C^2 + b*R_C + c = 0.
            let a = gain * h;
            let b = gain * p.h_ie + gain * h * r_l - p.h_fe_typ * r_l;
            let c = gain * p.h_ie * r_l;
            if a == 0.0 {
                if b >= 0.0 {
                    return Err(infeasible());
                }
                -c / b
            } else {
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return Err(infeasible());
                }
                let sq = disc.sqrt();
                // numerically stable root pair
                let q = -0.5 * (b + b.signum() * sq);
                let roots = [q / a, c / q];
                let mut best: Option<f64> = None;
                for r in roots {
                    if r.is_finite() && r > 0.0 {
                        best = Some(match best {
                            // two positive roots realize the same gain; take
                            // the smaller, which minimizes the supply drop
                            Some(prev) => prev.min(r),
                            None => r,
                        });
                    }
                }
                best.ok_or_else(infeasible)?
            }
        }
    };

    if !r_c.is_finite() || r_c <= 0.0 {
        return Err(infeasible());
    }
    Ok(r_c)
}
