//! Bias divider sizing shared by the BJT engines.

use crate::error::{Error, Result};
use crate::values::{quantize, Direction, EngValue, Series};

/// Inverts the stability-factor relation
/// `s = (1 + h_fe_max) / (1 + h_fe_max * R_e / (R_b + R_e))`
/// for the divider Thevenin resistance, then splits it into the two divider
/// legs from the voltage budget. Returns raw `(R_b, R_1, R_2)` with `R_1` the
/// top (supply-side) leg; the raw pair satisfies both `R_1/R_2 = V_r1/V_r2`
/// and `R_1 || R_2 = R_b` exactly.
pub fn solve_bias_divider(
    s_target: f64,
    h_fe_max: f64,
    r_e: f64,
    v_cc: f64,
    v_re: f64,
    v_be_on: f64,
) -> Result<(f64, f64, f64)> {
    if !(r_e > 0.0 && v_cc > 0.0) {
        return Err(Error::Design(format!(
            "bias divider needs positive R_e and V_cc (got R_e={r_e}, V_cc={v_cc})"
        )));
    }
    if !(s_target > 1.0 && s_target < 1.0 + h_fe_max) {
        return Err(Error::Design(format!(
            "stability factor out of range: need 1 < s < {} (1 + h_fe_max), got {s_target}",
            1.0 + h_fe_max
        )));
    }
    let r_b = r_e * (s_target - 1.0) * (1.0 + h_fe_max) / (1.0 + h_fe_max - s_target);

    let v_r2 = v_be_on + v_re;
    let v_r1 = v_cc - v_r2;
    if v_r1 <= 0.0 {
        return Err(Error::Design(format!(
            "supply too low for bias string: V_cc={v_cc} leaves {v_r1} across the top divider leg"
        )));
    }
    let r_1 = r_b * v_cc / v_r2;
    let r_2 = r_b * v_cc / v_r1;
    Ok((r_b, r_1, r_2))
}

/// A sized divider: raw legs plus their standard values. The bottom leg
/// snaps low (a stiffer divider holds the base voltage against beta spread)
/// and the top leg is then recomputed from the voltage ratio and snapped
/// high to limit the standing current.
#[derive(Debug, Clone, Copy)]
pub struct DividerDesign {
    pub r_b: f64,
    pub r1_raw: f64,
    pub r2_raw: f64,
    pub r1_q: f64,
    pub r2_q: f64,
}

impl DividerDesign {
    pub fn quantized_thevenin(&self) -> f64 {
        self.r1_q * self.r2_q / (self.r1_q + self.r2_q)
    }
}

pub(crate) fn design_divider(
    s_target: f64,
    h_fe_max: f64,
    r_e: f64,
    v_cc: f64,
    v_re: f64,
    v_be_on: f64,
    series: Series,
) -> Result<DividerDesign> {
    let (r_b, r1_raw, r2_raw) = solve_bias_divider(s_target, h_fe_max, r_e, v_cc, v_re, v_be_on)?;
    let r2_q = quantize(EngValue::ohms(r2_raw), Direction::Lower, series)?.magnitude;
    let ratio = (v_cc - v_be_on - v_re) / (v_be_on + v_re);
    let r1_q = quantize(EngValue::ohms(ratio * r2_q), Direction::Higher, series)?.magnitude;
    Ok(DividerDesign { r_b, r1_raw, r2_raw, r1_q, r2_q })
}

/// Stability factor reached with the values actually placed in the circuit.
pub(crate) fn stability_achieved(h_fe_max: f64, r_b: f64, r_e: f64) -> f64 {
    (1.0 + h_fe_max) / (1.0 + h_fe_max * r_e / (r_b + r_e))
}

pub(crate) fn parallel2(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

/// Coupling / bypass capacitor from its reactance budget at the cutoff.
pub(crate) fn capacitor_for(reactance: f64, f_l: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * f_l * reactance)
}
