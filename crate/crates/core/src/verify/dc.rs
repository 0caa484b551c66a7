//! Simplified DC bias solve for the divider-biased CE stage.
//!
//! Base current is neglected: the divider sets the base voltage directly,
//! one diode drop below it sits the emitter, and the collector current
//! follows from the emitter resistor.

use crate::devices::BjtParams;
use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElementKind, SourceKind};

#[derive(Debug, Clone, Copy)]
pub struct DcOperatingPoint {
    pub v_b: f64,
    pub v_e: f64,
    pub v_ce: f64,
    pub i_c: f64,
}

/// Bias point of one stage given its divider, collector and emitter
/// resistors. `r_c` is zero when the collector load carries no DC drop
/// (transformer-coupled stage).
pub fn solve_dc_stage(
    v_cc: f64,
    r_1: f64,
    r_2: f64,
    r_c: f64,
    r_e: f64,
    p: &BjtParams,
) -> Result<DcOperatingPoint> {
    let v_b = v_cc * r_2 / (r_1 + r_2);
    let v_e = v_b - p.v_be_on;
    if v_e <= 0.0 {
        return Err(Error::Design(format!(
            "transistor cut off: base at {v_b:.3} V leaves the emitter at {v_e:.3} V"
        )));
    }
    let i_c = v_e / r_e;
    let v_ce = v_cc - i_c * (r_c + r_e);
    if v_ce <= p.v_ce_sat {
        return Err(Error::Design(format!(
            "saturation: V_CE = {v_ce:.3} V is at or below V_CE,sat = {} V",
            p.v_ce_sat
        )));
    }
    Ok(DcOperatingPoint { v_b, v_e, v_ce, i_c })
}

/// Bias point extracted from a netlist-level circuit by the dialect's
/// component labels (first stage of a cascade).
pub fn solve_dc(c: &Circuit, p: &BjtParams) -> Result<DcOperatingPoint> {
    let v_cc = supply_of(c)?;
    let r_1 = resistor(c, &["R1"])?;
    let r_2 = resistor(c, &["R2"])?;
    let r_e = resistor(c, &["RE", "RE1"])?;
    let r_c = resistor(c, &["RC", "RC1"]).unwrap_or(0.0);
    solve_dc_stage(v_cc, r_1, r_2, r_c, r_e, p)
}

pub(crate) fn supply_of(c: &Circuit) -> Result<f64> {
    c.elements
        .iter()
        .find_map(|e| match &e.kind {
            ElementKind::Source(SourceKind::Dc(v)) => Some(*v),
            _ => None,
        })
        .ok_or_else(|| Error::Model("no DC supply in the circuit".into()))
}

fn resistor(c: &Circuit, labels: &[&str]) -> Result<f64> {
    for label in labels {
        if let Some(v) = c.elements.iter().find_map(|e| match &e.kind {
            ElementKind::Resistor(v) if e.label.eq_ignore_ascii_case(label) => Some(*v),
            _ => None,
        }) {
            return Ok(v);
        }
    }
    Err(Error::Model(format!("not a biased CE circuit: resistor {} missing", labels[0])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static BjtParams {
        BjtParams::default_2n2222()
    }

    #[test]
    fn symmetric_divider_centres_the_base() {
        let op = solve_dc_stage(12.0, 10_000.0, 10_000.0, 100.0, 1000.0, p()).unwrap();
        assert!((op.v_b - 6.0).abs() < 1e-12);
        assert!((op.v_e - 5.3).abs() < 1e-12);
        assert!((op.i_c - 5.3e-3).abs() < 1e-15);
    }

    #[test]
    fn grounded_top_leg_saturates() {
        // R1 -> 0 pulls the base to the rail
        let err = solve_dc_stage(12.0, 1e-6, 10_000.0, 1000.0, 1000.0, p()).unwrap_err();
        assert!(err.to_string().contains("saturation"), "{err}");
    }

    #[test]
    fn starved_divider_cuts_off() {
        let err = solve_dc_stage(12.0, 1_000_000.0, 1000.0, 1000.0, 1000.0, p()).unwrap_err();
        assert!(err.to_string().contains("cut off"), "{err}");
    }

    #[test]
    fn reads_the_dialect_labels() {
        let c = crate::netlist::parse(
            "* t\nV1 in 0 SINE(0 10m 1k)\nVCC vcc 0 12\nR1 vcc b 10k\nR2 b 0 10k\nRC vcc c 100\nRE e 0 1k\nCB in b 10u\nQ1 c b e QX\n.model QX NPN(BF=100)\n.end\n",
        )
        .unwrap();
        let op = solve_dc(&c, p()).unwrap();
        assert!((op.v_b - 6.0).abs() < 1e-12);
    }
}
