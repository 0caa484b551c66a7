//! Design verification: analytic gain on the quantized values, MNA midband
//! gain, DC bias per stage, and a pass/fail verdict.

use super::dc::{solve_dc_stage, DcOperatingPoint};
use super::small_signal::small_signal_of;
use super::AcResult;
use crate::design::{gain_formula, ComponentSet, OpAmpConfig, Topology};
use crate::devices::{BjtParams, OpAmpModel};
use crate::error::Result;
use crate::netlist::{build_circuit, Stimulus};
use num_complex::Complex64;

/// Frequency at which the midband gain is measured.
pub const MIDBAND_HZ: f64 = 1000.0;

/// Allowed relative deviation of the measured gain magnitude from the
/// target: the cascade compounds two quantizations, everything else gets
/// the single-stage budget.
pub fn default_gain_tolerance(topology: Topology) -> f64 {
    match topology {
        Topology::TwoStage => 0.25,
        _ => 0.15,
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Topology gain formula evaluated on the quantized components.
    pub analytic_gain: Option<f64>,
    /// Nodal solution at the midband frequency.
    pub mna_midband: Option<AcResult>,
    /// Common-mode gain (difference amplifier only).
    pub common_mode: Option<f64>,
    /// Per-stage DC operating points, or the diagnostic that failed.
    pub dc: Vec<(String, std::result::Result<DcOperatingPoint, String>)>,
    pub stability_achieved: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn check_design(
    cs: &ComponentSet,
    p: &BjtParams,
    op: &OpAmpModel,
    tolerance_override: Option<f64>,
) -> Result<VerificationReport> {
    let circuit = build_circuit(cs, &Stimulus::for_design(cs), p, op)?;
    let ssc = small_signal_of(&circuit, p)?;
    let tolerance = tolerance_override.unwrap_or_else(|| default_gain_tolerance(cs.topology));

    let mut checks = Vec::new();

    // Gain, by closed form and by nodal analysis.
    let analytic_gain = analytic_quantized_gain(cs, p)?;
    let (mna_midband, common_mode) = match cs.topology {
        Topology::DiffAmp => {
            let half = Complex64::new(0.5, 0.0);
            let diff = ssc.solve_with_drives(MIDBAND_HZ, &[-half, half])?;
            let one = Complex64::new(1.0, 0.0);
            let common = ssc.solve_with_drives(MIDBAND_HZ, &[one, one])?;
            (
                Some(AcResult::new(MIDBAND_HZ, diff[ssc.output_node])),
                Some(common[ssc.output_node].norm()),
            )
        }
        _ => (Some(ssc.solve_ac(MIDBAND_HZ)?), None),
    };

    if let (Some(target), Some(mna)) = (cs.target_gain, &mna_midband) {
        let err = (mna.magnitude - target.abs()).abs() / target.abs();
        checks.push(Check::new(
            "gain",
            err <= tolerance,
            format!(
                "measured |A| = {:.4} vs target {:.4} ({:+.1} %, tolerance {:.0} %)",
                mna.magnitude,
                target.abs(),
                100.0 * (mna.magnitude - target.abs()) / target.abs(),
                100.0 * tolerance
            ),
        ));
    }

    if let Some(cm) = common_mode {
        checks.push(Check::new(
            "common_mode",
            cm <= 1e-5,
            format!("|A_cm| = {cm:.3e} (limit 1e-5)"),
        ));
    }

    // DC operating points on the quantized circuit.
    let mut dc = Vec::new();
    match cs.topology {
        Topology::SingleStage => {
            dc.push(("stage".to_string(), dc_stage(cs, p, "R1", "R2", Some("RC"), "RE")));
        }
        Topology::TwoStage => {
            dc.push(("stage 1".to_string(), dc_stage(cs, p, "R1", "R2", Some("RC1"), "RE1")));
            dc.push(("stage 2".to_string(), dc_stage(cs, p, "R3", "R4", Some("RC2"), "RE2")));
        }
        Topology::PowerAmp => {
            dc.push(("stage".to_string(), dc_stage(cs, p, "R1", "R2", None, "RE")));
        }
        _ => {}
    }
    for (stage, point) in &dc {
        checks.push(Check::new(
            &format!("bias_{}", stage.replace(' ', "_")),
            point.is_ok(),
            match point {
                Ok(op) => format!(
                    "V_B {:.3} V, V_E {:.3} V, I_C {:.4e} A, V_CE {:.3} V",
                    op.v_b, op.v_e, op.i_c, op.v_ce
                ),
                Err(msg) => msg.clone(),
            },
        ));
    }

    // Stability factor achieved with standard values.
    let stability_achieved = cs.bias.as_ref().map(|b| b.stability_achieved);
    if let Some(s) = stability_achieved {
        let hi = 1.0 + p.h_fe_max;
        checks.push(Check::new(
            "stability",
            s > 1.0 && s < hi,
            format!("s = {s:.3} (must lie in (1, {hi}))"),
        ));
    }

    // Power-stage energy identities on raw values.
    if let Some(target_power) = cs.target_power {
        if let Some(fig) = cs.bias.as_ref().and_then(|b| b.power.as_ref()) {
            let power = 0.5 * fig.v_ce_peak * fig.i_c_peak;
            checks.push(Check::new(
                "power_identity",
                (power - target_power).abs() <= 1e-12 * target_power.max(1.0),
                format!("0.5 * V_CE,peak * I_C,peak = {power:.12} W vs {target_power} W"),
            ));
            let reflected = fig.turns_ratio * fig.turns_ratio * cs.load.unwrap_or(f64::NAN);
            checks.push(Check::new(
                "turns_ratio",
                (reflected - fig.r_l_prime).abs() <= 1e-12 * fig.r_l_prime,
                format!("(N1/N2)^2 * R_L = {reflected:.9} vs R_L' = {:.9}", fig.r_l_prime),
            ));
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        analytic_gain,
        mna_midband,
        common_mode,
        dc,
        stability_achieved,
        checks,
        passed,
    })
}

fn dc_stage(
    cs: &ComponentSet,
    p: &BjtParams,
    r1: &str,
    r2: &str,
    rc: Option<&str>,
    re: &str,
) -> std::result::Result<DcOperatingPoint, String> {
    let run = || -> Result<DcOperatingPoint> {
        let v_cc = cs
            .bias
            .as_ref()
            .map(|b| b.v_cc)
            .ok_or_else(|| crate::error::Error::Structure("no bias record".into()))?;
        let r_c = match rc {
            Some(label) => cs.quantized(label)?,
            None => 0.0,
        };
        solve_dc_stage(v_cc, cs.quantized(r1)?, cs.quantized(r2)?, r_c, cs.quantized(re)?, p)
    };
    run().map_err(|e| e.to_string())
}

fn analytic_quantized_gain(cs: &ComponentSet, p: &BjtParams) -> Result<Option<f64>> {
    let gain = match cs.topology {
        Topology::SingleStage => {
            Some(gain_formula::single_stage(cs.quantized("RC")?, cs.load, p))
        }
        Topology::TwoStage => {
            let r_b2 = {
                let r3 = cs.quantized("R3")?;
                let r4 = cs.quantized("R4")?;
                r3 * r4 / (r3 + r4)
            };
            let a1 = gain_formula::cascade_input_stage(cs.quantized("RC1")?, r_b2, p);
            let a2 = gain_formula::cascade_output_stage(cs.quantized("RC2")?, cs.load, p);
            Some(a1 * a2)
        }
        Topology::OpAmp(OpAmpConfig::Follower) => Some(1.0),
        Topology::OpAmp(OpAmpConfig::NonInverting) => {
            Some(gain_formula::non_inverting(cs.quantized("R1")?, cs.quantized("R2")?))
        }
        Topology::OpAmp(OpAmpConfig::InvertingPair) => {
            Some(gain_formula::inverting_pair(cs.quantized("R1")?, cs.quantized("R2")?))
        }
        Topology::OpAmp(OpAmpConfig::InvertingTee) => Some(gain_formula::inverting_tee(
            cs.quantized("R1")?,
            cs.quantized("R2")?,
            cs.quantized("R3")?,
            cs.quantized("R4")?,
        )),
        Topology::DiffAmp => {
            Some(gain_formula::difference(cs.quantized("R1")?, cs.quantized("R2")?))
        }
        Topology::PowerAmp => None,
    };
    Ok(gain)
}
