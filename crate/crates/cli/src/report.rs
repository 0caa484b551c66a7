//! Plain-text report rendering.

use ampsyn_core::design::{BiasRecord, ComponentSet, Entry};
use ampsyn_core::devices::BjtParams;
use ampsyn_core::values::format_magnitude;
use ampsyn_core::verify::{AcResult, DcOperatingPoint, VerificationReport};
use std::fmt::Write;
use std::path::Path;

pub fn render_design(
    cs: &ComponentSet,
    params: &BjtParams,
    verdict: &VerificationReport,
    netlist_path: &Path,
) -> String {
    let mut out = String::new();
    let w = &mut out;

    writeln!(w, "topology : {}", cs.topology.title()).unwrap();
    writeln!(
        w,
        "device   : {} (h_fe {} / {} / {}, h_ie {} ohm, h_re {}, h_oe {} S)",
        params.name,
        format_magnitude(params.h_fe_min),
        format_magnitude(params.h_fe_typ),
        format_magnitude(params.h_fe_max),
        format_magnitude(params.h_ie),
        format_magnitude(params.h_re),
        format_magnitude(params.h_oe),
    )
    .unwrap();
    if let Some(gain) = cs.target_gain {
        writeln!(w, "target   : gain {}", format_magnitude(gain)).unwrap();
    }
    if let Some(p) = cs.target_power {
        writeln!(
            w,
            "target   : {} W into {} ohm",
            format_magnitude(p),
            format_magnitude(cs.load.unwrap_or(f64::NAN))
        )
        .unwrap();
    }
    writeln!(w, "netlist  : {}", netlist_path.display()).unwrap();
    writeln!(w).unwrap();

    writeln!(w, "{:<10} {:>12} {:>12}  rule", "component", "raw", "standard").unwrap();
    for e in &cs.entries {
        writeln!(w, "{}", entry_row(e)).unwrap();
    }

    if let Some(bias) = &cs.bias_input_stage {
        writeln!(w).unwrap();
        write_bias(w, "bias (stage 1)", bias);
    }
    if let Some(bias) = &cs.bias {
        writeln!(w).unwrap();
        let label = if cs.bias_input_stage.is_some() { "bias (stage 2)" } else { "bias" };
        write_bias(w, label, bias);
    }

    for warning in &cs.warnings {
        writeln!(w, "note: {warning}").unwrap();
    }

    writeln!(w).unwrap();
    writeln!(w, "verification").unwrap();
    if let Some(a) = verdict.analytic_gain {
        writeln!(w, "  analytic gain (standard values) : {a:.4}").unwrap();
    }
    if let Some(mna) = &verdict.mna_midband {
        writeln!(
            w,
            "  nodal midband gain at 1 kHz     : {:.4} ({:.1} deg)",
            mna.magnitude, mna.phase_deg
        )
        .unwrap();
    }
    if let Some(cm) = verdict.common_mode {
        writeln!(w, "  common-mode gain                : {cm:.3e}").unwrap();
    }
    for check in &verdict.checks {
        writeln!(
            w,
            "  [{}] {}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        )
        .unwrap();
    }
    writeln!(w, "verdict: {}", if verdict.passed { "PASS" } else { "FAIL" }).unwrap();
    out
}

fn entry_row(e: &Entry) -> String {
    let rule = match e.direction {
        Some(d) => d.to_string(),
        None => "exact".to_string(),
    };
    let note = if e.placed { "" } else { "  (reported only, not in netlist)" };
    format!(
        "{:<10} {:>12} {:>12}  {rule}{note}",
        format!("{}{}", e.label, unit_suffix(e)),
        format_magnitude(e.raw),
        format_magnitude(e.quantized),
    )
}

fn unit_suffix(e: &Entry) -> String {
    let sym = e.unit.symbol();
    if sym.is_empty() {
        String::new()
    } else {
        format!(" [{sym}]")
    }
}

fn write_bias(w: &mut String, label: &str, bias: &BiasRecord) {
    writeln!(
        w,
        "{label}: V_CEQ {} V, I_CQ {} A, V_RE {} V, V_CC {} V, R_B {} ohm, s {:.3}",
        format_magnitude(bias.v_ceq),
        format_magnitude(bias.i_cq),
        format_magnitude(bias.v_re),
        format_magnitude(bias.v_cc),
        format_magnitude(bias.r_b),
        bias.stability_achieved,
    )
    .unwrap();
    if let Some(fig) = &bias.power {
        writeln!(
            w,
            "power : V_CE,peak {} V, I_C,peak {} A, R_L' {} ohm, P_RE {} W, N1/N2 {:.4}",
            format_magnitude(fig.v_ce_peak),
            format_magnitude(fig.i_c_peak),
            format_magnitude(fig.r_l_prime),
            format_magnitude(fig.p_re),
            fig.turns_ratio,
        )
        .unwrap();
    }
}

#[allow(clippy::too_many_arguments)]
pub fn render_verify(
    netlist: &Path,
    title: &str,
    midband: &AcResult,
    target: f64,
    tolerance: f64,
    dc: &Option<Result<DcOperatingPoint, String>>,
    passed: bool,
) -> String {
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "netlist  : {} ({title})", netlist.display()).unwrap();
    writeln!(
        w,
        "midband  : |A| = {:.4}, phase {:.1} deg at {} Hz",
        midband.magnitude, midband.phase_deg, midband.frequency
    )
    .unwrap();
    let deviation = 100.0 * (midband.magnitude - target) / target;
    writeln!(
        w,
        "target   : |A| = {:.4} ({deviation:+.1} %, tolerance {:.0} %)",
        target,
        100.0 * tolerance
    )
    .unwrap();
    match dc {
        Some(Ok(op)) => writeln!(
            w,
            "bias     : V_B {:.3} V, V_E {:.3} V, I_C {:.4e} A, V_CE {:.3} V",
            op.v_b, op.v_e, op.i_c, op.v_ce
        )
        .unwrap(),
        Some(Err(msg)) => writeln!(w, "bias     : {msg}").unwrap(),
        None => {}
    }
    writeln!(w, "verdict: {}", if passed { "PASS" } else { "FAIL" }).unwrap();
    out
}
