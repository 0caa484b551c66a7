//! Realizes a designed [`ComponentSet`](crate::design::ComponentSet) as a
//! netlist-level [`Circuit`].
//!
//! Node conventions shared with the verifier: the signal source drives `in`,
//! the amplifier output is `out`, the supply rail is `vcc`. When no load was
//! specified the output coupling capacitor still runs to `out`, leaving the
//! port open for probing.

use super::{Circuit, Directive, Element, ElementKind, SourceKind, SweepKind};
use crate::design::{ComponentSet, OpAmpConfig, Topology};
use crate::devices::{BjtParams, OpAmpModel};
use crate::error::{Error, Result};

pub const OPAMP_SUBCKT: &str = "opamp_ideal";

/// Input drive description for the emitted netlist.
#[derive(Debug, Clone, Copy)]
pub struct Stimulus {
    pub amplitude: f64,
    pub frequency: f64,
}

impl Stimulus {
    /// Amplitude that keeps the output inside the designed swing: the peak
    /// output divided by the gain, at the audio midband.
    pub fn for_design(cs: &ComponentSet) -> Stimulus {
        let amplitude = match (cs.v0_peak, cs.target_gain) {
            (Some(v0), Some(gain)) if gain.abs() > 0.0 => v0 / gain.abs(),
            _ => 0.01,
        };
        Stimulus { amplitude, frequency: 1000.0 }
    }
}

pub fn build_circuit(
    cs: &ComponentSet,
    stim: &Stimulus,
    p: &BjtParams,
    op: &OpAmpModel,
) -> Result<Circuit> {
    op.validate()?;
    let mut c = match cs.topology {
        Topology::SingleStage => build_single_stage(cs, stim, p)?,
        Topology::TwoStage => build_two_stage(cs, stim, p)?,
        Topology::OpAmp(config) => build_opamp(cs, stim, op, config)?,
        Topology::DiffAmp => build_diff(cs, stim, op)?,
        Topology::PowerAmp => build_power(cs, stim, p)?,
    };
    c.directives.push(Directive::Tran { stop: 5.0 / stim.frequency });
    c.directives.push(Directive::Ac {
        sweep: SweepKind::Dec,
        points: 50,
        f_start: 1.0,
        f_stop: 1e6,
    });
    c.directives.push(Directive::End);
    c.validate()?;
    Ok(c)
}

fn need(cs: &ComponentSet, label: &str) -> Result<f64> {
    cs.get(label)
        .filter(|e| e.placed)
        .map(|e| e.quantized)
        .ok_or_else(|| Error::Structure(format!("component set is missing {label}")))
}

fn sine(label: &str, node: &str, stim: &Stimulus) -> Element {
    Element::new(
        label,
        &[node, "0"],
        ElementKind::Source(SourceKind::Sine {
            offset: 0.0,
            amplitude: stim.amplitude,
            freq: stim.frequency,
        }),
    )
}

fn model_name(p: &BjtParams) -> String {
    let sanitized: String = p
        .name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' })
        .collect();
    format!("Q{sanitized}")
}

fn model_card(p: &BjtParams) -> Directive {
    Directive::Model {
        name: model_name(p),
        kind: "NPN".into(),
        params: vec![("BF".into(), p.h_fe_typ)],
    }
}

fn opamp_subckt(op: &OpAmpModel) -> Directive {
    Directive::Subckt {
        name: OPAMP_SUBCKT.into(),
        ports: ["inp", "inn", "vdd", "vss", "out"].iter().map(|s| s.to_string()).collect(),
        body: vec![Element::new(
            "E1",
            &["out", "0", "inp", "inn"],
            ElementKind::Vcvs(op.open_loop_gain),
        )],
    }
}

fn opamp_instance(label: &str, inp: &str, inn: &str, out: &str) -> Element {
    Element::new(
        label,
        &[inp, inn, "0", "0", out],
        ElementKind::Subckt { name: OPAMP_SUBCKT.into() },
    )
}

fn build_single_stage(cs: &ComponentSet, stim: &Stimulus, p: &BjtParams) -> Result<Circuit> {
    let mut elements = vec![
        sine("V1", "in", stim),
        Element::new("VCC", &["vcc", "0"], ElementKind::Source(SourceKind::Dc(need(cs, "VCC")?))),
        Element::new("R1", &["vcc", "b"], ElementKind::Resistor(need(cs, "R1")?)),
        Element::new("R2", &["b", "0"], ElementKind::Resistor(need(cs, "R2")?)),
        Element::new("RC", &["vcc", "c"], ElementKind::Resistor(need(cs, "RC")?)),
        Element::new("RE", &["e", "0"], ElementKind::Resistor(need(cs, "RE")?)),
    ];
    let cb_from = if cs.source_res > 0.0 {
        elements.push(Element::new("RS", &["in", "sig"], ElementKind::Resistor(cs.source_res)));
        "sig"
    } else {
        "in"
    };
    elements.push(Element::new("CB", &[cb_from, "b"], ElementKind::Capacitor(need(cs, "CB")?)));
    elements.push(Element::new("CE", &["e", "0"], ElementKind::Capacitor(need(cs, "CE")?)));
    elements.push(Element::new("CC", &["c", "out"], ElementKind::Capacitor(need(cs, "CC")?)));
    if let Some(r_l) = cs.load {
        elements.push(Element::new("RL", &["out", "0"], ElementKind::Resistor(r_l)));
    }
    elements.push(Element::new("Q1", &["c", "b", "e"], ElementKind::Bjt { model: model_name(p) }));

    Ok(Circuit {
        title: cs.topology.title(),
        elements,
        directives: vec![model_card(p)],
    })
}

fn build_two_stage(cs: &ComponentSet, stim: &Stimulus, p: &BjtParams) -> Result<Circuit> {
    let model = model_name(p);
    let mut elements = vec![
        sine("V1", "in", stim),
        Element::new("VCC", &["vcc", "0"], ElementKind::Source(SourceKind::Dc(need(cs, "VCC")?))),
        Element::new("R1", &["vcc", "b1"], ElementKind::Resistor(need(cs, "R1")?)),
        Element::new("R2", &["b1", "0"], ElementKind::Resistor(need(cs, "R2")?)),
        Element::new("RC1", &["vcc", "c1"], ElementKind::Resistor(need(cs, "RC1")?)),
        Element::new("RE1", &["e1", "0"], ElementKind::Resistor(need(cs, "RE1")?)),
        Element::new("R3", &["vcc", "b2"], ElementKind::Resistor(need(cs, "R3")?)),
        Element::new("R4", &["b2", "0"], ElementKind::Resistor(need(cs, "R4")?)),
        Element::new("RC2", &["vcc", "c2"], ElementKind::Resistor(need(cs, "RC2")?)),
        Element::new("RE2", &["e2", "0"], ElementKind::Resistor(need(cs, "RE2")?)),
    ];
    let cb1_from = if cs.source_res > 0.0 {
        elements.push(Element::new("RS", &["in", "sig"], ElementKind::Resistor(cs.source_res)));
        "sig"
    } else {
        "in"
    };
    elements.push(Element::new("CB1", &[cb1_from, "b1"], ElementKind::Capacitor(need(cs, "CB1")?)));
    elements.push(Element::new("CB2", &["c1", "b2"], ElementKind::Capacitor(need(cs, "CB2")?)));
    elements.push(Element::new("CE1", &["e1", "0"], ElementKind::Capacitor(need(cs, "CE1")?)));
    elements.push(Element::new("CE2", &["e2", "0"], ElementKind::Capacitor(need(cs, "CE2")?)));
    elements.push(Element::new("C0", &["c2", "out"], ElementKind::Capacitor(need(cs, "C0")?)));
    if let Some(r_l) = cs.load {
        elements.push(Element::new("RL", &["out", "0"], ElementKind::Resistor(r_l)));
    }
    elements.push(Element::new("Q1", &["c1", "b1", "e1"], ElementKind::Bjt { model: model.clone() }));
    elements.push(Element::new("Q2", &["c2", "b2", "e2"], ElementKind::Bjt { model }));

    Ok(Circuit {
        title: cs.topology.title(),
        elements,
        directives: vec![model_card(p)],
    })
}

fn build_opamp(
    cs: &ComponentSet,
    stim: &Stimulus,
    op: &OpAmpModel,
    config: OpAmpConfig,
) -> Result<Circuit> {
    let mut elements = vec![sine("V1", "in", stim)];
    match config {
        OpAmpConfig::Follower => {
            elements.push(opamp_instance("XU1", "in", "out", "out"));
        }
        OpAmpConfig::NonInverting => {
            elements.push(Element::new("R1", &["inn", "0"], ElementKind::Resistor(need(cs, "R1")?)));
            elements.push(Element::new("R2", &["out", "inn"], ElementKind::Resistor(need(cs, "R2")?)));
            elements.push(opamp_instance("XU1", "in", "inn", "out"));
        }
        OpAmpConfig::InvertingPair => {
            elements.push(Element::new("R1", &["in", "inn"], ElementKind::Resistor(need(cs, "R1")?)));
            elements.push(Element::new("R2", &["inn", "out"], ElementKind::Resistor(need(cs, "R2")?)));
            elements.push(opamp_instance("XU1", "0", "inn", "out"));
        }
        OpAmpConfig::InvertingTee => {
            elements.push(Element::new("R1", &["in", "inn"], ElementKind::Resistor(need(cs, "R1")?)));
            elements.push(Element::new("R2", &["inn", "x"], ElementKind::Resistor(need(cs, "R2")?)));
            elements.push(Element::new("R3", &["x", "0"], ElementKind::Resistor(need(cs, "R3")?)));
            elements.push(Element::new("R4", &["x", "out"], ElementKind::Resistor(need(cs, "R4")?)));
            elements.push(opamp_instance("XU1", "0", "inn", "out"));
        }
    }
    Ok(Circuit {
        title: cs.topology.title(),
        elements,
        directives: vec![opamp_subckt(op)],
    })
}

fn build_diff(cs: &ComponentSet, stim: &Stimulus, op: &OpAmpModel) -> Result<Circuit> {
    let elements = vec![
        sine("V1", "in1", stim),
        sine("V2", "in2", stim),
        Element::new("R1", &["in1", "inn"], ElementKind::Resistor(need(cs, "R1")?)),
        Element::new("R2", &["inn", "out"], ElementKind::Resistor(need(cs, "R2")?)),
        Element::new("R3", &["in2", "inp"], ElementKind::Resistor(need(cs, "R3")?)),
        Element::new("R4", &["inp", "0"], ElementKind::Resistor(need(cs, "R4")?)),
        opamp_instance("XU1", "inp", "inn", "out"),
    ];
    Ok(Circuit {
        title: cs.topology.title(),
        elements,
        directives: vec![opamp_subckt(op)],
    })
}

fn build_power(cs: &ComponentSet, stim: &Stimulus, p: &BjtParams) -> Result<Circuit> {
    let r_l = cs
        .load
        .ok_or_else(|| Error::Structure("power amplifier requires a load resistance".into()))?;
    let turns = cs
        .get("N")
        .map(|e| e.quantized)
        .ok_or_else(|| Error::Structure("component set is missing N".into()))?;

    // Ideal transformer as a controlled-source pair: the secondary voltage
    // follows the primary through the VCVS (v2 = v1/n); the primary draws
    // the reflected current through the VCCS (i1 = v2/(n*R_L) = i2/n for
    // the designed load), so the collector sees n^2 * R_L.
    let elements = vec![
        sine("V1", "in", stim),
        Element::new("VCC", &["vcc", "0"], ElementKind::Source(SourceKind::Dc(need(cs, "VCC")?))),
        Element::new("R1", &["vcc", "b"], ElementKind::Resistor(need(cs, "R1")?)),
        Element::new("R2", &["b", "0"], ElementKind::Resistor(need(cs, "R2")?)),
        Element::new("RE", &["e", "0"], ElementKind::Resistor(need(cs, "RE")?)),
        Element::new("RL", &["out", "0"], ElementKind::Resistor(r_l)),
        Element::new("CB", &["in", "b"], ElementKind::Capacitor(need(cs, "CB")?)),
        Element::new("Q1", &["c", "b", "e"], ElementKind::Bjt { model: model_name(p) }),
        Element::new("ET", &["out", "0", "vcc", "c"], ElementKind::Vcvs(1.0 / turns)),
        Element::new("GT", &["vcc", "c", "out", "0"], ElementKind::Vccs(1.0 / (turns * r_l))),
    ];
    Ok(Circuit {
        title: cs.topology.title(),
        elements,
        directives: vec![model_card(p)],
    })
}
