//! Netlist-to-small-signal conversion.
//!
//! DC sources collapse to shorts (their nodes merge), subcircuit instances
//! expand in place, and each BJT is replaced by its two-port h-parameter
//! equivalent: `h_ie` from base to emitter, a transconductance `h_fe/h_ie`
//! from the base-emitter voltage into the collector, and `h_oe` across
//! collector-emitter. The reverse term `h_re` is dropped here; it stays in
//! the design equations through the composite `h`, and its sub-percent
//! effect is covered by the verification tolerances.

use super::{Branch, SmallSignalCircuit, SourceBranch};
use crate::devices::BjtParams;
use crate::error::{Error, Result};
use crate::netlist::{Circuit, Element, ElementKind, SourceKind, GROUND};
use std::collections::HashMap;

pub fn small_signal_of(c: &Circuit, p: &BjtParams) -> Result<SmallSignalCircuit> {
    c.validate()?;
    let elements = expand_instances(c)?;

    // Union-find over node names; every DC source shorts its two ends.
    let mut merge = Merge::default();
    for e in &elements {
        if let ElementKind::Source(SourceKind::Dc(_)) = e.kind {
            merge.union(&e.nodes[0], &e.nodes[1]);
        }
    }

    // Deterministic node numbering over the merged representatives.
    let mut names: Vec<String> = Vec::new();
    for e in &elements {
        for n in &e.nodes {
            let rep = merge.find(n);
            if rep != GROUND && !names.contains(&rep) {
                names.push(rep);
            }
        }
    }
    names.sort();
    let index = |name: &str| -> usize {
        let rep = merge.find(name);
        if rep == GROUND {
            0
        } else {
            names.iter().position(|n| *n == rep).expect("interned") + 1
        }
    };

    let mut branches = Vec::new();
    let mut sources: Vec<SourceBranch> = Vec::new();
    let mut input_source = None;
    let mut input_node = None;

    for e in &elements {
        match &e.kind {
            ElementKind::Resistor(r) => {
                if *r <= 0.0 {
                    return Err(Error::Model(format!("{}: non-positive resistance", e.label)));
                }
                let (a, b) = (index(&e.nodes[0]), index(&e.nodes[1]));
                if a != b {
                    branches.push(Branch::Conductance { a, b, g: 1.0 / r });
                }
            }
            ElementKind::Capacitor(f) => {
                let (a, b) = (index(&e.nodes[0]), index(&e.nodes[1]));
                if a != b {
                    branches.push(Branch::Capacitance { a, b, c: *f });
                }
            }
            ElementKind::Source(kind) => match kind {
                SourceKind::Dc(_) => {} // shorted by the merge
                SourceKind::Sine { .. } | SourceKind::Ac(_) => {
                    let (sp, sn) = (index(&e.nodes[0]), index(&e.nodes[1]));
                    sources.push(SourceBranch { p: sp, n: sn });
                    if input_source.is_none() {
                        input_source = Some(sources.len() - 1);
                        input_node = Some(if sp != 0 { sp } else { sn });
                    }
                }
            },
            ElementKind::Bjt { .. } => {
                let (c_n, b_n, e_n) = (index(&e.nodes[0]), index(&e.nodes[1]), index(&e.nodes[2]));
                branches.push(Branch::Conductance { a: b_n, b: e_n, g: 1.0 / p.h_ie });
                branches.push(Branch::Vccs {
                    p: c_n,
                    n: e_n,
                    cp: b_n,
                    cn: e_n,
                    gm: p.h_fe_typ / p.h_ie,
                });
                if p.h_oe > 0.0 {
                    branches.push(Branch::Conductance { a: c_n, b: e_n, g: p.h_oe });
                }
            }
            ElementKind::Vcvs(mu) => {
                branches.push(Branch::Vcvs {
                    p: index(&e.nodes[0]),
                    n: index(&e.nodes[1]),
                    cp: index(&e.nodes[2]),
                    cn: index(&e.nodes[3]),
                    mu: *mu,
                });
            }
            ElementKind::Vccs(gm) => {
                branches.push(Branch::Vccs {
                    p: index(&e.nodes[0]),
                    n: index(&e.nodes[1]),
                    cp: index(&e.nodes[2]),
                    cn: index(&e.nodes[3]),
                    gm: *gm,
                });
            }
            ElementKind::Subckt { name } => {
                return Err(Error::Model(format!("{}: unexpanded subckt '{name}'", e.label)))
            }
        }
    }

    let input_source = input_source
        .ok_or_else(|| Error::Model("no signal source (SINE or AC) in the circuit".into()))?;
    let out_rep = merge.find("out");
    let output_node = if out_rep == GROUND {
        0
    } else {
        match names.iter().position(|n| *n == out_rep) {
            Some(pos) => pos + 1,
            None => return Err(Error::Model("output node 'out' not found".into())),
        }
    };

    Ok(SmallSignalCircuit {
        node_names: names,
        branches,
        sources,
        input_source,
        input_node: input_node.unwrap(),
        output_node,
    })
}

/// Replaces each X instance with its subckt body, mapping port names to the
/// instance nodes and prefixing internal nodes with the instance label.
fn expand_instances(c: &Circuit) -> Result<Vec<Element>> {
    let mut out = Vec::new();
    for e in &c.elements {
        let ElementKind::Subckt { name } = &e.kind else {
            out.push(e.clone());
            continue;
        };
        let (ports, body) = c
            .find_subckt(name)
            .ok_or_else(|| Error::Model(format!("{}: unknown subckt '{name}'", e.label)))?;
        let map: HashMap<&str, &str> = ports
            .iter()
            .map(|s| s.as_str())
            .zip(e.nodes.iter().map(|s| s.as_str()))
            .collect();
        for inner in body {
            let nodes = inner
                .nodes
                .iter()
                .map(|n| match map.get(n.as_str()) {
                    Some(mapped) => mapped.to_string(),
                    None if n == GROUND => GROUND.to_string(),
                    None => format!("{}.{n}", e.label),
                })
                .collect();
            out.push(Element {
                label: format!("{}.{}", e.label, inner.label),
                nodes,
                kind: inner.kind.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Merge {
    parent: HashMap<String, String>,
}

impl Merge {
    fn find(&self, node: &str) -> String {
        let mut cur = node.to_string();
        while let Some(p) = self.parent.get(&cur) {
            cur = p.clone();
        }
        cur
    }

    fn union(&mut self, a: &str, b: &str) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        // ground wins; otherwise the lexicographically smaller name
        let (root, child) = if ra == GROUND {
            (ra, rb)
        } else if rb == GROUND {
            (rb, ra)
        } else if ra < rb {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent.insert(child, root);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{design_opamp, design_single_stage, GainTarget, OpAmpSpec, SeriesConfig, SingleStageSpec};
    use crate::devices::OpAmpModel;
    use crate::netlist::{build_circuit, Stimulus};

    fn default_single() -> Circuit {
        let p = BjtParams::default_2n2222();
        let mut spec = SingleStageSpec::new(GainTarget::exact(20.0));
        spec.v0_peak = Some(0.2);
        let cs = design_single_stage(&spec, p, &SeriesConfig::default()).unwrap();
        build_circuit(&cs, &Stimulus::for_design(&cs), p, &OpAmpModel::default()).unwrap()
    }

    #[test]
    fn bjt_becomes_its_h_model() {
        let p = BjtParams::default_2n2222();
        let ssc = small_signal_of(&default_single(), p).unwrap();
        let gms: Vec<f64> = ssc
            .branches
            .iter()
            .filter_map(|b| match b {
                Branch::Vccs { gm, .. } => Some(*gm),
                _ => None,
            })
            .collect();
        assert_eq!(gms.len(), 1);
        assert!((gms[0] - 100.0 / 1100.0).abs() < 1e-15);
        // vcc merged into ground: only in, b, c, e, out remain
        assert_eq!(ssc.node_count(), 5);
    }

    #[test]
    fn passive_circuits_pass_through_unchanged() {
        let c = crate::netlist::parse("* rc\nV1 in 0 AC 1\nR1 in out 1k\nC1 out 0 1u\n.end\n").unwrap();
        let p = BjtParams::default_2n2222();
        let ssc = small_signal_of(&c, p).unwrap();
        assert_eq!(ssc.branches.len(), 2);
        let r = ssc.solve_ac(159.15494309189535).unwrap();
        assert!((r.magnitude - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn follower_closes_to_unity() {
        let p = BjtParams::default_2n2222();
        let cs = design_opamp(&OpAmpSpec::new(GainTarget::exact(1.0)), &SeriesConfig::default())
            .unwrap();
        let c = build_circuit(&cs, &Stimulus::for_design(&cs), p, &OpAmpModel::default()).unwrap();
        let ssc = small_signal_of(&c, p).unwrap();
        let r = ssc.solve_ac(1000.0).unwrap();
        // closed loop 1/(1 + 1/A) with A = 1e7
        assert!((r.magnitude - 1.0).abs() < 1e-6, "{}", r.magnitude);
    }

    #[test]
    fn missing_output_node_is_a_model_error() {
        let c = crate::netlist::parse("* t\nV1 in 0 AC 1\nR1 in mid 1k\nR2 mid 0 1k\n.end\n").unwrap();
        let p = BjtParams::default_2n2222();
        let err = small_signal_of(&c, p).unwrap_err();
        assert!(err.to_string().contains("out"), "{err}");
    }

    #[test]
    fn no_signal_source_is_a_model_error() {
        let c = crate::netlist::parse("* t\nVCC vcc 0 12\nR1 vcc out 1k\nR2 out 0 1k\n.end\n").unwrap();
        let p = BjtParams::default_2n2222();
        let err = small_signal_of(&c, p).unwrap_err();
        assert!(err.to_string().contains("signal source"), "{err}");
    }
}
