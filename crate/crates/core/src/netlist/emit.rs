//! Netlist text emission.
//!
//! Deterministic by construction: elements are written in class order
//! (sources, resistors, capacitors, actives) with a stable sort, values in
//! canonical magnitude form, `\n` line endings. Emitting the parse of an
//! emitted netlist reproduces it byte for byte.

use super::{Circuit, Directive, Element, ElementKind, SourceKind};
use crate::values::format_magnitude;
use std::fmt::Write;

fn class_rank(e: &Element) -> u8 {
    match e.kind {
        ElementKind::Source(_) => 0,
        ElementKind::Resistor(_) => 1,
        ElementKind::Capacitor(_) => 2,
        _ => 3,
    }
}

pub fn emit(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "* {}", c.title).unwrap();

    let mut elements: Vec<&Element> = c.elements.iter().collect();
    elements.sort_by_key(|e| class_rank(e));
    for e in elements {
        out.push_str(&element_card(e));
        out.push('\n');
    }

    for d in &c.directives {
        match d {
            Directive::Model { name, kind, params } => {
                let body = params
                    .iter()
                    .map(|(k, v)| format!("{k}={}", format_magnitude(*v)))
                    .collect::<Vec<_>>()
                    .join(" ");
                writeln!(out, ".model {name} {kind}({body})").unwrap();
            }
            Directive::Subckt { name, ports, body } => {
                writeln!(out, ".subckt {name} {}", ports.join(" ")).unwrap();
                for e in body {
                    out.push_str(&element_card(e));
                    out.push('\n');
                }
                writeln!(out, ".ends").unwrap();
            }
            Directive::Tran { stop } => writeln!(out, ".tran {}", format_magnitude(*stop)).unwrap(),
            Directive::Ac { sweep, points, f_start, f_stop } => writeln!(
                out,
                ".ac {} {points} {} {}",
                sweep.keyword(),
                format_magnitude(*f_start),
                format_magnitude(*f_stop)
            )
            .unwrap(),
            Directive::End => writeln!(out, ".end").unwrap(),
        }
    }
    out
}

fn element_card(e: &Element) -> String {
    let nodes = e.nodes.join(" ");
    match &e.kind {
        ElementKind::Resistor(v) | ElementKind::Capacitor(v) => {
            format!("{} {nodes} {}", e.label, format_magnitude(*v))
        }
        ElementKind::Source(SourceKind::Dc(v)) => {
            format!("{} {nodes} {}", e.label, format_magnitude(*v))
        }
        ElementKind::Source(SourceKind::Sine { offset, amplitude, freq }) => format!(
            "{} {nodes} SINE({} {} {})",
            e.label,
            format_magnitude(*offset),
            format_magnitude(*amplitude),
            format_magnitude(*freq)
        ),
        ElementKind::Source(SourceKind::Ac(mag)) => {
            format!("{} {nodes} AC {}", e.label, format_magnitude(*mag))
        }
        ElementKind::Bjt { model } => format!("{} {nodes} {model}", e.label),
        ElementKind::Subckt { name } => format!("{} {nodes} {name}", e.label),
        ElementKind::Vcvs(g) | ElementKind::Vccs(g) => {
            format!("{} {nodes} {}", e.label, format_magnitude(*g))
        }
    }
}
