//! Circuit graph model, netlist emission, and a parser for the emitted
//! dialect.
//!
//! The dialect is a compact SPICE subset:
//!
//! ```text
//! * <title>
//! R<name> n+ n- <value>
//! C<name> n+ n- <value>
//! V<name> n+ n- <dc> | SINE(<off> <amp> <freq>) | AC <mag>
//! Q<name> c b e <model>
//! X<name> <node...> <subckt>
//! E<name> out+ out- in+ in- <gain>        (VCVS)
//! G<name> out+ out- in+ in- <gm>          (VCCS)
//! .model <name> NPN(BF=<beta>)
//! .subckt <name> <port...> ... .ends
//! .tran <stop>
//! .ac dec <points-per-decade> <fstart> <fstop>
//! .end
//! ```
//!
//! Values are written with [`format_magnitude`](crate::values::format_magnitude)
//! and read back with [`parse_magnitude`](crate::values::parse_magnitude).
//! The parser tolerates a superset: `*` comment lines anywhere, `+`
//! continuation lines, case-insensitive keywords, and arbitrary whitespace.

mod build;
mod emit;
mod parse;

pub use build::{build_circuit, Stimulus};
pub use emit::emit;
pub use parse::parse;

use crate::error::{Error, Result};
use std::collections::HashMap;

pub const GROUND: &str = "0";

/// Independent voltage source behavior.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Dc(f64),
    Sine { offset: f64, amplitude: f64, freq: f64 },
    Ac(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor(f64),
    Capacitor(f64),
    Source(SourceKind),
    /// Three-terminal BJT referencing a `.model` card.
    Bjt { model: String },
    /// Subcircuit instance referencing a `.subckt` definition.
    Subckt { name: String },
    /// Voltage-controlled voltage source.
    Vcvs(f64),
    /// Voltage-controlled current source.
    Vccs(f64),
}

impl ElementKind {
    /// First letter of the element card.
    pub fn letter(&self) -> char {
        match self {
            ElementKind::Resistor(_) => 'R',
            ElementKind::Capacitor(_) => 'C',
            ElementKind::Source(_) => 'V',
            ElementKind::Bjt { .. } => 'Q',
            ElementKind::Subckt { .. } => 'X',
            ElementKind::Vcvs(_) => 'E',
            ElementKind::Vccs(_) => 'G',
        }
    }

    /// Expected terminal count; `None` for subcircuit instances, whose
    /// arity comes from the definition.
    pub fn arity(&self) -> Option<usize> {
        match self {
            ElementKind::Resistor(_) | ElementKind::Capacitor(_) | ElementKind::Source(_) => Some(2),
            ElementKind::Bjt { .. } => Some(3),
            ElementKind::Vcvs(_) | ElementKind::Vccs(_) => Some(4),
            ElementKind::Subckt { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub label: String,
    pub nodes: Vec<String>,
    pub kind: ElementKind,
}

impl Element {
    pub fn new(label: impl Into<String>, nodes: &[&str], kind: ElementKind) -> Self {
        Self {
            label: label.into(),
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Dec,
    Oct,
    Lin,
}

impl SweepKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            SweepKind::Dec => "dec",
            SweepKind::Oct => "oct",
            SweepKind::Lin => "lin",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Model { name: String, kind: String, params: Vec<(String, f64)> },
    Subckt { name: String, ports: Vec<String>, body: Vec<Element> },
    Tran { stop: f64 },
    Ac { sweep: SweepKind, points: u32, f_start: f64, f_stop: f64 },
    End,
}

/// A netlist-level circuit: title, elements, directives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub title: String,
    pub elements: Vec<Element>,
    pub directives: Vec<Directive>,
}

impl Circuit {
    /// Structural invariants: terminal arity per kind, ground present,
    /// labels unique per type letter, exactly one `.end` in final position,
    /// subcircuit references resolvable with matching port counts.
    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::Structure("circuit has no elements".into()));
        }

        let subckts: HashMap<String, usize> = self
            .directives
            .iter()
            .filter_map(|d| match d {
                Directive::Subckt { name, ports, .. } => Some((name.to_lowercase(), ports.len())),
                _ => None,
            })
            .collect();

        let mut seen = Vec::new();
        let mut touches_ground = false;
        for e in &self.elements {
            let expected = match &e.kind {
                ElementKind::Subckt { name } => Some(
                    *subckts
                        .get(&name.to_lowercase())
                        .ok_or_else(|| Error::Structure(format!("{}: unknown subckt '{name}'", e.label)))?,
                ),
                other => other.arity(),
            };
            if let Some(n) = expected {
                if e.nodes.len() != n {
                    return Err(Error::Structure(format!(
                        "{}: expected {n} terminals, found {}",
                        e.label,
                        e.nodes.len()
                    )));
                }
            }
            if e.nodes.iter().any(|n| n == GROUND) {
                touches_ground = true;
            }
            let key = e.label.to_uppercase();
            if seen.contains(&key) {
                return Err(Error::Structure(format!("duplicate element label {}", e.label)));
            }
            seen.push(key);
        }
        if !touches_ground {
            return Err(Error::Structure("no element is connected to ground '0'".into()));
        }

        match self.directives.last() {
            Some(Directive::End) => {}
            _ => return Err(Error::Structure(".end must be the final directive".into())),
        }
        if self.directives.iter().filter(|d| matches!(d, Directive::End)).count() != 1 {
            return Err(Error::Structure("exactly one .end allowed".into()));
        }

        for d in &self.directives {
            if let Directive::Subckt { body, name, .. } = d {
                for e in body {
                    if matches!(e.kind, ElementKind::Subckt { .. }) {
                        return Err(Error::Structure(format!(
                            "subckt '{name}' nests another subckt instance; one level is supported"
                        )));
                    }
                    if let Some(n) = e.kind.arity() {
                        if e.nodes.len() != n {
                            return Err(Error::Structure(format!(
                                "{} in subckt '{name}': expected {n} terminals",
                                e.label
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn find_subckt(&self, name: &str) -> Option<(&[String], &[Element])> {
        self.directives.iter().find_map(|d| match d {
            Directive::Subckt { name: n, ports, body } if n.eq_ignore_ascii_case(name) => {
                Some((ports.as_slice(), body.as_slice()))
            }
            _ => None,
        })
    }

    pub fn find_model(&self, name: &str) -> Option<&[(String, f64)]> {
        self.directives.iter().find_map(|d| match d {
            Directive::Model { name: n, params, .. } if n.eq_ignore_ascii_case(name) => {
                Some(params.as_slice())
            }
            _ => None,
        })
    }

    /// Number of element connections per node.
    pub fn node_degrees(&self) -> HashMap<String, usize> {
        let mut deg: HashMap<String, usize> = HashMap::new();
        for e in &self.elements {
            for n in &e.nodes {
                *deg.entry(n.clone()).or_default() += 1;
            }
        }
        deg
    }
}
