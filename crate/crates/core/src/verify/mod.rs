//! Internal verification engine.
//!
//! Converts a circuit to its small-signal equivalent (h-parameter BJT model,
//! DC supplies shorted, op-amp subcircuits expanded to their controlled
//! sources), solves the complex nodal system across frequency, checks the
//! DC bias with a simplified divider model, and rolls everything into a
//! pass/fail report against the design targets.

mod check;
mod dc;
mod mna;
mod small_signal;

pub use check::{check_design, default_gain_tolerance, Check, VerificationReport, MIDBAND_HZ};
pub use dc::{solve_dc, solve_dc_stage, DcOperatingPoint};
pub use small_signal::small_signal_of;

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::Write;

/// One point of a frequency response.
#[derive(Debug, Clone, Copy)]
pub struct AcResult {
    pub frequency: f64,
    pub gain: Complex64,
    pub magnitude: f64,
    pub phase_deg: f64,
}

impl AcResult {
    pub fn new(frequency: f64, gain: Complex64) -> Self {
        Self { frequency, gain, magnitude: gain.norm(), phase_deg: gain.arg().to_degrees() }
    }
}

/// Linear branch kinds of the small-signal equivalent circuit. Node index 0
/// is ground.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Branch {
    Conductance { a: usize, b: usize, g: f64 },
    Capacitance { a: usize, b: usize, c: f64 },
    Vccs { p: usize, n: usize, cp: usize, cn: usize, gm: f64 },
    Vcvs { p: usize, n: usize, cp: usize, cn: usize, mu: f64 },
    /// Fixed current injected into `p` and drawn from `n`.
    CurrentSource { p: usize, n: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct SourceBranch {
    pub p: usize,
    pub n: usize,
}

/// A circuit reduced to linear small-signal branches, ready for AC solves.
#[derive(Debug, Clone)]
pub struct SmallSignalCircuit {
    pub(crate) node_names: Vec<String>,
    pub(crate) branches: Vec<Branch>,
    pub(crate) sources: Vec<SourceBranch>,
    /// Index into `sources` of the branch driven by `solve_ac`.
    pub input_source: usize,
    /// MNA node indices (0 = ground).
    pub input_node: usize,
    pub output_node: usize,
}

impl SmallSignalCircuit {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        if name == crate::netlist::GROUND {
            return Some(0);
        }
        self.node_names.iter().position(|n| n == name).map(|i| i + 1)
    }
}

/// Programmatic construction of small-signal circuits (used directly by the
/// solver tests and oracles; netlist-level circuits go through
/// [`small_signal_of`]).
#[derive(Debug, Clone, Default)]
pub struct SsBuilder {
    names: Vec<String>,
    branches: Vec<Branch>,
    sources: Vec<SourceBranch>,
}

impl SsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a node name and returns its index; "0" is ground.
    pub fn node(&mut self, name: &str) -> usize {
        if name == "0" {
            return 0;
        }
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return i + 1;
        }
        self.names.push(name.to_string());
        self.names.len()
    }

    pub fn resistor(&mut self, a: usize, b: usize, ohms: f64) {
        self.branches.push(Branch::Conductance { a, b, g: 1.0 / ohms });
    }

    pub fn conductance(&mut self, a: usize, b: usize, g: f64) {
        self.branches.push(Branch::Conductance { a, b, g });
    }

    pub fn capacitor(&mut self, a: usize, b: usize, farads: f64) {
        self.branches.push(Branch::Capacitance { a, b, c: farads });
    }

    pub fn vccs(&mut self, p: usize, n: usize, cp: usize, cn: usize, gm: f64) {
        self.branches.push(Branch::Vccs { p, n, cp, cn, gm });
    }

    pub fn vcvs(&mut self, p: usize, n: usize, cp: usize, cn: usize, mu: f64) {
        self.branches.push(Branch::Vcvs { p, n, cp, cn, mu });
    }

    pub fn current_source(&mut self, p: usize, n: usize, value: f64) {
        self.branches.push(Branch::CurrentSource { p, n, value });
    }

    /// Adds an independent voltage source and returns its drive index.
    pub fn vsource(&mut self, p: usize, n: usize) -> usize {
        self.sources.push(SourceBranch { p, n });
        self.sources.len() - 1
    }

    pub fn build(
        self,
        input_source: usize,
        input_node: usize,
        output_node: usize,
    ) -> Result<SmallSignalCircuit> {
        if input_source >= self.sources.len() && !self.sources.is_empty() {
            return Err(Error::Model(format!("input source index {input_source} out of range")));
        }
        Ok(SmallSignalCircuit {
            node_names: self.names,
            branches: self.branches,
            sources: self.sources,
            input_source,
            input_node,
            output_node,
        })
    }
}

/// CSV export of a sweep: `frequency_hz,magnitude,phase_deg`, full precision.
pub fn write_sweep_csv<W: Write>(results: &[AcResult], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "frequency_hz,magnitude,phase_deg")?;
    for r in results {
        writeln!(w, "{},{},{}", r.frequency, r.magnitude, r.phase_deg)?;
    }
    Ok(())
}
