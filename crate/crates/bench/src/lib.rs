//! Shared fixtures for the criterion benchmarks.

use ampsyn_core::design::{design_single_stage, ComponentSet, GainTarget, SeriesConfig, SingleStageSpec};
use ampsyn_core::devices::{BjtParams, OpAmpModel};
use ampsyn_core::netlist::{build_circuit, Circuit, Stimulus};

/// The reference single-stage design used across the benchmarks.
pub fn reference_design() -> ComponentSet {
    let mut spec = SingleStageSpec::new(GainTarget::exact(20.0));
    spec.v0_peak = Some(0.2);
    design_single_stage(&spec, BjtParams::default_2n2222(), &SeriesConfig::default()).unwrap()
}

pub fn reference_circuit() -> Circuit {
    let cs = reference_design();
    build_circuit(
        &cs,
        &Stimulus::for_design(&cs),
        BjtParams::default_2n2222(),
        &OpAmpModel::default(),
    )
    .unwrap()
}
