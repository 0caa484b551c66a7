//! Closed-form design engines for the five amplifier topologies.
//!
//! Each engine turns a specification plus device parameters into a
//! [`ComponentSet`]: every component with its exact (raw) value, its
//! standard-value quantization, and the bias record of the stage. Raw values
//! satisfy the topology's defining equations exactly; quantization is the
//! only approximation introduced here.

mod diffamp;
mod divider;
mod opamp;
mod power;
mod single_stage;
mod two_stage;

pub use diffamp::design_diff_amp;
pub use divider::solve_bias_divider;
pub use opamp::design_opamp;
pub use power::design_power_amp;
pub use single_stage::design_single_stage;
pub use two_stage::design_two_stage;

use crate::error::{Error, Result};
use crate::values::{parse_magnitude, quantize, Direction, EngValue, Series, Unit};

/// How strictly a gain figure must be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qualifier {
    AtLeast,
    AtMost,
    Exact,
}

/// A requested voltage gain. The sign selects the op-amp configuration;
/// BJT specs require a positive value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainTarget {
    pub value: f64,
    pub qualifier: Qualifier,
}

impl GainTarget {
    pub fn exact(value: f64) -> Self {
        Self { value, qualifier: Qualifier::Exact }
    }
    pub fn at_least(value: f64) -> Self {
        Self { value, qualifier: Qualifier::AtLeast }
    }
    pub fn at_most(value: f64) -> Self {
        Self { value, qualifier: Qualifier::AtMost }
    }

    /// Standard-value rule for the gain-setting resistor: a gain floor snaps
    /// it up, a gain ceiling snaps it down, an exact figure snaps nearest.
    pub fn direction(&self) -> Direction {
        match self.qualifier {
            Qualifier::AtLeast => Direction::Higher,
            Qualifier::AtMost => Direction::Lower,
            Qualifier::Exact => Direction::Nearest,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.value.is_finite() || self.value == 0.0 {
            return Err(Error::Domain(format!("gain must be finite and nonzero, got {}", self.value)));
        }
        Ok(())
    }

    fn validate_positive(&self) -> Result<()> {
        self.validate()?;
        if self.value < 0.0 {
            return Err(Error::Domain("BJT stage gain must be positive".into()));
        }
        Ok(())
    }
}

/// Series choices used when snapping components to standard values.
#[derive(Debug, Clone, Copy)]
pub struct SeriesConfig {
    pub resistors: Series,
    pub capacitors: Series,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { resistors: Series::E24, capacitors: Series::E6 }
    }
}

/// Single-stage common-emitter specification.
#[derive(Debug, Clone)]
pub struct SingleStageSpec {
    pub gain: GainTarget,
    /// Peak output swing, volts.
    pub v0_peak: Option<f64>,
    pub v_cc: Option<f64>,
    pub r_l: Option<f64>,
    /// Source resistance; zero when the source is ideal.
    pub r_s: f64,
    /// Lower cutoff frequency, hertz.
    pub f_l: f64,
    /// Bias stability factor target.
    pub stability: f64,
}

impl SingleStageSpec {
    pub fn new(gain: GainTarget) -> Self {
        Self { gain, v0_peak: None, v_cc: None, r_l: None, r_s: 0.0, f_l: 20.0, stability: 8.0 }
    }

    fn validate(&self) -> Result<()> {
        self.gain.validate_positive()?;
        check_positive("v0_peak", self.v0_peak)?;
        check_positive("v_cc", self.v_cc)?;
        check_positive("r_l", self.r_l)?;
        if !self.r_s.is_finite() || self.r_s < 0.0 {
            return Err(Error::Domain(format!("r_s must be >= 0, got {}", self.r_s)));
        }
        if !self.f_l.is_finite() || self.f_l <= 0.0 {
            return Err(Error::Domain(format!("f_l must be positive, got {}", self.f_l)));
        }
        if !self.stability.is_finite() || self.stability <= 0.0 {
            return Err(Error::Domain(format!("stability must be positive, got {}", self.stability)));
        }
        Ok(())
    }
}

/// Two-stage cascade specification. Shares the single-stage fields; the
/// `v_re2_fraction` knob sets the second stage's emitter drop as a fraction
/// of a given supply (the classic rule allows 10-20 %).
#[derive(Debug, Clone)]
pub struct TwoStageSpec {
    pub gain: GainTarget,
    pub v0_peak: Option<f64>,
    pub v_cc: Option<f64>,
    pub r_l: Option<f64>,
    pub r_s: f64,
    pub f_l: f64,
    pub stability: f64,
    pub v_re2_fraction: f64,
}

impl TwoStageSpec {
    pub fn new(gain: GainTarget) -> Self {
        Self {
            gain,
            v0_peak: None,
            v_cc: None,
            r_l: None,
            r_s: 0.0,
            f_l: 20.0,
            stability: 8.0,
            v_re2_fraction: 0.10,
        }
    }

    fn validate(&self) -> Result<()> {
        self.gain.validate_positive()?;
        if self.gain.value <= 1.0 {
            return Err(Error::Domain("two-stage gain must exceed 1".into()));
        }
        check_positive("v0_peak", self.v0_peak)?;
        check_positive("v_cc", self.v_cc)?;
        check_positive("r_l", self.r_l)?;
        if !self.r_s.is_finite() || self.r_s < 0.0 {
            return Err(Error::Domain(format!("r_s must be >= 0, got {}", self.r_s)));
        }
        if !self.f_l.is_finite() || self.f_l <= 0.0 {
            return Err(Error::Domain(format!("f_l must be positive, got {}", self.f_l)));
        }
        if !self.stability.is_finite() || self.stability <= 0.0 {
            return Err(Error::Domain(format!("stability must be positive, got {}", self.stability)));
        }
        if !(0.0..=0.5).contains(&self.v_re2_fraction) {
            return Err(Error::Domain(format!(
                "v_re2_fraction must lie in [0, 0.5], got {}",
                self.v_re2_fraction
            )));
        }
        Ok(())
    }
}

/// Op-amp amplifier specification. Positive gain selects the non-inverting
/// configuration, negative the inverting one; `r_base` is the largest
/// resistance the designer is willing to use.
#[derive(Debug, Clone)]
pub struct OpAmpSpec {
    pub gain: GainTarget,
    pub r_base: f64,
}

impl OpAmpSpec {
    pub fn new(gain: GainTarget) -> Self {
        Self { gain, r_base: 10e3 }
    }

    fn validate(&self) -> Result<()> {
        self.gain.validate()?;
        if !self.r_base.is_finite() || self.r_base <= 0.0 {
            return Err(Error::Domain(format!("r_base must be positive, got {}", self.r_base)));
        }
        Ok(())
    }
}

/// Difference amplifier specification: differential gain and base resistance.
#[derive(Debug, Clone)]
pub struct DiffAmpSpec {
    pub a_d: f64,
    pub r_base: f64,
}

impl DiffAmpSpec {
    pub fn new(a_d: f64) -> Self {
        Self { a_d, r_base: 10e3 }
    }

    fn validate(&self) -> Result<()> {
        if !self.a_d.is_finite() || self.a_d <= 0.0 {
            return Err(Error::Domain(format!("a_d must be positive, got {}", self.a_d)));
        }
        if !self.r_base.is_finite() || self.r_base <= 0.0 {
            return Err(Error::Domain(format!("r_base must be positive, got {}", self.r_base)));
        }
        Ok(())
    }
}

/// Class-A power stage specification.
#[derive(Debug, Clone)]
pub struct PowerAmpSpec {
    /// Power delivered to the load, watts.
    pub p_load: f64,
    pub v_cc: f64,
    pub r_l: f64,
    pub f_l: f64,
    pub stability: f64,
}

impl PowerAmpSpec {
    pub fn new(p_load: f64, v_cc: f64, r_l: f64) -> Self {
        Self { p_load, v_cc, r_l, f_l: 50.0, stability: 10.0 }
    }

    fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("p_load", self.p_load),
            ("v_cc", self.v_cc),
            ("r_l", self.r_l),
            ("f_l", self.f_l),
            ("stability", self.stability),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!("{key} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

fn check_positive(key: &str, v: Option<f64>) -> Result<()> {
    if let Some(x) = v {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!("{key} must be positive, got {x}")));
        }
    }
    Ok(())
}

/// Which of the five circuits a ComponentSet realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    SingleStage,
    TwoStage,
    OpAmp(OpAmpConfig),
    DiffAmp,
    PowerAmp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpAmpConfig {
    Follower,
    NonInverting,
    /// Plain inverting pair, used for moderate inverting gains.
    InvertingPair,
    /// Inverting stage with a tee feedback arm for large gains.
    InvertingTee,
}

impl Topology {
    pub fn name(&self) -> &'static str {
        match self {
            Topology::SingleStage => "single-stage",
            Topology::TwoStage => "two-stage",
            Topology::OpAmp(_) => "opamp",
            Topology::DiffAmp => "diff",
            Topology::PowerAmp => "power",
        }
    }

    pub fn title(&self) -> String {
        match self {
            Topology::SingleStage => "single-stage common-emitter amplifier".into(),
            Topology::TwoStage => "two-stage common-emitter amplifier".into(),
            Topology::OpAmp(OpAmpConfig::Follower) => "op-amp voltage follower".into(),
            Topology::OpAmp(OpAmpConfig::NonInverting) => "non-inverting op-amp amplifier".into(),
            Topology::OpAmp(OpAmpConfig::InvertingPair) => "inverting op-amp amplifier".into(),
            Topology::OpAmp(OpAmpConfig::InvertingTee) => {
                "inverting op-amp amplifier (tee feedback)".into()
            }
            Topology::DiffAmp => "op-amp difference amplifier".into(),
            Topology::PowerAmp => "class-A power amplifier".into(),
        }
    }
}

/// One designed component: raw value, standard value, and the snap rule used
/// (`None` when the value is kept exact, e.g. a transformer turns ratio).
#[derive(Debug, Clone)]
pub struct Entry {
    pub label: &'static str,
    pub unit: Unit,
    pub raw: f64,
    pub quantized: f64,
    pub direction: Option<Direction>,
    /// False for values that are computed and reported but not placed in the
    /// netlist.
    pub placed: bool,
}

impl Entry {
    pub fn raw_value(&self) -> EngValue {
        EngValue::new(self.raw, self.unit)
    }
    pub fn quantized_value(&self) -> EngValue {
        EngValue::new(self.quantized, self.unit)
    }
}

/// Quiescent-point record for one BJT stage.
#[derive(Debug, Clone)]
pub struct BiasRecord {
    /// Collector-emitter voltage at the final supply, volts.
    pub v_ceq: f64,
    pub i_cq: f64,
    pub v_re: f64,
    /// The supply actually used (standard rail when derived).
    pub v_cc: f64,
    /// Thevenin resistance of the bias divider (raw).
    pub r_b: f64,
    /// Stability factor recomputed from the quantized divider and emitter
    /// resistor.
    pub stability_achieved: f64,
    pub power: Option<PowerFigures>,
}

/// Extra figures carried by the class-A power design.
#[derive(Debug, Clone, Copy)]
pub struct PowerFigures {
    pub v_ce_peak: f64,
    pub i_c_peak: f64,
    /// Load reflected to the collector through the transformer.
    pub r_l_prime: f64,
    /// Dissipation in the emitter resistor.
    pub p_re: f64,
    pub turns_ratio: f64,
}

/// The output of a design engine.
#[derive(Debug, Clone)]
pub struct ComponentSet {
    pub topology: Topology,
    pub entries: Vec<Entry>,
    /// Bias of the (output) stage; absent for op-amp topologies.
    pub bias: Option<BiasRecord>,
    /// Bias of the input stage in a two-stage design.
    pub bias_input_stage: Option<BiasRecord>,
    /// User load resistance, when part of the spec.
    pub load: Option<f64>,
    pub source_res: f64,
    /// Signed target gain, when the topology has one.
    pub target_gain: Option<f64>,
    /// Target load power for the power stage.
    pub target_power: Option<f64>,
    pub v0_peak: Option<f64>,
    pub warnings: Vec<String>,
}

impl ComponentSet {
    pub fn get(&self, label: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.label == label)
    }

    /// Quantized value of a component that must exist.
    pub fn quantized(&self, label: &str) -> Result<f64> {
        self.get(label)
            .map(|e| e.quantized)
            .ok_or_else(|| Error::Structure(format!("component set is missing {label}")))
    }

    pub fn raw(&self, label: &str) -> Result<f64> {
        self.get(label)
            .map(|e| e.raw)
            .ok_or_else(|| Error::Structure(format!("component set is missing {label}")))
    }
}

pub(crate) fn quantize_entry(
    label: &'static str,
    unit: Unit,
    raw: f64,
    dir: Direction,
    series: Series,
) -> Result<Entry> {
    let q = quantize(EngValue::new(raw, unit), dir, series)?;
    Ok(Entry { label, unit, raw, quantized: q.magnitude, direction: Some(dir), placed: true })
}

pub(crate) fn exact_entry(label: &'static str, unit: Unit, value: f64) -> Entry {
    Entry { label, unit, raw: value, quantized: value, direction: None, placed: true }
}

/// Parallel resistance; ignores an absent branch.
pub fn parallel(a: f64, b: Option<f64>) -> f64 {
    match b {
        Some(b) => a * b / (a + b),
        None => a,
    }
}

/// Analytic midband gain formulas, evaluated on whichever value set (raw or
/// quantized) the caller passes in. These are the same closed forms the
/// design engines invert.
pub mod gain_formula {
    use super::parallel;
    use crate::devices::BjtParams;

    /// Single CE stage with bypassed emitter: `h_fe*R_L' / (h_ie + h*R_C)`.
    pub fn single_stage(r_c: f64, r_l: Option<f64>, p: &BjtParams) -> f64 {
        let r_lp = parallel(r_c, r_l);
        p.h_fe_typ * r_lp / (p.h_ie + p.h_composite() * r_c)
    }

    /// Output stage of the cascade: `h_fe*R_L2' / h_ie`.
    pub fn cascade_output_stage(r_c2: f64, r_l: Option<f64>, p: &BjtParams) -> f64 {
        p.h_fe_typ * parallel(r_c2, r_l) / p.h_ie
    }

    /// Input stage of the cascade, loaded by the next stage's divider and
    /// input impedance.
    pub fn cascade_input_stage(r_c1: f64, r_b2: f64, p: &BjtParams) -> f64 {
        let r_lp = 1.0 / (1.0 / r_c1 + 1.0 / r_b2 + 1.0 / p.h_ie);
        p.h_fe_typ * r_lp / p.h_ie
    }

    pub fn non_inverting(r1: f64, r2: f64) -> f64 {
        1.0 + r2 / r1
    }

    pub fn inverting_pair(r1: f64, r2: f64) -> f64 {
        -(r2 / r1)
    }

    /// Inverting stage with tee feedback: `-(R2/R1)(1 + R4/R2 + R4/R3)`.
    pub fn inverting_tee(r1: f64, r2: f64, r3: f64, r4: f64) -> f64 {
        -(r2 / r1) * (1.0 + r4 / r2 + r4 / r3)
    }

    pub fn difference(r1: f64, r2: f64) -> f64 {
        r2 / r1
    }
}

/// Convenience used by the CLI: parse a magnitude flag that may carry SPICE
/// suffixes.
pub fn parse_flag_magnitude(text: &str) -> Result<f64> {
    parse_magnitude(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualifier_maps_to_direction() {
        assert_eq!(GainTarget::at_least(5.0).direction(), Direction::Higher);
        assert_eq!(GainTarget::at_most(5.0).direction(), Direction::Lower);
        assert_eq!(GainTarget::exact(5.0).direction(), Direction::Nearest);
    }

    #[test]
    fn spec_validation_catches_nonsense() {
        assert!(SingleStageSpec::new(GainTarget::exact(0.0)).validate().is_err());
        assert!(SingleStageSpec::new(GainTarget::exact(-3.0)).validate().is_err());
        let mut s = SingleStageSpec::new(GainTarget::exact(20.0));
        s.r_l = Some(-5.0);
        assert!(s.validate().is_err());
        let mut s = SingleStageSpec::new(GainTarget::exact(20.0));
        s.f_l = 0.0;
        assert!(s.validate().is_err());
        assert!(TwoStageSpec::new(GainTarget::exact(0.5)).validate().is_err());
        assert!(DiffAmpSpec::new(-1.0).validate().is_err());
        assert!(PowerAmpSpec::new(0.0, 12.0, 8.0).validate().is_err());
    }

    #[test]
    fn parallel_helper() {
        assert_eq!(parallel(100.0, None), 100.0);
        assert!((parallel(100.0, Some(100.0)) - 50.0).abs() < 1e-12);
    }
}
