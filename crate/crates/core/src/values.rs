//! Engineering-value arithmetic.
//!
//! Covers standard-value quantization against the E-series tables, supply
//! rail rounding, and SPICE magnitude text (`10k`, `4.7u`, `1Meg`, ...).
//! The series tables live in `data/e_series.txt` and are parsed once on
//! first use.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

const E_SERIES_DATA: &str = include_str!("../data/e_series.txt");

/// Standard supply rails, ascending.
pub const SUPPLY_RAILS: [f64; 4] = [9.0, 12.0, 15.0, 18.0];

/// Physical unit carried by an [`EngValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Ohm,
    Farad,
    Volt,
    Ampere,
    Hertz,
    Watt,
    Dimensionless,
}

impl Unit {
    pub fn symbol(&self) -> &'static str {
        match self {
            Unit::Ohm => "ohm",
            Unit::Farad => "F",
            Unit::Volt => "V",
            Unit::Ampere => "A",
            Unit::Hertz => "Hz",
            Unit::Watt => "W",
            Unit::Dimensionless => "",
        }
    }
}

/// A magnitude with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngValue {
    pub magnitude: f64,
    pub unit: Unit,
}

impl EngValue {
    pub fn new(magnitude: f64, unit: Unit) -> Self {
        Self { magnitude, unit }
    }
    pub fn ohms(magnitude: f64) -> Self {
        Self::new(magnitude, Unit::Ohm)
    }
    pub fn farads(magnitude: f64) -> Self {
        Self::new(magnitude, Unit::Farad)
    }
    pub fn volts(magnitude: f64) -> Self {
        Self::new(magnitude, Unit::Volt)
    }
    pub fn dimensionless(magnitude: f64) -> Self {
        Self::new(magnitude, Unit::Dimensionless)
    }
}

impl fmt::Display for EngValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", format_magnitude(self.magnitude), self.unit.symbol())
    }
}

/// Which way a value may move when snapped to a standard value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Higher,
    Lower,
    Nearest,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Higher => write!(f, "higher"),
            Direction::Lower => write!(f, "lower"),
            Direction::Nearest => write!(f, "nearest"),
        }
    }
}

/// Preferred-value series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    E6,
    E12,
    E24,
}

impl Series {
    /// Per-decade mantissas, ascending, first member 1.0.
    pub fn members(&self) -> &'static [f64] {
        let t = tables();
        match self {
            Series::E6 => &t.e6,
            Series::E12 => &t.e12,
            Series::E24 => &t.e24,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Series::E6 => "E6",
            Series::E12 => "E12",
            Series::E24 => "E24",
        }
    }
}

impl FromStr for Series {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e6" => Ok(Series::E6),
            "e12" => Ok(Series::E12),
            "e24" => Ok(Series::E24),
            other => Err(Error::Config(format!("unknown series '{other}'"))),
        }
    }
}

struct SeriesTables {
    e6: Vec<f64>,
    e12: Vec<f64>,
    e24: Vec<f64>,
}

fn tables() -> &'static SeriesTables {
    static TABLES: OnceLock<SeriesTables> = OnceLock::new();
    TABLES.get_or_init(|| parse_series_file(E_SERIES_DATA).expect("bundled e_series.txt is invalid"))
}

fn parse_series_file(text: &str) -> Result<SeriesTables> {
    let mut sections: Vec<(String, Vec<f64>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push((name.to_string(), Vec::new()));
        } else {
            let value: f64 = line
                .parse()
                .map_err(|_| Error::Config(format!("e-series line {}: bad value '{line}'", idx + 1)))?;
            sections
                .last_mut()
                .ok_or_else(|| Error::Config("e-series value before any [section]".into()))?
                .1
                .push(value);
        }
    }

    let take = |name: &str| -> Result<Vec<f64>> {
        let (_, values) = sections
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Config(format!("e-series section [{name}] missing")))?;
        validate_series(name, values)?;
        Ok(values.clone())
    };
    Ok(SeriesTables {
        e6: take("E6")?,
        e12: take("E12")?,
        e24: take("E24")?,
    })
}

fn validate_series(name: &str, members: &[f64]) -> Result<()> {
    if members.first() != Some(&1.0) {
        return Err(Error::Config(format!("series {name}: first member must be 1.0")));
    }
    for pair in members.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Config(format!("series {name}: members not ascending")));
        }
    }
    if members.iter().any(|&m| !(1.0..10.0).contains(&m)) {
        return Err(Error::Config(format!("series {name}: member outside [1, 10)")));
    }
    Ok(())
}

/// Splits `v > 0` into mantissa in [1, 10) and decade exponent.
fn mantissa_exponent(v: f64) -> (f64, i32) {
    let mut k = v.log10().floor() as i32;
    let mut m = v / 10f64.powi(k);
    if m < 1.0 {
        m *= 10.0;
        k -= 1;
    }
    if m >= 10.0 {
        m /= 10.0;
        k += 1;
    }
    (m, k)
}

// Slack for boundary comparisons so that a quantized value re-quantizes to
// itself despite mantissa/exponent recombination rounding. E24 neighbours are
// at least 4 % apart, far beyond this.
const SNAP_SLACK: f64 = 1e-9;

/// Snaps a positive value onto `series`, moving in the requested direction.
/// `Nearest` resolves exact ties upward.
pub fn quantize(x: EngValue, dir: Direction, series: Series) -> Result<EngValue> {
    let v = x.magnitude;
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!("quantize requires a positive finite value, got {v}")));
    }
    let (m, k) = mantissa_exponent(v);
    let members = series.members();

    // Lower candidate always exists because members[0] = 1.0 <= m.
    let lower = *members
        .iter()
        .rev()
        .find(|&&c| c <= m * (1.0 + SNAP_SLACK))
        .expect("series starts at 1.0");
    // Higher candidate may roll into the next decade.
    let (higher, higher_k) = match members.iter().find(|&&c| c >= m * (1.0 - SNAP_SLACK)) {
        Some(&c) => (c, k),
        None => (members[0], k + 1),
    };

    let (mantissa, decade) = match dir {
        Direction::Lower => (lower, k),
        Direction::Higher => (higher, higher_k),
        Direction::Nearest => {
            let hi_abs = higher * 10f64.powi(higher_k);
            let d_lo = v - lower * 10f64.powi(k);
            let d_hi = hi_abs - v;
            if d_hi <= d_lo {
                (higher, higher_k)
            } else {
                (lower, k)
            }
        }
    };
    Ok(EngValue::new(mantissa * 10f64.powi(decade), x.unit))
}

/// Result of snapping a supply voltage onto the rail set.
#[derive(Debug, Clone, Copy)]
pub struct RailChoice {
    pub value: EngValue,
    /// False when the request exceeded every standard rail and passed through.
    pub standard: bool,
}

/// Picks the smallest standard rail that covers `v`; values above the top
/// rail pass through unchanged and are flagged non-standard.
pub fn quantize_supply(v: EngValue) -> Result<RailChoice> {
    let x = v.magnitude;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("supply must be positive and finite, got {x}")));
    }
    for rail in SUPPLY_RAILS {
        if rail >= x * (1.0 - SNAP_SLACK) {
            return Ok(RailChoice {
                value: EngValue::volts(rail),
                standard: true,
            });
        }
    }
    Ok(RailChoice { value: v, standard: false })
}

/// Parses SPICE magnitude text: a number, an optional scale suffix
/// (`f p n u m k Meg g`, case-insensitive, `m`/`Meg` told apart by spelling),
/// and optional trailing unit letters which are ignored.
pub fn parse_magnitude(text: &str) -> Result<f64> {
    let bytes = text.as_bytes();
    let mut i = 0;

    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i == int_start || (i == int_start + 1 && bytes[int_start] == b'.') {
        return Err(Error::Magnitude {
            offset: i,
            msg: format!("expected a number in '{text}'"),
        });
    }
    // Exponent only counts when digits follow; otherwise 'e' is a unit letter.
    let mut has_exponent = false;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            i = j;
            has_exponent = true;
        }
    }

    let number_text = &text[..i];
    let number: f64 = number_text.parse().map_err(|_| Error::Magnitude {
        offset: 0,
        msg: format!("malformed number '{number_text}'"),
    })?;

    let rest = &text[i..];
    let (exp_shift, unit_letters_at) = if rest.len() >= 3 && rest[..3].eq_ignore_ascii_case("meg") {
        (Some(6), i + 3)
    } else {
        match rest.as_bytes().first().map(|b| b.to_ascii_lowercase()) {
            Some(b'f') => (Some(-15), i + 1),
            Some(b'p') => (Some(-12), i + 1),
            Some(b'n') => (Some(-9), i + 1),
            Some(b'u') => (Some(-6), i + 1),
            Some(b'm') => (Some(-3), i + 1),
            Some(b'k') => (Some(3), i + 1),
            Some(b'g') => (Some(9), i + 1),
            _ => (None, i),
        }
    };

    for (off, b) in text.bytes().enumerate().skip(unit_letters_at) {
        if !b.is_ascii_alphabetic() {
            return Err(Error::Magnitude {
                offset: off,
                msg: format!("unexpected character '{}' in '{text}'", b as char),
            });
        }
    }

    match exp_shift {
        None => Ok(number),
        // Fold the scale into the decimal text so the result is the
        // correctly rounded double (a float multiply can be an ulp off).
        Some(shift) if !has_exponent => format!("{number_text}e{shift}")
            .parse::<f64>()
            .map_err(|_| Error::Magnitude {
                offset: 0,
                msg: format!("malformed number '{number_text}'"),
            }),
        Some(shift) => Ok(number * 10f64.powi(shift)),
    }
}

// Scale steps available to the formatter, largest first.
const FORMAT_SUFFIXES: [(i32, &str); 9] = [
    (9, "g"),
    (6, "Meg"),
    (3, "k"),
    (0, ""),
    (-3, "m"),
    (-6, "u"),
    (-9, "n"),
    (-12, "p"),
    (-15, "f"),
];

/// Canonical SPICE text for a magnitude: four significant digits, the largest
/// suffix that keeps the mantissa in [1, 1000), `Meg` spelled out.
pub fn format_magnitude(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sign = if x < 0.0 { "-" } else { "" };
    let v = x.abs();

    let exp3 = {
        let e = (v.log10() / 3.0).floor() as i32 * 3;
        e.clamp(-15, 9)
    };
    let mut mant = v / 10f64.powi(exp3);
    let mut suffix_idx = FORMAT_SUFFIXES
        .iter()
        .position(|&(e, _)| e == exp3)
        .expect("clamped exponent is in table");

    // Out-of-table magnitudes fall back to plain scientific notation.
    if !(1.0..1000.0).contains(&mant) {
        return format!("{sign}{:e}", round_sig(v, 4));
    }

    mant = round_sig(mant, 4);
    if mant >= 1000.0 && suffix_idx > 0 {
        mant /= 1000.0;
        suffix_idx -= 1;
    }

    let decimals = if mant >= 1000.0 {
        0
    } else if mant >= 100.0 {
        1
    } else if mant >= 10.0 {
        2
    } else {
        3
    };
    let mut body = format!("{mant:.decimals$}");
    if body.contains('.') {
        body = body.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    format!("{sign}{body}{}", FORMAT_SUFFIXES[suffix_idx].1)
}

fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}
