//! Device parameter storage.
//!
//! BJT two-port h-parameters plus junction constants, loaded from a flat
//! `key = value` parameter file (`#` starts a comment). A default 2N2222
//! file is bundled so the toolchain runs with no setup.

use crate::error::{Error, Result};
use crate::values::parse_magnitude;
use std::path::Path;
use std::sync::OnceLock;

const DEFAULT_PARAMS: &str = include_str!("../data/2n2222.params");

/// Hybrid-parameter description of one transistor type.
#[derive(Debug, Clone, PartialEq)]
pub struct BjtParams {
    pub name: String,
    /// Forward current gain (typical / minimum / maximum).
    pub h_fe_typ: f64,
    pub h_fe_min: f64,
    pub h_fe_max: f64,
    /// Input impedance, ohms.
    pub h_ie: f64,
    /// Reverse voltage ratio, dimensionless.
    pub h_re: f64,
    /// Output admittance, siemens.
    pub h_oe: f64,
    /// Base-emitter drop when conducting, volts.
    pub v_be_on: f64,
    /// Collector-emitter saturation voltage, volts.
    pub v_ce_sat: f64,
    /// Quiescent-current floor added to the peak collector current, amperes.
    pub i_c_min: f64,
}

impl BjtParams {
    /// The bundled 2N2222 defaults.
    pub fn default_2n2222() -> &'static BjtParams {
        static DEFAULT: OnceLock<BjtParams> = OnceLock::new();
        DEFAULT.get_or_init(|| {
            BjtParams::from_text(DEFAULT_PARAMS).expect("bundled 2n2222.params is invalid")
        })
    }

    pub fn load(path: &Path) -> Result<BjtParams> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        BjtParams::from_text(&text)
    }

    /// Parses the flat key=value format.
    pub fn from_text(text: &str) -> Result<BjtParams> {
        let mut name = None;
        let mut fields: Vec<(String, f64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => raw[..pos].trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("parameter line {}: expected key = value", idx + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "name" {
                name = Some(value.to_string());
                continue;
            }
            let number = parse_magnitude(value).map_err(|e| {
                Error::Config(format!("parameter '{key}': bad value '{value}' ({e})"))
            })?;
            fields.push((key.to_string(), number));
        }

        let mut get = |key: &str| -> Option<f64> {
            fields
                .iter()
                .position(|(k, _)| k == key)
                .map(|i| fields.remove(i).1)
        };

        let h_fe_typ = get("h_fe_typ").ok_or_else(|| Error::Config("h_fe_typ required".into()))?;
        let h_ie = get("h_ie").ok_or_else(|| Error::Config("h_ie required".into()))?;
        let h_re = get("h_re").ok_or_else(|| Error::Config("h_re required".into()))?;
        let h_oe = get("h_oe").ok_or_else(|| Error::Config("h_oe required".into()))?;
        let h_fe_min = get("h_fe_min").unwrap_or(h_fe_typ);
        let h_fe_max = get("h_fe_max").unwrap_or(h_fe_typ);
        let v_be_on = get("v_be_on").unwrap_or(0.7);
        let v_ce_sat = get("v_ce_sat").unwrap_or(0.2);
        let i_c_min = get("i_c_min").unwrap_or(0.0);

        if let Some((key, _)) = fields.first() {
            return Err(Error::Config(format!("unknown parameter key '{key}'")));
        }

        let params = BjtParams {
            name: name.unwrap_or_else(|| "npn".to_string()),
            h_fe_typ,
            h_fe_min,
            h_fe_max,
            h_ie,
            h_re,
            h_oe,
            v_be_on,
            v_ce_sat,
            i_c_min,
        };
        params.validate()?;
        Ok(params)
    }

    /// Serializes back to the parameter-file format; reloading the result
    /// reproduces this record exactly.
    pub fn to_text(&self) -> String {
        format!(
            "name = {}\nh_fe_typ = {}\nh_fe_min = {}\nh_fe_max = {}\nh_ie = {}\nh_re = {}\nh_oe = {}\nv_be_on = {}\nv_ce_sat = {}\ni_c_min = {}\n",
            self.name,
            self.h_fe_typ,
            self.h_fe_min,
            self.h_fe_max,
            self.h_ie,
            self.h_re,
            self.h_oe,
            self.v_be_on,
            self.v_ce_sat,
            self.i_c_min,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("h_fe_typ", self.h_fe_typ),
            ("h_fe_min", self.h_fe_min),
            ("h_fe_max", self.h_fe_max),
            ("h_ie", self.h_ie),
            ("h_oe", self.h_oe),
            ("v_be_on", self.v_be_on),
            ("v_ce_sat", self.v_ce_sat),
        ];
        for (key, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        if !self.h_re.is_finite() || self.h_re < 0.0 {
            return Err(Error::Config(format!("h_re must be >= 0, got {}", self.h_re)));
        }
        if !self.i_c_min.is_finite() || self.i_c_min < 0.0 {
            return Err(Error::Config(format!("i_c_min must be >= 0, got {}", self.i_c_min)));
        }
        if !(self.h_fe_min <= self.h_fe_typ && self.h_fe_typ <= self.h_fe_max) {
            return Err(Error::Config(format!(
                "h_fe ordering violated: h_fe_min {} <= h_fe_typ {} <= h_fe_max {} required",
                self.h_fe_min, self.h_fe_typ, self.h_fe_max
            )));
        }
        let h = self.h_composite();
        if h.abs() >= 1.0 {
            return Err(Error::Config(format!(
                "|h_ie*h_oe - h_fe*h_re| = {} breaks the small-signal validity bound (< 1)",
                h.abs()
            )));
        }
        Ok(())
    }

    /// The composite hybrid determinant `h_ie*h_oe - h_fe*h_re` (typical h_fe).
    pub fn h_composite(&self) -> f64 {
        self.h_ie * self.h_oe - self.h_fe_typ * self.h_re
    }
}

/// Ideal op-amp description: a single very large open-loop gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpAmpModel {
    pub open_loop_gain: f64,
}

impl Default for OpAmpModel {
    fn default() -> Self {
        Self { open_loop_gain: 1e7 }
    }
}

impl OpAmpModel {
    pub fn validate(&self) -> Result<()> {
        if self.open_loop_gain < 1e6 {
            return Err(Error::Config(format!(
                "open_loop_gain must be at least 1e6 to approximate an ideal op-amp, got {}",
                self.open_loop_gain
            )));
        }
        Ok(())
    }
}
