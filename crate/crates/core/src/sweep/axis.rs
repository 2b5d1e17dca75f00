use std::fmt;
use std::str::FromStr;

use crate::device::DeviceStack;
use crate::error::{Error, Result};
use crate::numeric::tidy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    ThicknessUm,
    DopingCm3,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::ThicknessUm => "thickness_um",
            SweepParam::DopingCm3 => "doping_cm3",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thickness_um" => Ok(SweepParam::ThicknessUm),
            "doping_cm3" => Ok(SweepParam::DopingCm3),
            other => Err(Error::Axis(format!(
                "unknown parameter '{other}' (expected thickness_um or doping_cm3)"
            ))),
        }
    }
}

/// One sweep dimension: a layer parameter and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub layer: String,
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(layer: impl Into<String>, param: SweepParam, values: Vec<f64>) -> Result<Self> {
        let axis = SweepAxis {
            layer: layer.into(),
            param,
            values,
        };
        axis.validate()?;
        Ok(axis)
    }

    /// start, start+step, … up to stop inclusive.
    pub fn linear(
        layer: impl Into<String>,
        param: SweepParam,
        start: f64,
        stop: f64,
        step: f64,
    ) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
            return Err(Error::Axis(format!(
                "bad linear range {start}:{stop}:{step}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor();
        if !(1.0..=1e6).contains(&n) {
            return Err(Error::Axis(format!(
                "linear range {start}:{stop}:{step} gives {} values",
                n + 1.0
            )));
        }
        let values = (0..=n as usize)
            .map(|k| tidy(start + k as f64 * step))
            .collect();
        Self::new(layer, param, values)
    }

    /// 10^a, 10^(a+1), … 10^b.
    pub fn decades(layer: impl Into<String>, param: SweepParam, a: i32, b: i32) -> Result<Self> {
        if b <= a {
            return Err(Error::Axis(format!("decade range 1e{a}:1e{b} is empty")));
        }
        let values = (a..=b).map(|k| 10f64.powi(k)).map(tidy).collect();
        Self::new(layer, param, values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::Axis(format!(
                "{}: need at least 2 values",
                self.label()
            )));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Axis(format!(
                "{}: values must be positive",
                self.label()
            )));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Axis(format!(
                "{}: values must be strictly increasing",
                self.label()
            )));
        }
        Ok(())
    }

    /// `LAYER.PARAM`.
    pub fn label(&self) -> String {
        format!("{}.{}", self.layer, self.param.key())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails if the axis layer is missing or ambiguous in `stack`.
    pub fn check_target(&self, stack: &DeviceStack) -> Result<()> {
        stack
            .find_layer(&self.layer)
            .map(|_| ())
            .map_err(|e| Error::Axis(format!("{}: {e}", self.label())))
    }

    pub fn apply(&self, stack: &mut DeviceStack, value: f64) -> Result<()> {
        let idx = stack
            .find_layer(&self.layer)
            .map_err(|e| Error::Axis(format!("{}: {e}", self.label())))?;
        let layer = &mut stack.layers[idx];
        match self.param {
            SweepParam::ThicknessUm => layer.thickness_um = value,
            SweepParam::DopingCm3 => layer.doping = value,
        }
        Ok(())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Axis(format!("'{s}' is not a number")))
}

/// Exponent of an exact `1eK` literal.
fn decade_exponent(s: &str) -> Option<i32> {
    let s = s.trim();
    let rest = s.strip_prefix("1e").or_else(|| s.strip_prefix("1E"))?;
    rest.trim_start_matches('+').parse().ok()
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// `LAYER.PARAM=start:stop:step`, `LAYER.PARAM=1eA:1eB` or
    /// `LAYER.PARAM=v1,v2,…`.
    fn from_str(s: &str) -> Result<Self> {
        let (target, range) = s
            .split_once('=')
            .ok_or_else(|| Error::Axis(format!("'{s}': expected LAYER.PARAM=RANGE")))?;
        let (layer, param) = target
            .trim()
            .rsplit_once('.')
            .ok_or_else(|| Error::Axis(format!("'{target}': expected LAYER.PARAM")))?;
        if layer.is_empty() {
            return Err(Error::Axis(format!("'{target}': empty layer name")));
        }
        let param: SweepParam = param.parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => SweepAxis::linear(
                layer,
                param,
                parse_number(a)?,
                parse_number(b)?,
                parse_number(c)?,
            ),
            [a, b] => match (decade_exponent(a), decade_exponent(b)) {
                (Some(a), Some(b)) => SweepAxis::decades(layer, param, a, b),
                _ => Err(Error::Axis(format!(
                    "'{range}': two-part ranges must be decades like 1e10:1e20"
                ))),
            },
            [list] => {
                let values = list
                    .split(',')
                    .map(parse_number)
                    .collect::<Result<Vec<_>>>()?;
                SweepAxis::new(layer, param, values)
            }
            _ => Err(Error::Axis(format!("'{range}': malformed range"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} values)", self.label(), self.len())
    }
}
