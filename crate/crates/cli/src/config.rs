//! Flag and config-file handling shared by every command.

use std::path::Path;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use uav_pricing::ValuationModel;

use crate::failure::{Failure, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[value(alias = "exponential")]
    #[serde(alias = "exponential")]
    Exp,
    Uniform,
}

/// Overlays the flags given on the command line onto the config file (if
/// any), then re-reads the merged object so unknown keys are rejected.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Outcome<T> {
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(map)) => map,
                Ok(_) => return Err(Failure::config(format!("{} must hold a JSON object", path.display()))),
                Err(e) => return Err(Failure::config(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    let overlay = serde_json::to_value(flags).map_err(|e| Failure::Runtime(e.into()))?;
    if let Value::Object(fields) = overlay {
        for (key, value) in fields {
            if !value.is_null() {
                merged.insert(key, value);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(Failure::config)
}

/// Destinations are left out of file headers so reruns into another path
/// produce identical bytes.
const OUTPUT_KEYS: [&str; 2] = ["out", "json-out"];

/// Every resolved parameter as `key = value`, for CSV comment headers.
pub fn parameter_lines<T: Serialize>(resolved: &T) -> Vec<String> {
    match serde_json::to_value(resolved) {
        Ok(Value::Object(map)) => map
            .into_iter()
            .filter(|(k, v)| !v.is_null() && !OUTPUT_KEYS.contains(&k.as_str()))
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k} = {s}"),
                other => format!("{k} = {other}"),
            })
            .collect(),
        _ => Vec::new(),
    }
}

pub fn required<T: Copy>(value: Option<T>, flag: &str) -> Outcome<T> {
    value.ok_or_else(|| Failure::config(format!("missing required parameter --{flag}")))
}

pub fn required_ref<'a, T>(value: &'a Option<T>, flag: &str) -> Outcome<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Failure::config(format!("missing required parameter --{flag}")))
}

/// A nonnegative integer given as a real-valued flag.
pub fn whole(value: f64, flag: &str) -> Outcome<usize> {
    if value < 0.0 || value.fract() != 0.0 || !value.is_finite() {
        return Err(Failure::config(format!("--{flag} must be a nonnegative integer, got {value}")));
    }
    Ok(value as usize)
}

pub fn valuation(kind: Option<ModelKind>, lambda: Option<f64>, a: Option<f64>, b: Option<f64>) -> Outcome<ValuationModel> {
    match required(kind, "model")? {
        ModelKind::Exp => Ok(ValuationModel::exponential(required(lambda, "lambda")?)?),
        ModelKind::Uniform => Ok(ValuationModel::uniform(required(a, "a")?, required(b, "b")?)?),
    }
}

/// Rate of an exponential valuation model for continuous-time commands.
pub fn exponential_rate(kind: Option<ModelKind>, lambda: Option<f64>) -> Outcome<f64> {
    if kind == Some(ModelKind::Uniform) {
        return Err(Failure::config("continuous mode supports exponential valuations only"));
    }
    required(lambda, "lambda")
}

/// `start:stop:step` (endpoints inclusive within half a step), a comma list,
/// or a single number.
pub fn parse_sweep(text: &str, flag: &str) -> Outcome<Vec<f64>> {
    let bad = |why: &str| Failure::config(format!("--{flag} {text:?}: {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(bad("step must be positive"));
        }
        let mut values = Vec::new();
        let mut i = 0u64;
        loop {
            // snap away accumulated binary error so 0.05 * 3 prints as 0.15
            let v = ((start + i as f64 * step) * 1e12).round() / 1e12;
            if v > stop + 0.5 * step {
                break;
            }
            values.push(v);
            i += 1;
        }
        values
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(number)
            .collect::<Outcome<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty list"));
    }
    Ok(values)
}

/// Comma-separated positive integers.
pub fn parse_counts(text: &str, flag: &str) -> Outcome<Vec<usize>> {
    let values: Vec<usize> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Failure::config(format!("--{flag}: {s:?} is not a positive integer")))
        })
        .collect::<Outcome<_>>()?;
    if values.is_empty() {
        return Err(Failure::config(format!("--{flag}: empty list")));
    }
    Ok(values)
}
