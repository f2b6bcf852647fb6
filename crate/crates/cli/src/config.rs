//! Run configuration files: flat `key = value` parameter files with two
//! extra keys, `variant` and `pulse`, plus the schedule and initial-state
//! side files.

use std::path::Path;

use arbodyn::model::STATE_NAMES;
use arbodyn::sim::{PulseEntry, PulseSchedule};
use arbodyn::{ModelError, ModelParams, ModelVariant, ParamId, State};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub variant: ModelVariant,
    pub schedule: PulseSchedule,
    /// Parameters given explicitly; all others took their default value.
    pub explicit: Vec<ParamId>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::baseline(),
            variant: ModelVariant::FULL,
            schedule: PulseSchedule::empty(),
            explicit: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn defaulted(&self) -> Vec<ParamId> {
        ParamId::ALL
            .iter()
            .copied()
            .filter(|id| !self.explicit.contains(id))
            .collect()
    }
}

fn content(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn at_line(lineno: usize, e: ModelError) -> ModelError {
    ModelError::InvalidConfig(format!("line {lineno}: {e}"))
}

/// Parses a configuration text. Parameter lines are handed to the
/// parameter parser with the `variant` and `pulse` lines blanked out, so
/// line numbers in errors refer to the original text.
pub fn parse_config_str(text: &str) -> std::result::Result<RunConfig, ModelError> {
    let mut variant = ModelVariant::FULL;
    let mut pulses = Vec::new();
    let mut rest = String::with_capacity(text.len());
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = content(raw);
        let special = line.split_once('=').and_then(|(k, v)| match k.trim() {
            "variant" | "pulse" => Some((k.trim(), v.trim())),
            _ => None,
        });
        match special {
            Some(("variant", v)) => {
                variant = ModelVariant::parse(v).map_err(|e| at_line(lineno, e))?
            }
            Some((_, v)) => pulses.push(PulseEntry::parse(v).map_err(|e| at_line(lineno, e))?),
            None => rest.push_str(line),
        }
        rest.push('\n');
    }
    let (params, explicit) = ModelParams::from_kv_str(&rest, &ModelParams::baseline())?;
    let schedule = PulseSchedule::new(pulses)?;
    Ok(RunConfig {
        params,
        variant,
        schedule,
        explicit,
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn with_path<T>(path: &Path, r: std::result::Result<T, ModelError>) -> Result<T> {
    r.map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    with_path(path, parse_config_str(&read_text(path)?))
}

/// One pulse entry per non-blank line: `control level period duration start end`.
pub fn parse_schedule_str(text: &str) -> std::result::Result<Vec<PulseEntry>, ModelError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if !line.is_empty() {
            out.push(PulseEntry::parse(line).map_err(|e| at_line(i + 1, e))?);
        }
    }
    Ok(out)
}

pub fn parse_schedule(path: &Path) -> Result<Vec<PulseEntry>> {
    with_path(path, parse_schedule_str(&read_text(path)?))
}

/// `name = value` lines keyed by compartment name; missing compartments
/// keep their value from `defaults`.
pub fn parse_state_str(text: &str, defaults: &State) -> std::result::Result<State, ModelError> {
    let mut st = *defaults;
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ModelError::InvalidConfig(format!("line {lineno}: expected `name = value`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let slot = STATE_NAMES.iter().position(|&n| n == key).ok_or_else(|| {
            ModelError::InvalidConfig(format!("line {lineno}: unknown compartment `{key}`"))
        })?;
        let v: f64 = value.parse().map_err(|_| {
            ModelError::InvalidConfig(format!("line {lineno}: `{value}` is not a number"))
        })?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "line {lineno}: compartment `{key}` must be a nonnegative number"
            )));
        }
        st.y[slot] = v;
    }
    Ok(st)
}

pub fn parse_state(path: &Path, defaults: &State) -> Result<State> {
    with_path(path, parse_state_str(&read_text(path)?, defaults))
}
