//! Run manifests: flat `key = value` files recording everything needed to
//! reproduce a run, plus SHA-256 digests of its outputs.

use arbodyn::sensitivity::ParamRange;
use arbodyn::sim::PulseEntry;
use arbodyn::{ModelError, ModelParams, ModelVariant, ParamId, State};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::output::OutputFile;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

/// Everything a command reads besides its flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub config: RunConfig,
    pub init: Option<State>,
    pub ranges: Option<Vec<ParamRange>>,
}

/// Result of reading a manifest back: the resolved inputs and the flags
/// the command was invoked with.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub inputs: Inputs,
    pub args: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.push("tool", "arbodyn");
        m.push("tool_version", TOOL_VERSION);
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn record_inputs(&mut self, inputs: &Inputs, args: &[String]) {
        for (i, a) in args.iter().enumerate() {
            self.push(format!("arg.{i}"), a.clone());
        }
        let c = &inputs.config;
        self.push("variant", c.variant.name());
        for id in ParamId::ALL {
            self.push(
                format!("param.{}", id.key()),
                format!("{:e}", c.params.get(id)),
            );
        }
        let defaulted: Vec<&str> = c.defaulted().iter().map(|id| id.key()).collect();
        self.push("defaulted", defaulted.join(","));
        for (i, e) in c.schedule.entries.iter().enumerate() {
            self.push(format!("pulse.{i}"), e.to_line());
        }
        if let Some(st) = &inputs.init {
            for (name, v) in arbodyn::model::STATE_NAMES.iter().zip(st.y.iter()) {
                self.push(format!("init.{name}"), format!("{v:e}"));
            }
        }
        if let Some(ranges) = &inputs.ranges {
            for (i, r) in ranges.iter().enumerate() {
                self.push(
                    format!("range.{i}"),
                    format!("{} {:e} {:e}", r.param.key(), r.lo, r.hi),
                );
            }
        }
    }

    pub fn record_outputs(&mut self, files: &[OutputFile]) {
        for f in files {
            self.push(format!("output.{}.sha256", f.name), sha256_hex(&f.bytes));
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Manifest, ModelError> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| {
                ModelError::InvalidConfig(format!(
                    "manifest line {}: expected `key = value`",
                    i + 1
                ))
            })?;
            m.push(k.trim(), v);
        }
        Ok(m)
    }

    /// Rebuilds the inputs and arguments of the recorded run.
    pub fn replay(&self) -> Result<Replay, ModelError> {
        let bad = |what: &str| ModelError::InvalidConfig(format!("manifest: {what}"));
        let mut params = ModelParams::baseline();
        let mut explicit = Vec::new();
        let defaulted: Vec<&str> = self
            .get("defaulted")
            .unwrap_or("")
            .split(',')
            .filter(|s| !s.is_empty())
            .collect();
        let mut args = Vec::new();
        let mut pulses = Vec::new();
        let mut init: Option<State> = None;
        let mut ranges: Option<Vec<ParamRange>> = None;
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad(&format!("`{v}` is not a number")))
        };
        for (k, v) in &self.entries {
            if let Some(key) = k.strip_prefix("param.") {
                let id = ParamId::from_key(key)
                    .ok_or_else(|| bad(&format!("unknown parameter `{key}`")))?;
                params.set(id, number(v)?);
                if !defaulted.contains(&key) {
                    explicit.push(id);
                }
            } else if k.starts_with("arg.") {
                args.push(v.clone());
            } else if k.starts_with("pulse.") {
                pulses.push(PulseEntry::parse(v)?);
            } else if let Some(name) = k.strip_prefix("init.") {
                let i = arbodyn::model::STATE_NAMES
                    .iter()
                    .position(|n| *n == name)
                    .ok_or_else(|| bad(&format!("unknown compartment `{name}`")))?;
                init.get_or_insert_with(State::zeros).y[i] = number(v)?;
            } else if k.starts_with("range.") {
                let r = arbodyn::sensitivity::LhsConfig::parse_ranges(v)?;
                ranges.get_or_insert_with(Vec::new).extend(r);
            }
        }
        params.validate()?;
        let variant =
            ModelVariant::parse(self.get("variant").ok_or_else(|| bad("missing variant"))?)?;
        let config = RunConfig {
            params,
            variant,
            schedule: arbodyn::sim::PulseSchedule::new(pulses)?,
            explicit,
        };
        Ok(Replay {
            inputs: Inputs {
                config,
                init,
                ranges,
            },
            args,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn inputs_round_trip() {
        let config = parse_config_str(
            "beta_hv = 0.0105\nvariant = no-vaccination\npulse = c_m 0.3 7 1 0 100\n",
        )
        .unwrap();
        let inputs = Inputs {
            config,
            init: Some(State::strategy_initial()),
            ranges: Some(arbodyn::sensitivity::LhsConfig::parse_ranges("a 0.5 1.5\n").unwrap()),
        };
        let args = vec!["simulate".to_string(), "--horizon".into(), "50".into()];
        let mut m = Manifest::new("simulate");
        m.record_inputs(&inputs, &args);
        m.record_outputs(&[OutputFile::text("x.csv", "1\n".into())]);
        let back = Manifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let r = back.replay().unwrap();
        assert_eq!(r.args, args);
        assert_eq!(r.inputs, inputs);
        assert!(m.get("output.x.csv.sha256").is_some());
        assert_eq!(m.get("defaulted").unwrap().split(',').count(), 28);
    }
}
