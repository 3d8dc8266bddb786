//! Experiment documents: one JSON file per run, overridable from flags.

use std::path::PathBuf;

use las_mud::channel::{make_random_spreading, two_user_example, Channel, ChannelDoc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    AmeSweep,
    Bounds,
    Simulate,
    EnumerateErrors,
    Audit,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AmeSweep => "ame-sweep",
            Self::Bounds => "bounds",
            Self::Simulate => "simulate",
            Self::EnumerateErrors => "enumerate-errors",
            Self::Audit => "audit",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid experiment file: {e}")))
    }

    /// Parameters for the command, with missing sections read as `{}`.
    pub fn params_or_empty(&self) -> Value {
        match &self.params {
            Value::Null => Value::Object(Default::default()),
            v => v.clone(),
        }
    }

    /// The part of the spec that determines the output: everything except
    /// where it is written.
    pub fn provenance_view(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("spec serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("output");
        }
        v
    }
}

/// A channel given explicitly or by generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", into = "Value")]
pub enum ChannelSpec {
    Explicit(ChannelDoc),
    Generated(Generator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Equicorrelated {
        #[serde(rename = "K")]
        k: usize,
        rho: f64,
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
    },
    RandomSpreading {
        #[serde(rename = "K")]
        k: usize,
        #[serde(rename = "N")]
        n: usize,
        seed: u64,
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
    },
    Orthogonal {
        #[serde(rename = "A")]
        a: Vec<f64>,
    },
    TwoUser,
}

impl TryFrom<Value> for ChannelSpec {
    type Error = String;

    fn try_from(v: Value) -> Result<Self, String> {
        if v.get("generator").is_some() {
            serde_json::from_value(v).map(Self::Generated).map_err(|e| e.to_string())
        } else {
            serde_json::from_value(v).map(Self::Explicit).map_err(|e| e.to_string())
        }
    }
}

impl From<ChannelSpec> for Value {
    fn from(c: ChannelSpec) -> Value {
        match c {
            ChannelSpec::Explicit(d) => serde_json::to_value(d),
            ChannelSpec::Generated(g) => serde_json::to_value(g),
        }
        .expect("channel spec serialises")
    }
}

fn amplitudes(a: &Option<Vec<f64>>, k: usize) -> Result<Vec<f64>, CliError> {
    match a {
        None => Ok(vec![1.0; k]),
        Some(a) if a.len() == k => Ok(a.clone()),
        Some(a) => Err(CliError::Usage(format!("A has {} entries, expected K = {k}", a.len()))),
    }
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel, CliError> {
        let ch = match self {
            Self::Explicit(doc) => doc.clone().into_channel()?,
            Self::Generated(Generator::Equicorrelated { k, rho, a }) => {
                Channel::equicorrelated(*k, *rho, &amplitudes(a, *k)?)?
            }
            Self::Generated(Generator::RandomSpreading { k, n, seed, a }) => {
                if *k == 0 || *n == 0 {
                    return Err(CliError::Usage("random spreading needs K ≥ 1 and N ≥ 1".into()));
                }
                Channel::from_spreading(make_random_spreading(*k, *n, *seed), &amplitudes(a, *k)?)?
            }
            Self::Generated(Generator::Orthogonal { a }) => Channel::orthogonal(a)?,
            Self::Generated(Generator::TwoUser) => two_user_example(),
        };
        Ok(ch)
    }
}

/// Inclusive grid `start, start + step, …, stop` or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Self::List(v) => Ok(v.clone()),
            Self::Range { start, stop, step } => {
                if step.is_nan() || *step <= 0.0 || stop < start {
                    return Err(CliError::Usage(format!("bad grid {start}..{stop} step {step}")));
                }
                // Index the grid so values do not accumulate rounding.
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_and_explicit_channels_parse() {
        let g: ChannelSpec = serde_json::from_str(r#"{"generator":"equicorrelated","K":3,"rho":0.2}"#).unwrap();
        assert_eq!(g.build().unwrap().k(), 3);
        let e: ChannelSpec = serde_json::from_str(r#"{"K":2,"A":[1,0.6],"R":[[1,0.4],[0.4,1]]}"#).unwrap();
        assert_eq!(e.build().unwrap().h(), two_user_example().h());
        let t: ChannelSpec = serde_json::from_str(r#"{"generator":"two_user"}"#).unwrap();
        assert_eq!(t.build().unwrap().k(), 2);
    }

    #[test]
    fn unknown_generator_fields_are_rejected() {
        let r: Result<ChannelSpec, _> = serde_json::from_str(r#"{"generator":"orthogonal","A":[1],"rho":0}"#);
        assert!(r.is_err());
    }

    #[test]
    fn grid_is_indexed() {
        let g = Grid::Range {
            start: 0.0,
            stop: 0.5,
            step: 0.01,
        };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 51);
        assert_eq!(v[50], 50.0 * 0.01);
    }

    #[test]
    fn output_section_is_not_part_of_provenance() {
        let mut s = ExperimentSpec::from_json(r#"{"seed":4,"output":{"path":"a.csv"}}"#).unwrap();
        let v1 = s.provenance_view();
        s.output = None;
        assert_eq!(v1, s.provenance_view());
    }
}
