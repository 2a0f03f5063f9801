//! Flat `key = value` scenario files.
//!
//! ```text
//! # parity measurement on a half-polarized MS
//! circuit = parity_conditioned
//! v_even = identity
//! v_odd = flip
//! n = 4
//! polarization = 0.5
//! measurement = sector_pvm
//! ```
//!
//! Keys: `circuit` (`parity_collective`, `hamming_half`, `ghz_local`,
//! `parity_conditioned`), `v_even` / `v_odd` (`identity`, `flip`), `n`,
//! `epsilon` or `polarization`, `measurement` (`sector_pvm`, `threshold_pvm`,
//! `two_outcome`, `apparatus`), `theta` (`pi/2n`, `pi/n`, a slope in radians, or
//! a comma-separated table of N+1 angles), `g`, `t_m` (number or `pi/2ng`),
//! `backend` (`dense`, `collective`, `auto`), `postselect` (outcome index),
//! `disentangle` (`true`/`false`), `seed`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::circuits::{Backend, CircuitKind, CircuitSpec, MsUnitary};
use crate::collective::MsConfig;
use crate::error::{Error, Result};
use crate::measurement::{
    povm_from_theta, sector_pvm, threshold_pvm, ApparatusSpec, CollectivePovm, TwoOutcomeTheta,
};

pub const KEYS: &[&str] = &[
    "circuit",
    "v_even",
    "v_odd",
    "n",
    "epsilon",
    "polarization",
    "measurement",
    "theta",
    "g",
    "t_m",
    "backend",
    "postselect",
    "disentangle",
    "seed",
];

/// Raw key/value pairs, later layers overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigSource {
    values: BTreeMap<String, String>,
}

impl ConfigSource {
    pub fn parse(text: &str) -> Result<Self> {
        let mut src = ConfigSource::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            src.set(k.trim(), v.trim())?;
        }
        Ok(src)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key. Setting `epsilon` forgets an earlier `polarization` and vice versa.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        match key {
            "epsilon" => {
                self.values.remove("polarization");
            }
            "polarization" => {
                self.values.remove("epsilon");
            }
            _ => {}
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(&mut self, other: &ConfigSource) -> Result<()> {
        for (k, v) in &other.values {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("`{key}` has an invalid value `{v}`")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitChoice {
    ParityCollective,
    HammingHalf,
    GhzLocal,
    ParityConditioned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryTag {
    Identity,
    Flip,
}

impl UnitaryTag {
    fn parse(key: &str, v: &str) -> Result<Self> {
        match v {
            "identity" => Ok(UnitaryTag::Identity),
            "flip" => Ok(UnitaryTag::Flip),
            _ => Err(Error::Config(format!("`{key}` must be `identity` or `flip`, got `{v}`"))),
        }
    }

    pub fn to_unitary(self) -> MsUnitary {
        match self {
            UnitaryTag::Identity => MsUnitary::Identity,
            UnitaryTag::Flip => MsUnitary::CollectiveFlip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementChoice {
    SectorPvm,
    ThresholdPvm,
    TwoOutcome { theta: Vec<f64> },
    Apparatus { g: f64, t_m: f64 },
}

impl MeasurementChoice {
    pub fn povm(&self, n: usize) -> Result<CollectivePovm> {
        Ok(match self {
            MeasurementChoice::SectorPvm => sector_pvm(n),
            MeasurementChoice::ThresholdPvm => threshold_pvm(n),
            MeasurementChoice::TwoOutcome { theta } => povm_from_theta(&TwoOutcomeTheta::new(theta.clone())?),
            MeasurementChoice::Apparatus { g, t_m } => povm_from_theta(&ApparatusSpec::new(*g, *t_m)?.theta(n)),
        })
    }
}

fn parse_theta(v: &str, n: usize) -> Result<Vec<f64>> {
    let slope = match v.replace(' ', "").to_lowercase().as_str() {
        "pi/2n" => PI / (2.0 * n as f64),
        "pi/n" => PI / n as f64,
        s if s.contains(',') => {
            let table = s.split(',').map(|x| parse_num::<f64>("theta", x)).collect::<Result<Vec<_>>>()?;
            if table.len() != n + 1 {
                return Err(Error::Config(format!("`theta` table needs N+1 = {} entries, got {}", n + 1, table.len())));
            }
            return Ok(table);
        }
        s => parse_num("theta", s)?,
    };
    Ok((0..=n).map(|m| slope * m as f64).collect())
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub circuit: CircuitChoice,
    pub v_even: UnitaryTag,
    pub v_odd: UnitaryTag,
    pub n: usize,
    pub epsilon: f64,
    pub polarization: f64,
    pub measurement: MeasurementChoice,
    pub backend: Backend,
    pub postselect: Option<usize>,
    pub disentangle: bool,
    pub seed: u64,
}

/// Mismatch allowed between a given `epsilon` and `1 - polarization`.
const POLARIZATION_CONSISTENCY: f64 = 1e-12;

impl ScenarioConfig {
    pub fn from_source(src: &ConfigSource) -> Result<Self> {
        let circuit = match src.get("circuit").unwrap_or("parity_collective") {
            "parity_collective" => CircuitChoice::ParityCollective,
            "hamming_half" => CircuitChoice::HammingHalf,
            "ghz_local" => CircuitChoice::GhzLocal,
            "parity_conditioned" => CircuitChoice::ParityConditioned,
            other => return Err(Error::Config(format!("unknown circuit `{other}`"))),
        };
        let n: usize = parse_num("n", src.get("n").ok_or_else(|| Error::Config("`n` is required".into()))?)?;
        let epsilon = resolve_epsilon(src.get("epsilon"), src.get("polarization"))?;
        let measurement = match src.get("measurement").unwrap_or("sector_pvm") {
            "sector_pvm" => MeasurementChoice::SectorPvm,
            "threshold_pvm" => MeasurementChoice::ThresholdPvm,
            "two_outcome" => MeasurementChoice::TwoOutcome { theta: parse_theta(src.get("theta").unwrap_or("pi/2n"), n)? },
            "apparatus" => {
                let g: f64 = parse_num("g", src.get("g").unwrap_or("1"))?;
                let t_m = match src.get("t_m").unwrap_or("pi/2ng").replace(' ', "").to_lowercase().as_str() {
                    "pi/2ng" => PI / (2.0 * n as f64 * g),
                    s => parse_num("t_m", s)?,
                };
                MeasurementChoice::Apparatus { g, t_m }
            }
            other => return Err(Error::Config(format!("unknown measurement `{other}`"))),
        };
        let backend = match src.get("backend").unwrap_or("auto") {
            "dense" => Backend::Dense,
            "collective" => Backend::Collective,
            "auto" => Backend::Auto,
            other => return Err(Error::Config(format!("unknown backend `{other}`"))),
        };
        let cfg = ScenarioConfig {
            circuit,
            v_even: UnitaryTag::parse("v_even", src.get("v_even").unwrap_or("identity"))?,
            v_odd: UnitaryTag::parse("v_odd", src.get("v_odd").unwrap_or("flip"))?,
            n,
            epsilon,
            polarization: 1.0 - epsilon,
            measurement,
            backend,
            postselect: src.get("postselect").map(|v| parse_num("postselect", v)).transpose()?,
            disentangle: src.get("disentangle").map(|v| parse_num("disentangle", v)).transpose()?.unwrap_or(false),
            seed: src.get("seed").map(|v| parse_num("seed", v)).transpose()?.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn ms(&self) -> Result<MsConfig> {
        MsConfig::new(self.n, self.epsilon)
    }

    pub fn circuit_kind(&self) -> CircuitKind {
        match self.circuit {
            CircuitChoice::ParityCollective => CircuitKind::ParityCollective,
            CircuitChoice::HammingHalf => CircuitKind::HammingHalf,
            CircuitChoice::GhzLocal => CircuitKind::GhzLocal,
            CircuitChoice::ParityConditioned => CircuitKind::ParityConditioned {
                v_even: self.v_even.to_unitary(),
                v_odd: self.v_odd.to_unitary(),
            },
        }
    }

    pub fn circuit_spec(&self) -> Result<CircuitSpec> {
        CircuitSpec::new(self.circuit_kind(), self.ms()?, self.backend)
    }

    pub fn outcome_count(&self) -> usize {
        match self.measurement {
            MeasurementChoice::SectorPvm => self.n + 1,
            _ => 2,
        }
    }

    /// Checks everything that can fail before any simulation runs.
    pub fn validate(&self) -> Result<()> {
        self.circuit_spec()?;
        self.measurement.povm(self.n)?;
        if let Some(k) = self.postselect {
            if k >= self.outcome_count() {
                return Err(Error::Config(format!(
                    "postselect = {k} but the measurement has {} outcomes",
                    self.outcome_count()
                )));
            }
        }
        Ok(())
    }
}

/// Resolves `epsilon` from whichever of `epsilon` / `polarization` was given.
pub fn resolve_epsilon(epsilon: Option<&str>, polarization: Option<&str>) -> Result<f64> {
    let eps: Option<f64> = epsilon.map(|v| parse_num("epsilon", v)).transpose()?;
    let pol: Option<f64> = polarization.map(|v| parse_num("polarization", v)).transpose()?;
    match (eps, pol) {
        (Some(e), Some(p)) if (e - (1.0 - p)).abs() > POLARIZATION_CONSISTENCY => Err(Error::Config(format!(
            "epsilon = {e} and polarization = {p} are inconsistent (need epsilon = 1 - polarization)"
        ))),
        (Some(e), _) => Ok(e),
        (None, Some(p)) => Ok(1.0 - p),
        (None, None) => Ok(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_file() {
        let src = ConfigSource::parse(
            "# comment\ncircuit = hamming_half\nn = 4\nmeasurement = sector_pvm  # trailing\npostselect = 2\ndisentangle = true\n",
        )
        .unwrap();
        let cfg = ScenarioConfig::from_source(&src).unwrap();
        assert_eq!(cfg.circuit, CircuitChoice::HammingHalf);
        assert_eq!(cfg.postselect, Some(2));
        assert!(cfg.disentangle);
        assert_eq!(cfg.epsilon, 0.0);
    }

    #[test]
    fn theta_forms() {
        assert_eq!(parse_theta("pi/n", 2).unwrap(), vec![0.0, PI / 2.0, PI]);
        assert_eq!(parse_theta("0.5", 2).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_theta("0.1, 0.2,0.3", 2).unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(parse_theta("0.1,0.2", 2).is_err());
    }

    #[test]
    fn epsilon_and_polarization() {
        assert_eq!(resolve_epsilon(None, Some("0.25")).unwrap(), 0.75);
        assert!(resolve_epsilon(Some("0.5"), Some("0.5")).is_ok());
        assert!(matches!(resolve_epsilon(Some("0.5"), Some("0.4")), Err(Error::Config(_))));
        let mut src = ConfigSource::parse("n = 3\nepsilon = 0.2").unwrap();
        src.set("polarization", "0.5").unwrap();
        assert_eq!(ScenarioConfig::from_source(&src).unwrap().epsilon, 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigSource::parse("nonsense").is_err());
        assert!(ConfigSource::parse("colour = red").is_err());
        let bad = ["n = 3\ncircuit = hamming_half", "n = 3\npostselect = 2\nmeasurement = threshold_pvm", "n = x"];
        for text in bad {
            assert!(ScenarioConfig::from_source(&ConfigSource::parse(text).unwrap()).is_err(), "{text}");
        }
    }
}
