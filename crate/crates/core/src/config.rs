//! Scenario parameters.
//!
//! A [`NetworkConfig`] carries everything needed to draw a channel
//! realization and evaluate the closed-form rates. Configs can be read from a
//! flat `key = value` text file (see [`NetworkConfig::from_kv_str`]); `#`
//! starts a comment. The recognised keys are the field names of the struct,
//! with `log_base` taking `bits` or `nats`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit used when reporting rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Base-2 logarithms, bits per channel use.
    #[default]
    Bits,
    /// Natural logarithms, nats per channel use.
    Nats,
}

impl LogBase {
    /// Converts a quantity measured in nats to this unit.
    #[inline]
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Bits => nats / std::f64::consts::LN_2,
            LogBase::Nats => nats,
        }
    }

    #[inline]
    pub fn log(self, x: f64) -> f64 {
        self.from_nats(x.ln())
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bits" | "2" | "log2" => Ok(LogBase::Bits),
            "nats" | "e" | "ln" => Ok(LogBase::Nats),
            other => Err(Error::InvalidConfig(format!("unknown log base `{other}`"))),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        })
    }
}

/// How relays are assigned to the M source/destination antenna pipes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringMode {
    /// Contiguous, pre-assigned blocks of about n/M relays.
    #[default]
    Fixed,
    /// Each relay joins the antenna with its strongest source-side gain.
    Gain,
}

impl FromStr for ClusteringMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(ClusteringMode::Fixed),
            "gain" => Ok(ClusteringMode::Gain),
            other => Err(Error::InvalidConfig(format!("unknown clustering mode `{other}`"))),
        }
    }
}

impl fmt::Display for ClusteringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusteringMode::Fixed => "fixed",
            ClusteringMode::Gain => "gain",
        })
    }
}

/// All scenario parameters. Variances, `gamma` and `ps_max` are linear power
/// units; `alpha` is a linear channel-gain threshold and may be `+inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of relays.
    pub n: usize,
    /// Antennas at the secondary source and destination.
    pub m: usize,
    /// Number of primary nodes.
    pub n_p: usize,
    /// Source to relay.
    pub sigma_s2: f64,
    /// Relay to destination.
    pub sigma_d2: f64,
    /// Relay to primary.
    pub sigma_p2: f64,
    /// Source to primary.
    pub sigma_sp2: f64,
    /// Relay to relay (alternating relay protocol only).
    pub sigma_r2: f64,
    /// Average interference cap per primary node.
    pub gamma: f64,
    /// Source power cap.
    pub ps_max: f64,
    /// Eligibility threshold on the relay-to-primary gains.
    pub alpha: f64,
    pub log_base: LogBase,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n: 100,
            m: 2,
            n_p: 1,
            sigma_s2: 1.0,
            sigma_d2: 1.0,
            sigma_p2: 1.0,
            sigma_sp2: 1.0,
            sigma_r2: 1.0,
            gamma: 5.0,
            ps_max: 10.0,
            alpha: 1.7,
            log_base: LogBase::Bits,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        if self.n_p == 0 {
            return Err(Error::InvalidConfig("n_p must be >= 1".into()));
        }
        positive("sigma_s2", self.sigma_s2)?;
        positive("sigma_d2", self.sigma_d2)?;
        positive("sigma_p2", self.sigma_p2)?;
        positive("sigma_sp2", self.sigma_sp2)?;
        if !(self.sigma_r2.is_finite() && self.sigma_r2 >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma_r2 must be finite and >= 0, got {}", self.sigma_r2)));
        }
        positive("gamma", self.gamma)?;
        positive("ps_max", self.ps_max)?;
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
        }
        match key.trim() {
            "n" => self.n = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "n_p" => self.n_p = num(key, value)?,
            "sigma_s2" => self.sigma_s2 = num(key, value)?,
            "sigma_d2" => self.sigma_d2 = num(key, value)?,
            "sigma_p2" => self.sigma_p2 = num(key, value)?,
            "sigma_sp2" => self.sigma_sp2 = num(key, value)?,
            "sigma_r2" => self.sigma_r2 = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "ps_max" => self.ps_max = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "log_base" => self.log_base = value.parse()?,
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. The result is
    /// validated.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_kv_str(&text)
    }

    /// Renders the config in the same `key = value` format it is parsed from.
    pub fn to_kv_string(&self) -> String {
        self.kv_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("n_p", self.n_p.to_string()),
            ("sigma_s2", self.sigma_s2.to_string()),
            ("sigma_d2", self.sigma_d2.to_string()),
            ("sigma_p2", self.sigma_p2.to_string()),
            ("sigma_sp2", self.sigma_sp2.to_string()),
            ("sigma_r2", self.sigma_r2.to_string()),
            ("gamma", self.gamma.to_string()),
            ("ps_max", self.ps_max.to_string()),
            ("alpha", self.alpha.to_string()),
            ("log_base", self.log_base.to_string()),
        ]
    }

    /// Residual relay interference budget γ_r = 2γ − σ_sp²·Ps.
    #[inline]
    pub fn residual_budget(&self, ps: f64) -> f64 {
        2.0 * self.gamma - self.sigma_sp2 * ps
    }

    /// Returns an error unless `ps` lies in (0, ps_max].
    pub fn check_source_power(&self, ps: f64) -> Result<()> {
        if ps.is_finite() && ps > 0.0 && ps <= self.ps_max {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("source power {ps} outside (0, {}]", self.ps_max)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        NetworkConfig::default().validate().unwrap();
    }

    #[test]
    fn kv_round_trip() {
        let cfg = NetworkConfig { n: 314, alpha: f64::INFINITY, log_base: LogBase::Nats, ..NetworkConfig::default() };
        let back = NetworkConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = NetworkConfig::from_kv_str("# defaults\n\nn = 40 # relays\nm=4\n").unwrap();
        assert_eq!(cfg.n, 40);
        assert_eq!(cfg.m, 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NetworkConfig::from_kv_str("n = 0").is_err());
        assert!(NetworkConfig::from_kv_str("gamma = -1").is_err());
        assert!(NetworkConfig::from_kv_str("alpha = -0.5").is_err());
        assert!(NetworkConfig::from_kv_str("bogus = 1").is_err());
        assert!(NetworkConfig::from_kv_str("n 4").is_err());
        assert!(NetworkConfig::from_kv_str("sigma_s2 = zero").is_err());
    }

    #[test]
    fn residual_budget() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.residual_budget(5.0), 5.0);
        assert_eq!(cfg.residual_budget(10.0), 0.0);
    }
}
