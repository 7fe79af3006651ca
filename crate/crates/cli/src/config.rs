//! Flat `key = value` experiment configs.
//!
//! Blank lines and `#` comments are ignored; unknown keys, duplicate keys and
//! malformed values are errors. Command-line overrides are applied on top of
//! the file.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use su11_core::harness::CcParameters;
use su11_core::sampling::Window;
use su11_core::search::{sha256_hex, SearchConfig};
use su11_core::{ExponentPair, Precision, QuadratureConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Ratio,
    Ledger,
    Search,
    Sweep,
    Probe,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Ratio => "ratio",
            Mode::Ledger => "ledger",
            Mode::Search => "search",
            Mode::Sweep => "sweep",
            Mode::Probe => "probe",
        }
    }
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "verify" => Mode::Verify,
            "ratio" => Mode::Ratio,
            "ledger" => Mode::Ledger,
            "search" => Mode::Search,
            "sweep" => Mode::Sweep,
            "probe" => Mode::Probe,
            other => bail!("unknown mode {other:?}"),
        })
    }
}

/// Where the coefficient sequence comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A sequence file; `.json` is read as JSON, anything else as text.
    File(PathBuf),
    /// `random_sequence` on the search window with the configured seed.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub source: Option<Source>,
    pub p: f64,
    pub cc: CcParameters,
    pub quadrature: QuadratureConfig,
    pub search: SearchConfig,
    pub seed: u64,
    pub output: PathBuf,
    pub t_samples: usize,
    pub scales: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Random draws in the `verify` suites.
    pub draws: usize,
}

impl ExperimentConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            source: None,
            p: 1.5,
            cc: CcParameters::example(),
            quadrature: QuadratureConfig::default(),
            search: SearchConfig::default(),
            seed: 0,
            output: PathBuf::from("su11-out"),
            t_samples: 16,
            scales: vec![0.1, 0.05, 0.025, 0.0125],
            p_values: vec![1.1, 1.3, 1.5, 1.7, 1.9],
            draws: 100,
        }
    }

    /// Parses a config file body on top of the defaults for `mode`.
    pub fn parse(mode: Mode, text: &str) -> Result<Self> {
        let mut cfg = Self::defaults(mode);
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                bail!("line {}: duplicate key {key:?}", i + 1);
            }
            cfg.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(cfg)
    }

    /// Applies one setting; shared by the file parser and the overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => {
                let m: Mode = value.parse()?;
                if m != self.mode {
                    bail!("config is for mode {}, run as {}", m.name(), self.mode.name());
                }
            }
            "input" => self.source = Some(Source::File(PathBuf::from(value))),
            "generator" => match value {
                "random" => self.source = Some(Source::Random),
                other => bail!("unknown generator {other:?} (expected `random`)"),
            },
            "p" => self.p = num(key, value)?,
            "cc" => self.cc = parse_cc(value)?,
            "rel_tol" => self.quadrature.rel_tol = num(key, value)?,
            "initial_grid" => self.quadrature.initial_grid = num(key, value)?,
            "max_grid" => self.quadrature.max_grid = num(key, value)?,
            "precision" => {
                self.quadrature.precision = match value {
                    "binary64" => Precision::Binary64,
                    "extended" => Precision::Extended,
                    other => bail!("unknown precision {other:?}"),
                }
            }
            "window" => {
                let v: Vec<i64> = list(key, value)?;
                if v.len() != 2 {
                    bail!("window expects `lo,hi`");
                }
                self.search.window = Window::new(v[0], v[1])?;
            }
            "l1_cap" => self.search.l1_cap = num(key, value)?,
            "starts" => self.search.starts = num(key, value)?,
            "max_iters" => self.search.max_iters = num(key, value)?,
            "init_step" => self.search.init_step = num(key, value)?,
            "shrink" => self.search.shrink = num(key, value)?,
            "search_rel_tol" => self.search.search_rel_tol = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "t_samples" => self.t_samples = num(key, value)?,
            "scales" => self.scales = list(key, value)?,
            "p_values" => self.p_values = list(key, value)?,
            "draws" => self.draws = num(key, value)?,
            other => bail!("unknown key {other:?}"),
        }
        Ok(())
    }

    /// Checks the mode-specific requirements and syncs the nested configs.
    pub fn finish(mut self) -> Result<Self> {
        self.search.seed = self.seed;
        self.search.quadrature = self.quadrature;
        self.quadrature.validate()?;
        match self.mode {
            Mode::Ratio | Mode::Ledger | Mode::Probe if self.source.is_none() => {
                bail!("mode {} needs `input` or `generator`", self.mode.name())
            }
            Mode::Search | Mode::Sweep => self.search.validate()?,
            _ => {}
        }
        match self.mode {
            Mode::Sweep => {
                for p in &self.p_values {
                    ExponentPair::new(*p)?;
                }
                if self.p_values.is_empty() {
                    bail!("p_values is empty");
                }
            }
            Mode::Ratio => {
                ExponentPair::with_endpoints(self.p)?;
            }
            _ => {
                ExponentPair::new(self.p)?;
            }
        }
        if self.t_samples == 0 {
            bail!("t_samples must be positive");
        }
        if self.source == Some(Source::Random) && !(self.search.l1_cap > 0.0 && self.search.l1_cap < 1.0) {
            bail!("l1_cap {} not in (0, 1)", self.search.l1_cap);
        }
        Ok(self)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|v| num(key, v.trim())).collect()
}

/// `c,gamma,eta`.
pub fn parse_cc(value: &str) -> Result<CcParameters> {
    let v: Vec<f64> = list("cc", value)?;
    if v.len() != 3 {
        bail!("cc expects `c,gamma,eta`");
    }
    Ok(CcParameters::new(v[0], v[1], v[2])?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let text = "# sweep\np = 1.7\ncc = 1,2,0.5\nwindow = -1,4  # six entries\nscales = 0.2, 0.1,0.05\n\nseed = 9\n";
        let cfg = ExperimentConfig::parse(Mode::Probe, text).unwrap();
        assert_eq!(cfg.p, 1.7);
        assert_eq!(cfg.cc, CcParameters::new(1.0, 2.0, 0.5).unwrap());
        assert_eq!(cfg.search.window, Window::new(-1, 4).unwrap());
        assert_eq!(cfg.scales, vec![0.2, 0.1, 0.05]);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse(Mode::Ratio, "colour = red").is_err());
        assert!(ExperimentConfig::parse(Mode::Ratio, "p = 1.5\np = 1.6").is_err());
        assert!(ExperimentConfig::parse(Mode::Ratio, "p 1.5").is_err());
        assert!(ExperimentConfig::parse(Mode::Ratio, "p = one").is_err());
        assert!(ExperimentConfig::parse(Mode::Ratio, "mode = sweep").is_err());
        assert!(ExperimentConfig::parse(Mode::Ratio, "cc = 1,1").is_err());
        assert!(ExperimentConfig::defaults(Mode::Ratio).finish().is_err());
        let mut cfg = ExperimentConfig::defaults(Mode::Ledger);
        cfg.set("generator", "random").unwrap();
        cfg.p = 2.5;
        assert!(cfg.finish().is_err());
    }

    #[test]
    fn digest_tracks_settings() {
        let a = ExperimentConfig::defaults(Mode::Search);
        let mut b = a.clone();
        b.set("seed", "1").unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), ExperimentConfig::defaults(Mode::Search).digest());
    }
}
