//! Experiment configuration: a flat `key = value` file, overridable field
//! by field from the command line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::channel::SEPARABLE_NOISE;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Simulate,
    Threshold,
    Tomography,
    PovmCheck,
    Compare,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Analytic,
        Mode::Simulate,
        Mode::Threshold,
        Mode::Tomography,
        Mode::PovmCheck,
        Mode::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::Threshold => "threshold",
            Mode::Tomography => "tomography",
            Mode::PovmCheck => "povm-check",
            Mode::Compare => "compare",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| bad(format!("unknown mode `{s}`")))
    }
}

/// Parses a decimal number or a fraction `a/b`.
pub fn parse_number(s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad(format!("bad number `{s}`")))?;
            let b: f64 = b.trim().parse().map_err(|_| bad(format!("bad number `{s}`")))?;
            a / b
        }
        None => s.parse().map_err(|_| bad(format!("bad number `{s}`")))?,
    };
    if !value.is_finite() {
        return Err(bad(format!("`{s}` is not a finite number")));
    }
    Ok(value)
}

/// A single noise value or an inclusive grid `start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsSpec {
    Single(f64),
    Grid { start: f64, stop: f64, step: f64 },
}

impl EpsSpec {
    pub fn grid(start: f64, stop: f64, step: f64) -> Result<Self, ConfigError> {
        if step <= 0.0 {
            return Err(bad(format!("grid step must be positive, got {step}")));
        }
        if start > stop {
            return Err(bad(format!("grid start {start} exceeds stop {stop}")));
        }
        Ok(EpsSpec::Grid { start, stop, step })
    }

    pub fn parse_grid(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid `{s}` is not START:STOP:STEP")));
        }
        Self::grid(
            parse_number(parts[0])?,
            parse_number(parts[1])?,
            parse_number(parts[2])?,
        )
    }

    /// Grid points; the stop value is included when it lies on the grid up
    /// to rounding.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            EpsSpec::Single(x) => vec![x],
            EpsSpec::Grid { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=count)
                    .map(|i| (start + i as f64 * step).min(stop))
                    .collect()
            }
        }
    }
}

impl fmt::Display for EpsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsSpec::Single(x) => write!(f, "{x}"),
            EpsSpec::Grid { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

/// How Eve's measurement is chosen where it matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuPolicy {
    /// Always the 4-member POVM.
    Four,
    /// The 5-member POVM with μ optimized per noise value.
    Optimal,
    /// The 5-member POVM with a fixed μ.
    Fixed(f64),
}

impl fmt::Display for MuPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuPolicy::Four => f.write_str("four"),
            MuPolicy::Optimal => f.write_str("optimal"),
            MuPolicy::Fixed(mu) => write!(f, "fixed:{mu}"),
        }
    }
}

impl FromStr for MuPolicy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "four" => Ok(MuPolicy::Four),
            "optimal" => Ok(MuPolicy::Optimal),
            _ => match s.strip_prefix("fixed:") {
                Some(v) => {
                    let mu = parse_number(v)?;
                    if !(0.0..=0.5).contains(&mu) {
                        return Err(bad(format!("mu = {mu} outside [0, 1/2]")));
                    }
                    Ok(MuPolicy::Fixed(mu))
                }
                None => Err(bad(format!(
                    "unknown mu policy `{s}` (four | optimal | fixed:MU)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub eps: EpsSpec,
    pub pairs: usize,
    pub max_iter: u32,
    pub seed: u64,
    pub phi: f64,
    pub mu_policy: MuPolicy,
    pub bootstrap: usize,
    pub out: Option<PathBuf>,
    pub overlay: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Analytic,
            eps: EpsSpec::Grid {
                start: 0.0,
                stop: SEPARABLE_NOISE,
                step: 1.0 / 300.0,
            },
            pairs: 1_000_000,
            max_iter: crate::keygen::DEFAULT_MAX_ITER,
            seed: 0,
            phi: 0.0,
            mu_policy: MuPolicy::Four,
            bootstrap: 200,
            out: None,
            overlay: None,
        }
    }
}

/// Keys accepted in config files and by [`ExperimentConfig::set`].
pub const CONFIG_KEYS: [&str; 11] = [
    "mode",
    "eps",
    "eps_grid",
    "pairs",
    "max_iter",
    "seed",
    "phi",
    "mu_policy",
    "bootstrap",
    "out",
    "overlay",
];

fn parse_int<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .replace('_', "")
        .parse()
        .map_err(|_| bad(format!("bad value `{value}` for {key}")))
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "mode" => self.mode = value.parse()?,
            "eps" => self.eps = EpsSpec::Single(parse_number(value)?),
            "eps_grid" => self.eps = EpsSpec::parse_grid(value)?,
            "pairs" => self.pairs = parse_int(key, value)?,
            "max_iter" => self.max_iter = parse_int(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "phi" => self.phi = parse_number(value)?,
            "mu_policy" => self.mu_policy = value.parse()?,
            "bootstrap" => self.bootstrap = parse_int(key, value)?,
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            "overlay" => self.overlay = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Err(bad(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of the current values. Blank
    /// lines and lines starting with `#` are ignored.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| bad(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(())
    }

    pub fn from_file_contents(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_file_contents(text)?;
        Ok(cfg)
    }

    /// Checks cross-field constraints for the selected mode.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for e in self.eps.points() {
            if !(0.0..=1.0).contains(&e) {
                return Err(bad(format!("noise value {e} outside [0, 1]")));
            }
        }
        if self.max_iter == 0 {
            return Err(bad("max_iter must be at least 1"));
        }
        if !self.phi.is_finite() {
            return Err(bad("phi must be finite"));
        }
        match self.mode {
            Mode::Simulate | Mode::Tomography if self.pairs < 2 => {
                return Err(bad(format!("{} mode needs pairs >= 2", self.mode)))
            }
            _ => {}
        }
        let needs_physical = matches!(
            self.mode,
            Mode::Analytic | Mode::Compare | Mode::PovmCheck | Mode::Simulate
        );
        if needs_physical {
            if let Some(e) = self
                .eps
                .points()
                .into_iter()
                .find(|&e| e > SEPARABLE_NOISE + 1e-12)
            {
                return Err(bad(format!(
                    "{} mode is defined for noise up to 2/3, got {e}",
                    self.mode
                )));
            }
        }
        if matches!(self.mode, Mode::Analytic | Mode::Compare | Mode::Threshold)
            && self.max_iter > crate::security::MAX_EXACT_ITER
        {
            return Err(bad(format!(
                "max_iter {} exceeds the exact-summation limit {}",
                self.max_iter,
                crate::security::MAX_EXACT_ITER
            )));
        }
        Ok(())
    }

    /// Every field as `key = value`, in [`CONFIG_KEYS`] order, readable by
    /// [`ExperimentConfig::from_file_contents`].
    pub fn dump(&self) -> String {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let (eps_key, eps) = match &self.eps {
            EpsSpec::Single(_) => ("eps", self.eps.to_string()),
            EpsSpec::Grid { .. } => ("eps_grid", self.eps.to_string()),
        };
        let mut out = String::new();
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!("{eps_key} = {eps}\n"));
        out.push_str(&format!("pairs = {}\n", self.pairs));
        out.push_str(&format!("max_iter = {}\n", self.max_iter));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("phi = {}\n", self.phi));
        out.push_str(&format!("mu_policy = {}\n", self.mu_policy));
        out.push_str(&format!("bootstrap = {}\n", self.bootstrap));
        out.push_str(&format!("out = {}\n", path(&self.out)));
        out.push_str(&format!("overlay = {}\n", path(&self.overlay)));
        out
    }

    /// SHA-256 of the fields that determine the output body (the output
    /// path is excluded).
    pub fn hash(&self) -> String {
        let mut copy = self.clone();
        copy.out = None;
        hex::encode(Sha256::digest(copy.dump().as_bytes()))
    }
}
