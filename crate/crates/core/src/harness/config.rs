use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise::{NoiseModel, NoiseParams, Preset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Mtlnd,
    Mwpm,
    Lut,
    Identity,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Mtlnd => "mtlnd",
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::Lut => "lut",
            DecoderKind::Identity => "identity",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mtlnd" | "nn" => Ok(DecoderKind::Mtlnd),
            "mwpm" => Ok(DecoderKind::Mwpm),
            "lut" => Ok(DecoderKind::Lut),
            "identity" | "none" => Ok(DecoderKind::Identity),
            _ => Err(Error::Unknown {
                kind: "decoder",
                name: s.to_string(),
            }),
        }
    }
}

pub const MIN_TRAJECTORIES: usize = 400;
pub const ENV_PREFIX: &str = "RSCW_";

/// Settings of one evaluation run. Sources in increasing priority:
/// defaults, a `key=value` file, `RSCW_*` environment variables, flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub distance: usize,
    pub rounds: usize,
    pub preset: Preset,
    pub p: f64,
    pub model: NoiseModel,
    pub decoder: DecoderKind,
    pub trajectories: usize,
    pub allow_few_trajectories: bool,
    pub max_cycles: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub raw_output: Option<PathBuf>,
    pub weights_x: Option<PathBuf>,
    pub weights_z: Option<PathBuf>,
    pub lut: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            distance: 3,
            rounds: 3,
            preset: Preset::Standard,
            p: 0.004,
            model: NoiseModel::CircuitLevel,
            decoder: DecoderKind::Mwpm,
            trajectories: MIN_TRAJECTORIES,
            allow_few_trajectories: false,
            max_cycles: 1_000_000,
            seed: 0,
            output: None,
            raw_output: None,
            weights_x: None,
            weights_z: None,
            lut: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("bad value {value:?} for {key}"))),
    }
}

impl RunConfig {
    /// Sets one key; `L`/`T` are accepted for distance and rounds.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim().replace('-', "_");
        let v = value.trim();
        match k.to_ascii_lowercase().as_str() {
            "l" | "distance" => self.distance = parse(&k, v)?,
            "t" | "rounds" => self.rounds = parse(&k, v)?,
            "p" => self.p = parse(&k, v)?,
            "preset" => self.preset = v.parse()?,
            "model" => self.model = v.parse()?,
            "decoder" => self.decoder = v.parse()?,
            "trajectories" => self.trajectories = parse(&k, v)?,
            "allow_few_trajectories" => self.allow_few_trajectories = parse_bool(&k, v)?,
            "max_cycles" => self.max_cycles = parse(&k, v)?,
            "seed" => self.seed = parse(&k, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "raw_output" => self.raw_output = Some(PathBuf::from(v)),
            "weights_x" => self.weights_x = Some(PathBuf::from(v)),
            "weights_z" => self.weights_z = Some(PathBuf::from(v)),
            "lut" => self.lut = Some(PathBuf::from(v)),
            _ => {
                return Err(Error::Unknown {
                    kind: "config key",
                    name: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Variables named `RSCW_<KEY>`; others are ignored.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        for (k, v) in vars {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                self.set(key, &v)?;
            }
        }
        Ok(())
    }

    pub fn load<I>(file: Option<&Path>, env: I, flags: &[(String, String)]) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = Self::default();
        if let Some(path) = file {
            cfg.apply_text(&std::fs::read_to_string(path)?)?;
        }
        cfg.apply_env(env)?;
        for (k, v) in flags {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        crate::code::RscCode::new(self.distance)?;
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("T must be at least 1".into()));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidArgument("need at least one trajectory".into()));
        }
        if self.trajectories < MIN_TRAJECTORIES && !self.allow_few_trajectories {
            return Err(Error::InvalidArgument(format!(
                "{} trajectories requested; at least {MIN_TRAJECTORIES} unless allow_few_trajectories is set",
                self.trajectories
            )));
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidArgument("max_cycles must be positive".into()));
        }
        self.params()?;
        if self.rounds < self.distance || self.rounds > 2 * self.distance {
            log::warn!("T = {} outside the usual band L <= T <= 2L (L = {})", self.rounds, self.distance);
        }
        Ok(())
    }

    pub fn params(&self) -> Result<NoiseParams> {
        NoiseParams::preset(self.preset, self.p)?.with_model(self.model)
    }
}
