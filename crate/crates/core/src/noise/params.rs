use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NoiseModel {
    #[default]
    CircuitLevel,
    /// Storage and measurement faults only; CNOTs are ideal.
    Phenomenological,
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circuit" | "circuit-level" => Ok(NoiseModel::CircuitLevel),
            "phenomenological" | "phenom" => Ok(NoiseModel::Phenomenological),
            _ => Err(Error::Unknown {
                kind: "noise model",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseModel::CircuitLevel => "circuit",
            NoiseModel::Phenomenological => "phenomenological",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `p_s = p_g = p_m = p`.
    Standard,
    /// 1:3:5 ratio, `(0.0024, 0.0072, 0.012)`.
    Reweighted,
    /// Effective parameters of Google's distance-3/5 experiment.
    Google,
}

impl Preset {
    pub fn id(self) -> u8 {
        match self {
            Preset::Standard => 0,
            Preset::Reweighted => 1,
            Preset::Google => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Preset> {
        match id {
            0 => Some(Preset::Standard),
            1 => Some(Preset::Reweighted),
            2 => Some(Preset::Google),
            _ => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(Preset::Standard),
            "reweighted" => Ok(Preset::Reweighted),
            "google" => Ok(Preset::Google),
            _ => Err(Error::Unknown {
                kind: "noise preset",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Standard => "standard",
            Preset::Reweighted => "reweighted",
            Preset::Google => "google",
        })
    }
}

/// Per-location fault probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// Storage error per data qubit per round, split evenly over X, Y, Z.
    pub p_s: f64,
    /// Two-qubit Pauli after each CNOT, split evenly over the 15 non-identity pairs.
    pub p_g: f64,
    /// Readout flip per ancilla measurement.
    pub p_m: f64,
    pub model: NoiseModel,
}

impl NoiseParams {
    pub fn new(p_s: f64, p_g: f64, p_m: f64, model: NoiseModel) -> Result<Self> {
        for (name, p) in [("p_s", p_s), ("p_g", p_g), ("p_m", p_m)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} not in [0, 1)")));
            }
        }
        let p_g = match model {
            NoiseModel::CircuitLevel => p_g,
            NoiseModel::Phenomenological => 0.0,
        };
        Ok(Self {
            p_s,
            p_g,
            p_m,
            model,
        })
    }

    pub fn circuit(p_s: f64, p_g: f64, p_m: f64) -> Result<Self> {
        Self::new(p_s, p_g, p_m, NoiseModel::CircuitLevel)
    }

    pub fn uniform(p: f64, model: NoiseModel) -> Result<Self> {
        Self::new(p, p, p, model)
    }

    pub fn noiseless() -> Self {
        Self {
            p_s: 0.0,
            p_g: 0.0,
            p_m: 0.0,
            model: NoiseModel::CircuitLevel,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_s == 0.0 && self.p_g == 0.0 && self.p_m == 0.0
    }

    /// `p` is used only by [`Preset::Standard`].
    pub fn preset(preset: Preset, p: f64) -> Result<Self> {
        match preset {
            Preset::Standard => Self::uniform(p, NoiseModel::CircuitLevel),
            Preset::Reweighted => Self::circuit(0.0024, 0.0072, 0.012),
            Preset::Google => Self::circuit(0.004, 0.005, 0.018),
        }
    }

    /// Same parameters under a different model.
    pub fn with_model(self, model: NoiseModel) -> Result<Self> {
        Self::new(self.p_s, self.p_g, self.p_m, model)
    }
}

/// Looks a preset up by name.
pub fn preset(name: &str, p: f64) -> Result<NoiseParams> {
    NoiseParams::preset(name.parse()?, p)
}
