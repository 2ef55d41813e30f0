//! Full decoders mapping a pair of syndrome arrays to a data correction.

mod lut;
mod mtlnd;
mod mwpm;

pub use lut::{lut_key, LutEntry, LutL3Decoder};
pub use mtlnd::MtlndDecoder;
pub use mwpm::{defects, Defect, DetectionGraph, Matching, MatchingProblem, MwpmDecoder, DEFECT_CAP};

use crate::code::{BitRow, CheckType, PauliOperator, RscCode};
use crate::error::{Error, Result};
use crate::noise::SyndromePair;

/// A correction together with the per-type syndrome the decoder believes it
/// removes. `predicted[t.index()]` always equals the correction's syndrome
/// under checks of type `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub correction: PauliOperator,
    pub predicted: [BitRow; 2],
}

pub trait Decoder: Send + Sync {
    fn name(&self) -> &str;

    fn decode_full(&self, syndromes: &SyndromePair) -> Result<Decoded>;

    fn decode(&self, syndromes: &SyndromePair) -> Result<PauliOperator> {
        Ok(self.decode_full(syndromes)?.correction)
    }
}

/// Applies no correction.
#[derive(Clone, Debug)]
pub struct IdentityDecoder {
    num_data: usize,
    num_checks: usize,
}

impl IdentityDecoder {
    pub fn new(code: &RscCode) -> Self {
        Self {
            num_data: code.num_data(),
            num_checks: code.num_checks(),
        }
    }
}

impl Decoder for IdentityDecoder {
    fn name(&self) -> &str {
        "identity"
    }

    fn decode_full(&self, syndromes: &SyndromePair) -> Result<Decoded> {
        for t in CheckType::BOTH {
            ensure_checks(syndromes, t, self.num_checks)?;
        }
        Ok(Decoded {
            correction: PauliOperator::identity(self.num_data),
            predicted: [BitRow::zeros(self.num_checks), BitRow::zeros(self.num_checks)],
        })
    }
}

fn ensure_checks(syndromes: &SyndromePair, t: CheckType, checks: usize) -> Result<()> {
    let found = syndromes.get(t).checks();
    if found != checks {
        return Err(Error::SizeMismatch { expected: checks, found });
    }
    Ok(())
}

fn ensure_rounds(syndromes: &SyndromePair, rounds: usize) -> Result<()> {
    if syndromes.rounds() != rounds {
        return Err(Error::SizeMismatch {
            expected: rounds,
            found: syndromes.rounds(),
        });
    }
    Ok(())
}

/// Looks up a decoder name as used on the command line.
pub fn decoder_names() -> &'static [&'static str] {
    &["mtlnd", "mwpm", "lut", "identity"]
}
