use crate::code::{BitRow, CheckType, HomologyLabel, PauliOperator};
use crate::error::{Error, Result};

/// Raw per-round measurement outcomes of one check type, `rounds x checks`,
/// stored row-major with one byte per bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SyndromeArray {
    rounds: usize,
    checks: usize,
    bits: Vec<u8>,
}

impl SyndromeArray {
    pub fn zeros(rounds: usize, checks: usize) -> Self {
        Self {
            rounds,
            checks,
            bits: vec![0; rounds * checks],
        }
    }

    pub fn from_bits(rounds: usize, checks: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rounds * checks {
            return Err(Error::SizeMismatch {
                expected: rounds * checks,
                found: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("syndrome bits must be 0 or 1".into()));
        }
        Ok(Self {
            rounds,
            checks,
            bits,
        })
    }

    #[inline]
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    #[inline]
    pub fn checks(&self) -> usize {
        self.checks
    }

    #[inline]
    pub fn get(&self, round: usize, check: usize) -> bool {
        self.bits[round * self.checks + check] == 1
    }

    #[inline]
    pub fn set(&mut self, round: usize, check: usize, value: bool) {
        self.bits[round * self.checks + check] = value as u8;
    }

    #[inline]
    pub fn flip(&mut self, round: usize, check: usize) {
        self.bits[round * self.checks + check] ^= 1;
    }

    pub fn row(&self, round: usize) -> &[u8] {
        &self.bits[round * self.checks..(round + 1) * self.checks]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn hamming_weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Each round XORed with the previous one; round 0 against all-zero.
    pub fn detection_events(&self) -> SyndromeArray {
        let mut out = self.clone();
        for t in (1..self.rounds).rev() {
            for k in 0..self.checks {
                out.bits[t * self.checks + k] ^= self.bits[(t - 1) * self.checks + k];
            }
        }
        out
    }

    pub fn last_round(&self) -> BitRow {
        if self.rounds == 0 {
            return BitRow::zeros(self.checks);
        }
        BitRow::from_bools(self.row(self.rounds - 1).iter().map(|&b| b == 1))
    }

    pub fn to_bitrow(&self) -> BitRow {
        BitRow::from_bools(self.bits.iter().map(|&b| b == 1))
    }

    pub fn from_bitrow(rounds: usize, checks: usize, row: &BitRow) -> Result<Self> {
        if row.len() != rounds * checks {
            return Err(Error::SizeMismatch {
                expected: rounds * checks,
                found: row.len(),
            });
        }
        Ok(Self {
            rounds,
            checks,
            bits: row.iter().map(u8::from).collect(),
        })
    }
}

/// Syndromes of both check types from the same rounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SyndromePair {
    pub x: SyndromeArray,
    pub z: SyndromeArray,
}

impl SyndromePair {
    pub fn zeros(rounds: usize, checks: usize) -> Self {
        Self {
            x: SyndromeArray::zeros(rounds, checks),
            z: SyndromeArray::zeros(rounds, checks),
        }
    }

    pub fn get(&self, t: CheckType) -> &SyndromeArray {
        match t {
            CheckType::X => &self.x,
            CheckType::Z => &self.z,
        }
    }

    pub fn get_mut(&mut self, t: CheckType) -> &mut SyndromeArray {
        match t {
            CheckType::X => &mut self.x,
            CheckType::Z => &mut self.z,
        }
    }

    pub fn rounds(&self) -> usize {
        self.x.rounds()
    }

    pub fn hamming_weight(&self) -> usize {
        self.x.hamming_weight() + self.z.hamming_weight()
    }
}

/// Training/evaluation sample: syndromes plus labels derived from the true
/// residual error left on the data qubits after the last round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSample {
    pub syndromes: SyndromePair,
    pub residual: PauliOperator,
    /// Indexed by [`CheckType::index`].
    pub label_class: [HomologyLabel; 2],
    pub label_s: [BitRow; 2],
}

impl LabeledSample {
    pub fn class(&self, t: CheckType) -> HomologyLabel {
        self.label_class[t.index()]
    }

    pub fn s(&self, t: CheckType) -> &BitRow {
        &self.label_s[t.index()]
    }
}
