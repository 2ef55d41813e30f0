use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{ensure_checks, ensure_rounds, Decoded, Decoder};
use crate::code::{BitRow, CheckType, HomologyLabel, PauliOperator, PureErrorTables, RscCode};
use crate::error::{Error, Result};
use crate::noise::{DatasetGenerator, LabeledSample, NoiseParams, Preset, SyndromeArray, SyndromePair};

const MAGIC: &[u8; 4] = b"L3LU";
const CHECKS: usize = 4;
const MAX_ROUNDS: usize = 4;

/// Raw syndrome bit `(t, k)` lands at bit `4t + k`.
pub fn lut_key(syndromes: &SyndromeArray) -> usize {
    let mut key = 0;
    for t in 0..syndromes.rounds() {
        for k in 0..syndromes.checks() {
            if syndromes.get(t, k) {
                key |= 1 << (syndromes.checks() * t + k);
            }
        }
    }
    key
}

/// Most frequent label seen for one key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LutEntry {
    pub class: bool,
    pub s: u8,
    pub count: u32,
}

impl LutEntry {
    fn packed(&self) -> u8 {
        (self.class as u8) << 4 | self.s
    }
}

/// Distance-3 decoder that looks up the majority label of the full raw
/// syndrome history.
#[derive(Clone, Debug)]
pub struct LutL3Decoder {
    code: RscCode,
    tables: PureErrorTables,
    preset: Preset,
    rounds: usize,
    entries: [Vec<Option<LutEntry>>; 2],
}

fn check_shape(code: &RscCode, rounds: usize) -> Result<()> {
    if code.distance() != 3 {
        return Err(Error::InvalidDistance(code.distance()));
    }
    if !(1..=MAX_ROUNDS).contains(&rounds) {
        return Err(Error::InvalidArgument(format!(
            "lookup table supports 1..={MAX_ROUNDS} rounds, got {rounds}"
        )));
    }
    Ok(())
}

impl LutL3Decoder {
    /// Majority labels over `samples`; ties go to the lowest packed label.
    pub fn build<'a, I>(code: &RscCode, preset: Preset, rounds: usize, samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LabeledSample>,
    {
        Self::tally(code, preset, rounds, samples.into_iter().map(Ok))
    }

    /// Builds from `count` freshly simulated samples without holding them.
    pub fn generate(code: &RscCode, params: NoiseParams, preset: Preset, rounds: usize, count: u64, seed: u64) -> Result<Self> {
        check_shape(code, rounds)?;
        let generator = DatasetGenerator::new(code, params, rounds, seed)?;
        Self::tally(code, preset, rounds, generator.stream(0, count))
    }

    fn tally<S, I>(code: &RscCode, preset: Preset, rounds: usize, samples: I) -> Result<Self>
    where
        S: std::borrow::Borrow<LabeledSample>,
        I: Iterator<Item = Result<S>>,
    {
        check_shape(code, rounds)?;
        let keys = 1usize << (CHECKS * rounds);
        let mut counts = [vec![[0u32; 32]; keys], vec![[0u32; 32]; keys]];
        for sample in samples {
            let sample = sample?;
            let sample = sample.borrow();
            if sample.syndromes.rounds() != rounds {
                return Err(Error::SizeMismatch {
                    expected: rounds,
                    found: sample.syndromes.rounds(),
                });
            }
            for t in CheckType::BOTH {
                let key = lut_key(sample.syndromes.get(t));
                let label = (sample.class(t).bit() as usize) << 4 | sample.s(t).field(0, CHECKS) as usize;
                let c = &mut counts[t.index()][key][label];
                *c = c.saturating_add(1);
            }
        }
        let majority = |table: &Vec<[u32; 32]>| -> Vec<Option<LutEntry>> {
            table
                .iter()
                .map(|c| {
                    let (label, &count) = c
                        .iter()
                        .enumerate()
                        .fold((0, &0u32), |best, cur| if cur.1 > best.1 { cur } else { best });
                    (count > 0).then_some(LutEntry {
                        class: label >> 4 == 1,
                        s: (label & 0xF) as u8,
                        count,
                    })
                })
                .collect()
        };
        Ok(Self {
            code: code.clone(),
            tables: PureErrorTables::build(code),
            preset,
            rounds,
            entries: [majority(&counts[0]), majority(&counts[1])],
        })
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn entry(&self, t: CheckType, key: usize) -> Option<LutEntry> {
        self.entries[t.index()].get(key).copied().flatten()
    }

    /// Keys observed at least once.
    pub fn entry_count(&self, t: CheckType) -> usize {
        self.entries[t.index()].iter().flatten().count()
    }

    /// Stored label, or class 0 with the last-round syndrome for unseen keys.
    pub fn lookup(&self, t: CheckType, syndromes: &SyndromeArray) -> (HomologyLabel, BitRow) {
        match self.entry(t, lut_key(syndromes)) {
            Some(e) => {
                let mut s = BitRow::zeros(CHECKS);
                s.set_field(0, CHECKS, e.s as u64);
                (HomologyLabel::from_bit(e.class), s)
            }
            None => (HomologyLabel::Trivial, syndromes.last_round()),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u8(self.preset.id())?;
        w.write_u8(self.rounds as u8)?;
        w.write_u16::<LittleEndian>(0)?;
        for table in &self.entries {
            for e in table {
                let (label, count) = e.map_or((0, 0), |e| (e.packed(), e.count));
                w.write_u8(label)?;
                w.write_u32::<LittleEndian>(count)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a lookup-table file".into()));
        }
        let preset = Preset::from_id(r.read_u8()?).ok_or_else(|| Error::Format("unknown preset id".into()))?;
        let rounds = r.read_u8()? as usize;
        r.read_u16::<LittleEndian>()?;
        let code = RscCode::new(3)?;
        check_shape(&code, rounds).map_err(|e| Error::Format(e.to_string()))?;
        let keys = 1usize << (CHECKS * rounds);
        let mut read_table = || -> Result<Vec<Option<LutEntry>>> {
            (0..keys)
                .map(|_| {
                    let label = r.read_u8()?;
                    let count = r.read_u32::<LittleEndian>()?;
                    if label >> 5 != 0 {
                        return Err(Error::Format(format!("bad label byte {label:#x}")));
                    }
                    Ok((count > 0).then_some(LutEntry {
                        class: label >> 4 == 1,
                        s: label & 0xF,
                        count,
                    }))
                })
                .collect()
        };
        let x = read_table()?;
        let z = read_table()?;
        Ok(Self {
            tables: PureErrorTables::build(&code),
            code,
            preset,
            rounds,
            entries: [x, z],
        })
    }
}

impl Decoder for LutL3Decoder {
    fn name(&self) -> &str {
        "lut"
    }

    fn decode_full(&self, syndromes: &SyndromePair) -> Result<Decoded> {
        ensure_rounds(syndromes, self.rounds)?;
        let mut correction = PauliOperator::identity(self.code.num_data());
        let mut predicted = [BitRow::zeros(0), BitRow::zeros(0)];
        for t in CheckType::BOTH {
            ensure_checks(syndromes, t, CHECKS)?;
            let (class, s) = self.lookup(t, syndromes.get(t));
            correction *= &self.tables.get(t).combine_error(&self.code, class, &s)?;
            predicted[t.index()] = s;
        }
        Ok(Decoded { correction, predicted })
    }
}
