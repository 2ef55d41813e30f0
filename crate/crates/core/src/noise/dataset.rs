use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::circuit::{Circuit, RoundsOutcome};
use super::params::{NoiseModel, NoiseParams};
use super::syndrome::{LabeledSample, SyndromeArray, SyndromePair};
use crate::code::{BitRow, CheckType, HomologyLabel, PauliOperator, PureErrorTables, RscCode};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RSCD";
const VERSION: u16 = 1;

/// Generator for stream `stream` of `seed`. Every sample or trajectory gets
/// its own stream, so results do not depend on evaluation order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `s` and the class of `residual * T(s)` for both check types.
pub fn residual_labels(
    code: &RscCode,
    tables: &PureErrorTables,
    residual: &PauliOperator,
) -> Result<([HomologyLabel; 2], [BitRow; 2])> {
    let mut classes = [HomologyLabel::Trivial; 2];
    let mut syndromes = [BitRow::zeros(0), BitRow::zeros(0)];
    for t in CheckType::BOTH {
        let s = code.syndrome(residual, t)?;
        let mut clean = match t.detected() {
            crate::code::Pauli::X => residual.x_part(),
            _ => residual.z_part(),
        };
        clean *= &tables.get(t).pure_error(&s)?;
        classes[t.index()] = code.homology_class(&clean, t)?;
        syndromes[t.index()] = s;
    }
    Ok((classes, syndromes))
}

/// Attaches labels to an outcome: `s` is the syndrome of the residual and the
/// class is that of `residual * T(s)`.
pub fn label(
    code: &RscCode,
    tables: &PureErrorTables,
    outcome: RoundsOutcome,
) -> Result<LabeledSample> {
    let (label_class, label_s) = residual_labels(code, tables, &outcome.frame)?;
    Ok(LabeledSample {
        syndromes: outcome.syndromes,
        residual: outcome.frame,
        label_class,
        label_s,
    })
}

/// One labelled sample from `rounds` noisy rounds starting with clean data.
pub fn simulate_rounds(
    code: &RscCode,
    params: &NoiseParams,
    rounds: usize,
    seed: u64,
) -> Result<LabeledSample> {
    let generator = DatasetGenerator::new(code, *params, rounds, seed)?;
    generator.sample(0)
}

/// Deterministic sample source; sample `i` uses stream `i` of the seed.
#[derive(Clone, Debug)]
pub struct DatasetGenerator {
    code: RscCode,
    tables: PureErrorTables,
    circuit: Circuit,
    params: NoiseParams,
    seed: u64,
}

impl DatasetGenerator {
    pub fn new(code: &RscCode, params: NoiseParams, rounds: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            circuit: Circuit::new(code, rounds)?,
            tables: PureErrorTables::build(code),
            code: code.clone(),
            params,
            seed,
        })
    }

    pub fn code(&self) -> &RscCode {
        &self.code
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    pub fn sample(&self, index: u64) -> Result<LabeledSample> {
        let mut rng = stream_rng(self.seed, index);
        let id = PauliOperator::identity(self.code.num_data());
        let outcome = self.circuit.run(&self.params, &id, &mut rng)?;
        label(&self.code, &self.tables, outcome)
    }

    /// Samples `start..start + count` in order.
    pub fn stream(&self, start: u64, count: u64) -> impl Iterator<Item = Result<LabeledSample>> + '_ {
        (start..start + count).map(move |i| self.sample(i))
    }

    /// Same samples as [`Self::stream`], computed on the rayon pool.
    pub fn collect(&self, start: u64, count: u64) -> Result<Vec<LabeledSample>> {
        (start..start + count)
            .into_par_iter()
            .map(|i| self.sample(i))
            .collect()
    }

    pub fn header(&self, count: u64) -> DatasetHeader {
        DatasetHeader {
            distance: self.code.distance(),
            rounds: self.circuit.rounds(),
            params: self.params,
            count,
        }
    }
}

/// `n_samples` i.i.d. samples, deterministic in `seed`.
pub fn generate_dataset(
    code: &RscCode,
    params: &NoiseParams,
    rounds: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    DatasetGenerator::new(code, *params, rounds, seed)?.collect(0, n_samples as u64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetHeader {
    pub distance: usize,
    pub rounds: usize,
    pub params: NoiseParams,
    pub count: u64,
}

impl DatasetHeader {
    fn checks(&self) -> usize {
        (self.distance * self.distance - 1) / 2
    }

    fn bits_per_sample(&self) -> usize {
        let n = self.distance * self.distance;
        let nc = self.checks();
        2 * self.rounds * nc + 2 * n + 2 + 2 * nc
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u16::<LittleEndian>(self.distance as u16)?;
        w.write_u16::<LittleEndian>(self.rounds as u16)?;
        w.write_u8(match self.params.model {
            NoiseModel::CircuitLevel => 0,
            NoiseModel::Phenomenological => 1,
        })?;
        w.write_u8(0)?;
        w.write_f64::<LittleEndian>(self.params.p_s)?;
        w.write_f64::<LittleEndian>(self.params.p_g)?;
        w.write_f64::<LittleEndian>(self.params.p_m)?;
        w.write_u64::<LittleEndian>(self.count)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a dataset file".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported dataset version {version}")));
        }
        let distance = r.read_u16::<LittleEndian>()? as usize;
        let rounds = r.read_u16::<LittleEndian>()? as usize;
        let model = match r.read_u8()? {
            0 => NoiseModel::CircuitLevel,
            1 => NoiseModel::Phenomenological,
            m => return Err(Error::Format(format!("bad noise model tag {m}"))),
        };
        r.read_u8()?;
        let p_s = r.read_f64::<LittleEndian>()?;
        let p_g = r.read_f64::<LittleEndian>()?;
        let p_m = r.read_f64::<LittleEndian>()?;
        let count = r.read_u64::<LittleEndian>()?;
        RscCode::new(distance)?;
        Ok(Self {
            distance,
            rounds,
            params: NoiseParams::new(p_s, p_g, p_m, model)?,
            count,
        })
    }

    /// Packs one sample into its byte-aligned record.
    pub fn encode(&self, sample: &LabeledSample) -> Vec<u8> {
        let mut bits = Vec::with_capacity(self.bits_per_sample());
        bits.extend(sample.syndromes.x.as_slice().iter().map(|&b| b == 1));
        bits.extend(sample.syndromes.z.as_slice().iter().map(|&b| b == 1));
        bits.extend(sample.residual.x_bits().iter());
        bits.extend(sample.residual.z_bits().iter());
        bits.push(sample.label_class[0].bit());
        bits.push(sample.label_class[1].bit());
        bits.extend(sample.label_s[0].iter());
        bits.extend(sample.label_s[1].iter());
        BitRow::from_bools(bits).to_le_bytes()
    }

    pub fn decode(&self, record: &[u8]) -> Result<LabeledSample> {
        let n = self.distance * self.distance;
        let nc = self.checks();
        let row = BitRow::from_le_bytes(self.bits_per_sample(), record);
        let mut at = 0;
        let mut take = |len: usize| {
            let out = BitRow::from_bools((at..at + len).map(|i| row.get(i)));
            at += len;
            out
        };
        let sx = take(self.rounds * nc);
        let sz = take(self.rounds * nc);
        let rx = take(n);
        let rz = take(n);
        let classes = take(2);
        let lx = take(nc);
        let lz = take(nc);
        use crate::code::HomologyLabel;
        Ok(LabeledSample {
            syndromes: SyndromePair {
                x: SyndromeArray::from_bitrow(self.rounds, nc, &sx)?,
                z: SyndromeArray::from_bitrow(self.rounds, nc, &sz)?,
            },
            residual: PauliOperator::from_parts(rx, rz)?,
            label_class: [
                HomologyLabel::from_bit(classes.get(0)),
                HomologyLabel::from_bit(classes.get(1)),
            ],
            label_s: [lx, lz],
        })
    }

    pub fn record_len(&self) -> usize {
        self.bits_per_sample().div_ceil(8)
    }
}

pub fn write_dataset<'a, W: Write>(
    w: &mut W,
    header: &DatasetHeader,
    samples: impl IntoIterator<Item = &'a LabeledSample>,
) -> Result<()> {
    header.write_to(w)?;
    let mut written = 0u64;
    for s in samples {
        w.write_all(&header.encode(s))?;
        written += 1;
    }
    if written != header.count {
        return Err(Error::SizeMismatch {
            expected: header.count as usize,
            found: written as usize,
        });
    }
    Ok(())
}

pub fn read_dataset<R: Read>(r: &mut R) -> Result<(DatasetHeader, Vec<LabeledSample>)> {
    let header = DatasetHeader::read_from(r)?;
    let mut record = vec![0u8; header.record_len()];
    let mut samples = Vec::with_capacity(header.count.min(1 << 24) as usize);
    for _ in 0..header.count {
        r.read_exact(&mut record)?;
        samples.push(header.decode(&record)?);
    }
    Ok((header, samples))
}
