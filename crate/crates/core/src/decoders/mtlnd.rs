use super::{ensure_checks, ensure_rounds, Decoded, Decoder};
use crate::code::{BitRow, CheckType, HomologyLabel, PauliOperator, PureErrorTables, RscCode};
use crate::error::{Error, Result};
use crate::neural::{FloatNetwork, NetworkSpec, QuantizedNetwork};
use crate::noise::{SyndromeArray, SyndromePair};
use crate::training::head_predictions;

#[derive(Clone, Debug)]
enum Net {
    Quantized(QuantizedNetwork),
    Float(FloatNetwork<f32>),
}

impl Net {
    fn spec(&self) -> &NetworkSpec {
        match self {
            Net::Quantized(n) => &n.spec,
            Net::Float(n) => &n.spec,
        }
    }

    fn argmax(&self, syndromes: &SyndromeArray) -> Result<Vec<usize>> {
        Ok(match self {
            Net::Quantized(n) => n.forward(syndromes)?.argmax(),
            Net::Float(n) => n.forward(syndromes)?.argmax(),
        })
    }
}

/// Two per-type networks plus error combination. The network fed with
/// Z-check syndromes yields the X part of the correction and vice versa.
#[derive(Clone, Debug)]
pub struct MtlndDecoder {
    code: RscCode,
    tables: PureErrorTables,
    nets: [Net; 2],
}

impl MtlndDecoder {
    /// Integer inference, as run on the hardware.
    pub fn quantized(code: &RscCode, tables: PureErrorTables, x: QuantizedNetwork, z: QuantizedNetwork) -> Result<Self> {
        Self::new(code, tables, [Net::Quantized(x), Net::Quantized(z)])
    }

    pub fn float(code: &RscCode, tables: PureErrorTables, x: FloatNetwork<f32>, z: FloatNetwork<f32>) -> Result<Self> {
        Self::new(code, tables, [Net::Float(x), Net::Float(z)])
    }

    fn new(code: &RscCode, tables: PureErrorTables, nets: [Net; 2]) -> Result<Self> {
        for t in CheckType::BOTH {
            let spec = nets[t.index()].spec();
            if spec.check_type != t {
                return Err(Error::InvalidNetwork(format!(
                    "expected a network for {t} checks, found {}",
                    spec.check_type
                )));
            }
            if spec.distance != code.distance() {
                return Err(Error::SizeMismatch {
                    expected: code.distance(),
                    found: spec.distance,
                });
            }
            if tables.get(t).distance() != code.distance() {
                return Err(Error::SizeMismatch {
                    expected: code.distance(),
                    found: tables.get(t).distance(),
                });
            }
        }
        if nets[0].spec().rounds != nets[1].spec().rounds {
            return Err(Error::SizeMismatch {
                expected: nets[0].spec().rounds,
                found: nets[1].spec().rounds,
            });
        }
        Ok(Self {
            code: code.clone(),
            tables,
            nets,
        })
    }

    pub fn rounds(&self) -> usize {
        self.nets[0].spec().rounds
    }

    /// Predicted `(class, s)` for one check type.
    pub fn predict(&self, t: CheckType, syndromes: &SyndromeArray) -> Result<(HomologyLabel, BitRow)> {
        let net = &self.nets[t.index()];
        let argmax = net.argmax(syndromes)?;
        let (class, s) = head_predictions(net.spec(), &argmax, t)
            .ok_or_else(|| Error::InvalidNetwork("head count does not match the network spec".into()))?;
        Ok((HomologyLabel::from_bit(class), s))
    }
}

impl Decoder for MtlndDecoder {
    fn name(&self) -> &str {
        "mtlnd"
    }

    fn decode_full(&self, syndromes: &SyndromePair) -> Result<Decoded> {
        ensure_rounds(syndromes, self.rounds())?;
        let mut correction = PauliOperator::identity(self.code.num_data());
        let mut predicted = [BitRow::zeros(0), BitRow::zeros(0)];
        for t in CheckType::BOTH {
            ensure_checks(syndromes, t, self.code.num_checks())?;
            let (class, s) = self.predict(t, syndromes.get(t))?;
            correction *= &self.tables.get(t).combine_error(&self.code, class, &s)?;
            predicted[t.index()] = s;
        }
        Ok(Decoded { correction, predicted })
    }
}
