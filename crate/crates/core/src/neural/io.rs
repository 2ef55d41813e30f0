use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::float::{FloatWeights, LayerParams};
use super::quant::{QuantLayer, QuantizedNetwork};
use super::spec::{Activation, HeadSpec, LayerKind, LayerSpec, NetworkSpec, Placement, Shape3};
use crate::code::CheckType;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MTLW";
const VERSION: u16 = 1;
const FLOAT: u8 = 0;
const QUANT: u8 = 1;

/// Contents of a weight file.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFile {
    Float(NetworkSpec, FloatWeights<f32>),
    Quantized(QuantizedNetwork),
}

impl WeightFile {
    pub fn spec(&self) -> &NetworkSpec {
        match self {
            WeightFile::Float(spec, _) => spec,
            WeightFile::Quantized(q) => &q.spec,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let spec = self.spec();
        let layers = spec.layers();
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u8(match self {
            WeightFile::Float(..) => FLOAT,
            WeightFile::Quantized(_) => QUANT,
        })?;
        w.write_u8(spec.check_type.tag())?;
        w.write_u16::<LittleEndian>(spec.distance as u16)?;
        w.write_u16::<LittleEndian>(spec.rounds as u16)?;
        w.write_u16::<LittleEndian>(spec.piece_sizes.len() as u16)?;
        w.write_u16::<LittleEndian>(layers.len() as u16)?;
        for d in spec.input.as_array() {
            w.write_u16::<LittleEndian>(d as u16)?;
        }
        w.write_f32::<LittleEndian>(match self {
            WeightFile::Float(..) => 1.0,
            WeightFile::Quantized(q) => q.input_scale,
        })?;
        for (idx, (placement, layer)) in layers.iter().enumerate() {
            write_layer_header(w, placement, layer)?;
            match self {
                WeightFile::Float(_, weights) => {
                    let p = &weights.layers[idx];
                    for v in &p.weights {
                        w.write_f32::<LittleEndian>(*v)?;
                    }
                    for v in &p.bias {
                        w.write_f32::<LittleEndian>(*v)?;
                    }
                }
                WeightFile::Quantized(q) => {
                    let l = &q.layers[idx];
                    w.write_f32::<LittleEndian>(l.weight_scale)?;
                    w.write_f32::<LittleEndian>(l.input_scale)?;
                    w.write_f32::<LittleEndian>(l.output_scale.unwrap_or(0.0))?;
                    w.write_f32::<LittleEndian>(l.activation_max)?;
                    for v in &l.weights {
                        w.write_i8(*v)?;
                    }
                    for v in &l.bias {
                        w.write_i32::<LittleEndian>(*v)?;
                    }
                    w.write_i32::<LittleEndian>(l.multiplier)?;
                    w.write_u8(l.shift)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a weight file".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported weight file version {version}")));
        }
        let variant = r.read_u8()?;
        let check_type =
            CheckType::from_tag(r.read_u8()?).ok_or_else(|| Error::Format("bad check type".into()))?;
        let distance = r.read_u16::<LittleEndian>()? as usize;
        let rounds = r.read_u16::<LittleEndian>()? as usize;
        let pieces = r.read_u16::<LittleEndian>()? as usize;
        let count = r.read_u16::<LittleEndian>()? as usize;
        let input = Shape3::new(
            r.read_u16::<LittleEndian>()? as usize,
            r.read_u16::<LittleEndian>()? as usize,
            r.read_u16::<LittleEndian>()? as usize,
        );
        let input_scale = r.read_f32::<LittleEndian>()?;
        let mut frontend = Vec::new();
        let mut hidden: Vec<Option<LayerSpec>> = vec![None; pieces + 1];
        let mut output: Vec<Option<LayerSpec>> = vec![None; pieces + 1];
        let mut float_layers = Vec::new();
        let mut quant_layers = Vec::new();
        for _ in 0..count {
            let (placement, layer) = read_layer_header(r)?;
            match placement {
                Placement::Frontend(_) => frontend.push(layer),
                Placement::HeadHidden(j) if j <= pieces => hidden[j] = Some(layer),
                Placement::HeadOutput(j) if j <= pieces => output[j] = Some(layer),
                _ => return Err(Error::Format("head index out of range".into())),
            }
            let (nw, nb) = (layer.weight_count(), layer.out_channels());
            match variant {
                FLOAT => {
                    let weights = (0..nw).map(|_| r.read_f32::<LittleEndian>()).collect::<std::io::Result<_>>()?;
                    let bias = (0..nb).map(|_| r.read_f32::<LittleEndian>()).collect::<std::io::Result<_>>()?;
                    float_layers.push(LayerParams { weights, bias });
                }
                QUANT => {
                    let weight_scale = r.read_f32::<LittleEndian>()?;
                    let layer_input_scale = r.read_f32::<LittleEndian>()?;
                    let out = r.read_f32::<LittleEndian>()?;
                    let activation_max = r.read_f32::<LittleEndian>()?;
                    let weights = (0..nw).map(|_| r.read_i8()).collect::<std::io::Result<_>>()?;
                    let bias = (0..nb).map(|_| r.read_i32::<LittleEndian>()).collect::<std::io::Result<_>>()?;
                    let multiplier = r.read_i32::<LittleEndian>()?;
                    let shift = r.read_u8()?;
                    quant_layers.push(QuantLayer {
                        spec: layer,
                        placement,
                        weights,
                        bias,
                        weight_scale,
                        input_scale: layer_input_scale,
                        output_scale: (out != 0.0).then_some(out),
                        activation_max,
                        multiplier,
                        shift,
                    });
                }
                v => return Err(Error::Format(format!("unknown weight variant {v}"))),
            }
        }
        let heads = hidden
            .into_iter()
            .zip(output)
            .map(|(h, o)| match (h, o) {
                (Some(hidden), Some(output)) => Ok(HeadSpec { hidden, output }),
                _ => Err(Error::Format("missing head layer".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let piece_sizes = heads[1..]
            .iter()
            .map(|h| h.classes().trailing_zeros() as usize)
            .collect();
        let spec = NetworkSpec {
            distance,
            rounds,
            check_type,
            input,
            frontend,
            heads,
            piece_sizes,
        };
        spec.validate()?;
        if variant == FLOAT {
            let weights = FloatWeights { layers: float_layers };
            weights.check(&spec)?;
            Ok(WeightFile::Float(spec, weights))
        } else {
            Ok(WeightFile::Quantized(QuantizedNetwork::from_layers(spec, quant_layers, input_scale)?))
        }
    }
}

fn write_layer_header<W: Write>(w: &mut W, placement: &Placement, layer: &LayerSpec) -> Result<()> {
    w.write_u8(layer.kind.tag())?;
    w.write_u8(layer.activation.tag())?;
    w.write_u8(layer.activation.shift())?;
    let (p, j) = match *placement {
        Placement::Frontend(i) => (0, i),
        Placement::HeadHidden(j) => (1, j),
        Placement::HeadOutput(j) => (2, j),
    };
    w.write_u8(p)?;
    w.write_u16::<LittleEndian>(j as u16)?;
    let (ci, co, kernel, shape) = match layer.kind {
        LayerKind::Conv3d {
            in_channels,
            out_channels,
            kernel,
            input,
        } => (in_channels, out_channels, kernel, input),
        LayerKind::Dense { inputs, outputs } => (inputs, outputs, [1, 1, 1], Shape3::UNIT),
    };
    w.write_u32::<LittleEndian>(ci as u32)?;
    w.write_u32::<LittleEndian>(co as u32)?;
    for d in kernel.into_iter().chain(shape.as_array()) {
        w.write_u16::<LittleEndian>(d as u16)?;
    }
    Ok(())
}

fn read_layer_header<R: Read>(r: &mut R) -> Result<(Placement, LayerSpec)> {
    let kind = r.read_u8()?;
    let act = r.read_u8()?;
    let shift = r.read_u8()?;
    let activation = Activation::from_tag(act, shift).ok_or_else(|| Error::Format("bad activation".into()))?;
    let p = r.read_u8()?;
    let j = r.read_u16::<LittleEndian>()? as usize;
    let placement = match p {
        0 => Placement::Frontend(j),
        1 => Placement::HeadHidden(j),
        2 => Placement::HeadOutput(j),
        _ => return Err(Error::Format("bad layer placement".into())),
    };
    let ci = r.read_u32::<LittleEndian>()? as usize;
    let co = r.read_u32::<LittleEndian>()? as usize;
    let mut d = [0usize; 6];
    for v in &mut d {
        *v = r.read_u16::<LittleEndian>()? as usize;
    }
    let layer = match kind {
        0 => LayerSpec::conv(ci, co, [d[0], d[1], d[2]], Shape3::new(d[3], d[4], d[5]), activation),
        1 => LayerSpec::dense(ci, co, activation),
        k => return Err(Error::Format(format!("unsupported layer kind {k}"))),
    };
    Ok((placement, layer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::float::FloatNetwork;
    use crate::neural::quant::quantize_inputs;
    use crate::neural::spec::default_spec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn float_and_quantized_round_trip() {
        let spec = default_spec(5, 4, CheckType::Z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = FloatWeights::<f32>::glorot(&spec, &mut rng);
        let file = WeightFile::Float(spec.clone(), w.clone());
        let mut buf = Vec::new();
        file.write_to(&mut buf).unwrap();
        match WeightFile::read_from(&mut buf.as_slice()).unwrap() {
            WeightFile::Float(s, back) => {
                assert_eq!(s, spec);
                assert_eq!(back, w);
            }
            _ => panic!("wrong variant"),
        }
        let net = FloatNetwork::new(spec.clone(), w).unwrap();
        let q = quantize_inputs(&net, &[vec![1.0; spec.input_len()]]).unwrap();
        let mut buf = Vec::new();
        WeightFile::Quantized(q.clone()).write_to(&mut buf).unwrap();
        match WeightFile::read_from(&mut buf.as_slice()).unwrap() {
            WeightFile::Quantized(back) => assert_eq!(back, q),
            _ => panic!("wrong variant"),
        }
        assert!(WeightFile::read_from(&mut &b"MTLX"[..]).is_err());
    }
}
