use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::config::NpeConfig;
use crate::error::{Error, Result};
use crate::neural::{Geometry, LayerKind, NetworkSpec, Placement};

/// What the SF stage does with an issue's adder-tree results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SfMode {
    /// No compute issue this cycle.
    Bypass,
    /// Add into the SF accumulator; more chunks follow.
    Accumulate,
    /// Accumulator plus bias, activation and requantization, then write back.
    Finalize,
}

impl SfMode {
    fn code(self) -> u8 {
        match self {
            SfMode::Bypass => 0,
            SfMode::Accumulate => 1,
            SfMode::Finalize => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(SfMode::Bypass),
            1 => Some(SfMode::Accumulate),
            2 => Some(SfMode::Finalize),
            _ => None,
        }
    }
}

/// One VLIW word: a compute slot and a memory-transfer slot, both issued
/// in the same cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub sf: SfMode,
    pub tap: u8,
    /// Layer in canonical order.
    pub layer: u16,
    /// Dot-product chunk of every lane.
    pub chunk: u16,
    pub lanes: u16,
    /// Position of the first lane in the layer's issue order.
    pub first: u16,
    pub load: bool,
    /// Parameter words fetched by the memory slot.
    pub load_len: u16,
    pub address: u32,
}

pub const INSTRUCTION_BYTES: usize = 16;

impl Instruction {
    pub const NOP: Instruction = Instruction {
        sf: SfMode::Bypass,
        tap: 0,
        layer: 0,
        chunk: 0,
        lanes: 0,
        first: 0,
        load: false,
        load_len: 0,
        address: 0,
    };

    pub fn encode(&self) -> [u8; INSTRUCTION_BYTES] {
        let mut b = [0u8; INSTRUCTION_BYTES];
        b[0] = self.sf.code() | (self.load as u8) << 7;
        b[1] = self.tap;
        b[2..4].copy_from_slice(&self.layer.to_le_bytes());
        b[4..6].copy_from_slice(&self.chunk.to_le_bytes());
        b[6..8].copy_from_slice(&self.lanes.to_le_bytes());
        b[8..10].copy_from_slice(&self.first.to_le_bytes());
        b[10..12].copy_from_slice(&self.load_len.to_le_bytes());
        b[12..16].copy_from_slice(&self.address.to_le_bytes());
        b
    }

    pub fn decode(b: &[u8; INSTRUCTION_BYTES]) -> Result<Self> {
        let sf = SfMode::from_code(b[0] & 0x7F).ok_or_else(|| Error::Format(format!("bad opcode {:#x}", b[0])))?;
        let u16_at = |i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
        Ok(Self {
            sf,
            tap: b[1],
            layer: u16_at(2),
            chunk: u16_at(4),
            lanes: u16_at(6),
            first: u16_at(8),
            load: b[0] & 0x80 != 0,
            load_len: u16_at(10),
            address: u32::from_le_bytes([b[12], b[13], b[14], b[15]]),
        })
    }

    pub fn is_compute(&self) -> bool {
        self.sf != SfMode::Bypass
    }
}

/// Static lowering of one layer.
#[derive(Clone, Debug)]
pub struct LayerPlan {
    pub placement: Placement,
    pub geometry: Geometry,
    pub fan_in: usize,
    pub input_base: usize,
    pub output_base: usize,
    pub param_base: usize,
    /// Output indices in issue order.
    pub order: Vec<u32>,
    /// Last input round each entry of `order` depends on.
    pub blocks: Vec<u32>,
    pub tap: u8,
    pub lanes: usize,
    pub chunk_len: usize,
    pub chunks: usize,
    lookup: Vec<u32>,
}

const PAD: u32 = u32::MAX;

impl LayerPlan {
    pub fn out_volume(&self) -> usize {
        self.geometry.out_shape.volume()
    }

    pub fn chunk_range(&self, chunk: usize) -> (usize, usize) {
        let start = chunk * self.chunk_len;
        (start, (start + self.chunk_len).min(self.fan_in))
    }

    /// Calls `f(register, weight index)` for every non-padding tap of
    /// `chunk` of output `item`.
    #[inline]
    pub fn for_taps(&self, item: usize, chunk: usize, mut f: impl FnMut(usize, usize)) {
        let out_vol = self.out_volume();
        let kv = self.geometry.kernel_volume();
        let in_vol = self.geometry.in_shape.volume();
        let (o, site) = (item / out_vol, item % out_vol);
        let (j0, j1) = self.chunk_range(chunk);
        let look = &self.lookup[site * kv..][..kv];
        for j in j0..j1 {
            let (i, k) = (j / kv, j % kv);
            let pos = look[k];
            if pos != PAD {
                f(self.input_base + i * in_vol + pos as usize, o * self.fan_in + j);
            }
        }
    }

    /// Parameter block fetched for an issue.
    pub fn param_block(&self, first: usize, lanes: usize, chunk: usize) -> (u32, u16) {
        let out_vol = self.out_volume();
        let mut channels: Vec<u32> = self.order[first..first + lanes]
            .iter()
            .map(|&i| i / out_vol as u32)
            .collect();
        channels.sort_unstable();
        channels.dedup();
        let (j0, j1) = self.chunk_range(chunk);
        let address = self.param_base + channels[0] as usize * self.fan_in + j0;
        (address as u32, (channels.len() * (j1 - j0)) as u16)
    }
}

/// Register and parameter layout plus per-layer issue shapes.
#[derive(Clone, Debug)]
pub struct Lowering {
    pub config: NpeConfig,
    pub spec: NetworkSpec,
    pub layers: Vec<LayerPlan>,
    pub input_len: usize,
    pub registers: usize,
}

impl Lowering {
    pub fn new(spec: &NetworkSpec, config: &NpeConfig) -> Result<Self> {
        config.validate()?;
        spec.validate()?;
        let layers_spec = spec.layers();
        let nf = spec.frontend.len();
        let input_len = spec.input_len();
        let mut registers = input_len;
        let mut params = 0usize;
        let mut layers: Vec<LayerPlan> = Vec::with_capacity(layers_spec.len());
        let rounds = spec.rounds as u32;
        // Rounds covered by one frontend output slab, while still stepped.
        let mut span: Option<usize> = Some(1);
        for (idx, (placement, ls)) in layers_spec.iter().enumerate() {
            let g = ls.geometry();
            let input_base = match *placement {
                Placement::Frontend(0) => 0,
                Placement::Frontend(i) => layers[i - 1].output_base,
                Placement::HeadHidden(_) if nf == 0 => 0,
                Placement::HeadHidden(_) => layers[nf - 1].output_base,
                Placement::HeadOutput(_) => layers[idx - 1].output_base,
            };
            let fan_in = g.fan_in();
            let out_vol = g.out_shape.volume();
            let last = rounds - 1;
            let slab = match (*placement, ls.kind) {
                (Placement::Frontend(_), LayerKind::Conv3d { kernel, .. }) => {
                    span = span.map(|s| s * kernel[0]);
                    span
                }
                _ => {
                    span = None;
                    None
                }
            };
            let hw = g.out_shape.h * g.out_shape.w;
            let block_of = |item: usize| -> u32 {
                match slab {
                    Some(s) => {
                        let tau = (item % out_vol) / hw;
                        (((tau + 1) * s - 1) as u32).min(last)
                    }
                    None => last,
                }
            };
            let mut order: Vec<u32> = (0..g.output_len() as u32).collect();
            order.sort_by_key(|&i| (block_of(i as usize), i));
            if order.len() > u16::MAX as usize {
                return Err(Error::Compile(format!("layer {idx} has more than 65535 outputs")));
            }
            let blocks = order.iter().map(|&i| block_of(i as usize)).collect();
            let (tap, lanes, chunk_len, chunks) = match config.tap_for(fan_in) {
                Some((d, g)) => (d as u8, g, fan_in, 1),
                None => {
                    let w = config.issue_width();
                    (config.tree_depth() as u8, 1, w, fan_in.div_ceil(w))
                }
            };
            if chunks > u16::MAX as usize {
                return Err(Error::Compile(format!("layer {idx} needs more than 65535 chunks")));
            }
            let kv = g.kernel_volume();
            let mut lookup = vec![PAD; out_vol * kv];
            for (site, taps) in g.taps.iter().enumerate() {
                for &(k, pos) in taps {
                    lookup[site * kv + k] = pos as u32;
                }
            }
            if g.is_dense() {
                lookup[0] = 0;
            }
            let output_base = registers;
            registers += g.output_len();
            let param_base = params;
            params += ls.weight_count();
            layers.push(LayerPlan {
                placement: *placement,
                geometry: g,
                fan_in,
                input_base,
                output_base,
                param_base,
                order,
                blocks,
                tap,
                lanes,
                chunk_len,
                chunks,
                lookup,
            });
        }
        if registers > config.register_file_size {
            return Err(Error::Compile(format!(
                "activations need {registers} registers, file holds {}",
                config.register_file_size
            )));
        }
        if params > u32::MAX as usize {
            return Err(Error::Compile("parameter memory exceeds 32-bit addressing".into()));
        }
        Ok(Self {
            config: *config,
            spec: spec.clone(),
            layers,
            input_len,
            registers,
        })
    }

    /// Issues per layer: `ceil(O / lanes)` when a dot product fits one
    /// issue, otherwise `O * chunks`.
    pub fn issue_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| {
                if l.chunks == 1 {
                    l.order.len().div_ceil(l.lanes)
                } else {
                    l.order.len() * l.chunks
                }
            })
            .sum()
    }

    /// Compute issues in program order. Frontend work is ordered by the last
    /// round it needs so that early rounds can run while later ones are
    /// still being measured; head hidden layers precede head outputs.
    fn issues(&self) -> Vec<Instruction> {
        let mut keyed: Vec<((u32, u8, usize), Instruction)> = Vec::new();
        let mut reg_key = vec![0u32; self.registers];
        for (li, l) in self.layers.iter().enumerate() {
            let rank = match l.placement {
                Placement::Frontend(_) => 0,
                Placement::HeadHidden(_) => 1,
                Placement::HeadOutput(_) => 2,
            };
            let mut first = 0;
            while first < l.order.len() {
                let lanes = l.lanes.min(l.order.len() - first);
                let mut key = 0;
                for p in first..first + lanes {
                    key = key.max(l.blocks[p]);
                    for ch in 0..l.chunks {
                        l.for_taps(l.order[p] as usize, ch, |reg, _| key = key.max(reg_key[reg]));
                    }
                }
                for p in first..first + lanes {
                    reg_key[l.output_base + l.order[p] as usize] = key;
                }
                for ch in 0..l.chunks {
                    let sf = if ch + 1 == l.chunks {
                        SfMode::Finalize
                    } else {
                        SfMode::Accumulate
                    };
                    let (address, load_len) = l.param_block(first, lanes, ch);
                    keyed.push((
                        (key, rank, li),
                        Instruction {
                            sf,
                            tap: l.tap,
                            layer: li as u16,
                            chunk: ch as u16,
                            lanes: lanes as u16,
                            first: first as u16,
                            load: true,
                            load_len,
                            address,
                        },
                    ));
                }
                first += lanes;
            }
        }
        keyed.sort_by_key(|(k, _)| *k);
        keyed.into_iter().map(|(_, i)| i).collect()
    }

    /// Earliest static issue cycles honouring the memory latency, register
    /// readiness and in-order SF completion. `input_ready[r]` is the first
    /// cycle input register `r` may be read.
    pub fn schedule(&self, issues: &[Instruction], input_ready: &[u64]) -> Result<Schedule> {
        let mut ready = vec![u64::MAX; self.registers];
        ready[..self.input_len].copy_from_slice(input_ready);
        let mut cycles = Vec::with_capacity(issues.len());
        let mut next = self.config.memory_latency as u64;
        let mut last_sf: Option<u64> = None;
        for ins in issues {
            let l = self.layers.get(ins.layer as usize).ok_or_else(|| Error::Compile("bad layer index".into()))?;
            let (first, lanes) = (ins.first as usize, ins.lanes as usize);
            if first + lanes > l.order.len() {
                return Err(Error::Compile("issue lanes out of range".into()));
            }
            let mut t = next;
            let mut missing = false;
            for p in first..first + lanes {
                l.for_taps(l.order[p] as usize, ins.chunk as usize, |reg, _| {
                    if ready[reg] == u64::MAX {
                        missing = true;
                    } else {
                        t = t.max(ready[reg]);
                    }
                });
            }
            if missing {
                return Err(Error::Compile(format!("layer {} reads a register nobody writes", ins.layer)));
            }
            let depth = ins.tap as u64 + 1;
            if let Some(ls) = last_sf {
                t = t.max((ls + 1).saturating_sub(depth));
            }
            let sf = t + depth;
            if ins.sf == SfMode::Finalize {
                for p in first..first + lanes {
                    ready[l.output_base + l.order[p] as usize] = sf + 1;
                }
            }
            last_sf = Some(sf);
            cycles.push(t);
            next = t + 1;
        }
        Ok(Schedule {
            cycles,
            end: last_sf.map_or(0, |s| s + 1),
        })
    }

    /// Cycle at which each input register arrives when round `r` lands at
    /// `(r + 1) * period` cycles.
    pub fn input_arrivals(&self, period: u64) -> Vec<u64> {
        let plane = self.spec.input.h * self.spec.input.w;
        (0..self.input_len).map(|i| (i / plane) as u64 * period + period).collect()
    }
}

/// Issue cycles and the cycle after the last write-back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub cycles: Vec<u64>,
    pub end: u64,
}

/// Static VLIW program for one network.
#[derive(Clone, Debug)]
pub struct NpeProgram {
    pub lowering: Lowering,
    pub instructions: Vec<Instruction>,
    /// Compute cycles predicted by the scheduler.
    pub cycles: u64,
}

const MAGIC: &[u8; 4] = b"NPEP";
const VERSION: u16 = 1;

impl NpeProgram {
    pub fn config(&self) -> &NpeConfig {
        &self.lowering.config
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.lowering.spec
    }

    /// Compute-slot instructions in issue order.
    pub fn issues(&self) -> Vec<Instruction> {
        self.instructions.iter().filter(|i| i.is_compute()).copied().collect()
    }

    pub fn latency_seconds(&self) -> f64 {
        self.config().seconds(self.cycles)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let c = self.config();
        let s = self.spec();
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u8(s.check_type.tag())?;
        w.write_u8(0)?;
        w.write_u16::<LittleEndian>(s.distance as u16)?;
        w.write_u16::<LittleEndian>(s.rounds as u16)?;
        w.write_u32::<LittleEndian>(c.mau_count as u32)?;
        w.write_u32::<LittleEndian>(c.mau_width as u32)?;
        w.write_u32::<LittleEndian>(c.register_file_size as u32)?;
        w.write_u32::<LittleEndian>(c.memory_latency as u32)?;
        w.write_f64::<LittleEndian>(c.clock_hz)?;
        w.write_u64::<LittleEndian>(self.cycles)?;
        w.write_u32::<LittleEndian>(self.instructions.len() as u32)?;
        for i in &self.instructions {
            w.write_all(&i.encode())?;
        }
        Ok(())
    }

    /// Reads a program compiled for `spec`.
    pub fn read_from<R: Read>(mut r: R, spec: &NetworkSpec) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an NPE program".into()));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported program version {version}")));
        }
        let tag = r.read_u8()?;
        r.read_u8()?;
        let distance = r.read_u16::<LittleEndian>()? as usize;
        let rounds = r.read_u16::<LittleEndian>()? as usize;
        if tag != spec.check_type.tag() || distance != spec.distance || rounds != spec.rounds {
            return Err(Error::Format("program was compiled for a different network".into()));
        }
        let config = NpeConfig {
            mau_count: r.read_u32::<LittleEndian>()? as usize,
            mau_width: r.read_u32::<LittleEndian>()? as usize,
            register_file_size: r.read_u32::<LittleEndian>()? as usize,
            memory_latency: r.read_u32::<LittleEndian>()? as usize,
            clock_hz: r.read_f64::<LittleEndian>()?,
        };
        let cycles = r.read_u64::<LittleEndian>()?;
        let n = r.read_u32::<LittleEndian>()? as usize;
        let mut instructions = Vec::with_capacity(n);
        let mut buf = [0u8; INSTRUCTION_BYTES];
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            instructions.push(Instruction::decode(&buf)?);
        }
        Ok(Self {
            lowering: Lowering::new(spec, &config)?,
            instructions,
            cycles,
        })
    }
}

/// Lowers a network to a hazard-free static instruction stream. Stalls are
/// explicit no-op words; each memory-slot fetch sits `memory_latency`
/// words ahead of the compute issue that consumes it.
pub fn compile(spec: &NetworkSpec, config: &NpeConfig) -> Result<NpeProgram> {
    let lowering = Lowering::new(spec, config)?;
    let issues = lowering.issues();
    let schedule = lowering.schedule(&issues, &vec![0; lowering.input_len])?;
    let len = schedule.cycles.last().map_or(0, |&c| c as usize + 1);
    let mut instructions = vec![Instruction::NOP; len];
    let lat = config.memory_latency;
    for (ins, &t) in issues.iter().zip(&schedule.cycles) {
        let t = t as usize;
        instructions[t] = Instruction {
            load: false,
            load_len: 0,
            address: 0,
            ..*ins
        };
    }
    for (ins, &t) in issues.iter().zip(&schedule.cycles) {
        let slot = &mut instructions[t as usize - lat];
        slot.load = true;
        slot.load_len = ins.load_len;
        slot.address = ins.address;
    }
    Ok(NpeProgram {
        lowering,
        instructions,
        cycles: schedule.end,
    })
}

/// Latency from the arrival of the last round to the final output when
/// rounds arrive every `sm_period_s` seconds and frontend blocks start as
/// soon as their rounds are in.
pub fn pipeline_latency(program: &NpeProgram, sm_period_s: f64, rounds: usize) -> Result<f64> {
    let low = &program.lowering;
    if rounds != low.spec.rounds {
        return Err(Error::SizeMismatch {
            expected: low.spec.rounds,
            found: rounds,
        });
    }
    if !(sm_period_s >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad measurement period {sm_period_s}")));
    }
    let stepped = low.spec.frontend.first().is_some_and(|l| matches!(l.kind, LayerKind::Conv3d { .. }));
    if !stepped {
        log::warn!("frontend is not split by rounds; pipelining hides nothing");
        return Ok(program.latency_seconds());
    }
    let period = (sm_period_s * low.config.clock_hz).ceil();
    if !period.is_finite() || period > (u64::MAX / 4) as f64 / rounds as f64 {
        // Effectively infinite: every block not needing the last round is done.
        let period = u64::MAX / 4 / rounds as u64;
        return pipelined(program, period, rounds);
    }
    pipelined(program, period as u64, rounds)
}

fn pipelined(program: &NpeProgram, period: u64, rounds: usize) -> Result<f64> {
    let low = &program.lowering;
    let arrivals = low.input_arrivals(period);
    let schedule = low.schedule(&program.issues(), &arrivals)?;
    let last = period * rounds as u64;
    let cycles = schedule.end.saturating_sub(last);
    Ok(low.config.seconds(cycles))
}
