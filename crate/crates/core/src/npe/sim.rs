use std::collections::VecDeque;
use std::io::Write;

use super::compile::{NpeProgram, SfMode};
use crate::error::{Error, Result};
use crate::neural::{HeadOutputs, Placement, QuantizedNetwork};
use crate::noise::SyndromeArray;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Memory,
    MultiplyAdd,
    AdderTree,
    ScaleFunction,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Memory => "MEM",
            Stage::MultiplyAdd => "MA",
            Stage::AdderTree => "AT",
            Stage::ScaleFunction => "SF",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    pub stage: Stage,
    pub instruction: usize,
    pub event: String,
}

pub fn write_trace_csv<W: Write>(w: &mut W, trace: &[TraceEvent]) -> Result<()> {
    writeln!(w, "cycle,stage,instruction,event")?;
    for e in trace {
        writeln!(w, "{},{},{},{}", e.cycle, e.stage.name(), e.instruction, e.event)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub outputs: HeadOutputs<i32>,
    /// Cycle after the last write-back; compute only, no I/O.
    pub cycles: u64,
    pub trace: Vec<TraceEvent>,
}

impl SimOutcome {
    pub fn seconds(&self, clock_hz: f64) -> f64 {
        self.cycles as f64 / clock_hz
    }
}

struct InFlight {
    sf_cycle: u64,
    instruction: usize,
    layer: usize,
    first: usize,
    mode: SfMode,
    partials: Vec<i32>,
}

/// Cycle-level model of the three-stage engine running one program
/// against the integer parameters of `qnet`.
pub struct Simulator<'a> {
    program: &'a NpeProgram,
    qnet: &'a QuantizedNetwork,
}

impl<'a> Simulator<'a> {
    pub fn new(program: &'a NpeProgram, qnet: &'a QuantizedNetwork) -> Result<Self> {
        if qnet.spec != *program.spec() {
            return Err(Error::InvalidNetwork("program was compiled for another network".into()));
        }
        Ok(Self { program, qnet })
    }

    pub fn run(&self, syndromes: &SyndromeArray, trace: bool) -> Result<SimOutcome> {
        self.run_input(&self.qnet.encode(syndromes)?, trace)
    }

    pub fn run_input(&self, input: &[i32], trace: bool) -> Result<SimOutcome> {
        let low = &self.program.lowering;
        let lat = low.config.memory_latency as u64;
        if input.len() != low.input_len {
            return Err(Error::SizeMismatch {
                expected: low.input_len,
                found: input.len(),
            });
        }
        let mut regs = vec![0i32; low.registers];
        regs[..input.len()].copy_from_slice(input);
        // First cycle a register may be read.
        let mut ready = vec![u64::MAX; low.registers];
        ready[..input.len()].fill(0);
        let mut fifo: VecDeque<(u32, u16, u64)> = VecDeque::new();
        let mut pipe: VecDeque<InFlight> = VecDeque::new();
        let mut acc: Vec<i32> = vec![0; low.config.mau_count];
        let mut acc_owner: Option<(usize, usize)> = None;
        let mut events = Vec::new();
        let mut log = |cycle: u64, stage: Stage, instruction: usize, event: String| {
            if trace {
                events.push(TraceEvent {
                    cycle,
                    stage,
                    instruction,
                    event,
                });
            }
        };
        let hazard = |cycle: u64, detail: String| Error::Hazard { cycle, detail };
        let mut last_sf: Option<u64> = None;
        let mut cycle = 0u64;
        let n = self.program.instructions.len() as u64;
        while cycle < n || !pipe.is_empty() {
            // SF write-back from an earlier issue.
            if pipe.front().is_some_and(|f| f.sf_cycle == cycle) {
                let f = pipe.pop_front().unwrap();
                let l = &low.layers[f.layer];
                let q = &self.qnet.layers[f.layer];
                let owner = (f.layer, f.first);
                if acc_owner.is_some_and(|o| o != owner) {
                    return Err(hazard(cycle, format!("accumulator holds {acc_owner:?}, got {owner:?}")));
                }
                for (lane, &p) in f.partials.iter().enumerate() {
                    acc[lane] = acc[lane].wrapping_add(p);
                }
                match f.mode {
                    SfMode::Accumulate => {
                        acc_owner = Some(owner);
                        log(cycle, Stage::ScaleFunction, f.instruction, format!("accumulate {} lanes", f.partials.len()));
                    }
                    _ => {
                        let out_vol = l.out_volume();
                        for lane in 0..f.partials.len() {
                            let item = l.order[f.first + lane] as usize;
                            let reg = l.output_base + item;
                            regs[reg] = q.finalize(item / out_vol, acc[lane]);
                            ready[reg] = cycle + 1;
                            acc[lane] = 0;
                        }
                        acc_owner = None;
                        log(cycle, Stage::ScaleFunction, f.instruction, format!(
                            "write r{}..+{}",
                            l.output_base, f.partials.len()
                        ));
                    }
                }
            }
            if cycle < n {
                let idx = cycle as usize;
                let ins = self.program.instructions[idx];
                if ins.load {
                    fifo.push_back((ins.address, ins.load_len, cycle + lat));
                    log(cycle, Stage::Memory, idx, format!("load {}+{}", ins.address, ins.load_len));
                }
                if ins.is_compute() {
                    let li = ins.layer as usize;
                    let l = low
                        .layers
                        .get(li)
                        .ok_or_else(|| hazard(cycle, format!("no layer {li}")))?;
                    let (first, lanes, chunk) = (ins.first as usize, ins.lanes as usize, ins.chunk as usize);
                    if lanes == 0 || first + lanes > l.order.len() || chunk >= l.chunks || lanes > l.lanes {
                        return Err(hazard(cycle, "malformed issue".into()));
                    }
                    if ins.tap as u32 > low.config.tree_depth() || (l.lanes << ins.tap) > low.config.mau_count {
                        return Err(hazard(cycle, format!("tap {} cannot serve {} lanes", ins.tap, l.lanes)));
                    }
                    let expect = l.param_block(first, lanes, chunk);
                    match fifo.pop_front() {
                        Some((a, len, at)) if (a, len) == expect && at <= cycle => {}
                        Some((a, len, at)) => {
                            return Err(hazard(cycle, format!(
                                "weights {a}+{len} (ready at {at}) do not serve issue needing {}+{}",
                                expect.0, expect.1
                            )));
                        }
                        None => return Err(hazard(cycle, "no weights fetched".into())),
                    }
                    let q = &self.qnet.layers[li];
                    let mut partials = Vec::with_capacity(lanes);
                    let mut stale = None;
                    for p in first..first + lanes {
                        let mut sum = 0i32;
                        l.for_taps(l.order[p] as usize, chunk, |reg, wi| {
                            if ready[reg] > cycle {
                                stale = Some(reg);
                            }
                            sum = sum.wrapping_add(q.weights[wi] as i32 * regs[reg]);
                        });
                        partials.push(sum);
                    }
                    if let Some(reg) = stale {
                        return Err(hazard(cycle, format!("r{reg} read before write-back")));
                    }
                    let sf_cycle = cycle + ins.tap as u64 + 1;
                    if last_sf.is_some_and(|s| sf_cycle <= s) {
                        return Err(hazard(cycle, format!("SF stage busy or out of order at {sf_cycle}")));
                    }
                    last_sf = Some(sf_cycle);
                    log(cycle, Stage::MultiplyAdd, idx, format!("layer {li} lanes {first}..+{lanes} chunk {chunk}"));
                    log(cycle + 1, Stage::AdderTree, idx, format!("depth {}", ins.tap));
                    pipe.push_back(InFlight {
                        sf_cycle,
                        instruction: idx,
                        layer: li,
                        first,
                        mode: ins.sf,
                        partials,
                    });
                }
            }
            cycle += 1;
        }
        if !fifo.is_empty() {
            return Err(hazard(cycle, format!("{} fetched blocks never used", fifo.len())));
        }
        let nf = low.spec.frontend.len();
        let mut heads = Vec::with_capacity(low.spec.heads.len());
        for j in 0..low.spec.heads.len() {
            let l = &low.layers[nf + 2 * j + 1];
            debug_assert_eq!(l.placement, Placement::HeadOutput(j));
            let range = l.output_base..l.output_base + l.geometry.output_len();
            if ready[range.clone()].iter().any(|&r| r == u64::MAX) {
                return Err(hazard(cycle, format!("head {j} output never written")));
            }
            heads.push(regs[range].to_vec());
        }
        Ok(SimOutcome {
            outputs: HeadOutputs { heads },
            cycles: last_sf.map_or(0, |s| s + 1),
            trace: events,
        })
    }
}

/// Runs `program` once on one syndrome array.
pub fn simulate(program: &NpeProgram, qnet: &QuantizedNetwork, syndromes: &SyndromeArray, trace: bool) -> Result<SimOutcome> {
    Simulator::new(program, qnet)?.run(syndromes, trace)
}

/// Report lines for a measured cycle count.
pub fn latency_report(cycles: u64, clock_hz: f64) -> Vec<String> {
    vec![
        format!(
            "compute latency: {cycles} cycles = {:.1} ns at {:.0} MHz",
            cycles as f64 / clock_hz * 1e9,
            clock_hz / 1e6
        ),
        format!("compute latency at 2.5 GHz: {:.2} ns", cycles as f64 / 2.5e9 * 1e9),
        "external reference: network-specific L=5 design, 67 cycles / 197 ns (includes I/O)".to_string(),
    ]
}
