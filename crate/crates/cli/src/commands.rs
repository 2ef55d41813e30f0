use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rscw::code::{CheckType, PureErrorTables, RscCode};
use rscw::decoders::{Decoder, IdentityDecoder, LutL3Decoder, MtlndDecoder, MwpmDecoder};
use rscw::harness::{
    estimate_ler, hamming_stats, write_hamming_csv, write_raw_csv, write_summary_csv, DecoderKind, RunConfig,
};
use rscw::neural::{default_spec, quantize, FloatNetwork, NetworkSpec, QuantizedNetwork, WeightFile};
use rscw::noise::{
    read_dataset, residual_labels, stream_rng, write_dataset, DatasetGenerator, NoiseModel, NoiseParams, Preset,
    SyndromeArray,
};
use rscw::npe::{
    allocate, compile, latency_report, layer_groups, pipeline_latency, write_trace_csv, NpeConfig, NpeProgram,
    Simulator,
};
use rscw::training::{evaluate, examples, train, write_log_csv, Optimizer, TrainConfig};

#[derive(Parser, Debug)]
#[command(name = "rscw", version, about = "Rotated surface code decoding workbench")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate labelled syndrome samples into a dataset file.
    Sample(SampleArgs),
    /// Train per-type networks and write float and 8-bit weight files.
    Train(TrainArgs),
    /// Decode a dataset and report per-sample logical failures.
    Decode(DecodeArgs),
    /// Logical error rate from repeated decoding trajectories.
    BenchLer(BenchArgs),
    /// Syndrome Hamming-weight histograms.
    Hamming(HammingArgs),
    /// Compile a network for the programmable engine.
    NpeCompile(NpeCompileArgs),
    /// Run compiled programs on the cycle-level engine model.
    NpeSim(NpeSimArgs),
    /// Split multiply units over layers.
    Allocate(AllocateArgs),
    /// Build the distance-3 lookup-table decoder.
    ExportLut(LutArgs),
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    #[arg(long = "L", default_value_t = 3)]
    distance: usize,
    #[arg(long = "T", default_value_t = 3)]
    rounds: usize,
    #[arg(long, default_value_t = 0.004)]
    p: f64,
    #[arg(long, default_value = "standard")]
    preset: String,
    #[arg(long, default_value = "circuit")]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl NoiseArgs {
    fn code(&self) -> Result<RscCode> {
        Ok(RscCode::new(self.distance)?)
    }

    fn params(&self) -> Result<NoiseParams> {
        let preset: Preset = self.preset.parse()?;
        let model: NoiseModel = self.model.parse()?;
        Ok(NoiseParams::preset(preset, self.p)?.with_model(model)?)
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    /// Existing dataset; otherwise samples are simulated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 10_000)]
    val_samples: u64,
    /// `x`, `z` or `both`.
    #[arg(long = "type", default_value = "both")]
    check_type: String,
    #[arg(long, default_value_t = 4)]
    epochs: usize,
    #[arg(long, default_value_t = 256)]
    batch: usize,
    #[arg(long, default_value_t = 3e-3)]
    lr: f64,
    /// `adam` or `sgd`.
    #[arg(long, default_value = "adam")]
    optimizer: String,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct DecoderArgs {
    #[arg(long, default_value = "mwpm")]
    decoder: String,
    #[arg(long)]
    weights_x: Option<PathBuf>,
    #[arg(long)]
    weights_z: Option<PathBuf>,
    #[arg(long)]
    lut: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Per-sample CSV.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `key=value` file; flags and `RSCW_*` variables override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    distance: Option<usize>,
    #[arg(long = "T")]
    rounds: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    allow_few_trajectories: bool,
    #[arg(long)]
    max_cycles: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-trajectory CSV.
    #[arg(long)]
    raw_output: Option<PathBuf>,
    #[arg(long)]
    weights_x: Option<PathBuf>,
    #[arg(long)]
    weights_z: Option<PathBuf>,
    #[arg(long)]
    lut: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HammingArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// Weight file; its network is compiled.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Without weights, the default network for these sizes.
    #[arg(long = "L", default_value_t = 3)]
    distance: usize,
    #[arg(long = "T", default_value_t = 3)]
    rounds: usize,
    #[arg(long = "type", default_value = "z")]
    check_type: String,
    /// Engine settings as `key=value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NpeCompileArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seconds between syndrome rounds for the sliding-window estimate.
    #[arg(long)]
    sm_period: Option<f64>,
}

#[derive(Args, Debug)]
struct NpeSimArgs {
    /// Quantized weight file.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Precompiled program; compiled on the fly otherwise.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Inputs from a dataset; random syndromes otherwise.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    inputs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV of the first input.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print latency in time units.
    #[arg(long)]
    report: bool,
}

#[derive(Args, Debug)]
struct AllocateArgs {
    /// Comma-separated multiplies per layer.
    #[arg(long, value_delimiter = ',')]
    work: Vec<u64>,
    /// Comma-separated multiplicities; all ones by default.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<u64>,
    /// With no `--work`, the default network for `--L`/`--T`.
    #[arg(long = "L")]
    distance: Option<usize>,
    #[arg(long = "T")]
    rounds: Option<usize>,
    #[arg(long)]
    units: u64,
}

#[derive(Args, Debug)]
struct LutArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Train(a) => train_cmd(a),
        Command::Decode(a) => decode(a),
        Command::BenchLer(a) => bench_ler(a),
        Command::Hamming(a) => hamming(a),
        Command::NpeCompile(a) => npe_compile(a),
        Command::NpeSim(a) => npe_sim(a),
        Command::Allocate(a) => allocate_cmd(a),
        Command::ExportLut(a) => export_lut(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn sample(a: SampleArgs) -> Result<()> {
    let code = a.noise.code()?;
    let gen = DatasetGenerator::new(&code, a.noise.params()?, a.noise.rounds, a.noise.seed)?;
    let data = gen.collect(0, a.samples)?;
    let mut w = create(&a.out)?;
    write_dataset(&mut w, &gen.header(a.samples), &data)?;
    w.flush()?;
    println!("wrote {} samples to {}", a.samples, a.out.display());
    Ok(())
}

fn check_types(s: &str) -> Result<Vec<CheckType>> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "both" => CheckType::BOTH.to_vec(),
        other => match CheckType::from_tag(other.as_bytes().first().copied().unwrap_or(0)) {
            Some(t) if other.len() == 1 => vec![t],
            _ => bail!("unknown check type {s:?}"),
        },
    })
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let code = a.noise.code()?;
    let (train_set, val_set) = match &a.data {
        Some(path) => {
            let (h, mut data) = read_dataset(&mut open(path)?)?;
            if h.distance != a.noise.distance || h.rounds != a.noise.rounds {
                bail!("dataset is for L={}, T={}", h.distance, h.rounds);
            }
            let n_val = (a.val_samples as usize).min(data.len() / 5);
            let val = data.split_off(data.len() - n_val);
            (data, val)
        }
        None => {
            let gen = DatasetGenerator::new(&code, a.noise.params()?, a.noise.rounds, a.noise.seed)?;
            (gen.collect(0, a.samples)?, gen.collect(a.samples, a.val_samples)?)
        }
    };
    let optimizer = match a.optimizer.as_str() {
        "adam" => Optimizer::adam(),
        "sgd" => Optimizer::Sgd { momentum: a.momentum },
        o => bail!("unknown optimizer {o:?}"),
    };
    let config = TrainConfig {
        batch_size: a.batch,
        epochs: a.epochs,
        learning_rate: a.lr,
        optimizer,
        seed: a.noise.seed,
        shuffle: true,
    };
    std::fs::create_dir_all(&a.out_dir)?;
    for t in check_types(&a.check_type)? {
        let spec = default_spec(a.noise.distance, a.noise.rounds, t)?;
        let outcome = train::<f32>(&spec, &train_set, &config)?;
        let net = FloatNetwork::new(spec.clone(), outcome.weights)?;
        let calibration: Vec<SyndromeArray> =
            train_set.iter().take(2000).map(|s| s.syndromes.get(t).clone()).collect();
        let qnet = quantize(&net, &calibration)?;
        let val = examples(&net, &val_set)?;
        let (all, per_head) = evaluate(&net, &val)?;
        let agree = val_set
            .iter()
            .zip(&val)
            .filter(|(s, e)| {
                let q = qnet.forward(s.syndromes.get(t)).map(|o| o.argmax());
                let f = net.forward_input(&e.input).map(|o| o.argmax());
                matches!((q, f), (Ok(q), Ok(f)) if q == f)
            })
            .count();
        let tag = t.to_string().to_ascii_lowercase();
        let mut log = create(&a.out_dir.join(format!("{tag}.log.csv")))?;
        write_log_csv(&mut log, &outcome.log)?;
        log.flush()?;
        WeightFile::Float(spec, net.weights.clone()).save(a.out_dir.join(format!("{tag}.float.mtlw")))?;
        WeightFile::Quantized(qnet).save(a.out_dir.join(format!("{tag}.q.mtlw")))?;
        println!(
            "{t} network: validation all-heads {all:.4}, class head {:.4}, quantized agreement {:.4}",
            per_head[0],
            agree as f64 / val.len().max(1) as f64
        );
    }
    Ok(())
}

fn load_mtlnd(code: &RscCode, x: &Path, z: &Path) -> Result<MtlndDecoder> {
    let tables = PureErrorTables::build(code);
    Ok(match (WeightFile::load(x)?, WeightFile::load(z)?) {
        (WeightFile::Quantized(qx), WeightFile::Quantized(qz)) => MtlndDecoder::quantized(code, tables, qx, qz)?,
        (WeightFile::Float(sx, wx), WeightFile::Float(sz, wz)) => {
            MtlndDecoder::float(code, tables, FloatNetwork::new(sx, wx)?, FloatNetwork::new(sz, wz)?)?
        }
        _ => bail!("X and Z weight files must both be float or both quantized"),
    })
}

fn build_decoder(
    kind: DecoderKind,
    code: &RscCode,
    rounds: usize,
    weights: (Option<&Path>, Option<&Path>),
    lut: Option<&Path>,
) -> Result<Box<dyn Decoder>> {
    Ok(match kind {
        DecoderKind::Mwpm => Box::new(MwpmDecoder::new(code, rounds)?),
        DecoderKind::Identity => Box::new(IdentityDecoder::new(code)),
        DecoderKind::Lut => {
            let path = lut.context("the lut decoder needs --lut")?;
            let d = LutL3Decoder::read_from(open(path)?)?;
            if d.rounds() != rounds {
                bail!("lookup table was built for T={}", d.rounds());
            }
            Box::new(d)
        }
        DecoderKind::Mtlnd => {
            let (Some(x), Some(z)) = weights else {
                bail!("the mtlnd decoder needs --weights-x and --weights-z");
            };
            Box::new(load_mtlnd(code, x, z)?)
        }
    })
}

fn decode(a: DecodeArgs) -> Result<()> {
    let (h, data) = read_dataset(&mut open(&a.data)?)?;
    let code = RscCode::new(h.distance)?;
    let tables = PureErrorTables::build(&code);
    let d = &a.decoder;
    let decoder = build_decoder(
        d.decoder.parse()?,
        &code,
        h.rounds,
        (d.weights_x.as_deref(), d.weights_z.as_deref()),
        d.lut.as_deref(),
    )?;
    let mut out = a.output.as_deref().map(create).transpose()?;
    if let Some(w) = out.as_mut() {
        writeln!(w, "sample,failed_x,failed_z,syndrome_ok")?;
    }
    let mut failures = 0usize;
    for (i, s) in data.iter().enumerate() {
        let dec = decoder.decode_full(&s.syndromes)?;
        let mut residual = s.residual.clone();
        residual *= &dec.correction;
        let (classes, syn) = residual_labels(&code, &tables, &residual)?;
        let failed = [classes[0].bit(), classes[1].bit()];
        failures += (failed[0] || failed[1]) as usize;
        if let Some(w) = out.as_mut() {
            let ok = syn.iter().all(|r| r.is_zero());
            writeln!(w, "{i},{},{},{}", failed[0] as u8, failed[1] as u8, ok as u8)?;
        }
    }
    if let Some(mut w) = out {
        w.flush()?;
    }
    println!(
        "{}: {failures} logical failures in {} samples ({:.5})",
        decoder.name(),
        data.len(),
        failures as f64 / data.len().max(1) as f64
    );
    Ok(())
}

fn bench_ler(a: BenchArgs) -> Result<()> {
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k.to_string(), v));
        }
    };
    put("L", a.distance.map(|v| v.to_string()));
    put("T", a.rounds.map(|v| v.to_string()));
    put("p", a.p.map(|v| v.to_string()));
    put("preset", a.preset);
    put("model", a.model);
    put("decoder", a.decoder);
    put("trajectories", a.trajectories.map(|v| v.to_string()));
    put("allow_few_trajectories", a.allow_few_trajectories.then(|| "true".to_string()));
    put("max_cycles", a.max_cycles.map(|v| v.to_string()));
    put("seed", a.seed.map(|v| v.to_string()));
    put("output", a.output.map(|p| p.display().to_string()));
    put("raw_output", a.raw_output.map(|p| p.display().to_string()));
    put("weights_x", a.weights_x.map(|p| p.display().to_string()));
    put("weights_z", a.weights_z.map(|p| p.display().to_string()));
    put("lut", a.lut.map(|p| p.display().to_string()));
    let cfg = RunConfig::load(a.config.as_deref(), std::env::vars(), &flags)?;
    let code = RscCode::new(cfg.distance)?;
    let decoder = build_decoder(
        cfg.decoder,
        &code,
        cfg.rounds,
        (cfg.weights_x.as_deref(), cfg.weights_z.as_deref()),
        cfg.lut.as_deref(),
    )?;
    let run = estimate_ler(
        &code,
        &cfg.params()?,
        cfg.rounds,
        decoder.as_ref(),
        cfg.trajectories,
        cfg.max_cycles,
        cfg.seed,
    )?;
    match &cfg.output {
        Some(p) => {
            let mut w = create(p)?;
            write_summary_csv(&mut w, std::slice::from_ref(&run.result))?;
            w.flush()?;
        }
        None => write_summary_csv(&mut io::stdout().lock(), std::slice::from_ref(&run.result))?,
    }
    if let Some(p) = &cfg.raw_output {
        let mut w = create(p)?;
        write_raw_csv(&mut w, &run.runs)?;
        w.flush()?;
    }
    let r = &run.result;
    eprintln!(
        "{}: mean cycles to failure {:.2}, LER {:.3e} [{:.3e}, {:.3e}]{}",
        r.decoder,
        r.mean_tau,
        r.ler,
        r.ci.0,
        r.ci.1,
        if r.censored > 0 { " (upper bound: censored trajectories)" } else { "" }
    );
    Ok(())
}

fn hamming(a: HammingArgs) -> Result<()> {
    let code = a.noise.code()?;
    let stats = hamming_stats(&code, &a.noise.params()?, a.noise.rounds, a.samples, a.noise.seed)?;
    match &a.output {
        Some(p) => {
            let mut w = create(p)?;
            write_hamming_csv(&mut w, &stats)?;
            w.flush()?;
        }
        None => write_hamming_csv(&mut io::stdout().lock(), &stats)?,
    }
    for (name, h) in [
        ("raw total", &stats.raw_total),
        ("detection total", &stats.detection_total),
        ("detection X", &stats.detection[0]),
        ("detection Z", &stats.detection[1]),
    ] {
        eprintln!(
            "{name}: mean {:.3}, first weight below 1e-4: {}",
            h.mean(),
            h.first_below(1e-4)
        );
    }
    Ok(())
}

fn npe_config(path: Option<&Path>) -> Result<NpeConfig> {
    let mut c = NpeConfig::default();
    if let Some(p) = path {
        c.apply_text(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?;
    }
    Ok(c)
}

fn spec_from(a: &SpecArgs) -> Result<NetworkSpec> {
    match &a.weights {
        Some(p) => Ok(WeightFile::load(p)?.spec().clone()),
        None => {
            let t = check_types(&a.check_type)?;
            if t.len() != 1 {
                bail!("pick one check type");
            }
            Ok(default_spec(a.distance, a.rounds, t[0])?)
        }
    }
}

fn npe_compile(a: NpeCompileArgs) -> Result<()> {
    let spec = spec_from(&a.spec)?;
    let config = npe_config(a.spec.config.as_deref())?;
    let prog = compile(&spec, &config)?;
    println!(
        "{} instruction words, {} compute issues, {} cycles",
        prog.instructions.len(),
        prog.issues().len(),
        prog.cycles
    );
    for line in latency_report(prog.cycles, config.clock_hz) {
        println!("{line}");
    }
    if let Some(period) = a.sm_period {
        let s = pipeline_latency(&prog, period, spec.rounds)?;
        println!("sliding-window latency after the last round: {:.1} ns", s * 1e9);
    }
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        prog.write_to(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn npe_sim(a: NpeSimArgs) -> Result<()> {
    let qnet: QuantizedNetwork = match WeightFile::load(&a.weights)? {
        WeightFile::Quantized(q) => q,
        WeightFile::Float(..) => bail!("the engine runs quantized weights"),
    };
    let config = npe_config(a.config.as_deref())?;
    let prog = match &a.program {
        Some(p) => NpeProgram::read_from(open(p)?, &qnet.spec)?,
        None => compile(&qnet.spec, &config)?,
    };
    let spec = &qnet.spec;
    let inputs: Vec<SyndromeArray> = match &a.data {
        Some(p) => read_dataset(&mut open(p)?)?
            .1
            .into_iter()
            .take(a.inputs)
            .map(|s| s.syndromes.get(spec.check_type).clone())
            .collect(),
        None => {
            let mut rng = stream_rng(a.seed, 0);
            let checks = spec.num_checks();
            (0..a.inputs)
                .map(|_| {
                    let bits = (0..spec.rounds * checks).map(|_| rng.gen_bool(0.1) as u8).collect();
                    SyndromeArray::from_bits(spec.rounds, checks, bits)
                })
                .collect::<rscw::Result<_>>()?
        }
    };
    let sim = Simulator::new(&prog, &qnet)?;
    let mut cycles = 0;
    for (i, s) in inputs.iter().enumerate() {
        let out = sim.run(s, i == 0 && a.trace.is_some())?;
        if out.outputs != qnet.forward(s)? {
            bail!("engine output differs from integer inference on input {i}");
        }
        if i == 0 {
            if let Some(p) = &a.trace {
                let mut w = create(p)?;
                write_trace_csv(&mut w, &out.trace)?;
                w.flush()?;
            }
        }
        let logits: Vec<String> = out.outputs.heads.iter().map(|h| format!("{h:?}")).collect();
        println!("input {i}: logits {}", logits.join(" "));
        cycles = out.cycles;
    }
    println!("{cycles} compute cycles");
    if a.report {
        for line in latency_report(cycles, prog.config().clock_hz) {
            println!("{line}");
        }
    }
    Ok(())
}

fn allocate_cmd(a: AllocateArgs) -> Result<()> {
    let (names, work, alpha) = if a.work.is_empty() {
        let (Some(l), Some(t)) = (a.distance, a.rounds) else {
            bail!("give --work or both --L and --T");
        };
        let groups = layer_groups(&default_spec(l, t, CheckType::Z)?);
        (
            groups.iter().map(|g| g.0.clone()).collect::<Vec<_>>(),
            groups.iter().map(|g| g.1).collect::<Vec<_>>(),
            groups.iter().map(|g| g.2).collect::<Vec<_>>(),
        )
    } else {
        let alpha = if a.alpha.is_empty() { vec![1; a.work.len()] } else { a.alpha.clone() };
        ((0..a.work.len()).map(|i| format!("layer{i}")).collect(), a.work.clone(), alpha)
    };
    let r = allocate(&work, &alpha, a.units)?;
    println!("layer,work,multiplicity,units,continuous");
    for i in 0..work.len() {
        println!("{},{},{},{},{}", names[i], work[i], alpha[i], r.units[i], r.continuous[i]);
    }
    println!("latency {} cycles", r.latency);
    Ok(())
}

fn export_lut(a: LutArgs) -> Result<()> {
    let code = a.noise.code()?;
    let preset: Preset = a.noise.preset.parse()?;
    let lut = LutL3Decoder::generate(&code, a.noise.params()?, preset, a.noise.rounds, a.samples, a.noise.seed)?;
    let mut w = create(&a.out)?;
    lut.write_to(&mut w)?;
    w.flush()?;
    println!(
        "{} X keys and {} Z keys from {} samples",
        lut.entry_count(CheckType::X),
        lut.entry_count(CheckType::Z),
        a.samples
    );
    Ok(())
}
